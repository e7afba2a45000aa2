"""Moment function sequences on discrete commutative hypergroups.

The package builds polynomial hypergroups from three-term recurrences,
verifies exponential, sine and moment function identities, turns a
finite dimensional variety with a one-dimensional sine space into a moment
function sequence, and solves the Sturm-Liouville equations characterizing
exponentials and sine functions on the half line.
"""

from .errors import *  # noqa: F401,F403
from .extraction import (
    ExtractionResult,
    check_sine_space_dimension,
    designated_sine,
    extract_moment_sequence,
    order_basis_by_degree,
)
from .hypergroup import (
    AxiomReport,
    ConvolutionTable,
    FunctionTable,
    check_axioms,
    convolve,
    product_table,
    translate,
)
from .polynomial import (
    MomentSequence,
    ThreeTermRecurrence,
    build_hypergroup,
    demo_pointwise_density,
    derivative_jet,
    derivative_moment_sequence,
    exponential_at,
    preset,
    random_recurrence,
    reconstruct,
    sine_at,
)
from .spaces import (
    Residual,
    TranslationMatrix,
    Variety,
    compute_degree,
    compute_translation_matrix,
    translation_matrix,
    verify_C_multiplicativity,
    verify_exponential,
    verify_moment_sequence,
    verify_sine,
)
from .sturm_liouville import (
    SampledFunction,
    SLCoefficient,
    bessel_kingman,
    solve_exponential,
    solve_sine,
    uniform_grid,
    verify_sine_space_one_dim,
)

__version__ = "0.1.0"
