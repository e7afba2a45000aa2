"""Moment function sequences from varieties with a one-dimensional sine space.

Given a degree-ordered basis ``phi_0 = m, phi_1 = s, ..., phi_n`` of a
variety, the translates satisfy

    phi_{n+1-k}(x*y) = sum_i c_{k,i}(y) phi_{n+1-i}(x)

with an upper triangular matrix ``C(y)``, diagonal ``m(y)`` and
superdiagonal ``c_{i,i+1} = alpha_i s``.  When every ``alpha_i`` is nonzero
the first row, rescaled as

    f_k = k! / (alpha_1 ... alpha_k) * c_{1,k+1},

is a moment function sequence generated by ``m``.

That last step relies on the shift identity
``c_{j+1,k+1} / alpha_k = c_{j,k} / alpha_j``, which holds when the basis is
itself a moment sequence but not for a generic degree-ordered basis once
``k >= 3``.  The rescaled entry always has the right top-degree part, so the
lower-degree part is then fixed by a least squares solve of the order-``k``
moment equation over the already constructed ``f_0, ..., f_{k-1}`` (the
``s`` component is left untouched).  For bases where the identity holds the
correction vanishes to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .errors import (
    BasisNotDegreeOrderedError,
    DimensionAmbiguousError,
    HypothesisViolatedError,
    IndependenceError,
    NonExponentialError,
    NotAVarietyError,
    NotInSpanError,
    OrderLimitError,
    SineSpaceDimensionError,
    WindowError,
)
from .hypergroup import ConvolutionTable, FunctionTable
from .polynomial import MomentSequence
from .spaces import (
    Residual,
    TranslationMatrix,
    Variety,
    compute_degree,
    fit_in_span,
    translation_matrix,
    verify_exponential,
    verify_moment_sequence,
)

__all__ = [
    "ExtractionResult",
    "check_sine_space_dimension",
    "designated_sine",
    "extract_moment_sequence",
    "order_basis_by_degree",
]

MAX_ORDER = 20
NULL_RTOL = 1e-8
# singular values in (NULL_RTOL, GAP_RTOL] relative to the largest are neither
# clearly zero nor clearly nonzero
GAP_RTOL = 1e-6


def order_basis_by_degree(
    table: ConvolutionTable,
    basis,
    m: FunctionTable,
    max_deg: int = 8,
    ys: tuple[int, ...] = (1, 2),
    tol: float = 1e-8,
    exp_tol: float = 1e-9,
) -> Variety:
    """Sort a basis by degree with respect to ``m``, exponential first.

    If no basis element is a multiple of ``m`` but ``m`` lies in the span, the
    lowest-degree element contributing to ``m`` is replaced by ``m``.
    """
    basis = list(basis)
    n = min(min(f.n_max for f in basis), m.n_max) + 1
    rows = np.array([f.values[:n] for f in basis])
    mv = m.values[:n]
    coef, rel = fit_in_span(rows, mv[None, :])
    if rel[0] > tol:
        raise NotInSpanError(f"exponential is not in the span of the basis (defect {rel[0]:.3e})")
    if not verify_exponential(table, m, exp_tol).passed:
        raise NonExponentialError("the given m does not satisfy the exponential equation")
    degrees = [compute_degree(table, f, m, max_deg, ys, tol) for f in basis]
    if 0 not in degrees:
        active = [j for j in range(len(basis)) if abs(coef[0, j]) * np.max(np.abs(rows[j])) > tol * np.max(np.abs(mv))]
        j = min(active, key=lambda i: (degrees[i], i))
        basis[j] = FunctionTable(mv)
        degrees[j] = 0
    order = sorted(range(len(basis)), key=lambda i: degrees[i])
    ordered = [basis[i] for i in order]
    degs = [degrees[i] for i in order]
    sine_index = degs.index(1) if 1 in degs else None
    return Variety(tuple(ordered), tuple(degs), exponential_index=0, sine_index=sine_index)


def _sine_constraints(table: ConvolutionTable, variety: Variety) -> np.ndarray:
    b = variety.matrix()
    m = variety.exponential.values[: b.shape[1]]
    xs, ys, w = table.pair_operator(b.shape[1])
    a = (w @ b.T) - b[:, xs].T * m[ys, None] - m[xs, None] * b[:, ys].T
    terms = np.max(np.abs(w @ b.T), axis=0) + 2 * np.max(np.abs(b), axis=1) * np.max(np.abs(m))
    return a / np.where(terms > 0, terms, 1.0)[None, :], terms


def _sine_null_space(table, variety, null_rtol=NULL_RTOL, gap_rtol=GAP_RTOL):
    a, terms = _sine_constraints(table, variety)
    if a.shape[0] < variety.dim:
        raise WindowError("too few pairs to determine the sine space", a.shape[0])
    _, sv, vh = np.linalg.svd(a, full_matrices=True)
    spectrum = sv / sv[0] if sv[0] > 0 else np.zeros_like(sv)
    spectrum = np.concatenate([spectrum, np.zeros(variety.dim - spectrum.size)])
    ambiguous = (spectrum > null_rtol) & (spectrum <= gap_rtol)
    if ambiguous.any():
        raise DimensionAmbiguousError(
            f"no clear singular value gap in the sine constraints: {spectrum.tolist()}",
            None,
            spectrum.tolist(),
        )
    null = spectrum <= null_rtol
    vectors = vh[null].conj() / np.where(terms > 0, terms, 1.0)[None, :]
    return int(null.sum()), vectors, spectrum


def check_sine_space_dimension(table: ConvolutionTable, variety: Variety, tol: float = NULL_RTOL) -> int:
    """Dimension of the space of ``m``-sine functions inside the span of the basis."""
    return _sine_null_space(table, variety, null_rtol=tol)[0]


def designated_sine(table: ConvolutionTable, variety: Variety) -> FunctionTable:
    """The sine function of a variety whose sine space is one dimensional,
    scaled so that its first nonzero value equals 1."""
    dim, vectors, spectrum = _sine_null_space(table, variety)
    if dim != 1:
        raise SineSpaceDimensionError(
            f"sine space has dimension {dim}, expected 1", dim, spectrum.tolist()
        )
    s = vectors[0] @ variety.matrix()
    big = np.nonzero(np.abs(s) > 1e-8 * np.max(np.abs(s)))[0]
    return FunctionTable(s / s[big[0]])


@dataclass(frozen=True, eq=False)
class ExtractionResult:
    alphas: tuple[complex, ...]
    moments: MomentSequence
    triangularity_defect: float
    moment_residual: Residual
    sine: FunctionTable | None = None
    normalization_defect: float = 0.0
    translation: TranslationMatrix | None = None
    sine_space_dimension: int = 0
    corrections: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "order": self.moments.order,
            "alphas": [[a.real, a.imag] for a in self.alphas],
            "triangularity_defect": self.triangularity_defect,
            "normalization_defect": self.normalization_defect,
            "moment_residual": self.moment_residual.to_dict(),
            "sine_space_dimension": self.sine_space_dimension,
            "corrections": list(self.corrections),
        }


def _extend(rows: np.ndarray, values: np.ndarray, tol: float) -> np.ndarray:
    """Express ``values`` (known on a prefix) in the basis and evaluate on the full window."""
    npts = values.size
    if npts < rows.shape[0] + 1:
        raise WindowError(
            f"{npts} translation slices cannot determine {rows.shape[0]} coefficients", npts
        )
    k, rel = fit_in_span(rows[:, :npts], values[None, :])
    if rel[0] > tol:
        raise NotAVarietyError(f"matrix entry is not in the variety (defect {rel[0]:.3e})")
    return (k @ rows)[0]


def _moment_defect_operator(table, length):
    xs, ys, w = table.pair_operator(length)

    def defect(h, m):
        return w @ h - h[xs] * m[ys] - m[xs] * h[ys]

    return xs, ys, defect


def _align(table, functions: list[np.ndarray], raw: np.ndarray, tol: float):
    """Add lower-degree terms to ``raw`` so that the order-k moment equation holds."""
    k = len(functions)
    m = functions[0]
    xs, ys, defect = _moment_defect_operator(table, m.size)
    cross = sum(comb(k, j) * functions[j][xs] * functions[k - j][ys] for j in range(1, k))
    target = cross - defect(raw, m)
    cols = [j for j in range(k) if j != 1]
    a = np.array([defect(functions[j], m) for j in cols]).T
    norms = np.max(np.abs(a), axis=0)
    norms = np.where(norms > 0, norms, 1.0)
    d, *_ = np.linalg.lstsq(a / norms, target, rcond=None)
    d = d / norms
    shift = sum(dj * functions[j] for dj, j in zip(d, cols))
    size = float(np.max(np.abs(shift))) / float(np.max(np.abs(raw)))
    return raw + shift, size


def extract_moment_sequence(
    table: ConvolutionTable,
    variety: Variety,
    tol: float = 1e-8,
    triangular_tol: float = 1e-9,
    alpha_threshold: float = 1e-7,
    exp_tol: float = 1e-9,
    min_points_factor: int = 3,
    align: bool = True,
) -> ExtractionResult:
    """Build a moment function sequence spanning ``variety``.

    The basis is first put in canonical form ``m, s, phi_2, ..., phi_n`` with
    ``m`` normalized by ``m(0) = 1`` and ``s`` the designated sine.  The
    entries of the first row of ``C`` are sampled on the slices that the
    window allows and extended to the full window through the basis.
    With ``align=False`` the rescaled entries are returned unchanged.
    """
    dim = variety.dim
    if dim - 1 > MAX_ORDER:
        raise OrderLimitError(f"order {dim - 1} exceeds the supported maximum {MAX_ORDER}")
    variety.check_independent()
    m = variety.exponential
    if not verify_exponential(table, m, exp_tol).passed:
        raise NonExponentialError("basis element at exponential_index is not an exponential")
    if dim == 1:
        seq = MomentSequence(0, (m,))
        res = verify_moment_sequence(table, seq, tol)
        return ExtractionResult((), seq, 0.0, res, None, 0.0, None, 0)

    sine_dim, _, spectrum = _sine_null_space(table, variety)
    if sine_dim != 1:
        raise SineSpaceDimensionError(
            f"sine space of the variety has dimension {sine_dim}; the extraction needs exactly 1",
            sine_dim,
            spectrum.tolist(),
        )
    if variety.degrees[0] != 0 or variety.degrees[1] != 1:
        raise BasisNotDegreeOrderedError(
            f"degrees {variety.degrees} do not start with an exponential and a sine"
        )
    s = designated_sine(table, variety)
    canonical = Variety((m, s) + variety.basis[2:], variety.degrees, 0, 1)
    try:
        canonical.check_independent()
    except IndependenceError as exc:
        raise BasisNotDegreeOrderedError("the first two basis functions do not span m and s") from exc

    tm = translation_matrix(table, canonical, tol=tol, min_points_factor=min_points_factor)
    tri = tm.triangularity_defect(m)
    if tri > triangular_tol:
        raise BasisNotDegreeOrderedError(
            f"translation matrix is not upper triangular with diagonal m (defect {tri:.3e})"
        )

    rows = canonical.matrix()
    n = dim - 1
    ys = np.arange(tm.window + 1)
    sv = s.values[ys]
    s_scale = float(np.max(np.abs(s.values)))
    usable = np.abs(sv) > 1e-12 * s_scale
    if usable.sum() < 1:
        raise WindowError("the designated sine vanishes on the sampled slices", int(ys.size))
    alphas = []
    for i in range(1, n + 1):
        c = tm.slices[:, i - 1, i]
        alpha = np.vdot(sv[usable], c[usable]) / np.vdot(sv[usable], sv[usable])
        defect = np.max(np.abs(c - alpha * sv))
        ref = max(float(np.max(np.abs(c))), abs(alpha) * float(np.max(np.abs(sv))))
        if ref > 0 and defect > tol * ref:
            raise SineSpaceDimensionError(
                f"c_{{{i},{i + 1}}} is not proportional to the sine (defect {defect / ref:.3e})"
            )
        # size of the term alpha s(y) psi_{i+1}(x) against psi_i(x*y)
        psi_i, psi_next = rows[n + 1 - i], rows[n - i]
        weight = abs(alpha) * s_scale * np.max(np.abs(psi_next)) / np.max(np.abs(psi_i))
        if weight <= alpha_threshold:
            raise HypothesisViolatedError(
                f"alpha_{i},{i + 1} = {alpha:.3e} is numerically zero"
            )
        alphas.append(complex(alpha))

    values = [m.values[: rows.shape[1]]]
    corrections = [0.0]
    prod = 1.0 + 0j
    for k in range(1, n + 1):
        prod *= alphas[k - 1]
        entry = factorial(k) / prod * _extend(rows, tm.slices[:, 0, k], tol)
        size = 0.0
        if k >= 2 and align:
            entry, size = _align(table, values, entry, tol)
        values.append(entry)
        corrections.append(size)
    seq = MomentSequence(n, tuple(FunctionTable(v) for v in values))
    return ExtractionResult(
        alphas=tuple(alphas),
        moments=seq,
        triangularity_defect=tri,
        moment_residual=verify_moment_sequence(table, seq, tol),
        sine=s,
        normalization_defect=abs(alphas[-1] - 1.0),
        translation=tm,
        sine_space_dimension=1,
        corrections=tuple(corrections),
    )
