"""Polynomial hypergroups on the nonnegative integers.

A polynomial hypergroup comes from a family ``P_0 = 1, P_1, P_2, ...`` with

    P_1 P_n = a_n P_{n+1} + b_n P_n + c_n P_{n-1},   a_n + b_n + c_n = 1,

whose linearization coefficients ``P_x P_y = sum_k g(x, y, k) P_k`` are
nonnegative.  The variable is normalized so that ``P_1(lam) = lam``, hence
``a_0 = 1`` and ``b_0 = 0``.  Exponentials are ``n -> P_n(lam)``, sine
functions are multiples of ``n -> P_n'(lam)`` and the derivatives
``n -> P_n^(k)(lam)`` form a moment function sequence (differentiate the
linearization identity, which does not depend on ``lam``, with Leibniz' rule).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import AdmissibilityError, ConditioningError, ConfigError, WindowError
from .hypergroup import ConvolutionTable, FunctionTable

__all__ = [
    "MomentSequence",
    "ThreeTermRecurrence",
    "build_hypergroup",
    "demo_pointwise_density",
    "derivative_jet",
    "derivative_moment_sequence",
    "exponential_at",
    "preset",
    "random_recurrence",
    "reconstruct",
    "sine_at",
]

PRESETS = ("chebyshev",)

NEGATIVE_WEIGHT_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class ThreeTermRecurrence:
    """Coefficients ``a_n, b_n, c_n`` for ``n = 0, ..., len - 1``."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        arrays = [np.array(v, dtype=float).reshape(-1) for v in (self.a, self.b, self.c)]
        if len({v.size for v in arrays}) != 1 or arrays[0].size < 2:
            raise ConfigError("a, b, c must have equal length >= 2")
        a, b, c = arrays
        if a[0] != 1.0 or b[0] != 0.0:
            raise AdmissibilityError("P_1 must be the variable itself: a_0 = 1, b_0 = 0", (0,))
        for n in range(1, a.size):
            if not (a[n] > 0 and b[n] >= 0 and c[n] >= 0):
                raise AdmissibilityError(f"coefficient signs violated at n={n}", (n,))
            if abs(a[n] + b[n] + c[n] - 1.0) > 1e-12:
                raise AdmissibilityError(f"a_n + b_n + c_n != 1 at n={n}", (n,))
        for name, v in zip("abc", arrays):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def __len__(self) -> int:
        return self.a.size

    def require(self, index: int) -> None:
        if index >= len(self):
            raise WindowError(
                f"recurrence '{self.name}' is defined up to index {len(self) - 1}, need {index}",
                len(self),
            )

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "c": self.c.tolist()}


def preset(name: str, n_terms: int = 512) -> ThreeTermRecurrence:
    """Named recurrence.  Only ``chebyshev`` (first kind) is available."""
    if name != "chebyshev":
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    a = np.full(n_terms, 0.5)
    c = np.full(n_terms, 0.5)
    b = np.zeros(n_terms)
    a[0], c[0] = 1.0, 0.0
    return ThreeTermRecurrence(a, b, c, name="chebyshev")


def random_recurrence(rng: np.random.Generator, n_terms: int = 64, attempts: int = 100) -> ThreeTermRecurrence:
    """Random recurrence whose linearization is checked to be nonnegative.

    ``c_n`` and ``b_n`` are drawn as nondecreasing sequences with
    ``c_n <= a_n``, which keeps the table nonnegative in practice; the
    result is verified on the window ``(n_terms - 1) // 2`` and redrawn if not.
    """
    for _ in range(attempts):
        c = np.sort(rng.uniform(0.1, 0.45, n_terms))
        b = np.sort(rng.uniform(0.0, 0.1, n_terms))
        a = 1.0 - b - c
        a[0], b[0], c[0] = 1.0, 0.0, 0.0
        rec = ThreeTermRecurrence(a, b, c, name="random")
        try:
            build_hypergroup(rec, (n_terms - 1) // 2)
        except AdmissibilityError:
            continue
        return rec
    raise RuntimeError("no admissible recurrence found")


def build_hypergroup(rec: ThreeTermRecurrence, n_max: int) -> ConvolutionTable:
    """Linearization table of the family on the window ``0..n_max``.

    Rows are generated by induction on ``x`` from

        P_{x+1} P_y = (P_1 P_x P_y - b_x P_x P_y - c_x P_{x-1} P_y) / a_x,

    expanding ``P_1 P_k`` with the recurrence.  Weights below
    ``-1e-13`` raise :class:`AdmissibilityError`; smaller negatives are
    clamped to zero.
    """
    rec.require(2 * n_max)
    size = 2 * n_max + 2
    a, b, c = rec.a, rec.b, rec.c
    weights: dict[tuple[int, int], dict[int, float]] = {}

    def times_p1(v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        top = size - 1
        out[1:] += a[:top] * v[:top]
        out[:top] += b[:top] * v[:top]
        out[: top - 1] += c[1:top] * v[1:top]
        return out

    for y in range(n_max + 1):
        prev = np.zeros(size)
        cur = np.zeros(size)
        cur[y] = 1.0
        for x in range(y + 1):
            bad = np.nonzero(cur < -NEGATIVE_WEIGHT_TOL)[0]
            if bad.size:
                k = int(bad[0])
                raise AdmissibilityError(
                    f"negative linearization weight g({x},{y},{k}) = {cur[k]:.3e}", (x, y, k)
                )
            cur = np.where(cur < 0, 0.0, cur)
            row = {int(k): float(cur[k]) for k in np.nonzero(cur)[0]}
            weights[(x, y)] = row
            weights[(y, x)] = row
            nxt = (times_p1(cur) - b[x] * cur - c[x] * prev) / a[x]
            prev, cur = cur, nxt
    return ConvolutionTable(n_max, weights)


def derivative_jet(rec: ThreeTermRecurrence, lam: complex, order: int, n_max: int) -> np.ndarray:
    """Array ``J[k, n] = P_n^(k)(lam)`` for ``k <= order``, ``n <= n_max``.

    Uses the differentiated recurrence

        a_n P_{n+1}^(k) = (lam - b_n) P_n^(k) + k P_n^(k-1) - c_n P_{n-1}^(k).
    """
    if order < 0:
        raise ConfigError("order must be nonnegative")
    rec.require(max(n_max - 1, 0))
    jet = np.zeros((order + 1, n_max + 1), dtype=complex)
    jet[0, 0] = 1.0
    lam = complex(lam)
    for n in range(n_max):
        for k in range(order + 1):
            v = (lam - rec.b[n]) * jet[k, n]
            if k:
                v += k * jet[k - 1, n]
            if n:
                v -= rec.c[n] * jet[k, n - 1]
            jet[k, n + 1] = v / rec.a[n]
    return jet


def exponential_at(rec: ThreeTermRecurrence, lam: complex, n_max: int) -> FunctionTable:
    """The exponential ``n -> P_n(lam)``."""
    return FunctionTable(derivative_jet(rec, lam, 0, n_max)[0])


def sine_at(rec: ThreeTermRecurrence, lam: complex, c: complex, n_max: int) -> FunctionTable:
    """The sine function ``n -> c P_n'(lam)`` belonging to ``exponential_at(rec, lam)``."""
    return FunctionTable(complex(c) * derivative_jet(rec, lam, 1, n_max)[1])


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Functions ``f_0, ..., f_N`` claimed to satisfy the moment equation."""

    order: int
    functions: tuple[FunctionTable, ...]

    def __post_init__(self):
        fs = tuple(self.functions)
        if self.order < 0 or len(fs) != self.order + 1:
            raise ValueError(f"an order-{self.order} sequence needs {self.order + 1} functions")
        if abs(fs[0][0] - 1.0) > 1e-9:
            raise ValueError("f_0(0) must equal 1")
        object.__setattr__(self, "functions", fs)

    def __getitem__(self, k: int) -> FunctionTable:
        return self.functions[k]

    def __len__(self) -> int:
        return len(self.functions)

    @property
    def n_max(self) -> int:
        return min(f.n_max for f in self.functions)

    def matrix(self) -> np.ndarray:
        n = self.n_max + 1
        return np.array([f.values[:n] for f in self.functions])


def derivative_moment_sequence(
    rec: ThreeTermRecurrence, lam: complex, order: int, n_max: int
) -> MomentSequence:
    jet = derivative_jet(rec, lam, order, n_max)
    return MomentSequence(order, tuple(FunctionTable(row) for row in jet))


def demo_pointwise_density(
    rec: ThreeTermRecurrence, lam: complex, data: FunctionTable, max_condition: float = 1e12
) -> np.ndarray:
    """Coefficients ``gamma`` with ``sum_k gamma_k P_n^(k)(lam) = data(n)`` for ``n <= N``.

    The matrix ``M[n, k] = P_n^(k)(lam)`` is lower triangular with diagonal
    ``n! * lead(P_n)``, so any finite sequence is an exact combination of the
    derivative moment functions on the window.
    """
    order = data.n_max
    m = derivative_jet(rec, lam, order, order).T
    cond = float(np.linalg.cond(m))
    if not np.isfinite(cond) or cond > max_condition:
        raise ConditioningError(f"moment matrix condition number {cond:.3e} too large", cond)
    return solve_triangular(m, data.values, lower=True)


def reconstruct(rec: ThreeTermRecurrence, lam: complex, gamma: np.ndarray, n_max: int) -> FunctionTable:
    """Evaluate ``n -> sum_k gamma_k P_n^(k)(lam)``."""
    gamma = np.asarray(gamma, dtype=complex)
    jet = derivative_jet(rec, lam, gamma.size - 1, n_max)
    return FunctionTable(gamma @ jet)
