"""Functional equation verifiers, degrees and translation matrices.

All verifiers sweep every pair ``(x, y)`` for which the table and the
function windows determine both sides of the equation, and report the
largest defect together with a relative version of it.  The relative
residual divides by the largest magnitude of the terms entering the
equation, so exponentials that grow geometrically are judged fairly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import (
    BasisNotDegreeOrderedError,
    IndependenceError,
    IndeterminateDegreeError,
    NonExponentialError,
    NotAVarietyError,
    WindowError,
)
from .hypergroup import ConvolutionTable, FunctionTable
from .polynomial import MomentSequence

__all__ = [
    "Residual",
    "TranslationMatrix",
    "Variety",
    "compute_degree",
    "compute_translation_matrix",
    "translation_matrix",
    "verify_C_multiplicativity",
    "verify_exponential",
    "verify_moment_sequence",
    "verify_sine",
]

INDEPENDENCE_RTOL = 1e-10


@dataclass(frozen=True)
class Residual:
    max_abs: float
    max_rel: float
    argmax: tuple[int, ...] | None
    scale: float = 0.0
    tol: float | None = None

    @property
    def passed(self) -> bool:
        return self.tol is None or self.max_rel <= self.tol

    def to_dict(self) -> dict:
        return {
            "max_abs": self.max_abs,
            "max_rel": self.max_rel,
            "argmax": list(self.argmax) if self.argmax is not None else None,
        }


def _residual(defect: np.ndarray, terms: np.ndarray, where, tol) -> Residual:
    if defect.size == 0:
        return Residual(0.0, 0.0, None, 0.0, tol)
    i = int(np.argmax(defect))
    scale = float(np.max(terms))
    max_abs = float(defect[i])
    rel = max_abs / scale if scale > 0 else 0.0
    return Residual(max_abs, rel, tuple(int(w) for w in where(i)), scale, tol)


def verify_exponential(table: ConvolutionTable, f: FunctionTable, tol: float = 1e-9) -> Residual:
    """Largest defect of ``f(x*y) = f(x) f(y)``."""
    if not np.any(f.values):
        raise NonExponentialError("the zero function is not an exponential")
    xs, ys, w = table.pair_operator(len(f))
    v = f.values
    lhs = w @ v
    rhs = v[xs] * v[ys]
    terms = np.maximum(np.abs(lhs), np.abs(rhs))
    return _residual(np.abs(lhs - rhs), terms, lambda i: (xs[i], ys[i]), tol)


def verify_sine(
    table: ConvolutionTable, s: FunctionTable, m: FunctionTable, tol: float = 1e-9
) -> Residual:
    """Largest defect of ``s(x*y) = s(x) m(y) + m(x) s(y)``."""
    n = min(len(s), len(m))
    xs, ys, w = table.pair_operator(n)
    sv, mv = s.values[:n], m.values[:n]
    lhs = w @ sv
    a, b = sv[xs] * mv[ys], mv[xs] * sv[ys]
    terms = np.maximum(np.abs(lhs), np.abs(a) + np.abs(b))
    return _residual(np.abs(lhs - a - b), terms, lambda i: (xs[i], ys[i]), tol)


def verify_moment_sequence(
    table: ConvolutionTable, seq: MomentSequence, tol: float = 1e-8
) -> Residual:
    """Largest defect of ``f_k(x*y) = sum_j C(k, j) f_j(x) f_{k-j}(y)`` over ``k <= N``.

    ``max_rel`` is the worst per-order relative defect; ``argmax`` is
    ``(k, x, y)``.
    """
    f = seq.matrix()
    xs, ys, w = table.pair_operator(f.shape[1])
    per_order = []
    for k in range(seq.order + 1):
        lhs = w @ f[k]
        parts = np.array([comb(k, j) * f[j, xs] * f[k - j, ys] for j in range(k + 1)])
        terms = np.maximum(np.abs(lhs), np.abs(parts).sum(axis=0))
        per_order.append(
            _residual(np.abs(lhs - parts.sum(axis=0)), terms, lambda i: (k, xs[i], ys[i]), tol)
        )
    worst = max(per_order, key=lambda r: r.max_rel)
    return Residual(
        max(r.max_abs for r in per_order), worst.max_rel, worst.argmax, worst.scale, tol
    )


# -- spans -----------------------------------------------------------------


def _span_rows(rows: np.ndarray, atol: float) -> np.ndarray:
    """Rows spanning the same space, dropping directions with magnitude <= atol."""
    if rows.size == 0:
        return rows
    u, sv, vh = np.linalg.svd(rows, full_matrices=False)
    keep = sv > atol * np.sqrt(rows.shape[1])
    return sv[keep, None] * vh[keep]


def _outside(rows: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Component of each row orthogonal to ``m``."""
    mm = np.vdot(m, m).real
    coef = rows @ m.conj() / mm
    return rows - coef[:, None] * m[None, :]


def compute_degree(
    table: ConvolutionTable,
    phi: FunctionTable,
    m: FunctionTable,
    max_deg: int = 8,
    ys: tuple[int, ...] = (1, 2),
    tol: float = 1e-8,
) -> int:
    """Degree of the exponential monomial ``phi`` with respect to ``m``.

    Repeatedly replaces the current span ``S`` by the span of
    ``x -> h(x*y) - m(y) h(x)`` over ``h`` in ``S`` and ``y`` in ``ys`` and
    returns the number of reductions after which ``S`` lies in the span of
    ``m``.  Each reduction shortens the usable window by ``max(ys)``.
    """
    n = min(len(phi), len(m))
    rows = phi.values[None, :n].copy()
    scale = float(np.max(np.abs(rows)))
    if scale == 0:
        raise ValueError("phi vanishes on the window")
    for d in range(max_deg + 1):
        mv = m.values[:n]
        if np.max(np.abs(_outside(rows, mv))) <= tol * scale:
            return d
        images = []
        terms = 0.0
        length = n
        for y in ys:
            t = table.translate_operator(n, y)
            if t.shape[0] < 2:
                raise IndeterminateDegreeError(f"window exhausted after {d} reductions")
            shifted = rows @ t.T
            base = m.values[y] * rows[:, : t.shape[0]]
            images.append(shifted - base)
            terms = max(terms, float(np.max(np.abs(shifted))), float(np.max(np.abs(base))))
            length = min(length, t.shape[0])
        n = length
        rows = _span_rows(np.vstack([im[:, :n] for im in images]), tol * terms)
        if rows.shape[0] == 0:
            raise IndeterminateDegreeError(
                "reduction vanished outside the span of m: not an m-exponential monomial"
            )
        # the cancelled terms, not the surviving rows, set the noise floor
        scale = terms
    raise IndeterminateDegreeError(f"degree exceeds max_deg={max_deg}")


# -- varieties -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Variety:
    """Ordered basis of a finite dimensional variety on a window."""

    basis: tuple[FunctionTable, ...]
    degrees: tuple[int, ...]
    exponential_index: int = 0
    sine_index: int | None = None

    def __post_init__(self):
        basis = tuple(self.basis)
        degrees = tuple(int(d) for d in self.degrees)
        if not basis or len(basis) != len(degrees):
            raise ValueError("basis and degrees must be nonempty and of equal length")
        if any(d1 > d2 for d1, d2 in zip(degrees, degrees[1:])):
            raise BasisNotDegreeOrderedError(f"degrees {degrees} are not weakly increasing")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "degrees", degrees)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def n_max(self) -> int:
        return min(f.n_max for f in self.basis)

    @property
    def exponential(self) -> FunctionTable:
        e = self.basis[self.exponential_index]
        return e * (1.0 / e[0])

    def matrix(self) -> np.ndarray:
        n = self.n_max + 1
        return np.array([f.values[:n] for f in self.basis])

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.matrix())))

    def check_independent(self, rtol: float = INDEPENDENCE_RTOL) -> None:
        _check_rank(self.matrix(), rtol)


def _normalized(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.max(np.abs(rows), axis=1)
    norms = np.where(norms > 0, norms, 1.0)
    return rows / norms[:, None], norms


def _check_rank(rows: np.ndarray, rtol: float) -> None:
    sv = np.linalg.svd(_normalized(rows)[0], compute_uv=False)
    if sv.size > rows.shape[1] or sv[-1] <= rtol * sv[0]:
        raise IndependenceError(
            f"basis is linearly dependent on the window (singular values {sv.tolist()})"
        )


def fit_in_span(rows: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares coefficients ``K`` with ``targets ~ K @ rows``.

    Returns ``(K, rel)`` where ``rel[i]`` is the max fit defect of target ``i``
    divided by the larger of its magnitude and the magnitude of the terms.
    """
    rn, norms = _normalized(rows)
    coef, *_ = np.linalg.lstsq(rn.T, targets.T, rcond=None)
    k = (coef / norms[:, None]).T
    fitted = k @ rows
    defect = np.max(np.abs(targets - fitted), axis=1)
    mag = np.maximum(np.max(np.abs(targets), axis=1), np.max(np.abs(k) @ np.abs(rows), axis=1))
    rel = np.where(mag > 0, defect / np.where(mag > 0, mag, 1.0), 0.0)
    return k, rel


def _coefficients(table, variety, y, tol, min_points_factor):
    b = variety.matrix()
    length = b.shape[1]
    t = table.translate_operator(length, y)
    npts = t.shape[0]
    need = min_points_factor * variety.dim
    if npts < need:
        raise WindowError(
            f"translate by {y} leaves {npts} sample points, need {need}", npts
        )
    sample = b[:, :npts]
    _check_rank(sample, INDEPENDENCE_RTOL)
    targets = b @ t.T
    k, rel = fit_in_span(sample, targets)
    if np.max(rel) > tol:
        j = int(np.argmax(rel))
        raise NotAVarietyError(
            f"translate of basis function {j} by {y} leaves the span (relative defect {rel[j]:.3e})"
        )
    return k


def compute_translation_matrix(
    table: ConvolutionTable,
    variety: Variety,
    y: int,
    tol: float = 1e-8,
    min_points_factor: int = 3,
) -> np.ndarray:
    """The slice ``C(y)`` of the translation matrix.

    Rows and columns follow the reversed basis ``phi_n, ..., phi_0`` so that
    ``phi_{n+1-k}(x*y) = sum_i C[k, i] phi_{n+1-i}(x)`` (1-based ``k, i``).
    The coefficients are a least squares fit over ``x = 0..P`` where ``P`` is
    the largest point with ``x*y`` inside the window.
    """
    k = _coefficients(table, variety, y, tol, min_points_factor)
    return k[::-1, ::-1].copy()


@dataclass(frozen=True, eq=False)
class TranslationMatrix:
    """Slices ``C(y)`` for ``y = 0..window``; ``slices[y, i, j] = c_{i+1, j+1}(y)``.

    ``scales[i]`` is ``max |psi_{i+1}|`` for the (reversed) basis.  Defects are
    measured for the rescaled basis ``psi_i / scales[i]``, i.e. on
    ``D C(y) D^-1`` with ``D = diag(1 / scales)``; this conjugation keeps the
    diagonal, triangular shape and multiplicativity but removes the spread of
    magnitudes between low- and high-degree basis elements.
    """

    slices: np.ndarray
    scales: np.ndarray | None = None
    window: int = field(init=False)

    def __post_init__(self):
        s = np.array(self.slices, dtype=complex)
        s.setflags(write=False)
        object.__setattr__(self, "slices", s)
        object.__setattr__(self, "window", s.shape[0] - 1)
        sc = np.ones(s.shape[1]) if self.scales is None else np.array(self.scales, dtype=float)
        sc.setflags(write=False)
        object.__setattr__(self, "scales", sc)

    def normalized(self) -> np.ndarray:
        """Slices for the basis rescaled to unit maximum."""
        return self.slices * self.scales[None, None, :] / self.scales[None, :, None]

    @property
    def dim(self) -> int:
        return self.slices.shape[1]

    def entry(self, i: int, j: int) -> FunctionTable:
        """``c_{i,j}`` as a function of ``y`` (1-based indices)."""
        return FunctionTable(self.slices[:, i - 1, j - 1])

    def triangularity_defect(self, m: FunctionTable) -> float:
        """Worst below-diagonal entry or diagonal deviation from ``m(y)``,
        relative to ``max |m(y)|`` over the window."""
        d = self.dim
        mv = m.values[: self.window + 1]
        lower = np.tril(np.ones((d, d), dtype=bool), -1)
        c = self.normalized()
        below = np.abs(c[:, lower]).max(initial=0.0)
        diag = np.abs(np.diagonal(c, axis1=1, axis2=2) - mv[:, None]).max()
        return float(max(below, diag) / max(1.0, np.max(np.abs(mv))))

    def identity_defect(self) -> float:
        return float(np.max(np.abs(self.normalized()[0] - np.eye(self.dim))))


def translation_matrix(
    table: ConvolutionTable,
    variety: Variety,
    ys=None,
    tol: float = 1e-8,
    min_points_factor: int = 3,
) -> TranslationMatrix:
    """All slices ``C(0), ..., C(Y)`` with ``Y`` as large as the window allows."""
    if ys is None:
        ys = []
        for y in range(table.n_max + 1):
            if table.translate_operator(variety.n_max + 1, y).shape[0] < min_points_factor * variety.dim:
                break
            ys.append(y)
        if not ys:
            raise WindowError("window too short for any translation matrix slice", 0)
    elif list(ys) != list(range(len(ys))):
        raise ValueError("ys must be 0, 1, ..., Y")
    slices = [compute_translation_matrix(table, variety, y, tol, min_points_factor) for y in ys]
    scales = np.max(np.abs(variety.matrix()), axis=1)[::-1]
    return TranslationMatrix(np.array(slices), scales)


def verify_C_multiplicativity(
    table: ConvolutionTable,
    variety: Variety,
    tol: float = 1e-9,
    matrix: TranslationMatrix | None = None,
) -> Residual:
    """Largest entrywise defect of ``C(x*y) = C(x) C(y)``.

    ``C(x*y)`` means ``sum_k g(x, y, k) C(k)``; pairs are restricted to
    those whose support lies inside the computed slices.
    """
    tm = matrix if matrix is not None else translation_matrix(table, variety)
    c = tm.normalized()
    xs, ys, w = table.pair_operator(tm.window + 1)
    lhs = np.einsum("pk,kij->pij", w, c)
    rhs = np.einsum("pij,pjl->pil", c[xs], c[ys])
    defect = np.abs(lhs - rhs).reshape(len(xs), -1).max(axis=1, initial=0.0)
    terms = np.maximum(np.abs(lhs), np.abs(rhs)).reshape(len(xs), -1).max(axis=1, initial=0.0)
    return _residual(defect, terms, lambda i: (xs[i], ys[i]), tol)
