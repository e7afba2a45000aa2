"""Discrete commutative hypergroups on a window of the nonnegative integers.

A hypergroup structure on ``{0, 1, ...}`` is fully described by the
probability vectors ``delta_x * delta_y = sum_k g(x, y, k) delta_k``.  The
identity element is 0 and the involution is the identity map.
"""

from __future__ import annotations

import functools
from collections.abc import Iterator, Mapping
from dataclasses import dataclass

import numpy as np

from .errors import WindowError

__all__ = [
    "AxiomReport",
    "ConvolutionTable",
    "FunctionTable",
    "check_axioms",
    "convolve",
    "product_table",
    "translate",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """Complex values of a function at the points ``0, ..., n_max``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex).reshape(-1)
        if v.size < 1:
            raise ValueError("a function table needs at least one value")
        if not np.all(np.isfinite(v)):
            raise ValueError("function table contains NaN or infinite values")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_callable(cls, fn, n_max: int) -> "FunctionTable":
        return cls(np.array([fn(n) for n in range(n_max + 1)], dtype=complex))

    @property
    def n_max(self) -> int:
        return self.values.size - 1

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, n):
        return self.values[n]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def truncated(self, n_max: int) -> "FunctionTable":
        if n_max > self.n_max:
            raise WindowError(f"cannot extend a table of window {self.n_max} to {n_max}")
        return FunctionTable(self.values[: n_max + 1])

    def scale(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _other(self, other):
        if isinstance(other, FunctionTable):
            n = min(len(self), len(other))
            return self.values[:n], other.values[:n]
        return self.values, other

    def __add__(self, other):
        a, b = self._other(other)
        return FunctionTable(a + b)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._other(other)
        return FunctionTable(a - b)

    def __mul__(self, scalar):
        if isinstance(scalar, FunctionTable):
            return NotImplemented
        return FunctionTable(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return FunctionTable(-self.values)

    def __repr__(self) -> str:
        return f"FunctionTable(n_max={self.n_max})"


class ConvolutionTable:
    """Sparse table of the measures ``delta_x * delta_y`` for ``x, y <= n_max``.

    Parameters
    ----------
    n_max : int
        Window bound for the first two arguments.
    weights : mapping
        ``{(x, y): {k: g}}``.  Pairs may be missing (partial tables), in which
        case every operation treats them as unavailable.  The support of a
        stored pair may exceed ``n_max``.

    The table is not validated on construction; use :func:`check_axioms`.
    """

    def __init__(self, n_max: int, weights: Mapping[tuple[int, int], Mapping[int, float]]):
        if n_max < 0:
            raise ValueError("n_max must be nonnegative")
        self.n_max = int(n_max)
        pairs: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        for (x, y), row in weights.items():
            if not (0 <= x <= n_max and 0 <= y <= n_max):
                raise WindowError(f"pair ({x}, {y}) outside window {n_max}")
            ks = np.array(sorted(int(k) for k in row), dtype=int)
            if ks.size and ks[0] < 0:
                raise ValueError(f"negative support point in pair ({x}, {y})")
            ws = np.array([float(row[k]) for k in ks], dtype=float)
            pairs[(int(x), int(y))] = (_frozen(ks), _frozen(ws))
        self._pairs = pairs

    # -- access ---------------------------------------------------------

    def has_pair(self, x: int, y: int) -> bool:
        return (x, y) in self._pairs

    def pairs(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self._pairs))

    def support(self, x: int, y: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(ks, ws)`` for the pair, raising WindowError if absent."""
        try:
            return self._pairs[(x, y)]
        except KeyError:
            raise WindowError(f"pair ({x}, {y}) not available in the table") from None

    def entries(self) -> Iterator[tuple[int, int, int, float]]:
        for x, y in self.pairs():
            ks, ws = self._pairs[(x, y)]
            for k, g in zip(ks, ws):
                yield x, y, int(k), float(g)

    @property
    def support_bound(self) -> int:
        """Largest support point over all stored pairs."""
        return max((int(ks[-1]) for ks, _ in self._pairs.values() if ks.size), default=0)

    @functools.cached_property
    def dense(self) -> np.ndarray:
        """Dense weights ``G[x, y, k]``; missing pairs are zero rows."""
        n = self.n_max + 1
        g = np.zeros((n, n, self.support_bound + 1))
        for (x, y), (ks, ws) in self._pairs.items():
            g[x, y, ks] = ws
        return _frozen(g)

    @functools.cached_property
    def present(self) -> np.ndarray:
        n = self.n_max + 1
        p = np.zeros((n, n), dtype=bool)
        for x, y in self._pairs:
            p[x, y] = True
        return _frozen(p)

    @functools.cached_property
    def reach(self) -> np.ndarray:
        """``reach[x, y]`` is the largest support point of the pair, -1 if absent."""
        n = self.n_max + 1
        r = np.full((n, n), -1, dtype=int)
        for (x, y), (ks, _) in self._pairs.items():
            r[x, y] = int(ks[-1]) if ks.size else 0
        return _frozen(r)

    def valid_pairs(self, length: int) -> tuple[np.ndarray, np.ndarray]:
        """Pairs ``(x, y)`` for which ``f(x)``, ``f(y)`` and ``f(x*y)`` are all
        computable from a function table of the given length."""
        n = min(self.n_max + 1, length)
        ok = self.present[:n, :n] & (self.reach[:n, :n] < length)
        xs, ys = np.nonzero(ok)
        return xs, ys

    def pair_operator(self, length: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(xs, ys, W)`` with ``W @ f`` equal to ``f(x*y)`` on valid pairs."""
        xs, ys = self.valid_pairs(length)
        w = np.zeros((xs.size, length))
        bound = min(length, self.dense.shape[2])
        w[:, :bound] = self.dense[xs, ys, :bound]
        return xs, ys, w

    def translate_operator(self, length: int, y: int) -> np.ndarray:
        """Matrix ``T`` with ``(T @ f)[x] = f(x*y)`` on the largest valid prefix."""
        if not 0 <= y <= self.n_max:
            raise WindowError(f"translation point {y} outside window {self.n_max}", y)
        count = 0
        for x in range(self.n_max + 1):
            if not self.present[x, y] or self.reach[x, y] >= length:
                break
            count += 1
        t = np.zeros((count, length))
        bound = min(length, self.dense.shape[2])
        t[:, :bound] = self.dense[:count, y, :bound]
        return t

    def __repr__(self) -> str:
        return f"ConvolutionTable(n_max={self.n_max}, pairs={len(self._pairs)})"


def convolve(table: ConvolutionTable, x: int, y: int) -> dict[int, float]:
    """Return the measure ``delta_x * delta_y`` as ``{k: g(x, y, k)}``."""
    for p in (x, y):
        if not 0 <= p <= table.n_max:
            raise WindowError(f"point {p} outside window {table.n_max}", p)
    ks, ws = table.support(x, y)
    return {int(k): float(w) for k, w in zip(ks, ws)}


def translate(
    table: ConvolutionTable, f: FunctionTable, y: int, n_points: int | None = None
) -> FunctionTable:
    """Translate of ``f`` by ``y``: the function ``x -> f(x*y)``.

    The result covers the largest prefix ``0, ..., P`` of points whose
    convolution with ``y`` stays inside the domain of ``f``.  If ``n_points``
    is given and fewer points are available a :class:`WindowError` naming the
    first invalid ``x`` is raised.
    """
    t = table.translate_operator(len(f), y)
    count = t.shape[0]
    if count == 0 or (n_points is not None and count < n_points):
        raise WindowError(
            f"translate by {y} needs values beyond the function window at x={count}", count
        )
    out = t @ f.values
    if n_points is not None:
        out = out[:n_points]
    return FunctionTable(out)


@dataclass(frozen=True)
class AxiomReport:
    max_negativity: float
    max_mass_defect: float
    max_commutativity_defect: float
    max_associativity_defect: float
    identity_ok: bool
    tol: float = 1e-12

    @property
    def passed(self) -> bool:
        return self.identity_ok and max(
            self.max_negativity,
            self.max_mass_defect,
            self.max_commutativity_defect,
            self.max_associativity_defect,
        ) <= self.tol

    def to_dict(self) -> dict:
        return {
            "max_negativity": self.max_negativity,
            "max_mass_defect": self.max_mass_defect,
            "max_commutativity_defect": self.max_commutativity_defect,
            "max_associativity_defect": self.max_associativity_defect,
            "identity_ok": self.identity_ok,
            "tol": self.tol,
            "passed": self.passed,
        }


def _associativity_defect(table: ConvolutionTable) -> float:
    h = table.n_max // 2
    n = table.n_max + 1
    g = table.dense
    present = table.present
    worst = 0.0
    for x in range(h + 1):
        for y in range(h + 1):
            if not present[x, y] or table.reach[x, y] >= n:
                continue
            gxy = g[x, y, :n]
            kxy = np.nonzero(gxy)[0]
            for z in range(h + 1):
                if not present[y, z] or table.reach[y, z] >= n:
                    continue
                gyz = g[y, z, :n]
                kyz = np.nonzero(gyz)[0]
                if not (present[kxy, z].all() and present[x, kyz].all()):
                    continue
                left = gxy[kxy] @ g[kxy, z, :]
                right = gyz[kyz] @ g[x, kyz, :]
                worst = max(worst, float(np.max(np.abs(left - right), initial=0.0)))
    return worst


def check_axioms(table: ConvolutionTable, tol: float = 1e-12) -> AxiomReport:
    """Measure how far a table is from a commutative hypergroup.

    Associativity is checked for all triples ``x, y, z <= n_max // 2`` whose
    intermediate pairs are available.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    negativity = 0.0
    mass = 0.0
    comm = 0.0
    for x, y in table.pairs():
        ks, ws = table.support(x, y)
        if ws.size:
            negativity = max(negativity, float(-ws.min()))
        mass = max(mass, abs(float(ws.sum()) - 1.0))
        if table.has_pair(y, x):
            g = table.dense
            comm = max(comm, float(np.max(np.abs(g[x, y] - g[y, x]))))
    identity_ok = True
    for y in range(table.n_max + 1):
        for a, b in ((0, y), (y, 0)):
            if not table.has_pair(a, b):
                identity_ok = False
                break
            ks, ws = table.support(a, b)
            nz = ws != 0
            if list(ks[nz]) != [y] or abs(ws[nz][0] - 1.0) > tol:
                identity_ok = False
    return AxiomReport(
        max_negativity=max(negativity, 0.0),
        max_mass_defect=mass,
        max_commutativity_defect=comm,
        max_associativity_defect=_associativity_defect(table),
        identity_ok=identity_ok,
        tol=tol,
    )


def product_table(first: ConvolutionTable, second: ConvolutionTable, side: int) -> ConvolutionTable:
    """Direct product of two tables restricted to the square ``{0..side}^2``.

    The point ``(a, b)`` is encoded as ``a + (side + 1) * b``.  Only pairs
    whose product measure stays inside the square are stored, so the result
    is a partial table.  Products of one-variable hypergroups carry a
    two-dimensional space of sine functions.
    """
    base = side + 1
    points = [(a, b) for b in range(base) for a in range(base)]
    weights: dict[tuple[int, int], dict[int, float]] = {}
    for i, (a1, b1) in enumerate(points):
        for j, (a2, b2) in enumerate(points):
            if not (first.has_pair(a1, a2) and second.has_pair(b1, b2)):
                continue
            ka, wa = first.support(a1, a2)
            kb, wb = second.support(b1, b2)
            if ka[-1] > side or kb[-1] > side:
                continue
            row: dict[int, float] = {}
            for p, u in zip(ka, wa):
                for q, v in zip(kb, wb):
                    row[int(p) + base * int(q)] = float(u * v)
            weights[(i, j)] = row
    return ConvolutionTable(base * base - 1, weights)
