"""Exponential and sine functions of Sturm-Liouville type on ``[0, inf)``.

For a coefficient ``A`` with ``A(x) ~ x^(2 alpha + 1)`` near 0 the exponential
``m`` with parameter ``lam`` solves

    m'' + (A'/A) m' = lam m,            m(0) = 1, m'(0) = 0,

and the ``m``-sine functions solve

    s'' + (A'/A) s' - lam s = c m,      s(0) = 0, s'(0) = 0.

The problem is singular at 0.  Substituting ``m = 1 + a x^2`` and keeping the
leading terms gives ``2a + (2 alpha + 1) 2a = lam``, so
``m(x) ~ 1 + lam x^2 / (4 (alpha + 1))`` and likewise
``s(x) ~ c x^2 / (4 (alpha + 1))``.  Integration starts from these values at
the first positive grid point and proceeds with classical fourth-order
Runge-Kutta steps, one per grid interval.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DivergenceError, NotASineError

__all__ = [
    "SLCoefficient",
    "SampledFunction",
    "SineCandidateReport",
    "SineSpaceReport",
    "bessel_kingman",
    "ode_residual",
    "parse_coefficient",
    "solve_exponential",
    "solve_sine",
    "uniform_grid",
    "verify_sine_space_one_dim",
]

OVERFLOW = 1e250


@dataclass(frozen=True)
class SLCoefficient:
    """``A(x) = x^(2 alpha + 1) * B(x)`` with a smooth positive factor ``B``.

    ``factor`` and ``factor_log_derivative`` default to ``B = 1``; keeping
    ``B'/B`` as a separate callable means ``A'/A`` never has to be differenced.
    """

    alpha_exponent: float
    factor: Callable[[np.ndarray], np.ndarray] | None = None
    factor_log_derivative: Callable[[np.ndarray], np.ndarray] | None = None
    description: str = "custom"

    def __post_init__(self):
        if not self.alpha_exponent > -0.5:
            raise ConfigError(f"alpha must exceed -1/2, got {self.alpha_exponent}")
        if (self.factor is None) != (self.factor_log_derivative is None):
            raise ConfigError("factor and its log-derivative must be given together")

    def A(self, x):
        x = np.asarray(x, dtype=float)
        out = x ** (2 * self.alpha_exponent + 1)
        if self.factor is not None:
            out = out * self.factor(x)
        return out

    def log_derivative(self, x):
        """``A'(x) / A(x)`` for ``x > 0``."""
        x = np.asarray(x, dtype=float)
        out = (2 * self.alpha_exponent + 1) / x
        if self.factor_log_derivative is not None:
            out = out + self.factor_log_derivative(x)
        return out

    def check_positive(self, grid: np.ndarray) -> None:
        a = self.A(grid[grid > 0])
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise ConfigError(f"A must be positive on the grid ({self.description})")

    def to_dict(self) -> dict:
        return {"alpha": self.alpha_exponent, "description": self.description}


def bessel_kingman(alpha: float) -> SLCoefficient:
    """``A(x) = x^(2 alpha + 1)``."""
    return SLCoefficient(alpha, description=f"bessel-kingman:alpha={alpha:g}")


def parse_coefficient(text: str) -> SLCoefficient:
    """Parse a preset name such as ``bessel-kingman:alpha=0.5``."""
    match = re.fullmatch(r"bessel-kingman(?::alpha=([-+0-9.eE]+))?", text.strip())
    if not match:
        raise ConfigError(f"unknown Sturm-Liouville preset {text!r}")
    try:
        alpha = float(match.group(1)) if match.group(1) else 0.5
    except ValueError as exc:
        raise ConfigError(f"bad alpha in {text!r}") from exc
    return bessel_kingman(alpha)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values and first derivatives of a function on an increasing grid from 0."""

    grid: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        v = np.array(self.values, dtype=complex)
        d = np.array(self.derivative_values, dtype=complex)
        if g.ndim != 1 or g.size < 2 or g[0] != 0.0 or np.any(np.diff(g) <= 0):
            raise ConfigError("grid must be strictly increasing and start at 0")
        if v.shape != g.shape or d.shape != g.shape:
            raise ConfigError("grid, values and derivatives must have the same length")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(d))):
            raise ConfigError("sampled values must be finite")
        for name, arr in (("grid", g), ("values", v), ("derivative_values", d)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.grid.size

    def __call__(self, x) -> np.ndarray:
        """Cubic Hermite interpolation from values and derivatives."""
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.grid, x, side="right") - 1, 0, self.grid.size - 2)
        h = self.grid[i + 1] - self.grid[i]
        t = (x - self.grid[i]) / h
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        v, d = self.values, self.derivative_values
        return h00 * v[i] + h10 * h * d[i] + h01 * v[i + 1] + h11 * h * d[i + 1]

    def scale(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __mul__(self, c) -> "SampledFunction":
        return SampledFunction(self.grid, c * self.values, c * self.derivative_values)

    __rmul__ = __mul__

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        if not np.array_equal(self.grid, other.grid):
            raise ConfigError("functions live on different grids")
        return SampledFunction(
            self.grid, self.values + other.values, self.derivative_values + other.derivative_values
        )


def uniform_grid(x_max: float = 5.0, step: float = 1e-3) -> np.ndarray:
    if not (x_max > 0 and step > 0):
        raise ConfigError("x_max and step must be positive")
    n = int(round(x_max / step))
    if n < 4 or abs(n * step - x_max) > 1e-9 * x_max:
        raise ConfigError(f"step {step} does not divide [0, {x_max}] into at least 4 intervals")
    return np.linspace(0.0, x_max, n + 1)


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 3 or g[0] != 0.0 or np.any(np.diff(g) <= 0):
        raise ConfigError("grid must be strictly increasing, start at 0 and have >= 3 points")
    return g


def _integrate(coef: SLCoefficient, lam: complex, c: complex, grid: np.ndarray) -> np.ndarray:
    """RK4 for the state ``(m, m', s, s')``; returns an array of shape ``(n, 4)``."""
    coef.check_positive(grid)
    k0 = 4.0 * (coef.alpha_exponent + 1.0)
    x1 = grid[1]
    state = np.array(
        [1 + lam * x1**2 / k0, 2 * lam * x1 / k0, c * x1**2 / k0, 2 * c * x1 / k0], dtype=complex
    )

    def rhs(x, y):
        drift = coef.log_derivative(x)
        return np.array(
            [y[1], lam * y[0] - drift * y[1], y[3], lam * y[2] + c * y[0] - drift * y[3]]
        )

    out = np.empty((grid.size, 4), dtype=complex)
    out[0] = (1.0, 0.0, 0.0, 0.0)
    out[1] = state
    for i in range(1, grid.size - 1):
        x, h = grid[i], grid[i + 1] - grid[i]
        k1 = rhs(x, state)
        k2 = rhs(x + h / 2, state + h / 2 * k1)
        k3 = rhs(x + h / 2, state + h / 2 * k2)
        k4 = rhs(x + h, state + h * k3)
        state = state + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(state)) or np.max(np.abs(state)) > OVERFLOW:
            raise DivergenceError(f"integration diverged after x = {x:g}", float(x))
        out[i + 1] = state
    return out


def _second_derivative(grid: np.ndarray, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Derivative of ``d`` at interior nodes; fourth order on uniform grids.

    Returns ``(indices, values)``.  Stencils never touch nodes 0 and 1: the
    drift is singular at 0 and node 1 holds the truncated series start, whose
    small error would be amplified by differencing.
    """
    h = np.diff(grid)
    if np.allclose(h, h[0], rtol=1e-9, atol=0.0) and grid.size >= 9:
        idx = np.arange(4, grid.size - 2)
        vals = (d[idx - 2] - 8 * d[idx - 1] + 8 * d[idx + 1] - d[idx + 2]) / (12 * h[0])
        return idx, vals
    idx = np.arange(3, grid.size - 1)
    return idx, np.gradient(d, grid, edge_order=2)[idx]


def ode_residual(
    coef: SLCoefficient, lam: complex, f: SampledFunction, rhs: SampledFunction | None = None, c: complex = 0.0
) -> tuple[np.ndarray, np.ndarray, float]:
    """Pointwise ``f'' + (A'/A) f' - lam f - c * rhs`` at interior nodes.

    ``f''`` is obtained by differencing the stored derivatives.  Returns the
    node indices, the residual and the scale (largest term magnitude).
    """
    idx, d2 = _second_derivative(f.grid, f.derivative_values)
    x = f.grid[idx]
    drift = coef.log_derivative(x) * f.derivative_values[idx]
    lin = lam * f.values[idx]
    res = d2 + drift - lin
    terms = [np.abs(d2), np.abs(drift), np.abs(lin)]
    if rhs is not None:
        forcing = c * rhs.values[idx]
        res = res - forcing
        terms.append(np.abs(forcing))
    scale = float(max(np.max(t) for t in terms))
    return idx, res, scale


def _relative_residual(coef, lam, f, rhs=None, c=0.0) -> float:
    _, res, scale = ode_residual(coef, lam, f, rhs, c)
    return float(np.max(np.abs(res)) / scale) if scale > 0 else float(np.max(np.abs(res)))


def solve_exponential(
    coef: SLCoefficient, lam: complex, grid=None, residual_tol: float = 1e-7
) -> SampledFunction:
    """The exponential ``m`` on ``grid`` (default ``[0, 5]`` with step ``1e-3``).

    The finite-difference residual relative to the size of the ODE terms is
    stored in ``meta["residual"]``; exceeding ``residual_tol`` raises
    :class:`DivergenceError`.
    """
    grid = uniform_grid() if grid is None else _check_grid(grid)
    lam = complex(lam)
    y = _integrate(coef, lam, 0.0, grid)
    m = SampledFunction(grid, y[:, 0], y[:, 1])
    res = _relative_residual(coef, lam, m)
    if res > residual_tol:
        raise DivergenceError(f"ODE residual {res:.3e} exceeds {residual_tol:.1e}", float(grid[-1]))
    return SampledFunction(grid, m.values, m.derivative_values, {"residual": res})


def solve_sine(
    coef: SLCoefficient,
    lam: complex,
    c: complex,
    m: SampledFunction,
    grid=None,
    residual_tol: float = 1e-7,
) -> SampledFunction:
    """The ``m``-sine function with forcing constant ``c`` (``c = 1`` gives ``s_0``).

    ``m`` and ``s`` are integrated together so that ``m`` is available at the
    Runge-Kutta midpoints; the supplied ``m`` must agree with the recomputed
    one, otherwise :class:`ConfigError` is raised.
    """
    grid = m.grid if grid is None else _check_grid(grid)
    if not np.array_equal(grid, m.grid):
        raise ConfigError("m must be sampled on the same grid")
    lam, c = complex(lam), complex(c)
    y = _integrate(coef, lam, c, grid)
    mismatch = np.max(np.abs(y[:, 0] - m.values)) / max(1.0, m.scale())
    if mismatch > max(residual_tol, 1e-9):
        raise ConfigError(f"supplied m is not the exponential for lam={lam} (defect {mismatch:.2e})")
    s = SampledFunction(grid, y[:, 2], y[:, 3])
    res = _relative_residual(coef, lam, s, m, c)
    if res > residual_tol:
        raise DivergenceError(f"ODE residual {res:.3e} exceeds {residual_tol:.1e}", float(grid[-1]))
    return SampledFunction(grid, s.values, s.derivative_values, {"residual": res})


@dataclass
class SineCandidateReport:
    c_fit: complex
    c: complex
    ode_defect: float
    proportionality_defect: float

    def to_dict(self) -> dict:
        return {
            "c_fit": [self.c_fit.real, self.c_fit.imag],
            "c": [self.c.real, self.c.imag],
            "ode_defect": self.ode_defect,
            "proportionality_defect": self.proportionality_defect,
        }


@dataclass
class SineSpaceReport:
    candidates: list[SineCandidateReport]
    tol: float

    @property
    def max_defect(self) -> float:
        return max((r.proportionality_defect for r in self.candidates), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tol

    def to_dict(self) -> dict:
        return {
            "candidates": [r.to_dict() for r in self.candidates],
            "max_proportionality_defect": self.max_defect,
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_sine_space_one_dim(
    coef: SLCoefficient,
    lam: complex,
    candidates,
    tol: float = 1e-8,
    ode_tol: float = 1e-6,
) -> SineSpaceReport:
    """Check that every sine candidate is a multiple of ``s_0``.

    For each candidate ``s`` the constant ``c`` is fitted by least squares to
    ``s'' + (A'/A) s' - lam s = c m``; a poor fit or nonzero initial data
    raises :class:`NotASineError`.  The proportionality defect is
    ``max |s - c s_0| / max |s|`` with ``c`` the projection onto ``s_0``.
    """
    lam = complex(lam)
    cache: dict[bytes, tuple[SampledFunction, SampledFunction]] = {}
    reports = []
    for n, s in enumerate(candidates):
        key = s.grid.tobytes()
        if key not in cache:
            m = solve_exponential(coef, lam, s.grid, residual_tol=np.inf)
            cache[key] = (m, solve_sine(coef, lam, 1.0, m, residual_tol=np.inf))
        m, s0 = cache[key]
        scale = max(s.scale(), np.finfo(float).tiny)
        start = max(abs(s.values[0]), abs(s.derivative_values[0]) * s.grid[-1])
        if start > tol * scale:
            raise NotASineError(f"candidate {n} violates s(0) = s'(0) = 0 (size {start:.2e})")
        idx, res, _ = ode_residual(coef, lam, s)
        mv = m.values[idx]
        c_fit = complex(np.vdot(mv, res) / np.vdot(mv, mv))
        ode_scale = max(np.max(np.abs(res)), np.finfo(float).tiny)
        ode_defect = float(np.max(np.abs(res - c_fit * mv)) / ode_scale)
        if ode_defect > ode_tol:
            raise NotASineError(f"candidate {n} does not solve the sine equation for any c ({ode_defect:.2e})")
        c = complex(np.vdot(s0.values, s.values) / np.vdot(s0.values, s0.values))
        defect = float(np.max(np.abs(s.values - c * s0.values)) / scale)
        reports.append(SineCandidateReport(c_fit, c, ode_defect, defect))
    return SineSpaceReport(reports, tol)
