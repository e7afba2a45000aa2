"""Command line front end.

Every run writes a JSON report (to ``--output`` or stdout) of the form::

    {"schema": 1, "command": ..., "config": {...}, "results": {...},
     "residuals": {name: {"value": v, "tol": t, "passed": bool}}, "passed": bool}

Exit status is 0 when every residual is within its tolerance, 2 for bad
configuration, 3 when the input violates a mathematical hypothesis (including
a failed identity check) and 4 for numerical failures.  Tolerances can be set
per name with ``--tol name=value`` and are all multiplied by the environment
variable ``HYPERMOMENT_TOL_SCALE``.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import (
    AdmissibilityError,
    ConditioningError,
    ConfigError,
    DivergenceError,
    HypermomentError,
    SineSpaceDimensionError,
    WindowError,
)
from .extraction import extract_moment_sequence, order_basis_by_degree
from .hypergroup import FunctionTable, check_axioms
from .polynomial import (
    build_hypergroup,
    demo_pointwise_density,
    derivative_moment_sequence,
    preset,
    reconstruct,
)
from .spaces import Variety, verify_C_multiplicativity, verify_exponential, verify_moment_sequence, verify_sine
from .sturm_liouville import (
    parse_coefficient,
    solve_exponential,
    solve_sine,
    uniform_grid,
    verify_sine_space_one_dim,
)

SCHEMA = 1
HYPOTHESIS = 3
NUMERICAL = 4

DEFAULT_TOLS = {
    "axioms": {"axioms": 1e-12},
    "moments": {"exponential": 1e-9, "sine": 1e-9, "moment": 1e-8},
    "extract": {
        "moment": 1e-8,
        "triangular": 1e-9,
        "alpha": 1e-7,
        "exponential": 1e-9,
        "multiplicativity": 1e-9,
        "identity": 1e-12,
    },
    "density": {"reconstruction": 1e-8, "condition": 1e12},
    "sl": {"residual": 1e-7, "proportionality": 1e-8},
}

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)"
_REAL = re.compile(rf"[+-]?{_NUM}")
_COMPLEX = re.compile(rf"(?:(?P<re>[+-]?{_NUM})(?P<sign>[+-])|(?P<lead>[+-])?)(?P<im>{_NUM})?i")


def parse_complex(text: str) -> complex:
    """Parse ``a``, ``a+bi``, ``a-bi``, ``bi`` or ``i`` with decimal parts."""
    t = text.strip().replace(" ", "")
    if _REAL.fullmatch(t):
        return complex(float(t), 0.0)
    m = _COMPLEX.fullmatch(t)
    if not m:
        raise ConfigError(f"cannot parse complex number {text!r} (expected a+bi)")
    im = float(m.group("im")) if m.group("im") else 1.0
    if (m.group("sign") or m.group("lead")) == "-":
        im = -im
    return complex(float(m.group("re") or 0.0), im)


def _c(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class RunConfig:
    command: str
    tolerances: dict[str, float]
    tol_scale: float
    output: str | None
    fmt: str
    options: dict = field(default_factory=dict)

    def tol(self, name: str) -> float:
        return self.tolerances[name] * self.tol_scale

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "tolerances": dict(sorted(self.tolerances.items())),
            "tol_scale": self.tol_scale,
            "format": self.fmt,
            **self.options,
        }


class Report:
    def __init__(self, config: RunConfig):
        self.config = config
        self.results: dict = {}
        self.residuals: dict = {}
        self._fail_codes: dict[str, int] = {}
        self.error: dict | None = None

    def check(self, name: str, value: float, tol_name: str, on_fail: int = HYPOTHESIS):
        tol = self.config.tol(tol_name)
        value = float(value)
        passed = bool(np.isfinite(value) and value <= tol)
        self.residuals[name] = {"value": value, "tol": tol, "passed": passed}
        if not passed:
            self._fail_codes[name] = on_fail

    @property
    def passed(self) -> bool:
        return self.error is None and all(r["passed"] for r in self.residuals.values())

    def exit_code(self) -> int:
        if self.error is not None:
            return self.error["exit_code"]
        if self._fail_codes:
            return min(self._fail_codes.values())
        return 0

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "command": self.config.command,
            "config": self.config.to_dict(),
            "results": self.results,
            "residuals": self.residuals,
            "passed": self.passed,
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def to_csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value", "tol", "passed"])
        for name, r in self.residuals.items():
            w.writerow([name, repr(r["value"]), repr(r["tol"]), r["passed"]])
        if self.error is not None:
            w.writerow(["error:" + self.error["type"], "", "", False])
        return buf.getvalue()


def _error_dict(exc: Exception) -> dict:
    code = getattr(exc, "exit_code", NUMERICAL)
    out = {"type": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, SineSpaceDimensionError):
        out["dimension"] = exc.dimension
        out["spectrum"] = exc.spectrum
    if isinstance(exc, AdmissibilityError) and exc.where is not None:
        out["where"] = list(exc.where)
    if isinstance(exc, WindowError):
        out["first_invalid"] = exc.first_invalid
    if isinstance(exc, DivergenceError):
        out["last_good_x"] = exc.last_good_x
    if isinstance(exc, ConditioningError):
        out["condition_number"] = exc.condition_number
    return out


# -- hypergroup selection ------------------------------------------------


def _recurrence(args, window: int):
    if args.recurrence:
        rec = io.load_recurrence(args.recurrence)
    else:
        rec = preset(args.preset, max(512, 2 * window + 1))
    rec.require(2 * window)
    return rec


def _table(args, window: int):
    if getattr(args, "table", None):
        return io.load_table(args.table)
    return build_hypergroup(_recurrence(args, window), window)


def _check_window(window: int, order: int) -> None:
    if window < 2 * order + 2:
        raise ConfigError(f"window {window} too small for order {order}: need >= {2 * order + 2}")


# -- commands ------------------------------------------------------------


def cmd_axioms(args, report: Report) -> None:
    table = _table(args, args.window)
    rep = check_axioms(table, report.config.tol("axioms"))
    report.results["axioms"] = rep.to_dict()
    for name in ("negativity", "mass_defect", "commutativity_defect", "associativity_defect"):
        report.check(name, getattr(rep, f"max_{name}"), "axioms")
    report.check("identity", 0.0 if rep.identity_ok else np.inf, "axioms")


def cmd_moments(args, report: Report) -> None:
    _check_window(args.window, args.order)
    rec = _recurrence(args, args.window)
    table = build_hypergroup(rec, args.window)
    lam = parse_complex(args.lam)
    seq = derivative_moment_sequence(rec, lam, args.order, args.window)
    res_e = verify_exponential(table, seq[0], report.config.tol("exponential"))
    report.results["exponential"] = res_e.to_dict()
    report.check("exponential", res_e.max_rel, "exponential")
    if args.order >= 1:
        res_s = verify_sine(table, seq[1], seq[0], report.config.tol("sine"))
        report.results["sine"] = res_s.to_dict()
        report.check("sine", res_s.max_rel, "sine")
    res_m = verify_moment_sequence(table, seq, report.config.tol("moment"))
    report.results["moment"] = res_m.to_dict()
    report.check("moment", res_m.max_rel, "moment")
    _write_functions(args, {f"f{k}": f for k, f in enumerate(seq.functions)})


def cmd_extract(args, report: Report) -> None:
    bundle = io.load_bundle(args.bundle)
    table = bundle.table
    cfg = report.config
    if bundle.degrees is None:
        variety = order_basis_by_degree(
            table, bundle.basis, bundle.exponential, ys=bundle.degree_ys, exp_tol=cfg.tol("exponential")
        )
    else:
        variety = Variety(tuple(bundle.basis), bundle.degrees)
    _check_window(table.n_max, variety.dim - 1)
    report.results["degrees"] = list(variety.degrees)
    result = extract_moment_sequence(
        table,
        variety,
        tol=cfg.tol("moment"),
        triangular_tol=cfg.tol("triangular"),
        alpha_threshold=cfg.tol("alpha"),
        exp_tol=cfg.tol("exponential"),
    )
    report.results["extraction"] = result.to_dict()
    report.check("moment", result.moment_residual.max_rel, "moment")
    if result.translation is not None:
        report.check("triangularity", result.triangularity_defect, "triangular")
        canonical = Variety(
            (result.moments[0], result.sine) + variety.basis[2:], variety.degrees, 0, 1
        )
        mult = verify_C_multiplicativity(table, canonical, matrix=result.translation)
        report.results["multiplicativity"] = mult.to_dict()
        report.check("multiplicativity", mult.max_rel, "multiplicativity")
        report.check("identity", result.translation.identity_defect(), "identity", NUMERICAL)
    _write_functions(args, {f"f{k}": f for k, f in enumerate(result.moments.functions)})


def _density_data(args) -> FunctionTable:
    if args.data:
        return io.load_function(args.data)
    rng = np.random.default_rng(args.seed)
    return FunctionTable(rng.normal(size=args.length) + 1j * rng.normal(size=args.length))


def cmd_density(args, report: Report) -> None:
    data = _density_data(args)
    rec = _recurrence(args, data.n_max)
    lam = parse_complex(args.lam)
    gamma = demo_pointwise_density(rec, lam, data, report.config.tol("condition"))
    rebuilt = reconstruct(rec, lam, gamma, data.n_max)
    defect = np.max(np.abs(rebuilt.values - data.values)) / max(np.max(np.abs(data.values)), 1e-300)
    report.results["gamma"] = [_c(g) for g in gamma]
    report.check("reconstruction", defect, "reconstruction", NUMERICAL)


def cmd_sl(args, report: Report) -> None:
    coef = parse_coefficient(args.coefficient)
    lam = parse_complex(args.lam)
    c = parse_complex(args.c)
    grid = uniform_grid(args.x_max, args.step)
    tol = report.config.tol("residual")
    m = solve_exponential(coef, lam, grid, residual_tol=np.inf)
    s = solve_sine(coef, lam, c, m, residual_tol=np.inf)
    report.results["exponential"] = {"residual": m.meta["residual"], "m_at_x_max": _c(m.values[-1])}
    report.results["sine"] = {"residual": s.meta["residual"], "s_at_x_max": _c(s.values[-1])}
    report.check("exponential_ode", m.meta["residual"], "residual", NUMERICAL)
    report.check("sine_ode", s.meta["residual"], "residual", NUMERICAL)
    candidates = [io.load_sampled(p) for p in args.candidates] if args.candidates else [s]
    rep = verify_sine_space_one_dim(coef, lam, candidates, report.config.tol("proportionality"))
    report.results["sine_space"] = rep.to_dict()
    report.check("proportionality", rep.max_defect, "proportionality")
    if args.output:
        stem = Path(args.output)
        io.save_sampled(m, stem.with_name(f"{stem.stem}_m.csv"))
        io.save_sampled(s, stem.with_name(f"{stem.stem}_s.csv"))


def _write_functions(args, functions: dict[str, FunctionTable]) -> None:
    if not args.output:
        return
    stem = Path(args.output)
    for name, f in functions.items():
        io.save_function(f, stem.with_name(f"{stem.stem}_{name}.csv"))


COMMANDS = {
    "axioms": cmd_axioms,
    "moments": cmd_moments,
    "extract": cmd_extract,
    "density": cmd_density,
    "sl": cmd_sl,
}


# -- argument parsing ----------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", "-o", help="report path (default: stdout); CSV tables are written next to it")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a tolerance")


def _add_hypergroup(p: argparse.ArgumentParser, table: bool = False) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--preset", default="chebyshev", help="named recurrence (chebyshev)")
    g.add_argument("--recurrence", help='JSON file {"a": [...], "b": [...], "c": [...]}')
    if table:
        g.add_argument("--table", help="convolution table JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypermoment", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("axioms", help="build a hypergroup table and check its axioms")
    _add_hypergroup(p, table=True)
    p.add_argument("--window", type=int, default=16)
    _add_common(p)

    p = sub.add_parser("moments", help="verify derivative moment sequences")
    _add_hypergroup(p)
    p.add_argument("--lambda", dest="lam", default="1")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--window", type=int, default=12)
    _add_common(p)

    p = sub.add_parser("extract", help="extract a moment sequence from a variety bundle")
    p.add_argument("--bundle", required=True, help="variety bundle JSON")
    _add_common(p)

    p = sub.add_parser("density", help="express finite data through derivative moment functions")
    _add_hypergroup(p)
    p.add_argument("--lambda", dest="lam", default="1")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", help="function table CSV (n,re,im)")
    src.add_argument("--length", type=int, default=8, help="length of random data")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("sl", help="Sturm-Liouville exponential and sine functions")
    p.add_argument("--coefficient", default="bessel-kingman:alpha=0.5")
    p.add_argument("--lambda", dest="lam", default="1")
    p.add_argument("--c", default="1", help="forcing constant of the sine equation")
    p.add_argument("--x-max", type=float, default=5.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--candidates", nargs="*", help="sampled function CSVs (x,re,im,d_re,d_im)")
    _add_common(p)
    return parser


def _resolve_tolerances(command: str, overrides: list[str]) -> tuple[dict[str, float], float]:
    tols = dict(DEFAULT_TOLS[command])
    for item in overrides:
        name, sep, value = item.partition("=")
        if not sep or name not in tols:
            raise ConfigError(f"unknown tolerance {item!r}; known: {', '.join(sorted(tols))}")
        try:
            tols[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value {item!r}") from exc
    raw = os.environ.get("HYPERMOMENT_TOL_SCALE", "1")
    try:
        scale = float(raw)
    except ValueError as exc:
        raise ConfigError(f"HYPERMOMENT_TOL_SCALE={raw!r} is not a number") from exc
    if not scale > 0 or not all(v > 0 for v in tols.values()):
        raise ConfigError("tolerances and HYPERMOMENT_TOL_SCALE must be positive")
    return tols, scale


def _options(args) -> dict:
    skip = {"command", "tol", "fmt", "output"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv: list[str] | None = None) -> tuple[int, Report]:
    args = build_parser().parse_args(argv)
    config = RunConfig(args.command, dict(DEFAULT_TOLS[args.command]), 1.0, args.output, args.fmt, _options(args))
    report = Report(config)
    try:
        config.tolerances, config.tol_scale = _resolve_tolerances(args.command, args.tol)
        if getattr(args, "window", 1) < 1 or getattr(args, "order", 0) < 0:
            raise ConfigError("window must be positive and order nonnegative")
        if args.output:
            Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, report)
    except HypermomentError as exc:
        report.error = _error_dict(exc)
    text = io.dump_json(report.to_dict()) if args.fmt == "json" else report.to_csv()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return report.exit_code(), report


def main(argv: list[str] | None = None) -> int:
    code, report = run(argv)
    if report.error is not None:
        print(f"hypermoment: {report.error['type']}: {report.error['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
