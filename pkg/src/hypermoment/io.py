"""Reading and writing tables, functions and variety bundles.

Formats:

* convolution table: JSON ``{"n_max": N, "weights": [{"x", "y", "k", "g"}, ...]}``
* function table: CSV with header ``n,re,im``
* sampled function: CSV with header ``x,re,im,d_re,d_im``
* recurrence: JSON ``{"a": [...], "b": [...], "c": [...]}``
* variety bundle: JSON naming the hypergroup and the basis CSV files, e.g.::

    {"hypergroup": {"preset": "chebyshev", "window": 16},
     "basis": ["phi0.csv", "phi1.csv"], "degrees": [0, 1],
     "exponential_index": 0}

  ``hypergroup`` may instead hold ``{"recurrence": path, "window": W}`` or
  ``{"table": path}``.  ``degrees`` is optional (computed when absent, using
  the translation points listed in ``degree_ys``, default ``[1, 2]``) and
  ``exponential`` may name a CSV holding the exponential when it is not a
  basis element.  Relative paths are resolved against the bundle's folder.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .hypergroup import ConvolutionTable, FunctionTable
from .polynomial import ThreeTermRecurrence, build_hypergroup, preset
from .spaces import Variety
from .sturm_liouville import SampledFunction

__all__ = [
    "VarietyBundle",
    "dump_json",
    "load_bundle",
    "load_function",
    "load_recurrence",
    "load_sampled",
    "load_table",
    "save_bundle",
    "save_function",
    "save_sampled",
    "save_table",
]


def dump_json(obj, path: str | Path | None = None) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


def table_to_dict(table: ConvolutionTable) -> dict:
    weights = [{"x": x, "y": y, "k": k, "g": g} for x, y, k, g in table.entries()]
    return {"n_max": table.n_max, "weights": weights}


def table_from_dict(data: dict) -> ConvolutionTable:
    try:
        weights: dict[tuple[int, int], dict[int, float]] = {}
        for w in data["weights"]:
            weights.setdefault((int(w["x"]), int(w["y"])), {})[int(w["k"])] = float(w["g"])
        return ConvolutionTable(int(data["n_max"]), weights)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed convolution table: {exc}") from exc


def save_table(table: ConvolutionTable, path: str | Path) -> None:
    dump_json(table_to_dict(table), path)


def load_table(path: str | Path) -> ConvolutionTable:
    return table_from_dict(_read_json(path))


def load_recurrence(path: str | Path) -> ThreeTermRecurrence:
    data = _read_json(path)
    try:
        return ThreeTermRecurrence(data["a"], data["b"], data["c"], name=Path(path).stem)
    except KeyError as exc:
        raise ConfigError(f"recurrence file {path} lacks {exc}") from exc


def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_csv(path: str | Path, header: list[str]) -> np.ndarray:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    if not rows or [h.strip() for h in rows[0]] != header:
        raise ConfigError(f"{path}: expected header {','.join(header)}")
    try:
        return np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(header))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def save_function(f: FunctionTable, path: str | Path) -> None:
    _write_csv(path, ["n", "re", "im"], ((n, _fmt(v.real), _fmt(v.imag)) for n, v in enumerate(f.values)))


def load_function(path: str | Path) -> FunctionTable:
    data = _read_csv(path, ["n", "re", "im"])
    if not np.array_equal(data[:, 0], np.arange(len(data))):
        raise ConfigError(f"{path}: column n must be 0, 1, 2, ...")
    return FunctionTable(data[:, 1] + 1j * data[:, 2])


def save_sampled(f: SampledFunction, path: str | Path) -> None:
    rows = (
        (_fmt(x), _fmt(v.real), _fmt(v.imag), _fmt(d.real), _fmt(d.imag))
        for x, v, d in zip(f.grid, f.values, f.derivative_values)
    )
    _write_csv(path, ["x", "re", "im", "d_re", "d_im"], rows)


def load_sampled(path: str | Path) -> SampledFunction:
    data = _read_csv(path, ["x", "re", "im", "d_re", "d_im"])
    return SampledFunction(data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4])


@dataclass
class VarietyBundle:
    table: ConvolutionTable
    basis: list[FunctionTable]
    exponential: FunctionTable
    degrees: tuple[int, ...] | None
    hypergroup: dict
    degree_ys: tuple[int, ...] = (1, 2)

    def variety(self) -> Variety:
        if self.degrees is None:
            raise ConfigError("bundle has no degrees; use order_basis_by_degree")
        return Variety(tuple(self.basis), self.degrees)


def _hypergroup_from_desc(desc: dict, root: Path) -> ConvolutionTable:
    if "table" in desc:
        return load_table(root / desc["table"])
    if "window" not in desc:
        raise ConfigError("hypergroup entry needs a window")
    window = int(desc["window"])
    if "preset" in desc:
        rec = preset(desc["preset"], max(512, 2 * window + 1))
    elif "recurrence" in desc:
        rec = load_recurrence(root / desc["recurrence"])
    else:
        raise ConfigError("hypergroup entry needs one of preset, recurrence, table")
    return build_hypergroup(rec, window)


def load_bundle(path: str | Path) -> VarietyBundle:
    path = Path(path)
    data = _read_json(path)
    root = path.parent
    if "hypergroup" not in data or "basis" not in data:
        raise ConfigError("bundle needs 'hypergroup' and 'basis'")
    table = _hypergroup_from_desc(data["hypergroup"], root)
    basis = [load_function(root / p) for p in data["basis"]]
    if "exponential" in data:
        m = load_function(root / data["exponential"])
    else:
        idx = int(data.get("exponential_index", 0))
        if not 0 <= idx < len(basis):
            raise ConfigError("exponential_index out of range")
        m = basis[idx]
    if abs(m[0]) == 0:
        raise ConfigError("the exponential vanishes at 0")
    m = m * (1.0 / m[0])
    degrees = tuple(int(d) for d in data["degrees"]) if "degrees" in data else None
    if degrees is not None and len(degrees) != len(basis):
        raise ConfigError("degrees and basis differ in length")
    degree_ys = tuple(int(y) for y in data.get("degree_ys", (1, 2)))
    if not degree_ys or min(degree_ys) < 1:
        raise ConfigError("degree_ys must be a nonempty list of positive points")
    return VarietyBundle(table, basis, m, degrees, data["hypergroup"], degree_ys)


def save_bundle(
    path: str | Path,
    hypergroup: dict,
    basis,
    degrees=None,
    exponential: FunctionTable | None = None,
    degree_ys=None,
) -> None:
    """Write basis CSVs next to ``path`` and the bundle JSON itself."""
    path = Path(path)
    stem = path.stem
    names = []
    for i, f in enumerate(basis):
        name = f"{stem}_phi{i}.csv"
        save_function(f, path.parent / name)
        names.append(name)
    data: dict = {"hypergroup": hypergroup, "basis": names}
    if degrees is not None:
        data["degrees"] = [int(d) for d in degrees]
    if degree_ys is not None:
        data["degree_ys"] = [int(y) for y in degree_ys]
    if exponential is not None:
        save_function(exponential, path.parent / f"{stem}_m.csv")
        data["exponential"] = f"{stem}_m.csv"
    dump_json(data, path)
