"""JSON schemas for set functions, partitions, ensembles and densities.

Floats are written with 17 significant digits so every artifact re-parses to
the identical value.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .density1d import GridDensity, IntervalMixture
from .explorer import StamPoint
from .fracpart import FractionalPartition
from .gauss import GaussianEnsemble
from .setfn import PropertyReport, SetFunction, format_mask, full_mask, parse_mask


class SchemaError(ValueError):
    """Input JSON does not match the expected schema."""


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        # not valid JSON numbers; keep them readable and parseable by json.loads
        return "NaN" if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity")
    text = format(x, ".17g")
    if "e" not in text and "." not in text and "n" not in text:
        text += ".0"
    return text


def to_jsonable(obj):
    """Plain JSON structure for the library's value types."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, str) or obj is None:
        return obj
    if isinstance(obj, SetFunction):
        return setfn_to_json(obj)
    if isinstance(obj, FractionalPartition):
        return partition_to_json(obj)
    if isinstance(obj, GaussianEnsemble):
        return ensemble_to_json(obj)
    if isinstance(obj, GridDensity):
        return density_to_json(obj)
    if isinstance(obj, IntervalMixture):
        return mixture_to_json(obj)
    if isinstance(obj, PropertyReport):
        return report_to_json(obj)
    if isinstance(obj, StamPoint):
        return point_to_json(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1)) if indent else ""
    end = " " * (indent * level) if indent else ""
    nl = "\n" if indent else ""
    sep = "," + nl if indent else ", "
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + nl + sep.join(items) + nl + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_emit(x, 0, 0) for x in obj) + "]"
        items = [pad + _emit(x, indent, level + 1) for x in obj]
        return "[" + nl + sep.join(items) + nl + end + "]"
    raise TypeError(f"cannot emit {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _emit(to_jsonable(obj), indent, 0)


def dump(obj, path, indent: int = 2) -> None:
    Path(path).write_text(dumps(obj, indent) + "\n")


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None


def _require(data, key, kind=None):
    if not isinstance(data, dict) or key not in data:
        raise SchemaError(f"missing key {key!r}")
    val = data[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"key {key!r} should be {kind.__name__}")
    return val


# set functions -----------------------------------------------------------

def setfn_to_json(v: SetFunction) -> dict:
    return {"n": v.n, "values": v.as_dict()}


def setfn_from_json(data: dict) -> SetFunction:
    n = _require(data, "n", int)
    values = _require(data, "values", dict)
    if len(values) != full_mask(n):
        raise SchemaError(f"need all {full_mask(n)} subset keys for n={n}, got {len(values)}")
    try:
        return SetFunction.from_mapping(n, {parse_mask(k): float(x) for k, x in values.items()})
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


# fractional partitions ---------------------------------------------------

def partition_to_json(beta: FractionalPartition) -> dict:
    exact = beta.exact
    weights = {format_mask(m): (str(Fraction(w)) if exact else float(w)) for m, w in beta.weights.items()}
    return {"n": beta.n, "exact": exact, "weights": weights}


def partition_from_json(data: dict) -> FractionalPartition:
    n = _require(data, "n", int)
    raw = _require(data, "weights", dict)
    weights = {}
    for key, w in raw.items():
        m = parse_mask(key)
        if isinstance(w, str):
            weights[m] = Fraction(w)
        elif isinstance(w, (int, float)):
            weights[m] = float(w)
        else:
            raise SchemaError(f"bad weight {w!r}")
    return FractionalPartition(n, weights)


# Gaussian ensembles --------------------------------------------------------

def ensemble_to_json(ens: GaussianEnsemble) -> dict:
    return ens.to_dict()


def ensemble_from_json(data: dict) -> GaussianEnsemble:
    mats = _require(data, "matrices", list)
    ens = GaussianEnsemble(tuple(np.array(m, dtype=float) for m in mats))
    if "d" in data and data["d"] != ens.d:
        raise SchemaError(f"declared d={data['d']} but matrices are {ens.d}x{ens.d}")
    return ens


# densities ---------------------------------------------------------------

def density_to_json(f: GridDensity) -> dict:
    return {"x0": f.x0, "dx": f.dx, "pdf": f.pdf.tolist()}


def density_from_json(data: dict) -> GridDensity:
    if "intervals" in data:
        return mixture_from_json(data).on_grid(float(data.get("dx", 1e-3)))
    return GridDensity(float(_require(data, "x0")), float(_require(data, "dx")), np.array(_require(data, "pdf", list)))


def mixture_to_json(m: IntervalMixture) -> dict:
    return {"intervals": [{"left": l, "width": w, "weight": p} for l, w, p in m.intervals]}


def mixture_from_json(data: dict) -> IntervalMixture:
    ivs = _require(data, "intervals", list)
    try:
        return IntervalMixture(tuple((iv["left"], iv["width"], iv["weight"]) for iv in ivs))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad interval entry: {exc}") from None


# reports -----------------------------------------------------------------

def report_to_json(rep: PropertyReport) -> dict:
    return {
        "property": rep.name,
        "holds": bool(rep.holds),
        "margin": float(rep.margin),
        "certificate": to_jsonable(rep.certificate),
        "details": to_jsonable(rep.details),
    }


def report_from_json(data: dict) -> PropertyReport:
    """Certificate and details come back as plain JSON structures."""
    try:
        return PropertyReport(_require(data, "property", str), bool(_require(data, "holds")),
                              float(_require(data, "margin")), data.get("certificate"), data.get("details", {}))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


# Stam points -------------------------------------------------------------

def point_to_json(u: StamPoint) -> dict:
    out = setfn_to_json(u.values)
    out.update({"dim": u.dim, "provenance": u.provenance})
    if u.note:
        out["note"] = u.note
    return out


def point_from_json(data: dict) -> StamPoint:
    v = setfn_from_json(data)
    try:
        return StamPoint(v, int(data.get("dim", 1)), data.get("provenance", "synthetic"), data.get("note", ""))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


# run reports -------------------------------------------------------------

def inputs_digest(payload) -> str:
    """sha256 of the canonical JSON form of the command inputs."""
    text = json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


@dataclasses.dataclass
class RunReport:
    """Everything a command produced; serialized as the JSON report on stdout."""

    command: str
    inputs: dict
    reports: list = dataclasses.field(default_factory=list)
    result: dict = dataclasses.field(default_factory=dict)
    meta: dict = dataclasses.field(default_factory=dict)
    exit_status: int = 0

    def as_dict(self) -> dict:
        from . import __version__

        return {
            "command": self.command,
            "tool_version": __version__,
            "inputs_digest": inputs_digest(self.inputs),
            "inputs": self.inputs,
            "meta": self.meta,
            "reports": self.reports,
            "result": self.result,
            "exit_status": self.exit_status,
        }
