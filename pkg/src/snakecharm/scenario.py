"""Scenario files, canonical reports, and trajectory export.

All numeric output goes through a single float formatter (%.17g, which keeps
17 significant digits and round-trips doubles exactly), and all JSON goes
through a canonical emitter with a fixed key order.  Identical inputs thus
produce byte-identical files; the only nondeterministic field a report may
carry is the "created" timestamp, which save_report isolates at the top.

Scenario schema:

    {"dimension": int,
     "partition": [0.0, ...],                       # knots, strictly increasing
     "representation": {"kind": "arm" | "sampled",
                        "samples_per_segment": int},  # sampled only
     "initial": [[...], ...],                       # unit rows, one per sample
     "tolerances": {"tol_unit": ..., "tol_singular": ..., "tol_rank": ...,
                    "tol_reach": ..., "tol_solve": ...},   # all optional
     "target": {"kind": ..., ...},                  # optional
     "integrator": {"scheme": "euler" | "rk4", "dt": ..., "feedback_gain": ...},
     "seed": int}

Validation failures raise ScenarioError with the offending field path in the
message ("representation.kind: ...", "initial[2]: segment 3 has norm ...").
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Mapping, Optional

import numpy as np

from .control import TargetCurve, TargetError, Trajectory
from .geometry import Configuration, LayoutError, Partition

_MISSING = object()


class ScenarioError(ValueError):
    """Schema or validation failure; message starts with the field path."""


# -- canonical serialization ----------------------------------------------------


def format_float(x: float) -> str:
    """17-significant-digit decimal form; exact under float round trip."""
    if not math.isfinite(x):
        raise ScenarioError(f"cannot serialize non-finite value {x!r}")
    s = "%.17g" % x
    if "." not in s and "e" not in s:
        s += ".0"  # keep the value a float on reload
    return s


def _canon(obj):
    """Normalize numpy containers/scalars to plain python."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, Mapping):
        return {str(k): _canon(v) for k, v in obj.items()}
    return obj


def _scalar(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise ScenarioError(f"cannot serialize {type(obj).__name__}")


def _is_scalar(v) -> bool:
    return v is None or isinstance(v, (bool, int, float, str))


def _emit(obj, out: list, pad: str, pretty: bool) -> None:
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        if not pretty:
            out.append("{")
            for idx, (k, v) in enumerate(obj.items()):
                if idx:
                    out.append(",")
                out.append(json.dumps(str(k)) + ":")
                _emit(v, out, pad, False)
            out.append("}")
            return
        out.append("{\n")
        items = list(obj.items())
        for idx, (k, v) in enumerate(items):
            out.append(pad + "  " + json.dumps(str(k)) + ": ")
            _emit(v, out, pad + "  ", True)
            out.append(",\n" if idx < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        if not pretty or all(_is_scalar(v) for v in obj):
            out.append("[")
            for idx, v in enumerate(obj):
                if idx:
                    out.append(", " if pretty else ",")
                _emit(v, out, pad, False)
            out.append("]")
            return
        out.append("[\n")
        for idx, v in enumerate(obj):
            out.append(pad + "  ")
            _emit(v, out, pad + "  ", True)
            out.append(",\n" if idx < len(obj) - 1 else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(obj))


def dumps_canonical(obj, *, pretty: bool = True) -> str:
    """Deterministic JSON: insertion-ordered keys, floats via format_float."""
    out: list = []
    _emit(_canon(obj), out, "", pretty)
    return "".join(out)


# -- scenario dataclasses -------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    tol_unit: float = 1e-12
    tol_singular: float = 1e-8   # loader scales the default by arm length
    tol_rank: float = 1e-9
    tol_reach: float = 1e-2
    tol_solve: float = 1e-8

    def __post_init__(self):
        for name in ("tol_unit", "tol_singular", "tol_rank", "tol_reach",
                     "tol_solve"):
            if not getattr(self, name) > 0:
                raise ScenarioError(f"tolerances.{name}: must be positive")


@dataclass(frozen=True)
class IntegratorSpec:
    scheme: str = "rk4"
    dt: float = 1e-3
    feedback_gain: float = 0.0

    def __post_init__(self):
        if self.scheme not in ("euler", "rk4"):
            raise ScenarioError("integrator.scheme: expected 'euler' or 'rk4'")
        if not self.dt > 0:
            raise ScenarioError("integrator.dt: must be positive")
        if self.feedback_gain < 0:
            raise ScenarioError("integrator.feedback_gain: must be >= 0")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Validated run description; `configuration()` builds the initial state."""

    dimension: int
    partition: Partition
    kind: str
    samples_per_segment: Optional[int]
    initial: np.ndarray
    tolerances: Tolerances
    target: Optional[dict]
    integrator: IntegratorSpec
    seed: int

    def configuration(self) -> Configuration:
        if self.kind == "arm":
            return Configuration.arm(self.partition, self.initial)
        return Configuration.sampled(self.partition, self.initial)

    def target_curve(self) -> Optional[TargetCurve]:
        if self.target is None:
            return None
        return build_target(self.target, self.partition.total, self.dimension)


# -- target specs ---------------------------------------------------------------


def _take(spec: dict, key: str, default=_MISSING):
    if key in spec:
        return spec.pop(key)
    if default is _MISSING:
        raise ScenarioError(f"target.{key}: required for this target kind")
    return default


def _plane(spec: dict, d: int):
    plane = _take(spec, "plane", [0, 1])
    try:
        i, j = (int(v) for v in plane)
    except (TypeError, ValueError):
        raise ScenarioError("target.plane: expected two coordinate indices")
    if i == j or not (0 <= i < d and 0 <= j < d):
        raise ScenarioError(
            f"target.plane: indices must be distinct and < {d}")
    return i, j


def build_target(spec: Mapping, total_length: float, d: int) -> TargetCurve:
    """Construct the TargetCurve described by a structured target spec."""
    if not isinstance(spec, Mapping):
        raise ScenarioError("target: expected an object")
    work = dict(_canon(spec))
    kind = work.pop("kind", None)
    if kind == "circle":
        curve = TargetCurve.circle(
            total_length, float(_take(work, "r")), d=d,
            omega=float(_take(work, "omega", 1.0)),
            center=_take(work, "center", None),
            plane=_plane(work, d),
            phase=float(_take(work, "phase", 0.0)),
            duration=_take(work, "duration", None))
    elif kind == "segment":
        curve = TargetCurve.segment(
            total_length, _take(work, "start"), _take(work, "end"),
            duration=float(_take(work, "duration", 1.0)))
    elif kind == "lissajous":
        curve = TargetCurve.lissajous(
            total_length, d=d,
            amplitudes=tuple(_take(work, "amplitudes", [1.0, 1.0])),
            freqs=tuple(_take(work, "freqs", [1.0, 2.0])),
            delta=float(_take(work, "delta", 0.0)),
            center=_take(work, "center", None),
            plane=_plane(work, d),
            duration=_take(work, "duration", None))
    elif kind == "polyline":
        curve = TargetCurve.polyline(
            total_length, _take(work, "times"), _take(work, "points"))
    else:
        raise ScenarioError(
            f"target.kind: unknown target kind {kind!r} "
            "(expected circle, segment, lissajous, or polyline)")
    if work:
        raise ScenarioError(
            f"target.{sorted(work)[0]}: unknown parameter for {kind} target")
    return curve


def parse_target_preset(text: str) -> dict:
    """Parse a CLI preset `kind:param=value,...` into a structured spec.

    Values are scalars (floats); vector-valued targets need a scenario file.
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if not kind:
        raise ScenarioError(f"target preset {text!r}: missing kind")
    spec: dict = {"kind": kind}
    if rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or not key:
                raise ScenarioError(
                    f"target preset {text!r}: expected kind:param=value,...")
            try:
                spec[key] = float(val)
            except ValueError:
                raise ScenarioError(
                    f"target preset {text!r}: parameter {key!r} is not a number")
    return spec


def _target_canonical(spec: Mapping) -> dict:
    work = dict(_canon(spec))
    kind = work.pop("kind", None)
    out = {"kind": kind}
    for key in sorted(work):
        out[key] = work[key]
    return out


# -- scenario load/save ---------------------------------------------------------


def _require(data: Mapping, key: str, path: str = ""):
    if key not in data:
        raise ScenarioError(f"{path}{key}: required field missing")
    return data[key]


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}: expected an integer")
    return value


def _as_real(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}: expected a number")
    return float(value)


def scenario_from_dict(data: Mapping) -> Scenario:
    if not isinstance(data, Mapping):
        raise ScenarioError("scenario: expected a JSON object")
    known = {"dimension", "partition", "representation", "initial",
             "tolerances", "target", "integrator", "seed"}
    for key in data:
        if key not in known:
            raise ScenarioError(f"{key}: unknown scenario field")

    d = _as_int(_require(data, "dimension"), "dimension")
    if d < 2:
        raise ScenarioError("dimension: expected an integer >= 2")

    knots = _require(data, "partition")
    if not isinstance(knots, list) or len(knots) < 2:
        raise ScenarioError("partition: expected a list of at least two knots")
    try:
        partition = Partition(tuple(_as_real(k, f"partition[{i}]")
                                    for i, k in enumerate(knots)))
    except LayoutError as err:
        raise ScenarioError(f"partition: {err}")

    rep = _require(data, "representation")
    if not isinstance(rep, Mapping):
        raise ScenarioError("representation: expected an object")
    for key in rep:
        if key not in ("kind", "samples_per_segment"):
            raise ScenarioError(f"representation.{key}: unknown field")
    kind = rep.get("kind")
    if kind not in ("arm", "sampled"):
        raise ScenarioError("representation.kind: expected 'arm' or 'sampled'")
    m: Optional[int] = None
    if kind == "sampled":
        m = _as_int(_require(rep, "samples_per_segment", "representation."),
                    "representation.samples_per_segment")
        if m < 2:
            raise ScenarioError(
                "representation.samples_per_segment: must be >= 2")
    elif rep.get("samples_per_segment") is not None:
        raise ScenarioError(
            "representation.samples_per_segment: not allowed for arm")

    tol_data = data.get("tolerances", {})
    if not isinstance(tol_data, Mapping):
        raise ScenarioError("tolerances: expected an object")
    tol_fields = {"tol_unit", "tol_singular", "tol_rank", "tol_reach",
                  "tol_solve"}
    for key in tol_data:
        if key not in tol_fields:
            raise ScenarioError(f"tolerances.{key}: unknown tolerance")
    tol_kwargs = {k: _as_real(v, f"tolerances.{k}") for k, v in tol_data.items()}
    if "tol_singular" not in tol_kwargs:
        tol_kwargs["tol_singular"] = 1e-8 * partition.total
    tolerances = Tolerances(**tol_kwargs)

    rows = _require(data, "initial")
    n_expected = partition.n_segments * (m if kind == "sampled" else 1)
    if not isinstance(rows, list) or len(rows) != n_expected:
        raise ScenarioError(
            f"initial: expected {n_expected} sample rows for this "
            f"representation, got {len(rows) if isinstance(rows, list) else 'non-list'}")
    initial = np.empty((n_expected, d))
    per_seg = m if kind == "sampled" else 1
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            raise ScenarioError(f"initial[{i}]: expected {d} coordinates")
        initial[i] = [_as_real(v, f"initial[{i}][{j}]")
                      for j, v in enumerate(row)]
        norm = float(np.linalg.norm(initial[i]))
        if abs(norm - 1.0) > tolerances.tol_unit:
            raise ScenarioError(
                f"initial[{i}]: segment {i // per_seg + 1} has norm "
                f"{norm:.17g}, not unit within tol_unit={tolerances.tol_unit:g}")

    integ = data.get("integrator")
    if integ is None:
        integrator = IntegratorSpec()
    else:
        if not isinstance(integ, Mapping):
            raise ScenarioError("integrator: expected an object")
        for key in integ:
            if key not in ("scheme", "dt", "feedback_gain"):
                raise ScenarioError(f"integrator.{key}: unknown field")
        integrator = IntegratorSpec(
            scheme=integ.get("scheme", "rk4"),
            dt=_as_real(integ.get("dt", 1e-3), "integrator.dt"),
            feedback_gain=_as_real(integ.get("feedback_gain", 0.0),
                                   "integrator.feedback_gain"))

    target = data.get("target")
    if target is not None:
        target = _target_canonical(target)

    seed = _as_int(data.get("seed", 0), "seed")

    scenario = Scenario(d, partition, kind, m, initial, tolerances, target,
                        integrator, seed)
    try:
        scenario.configuration()   # geometry-level validation
        scenario.target_curve()    # containment + parameter validation
    except (LayoutError, TargetError) as err:
        raise ScenarioError(str(err))
    return scenario


def scenario_to_dict(s: Scenario) -> dict:
    rep: dict = {"kind": s.kind}
    if s.kind == "sampled":
        rep["samples_per_segment"] = s.samples_per_segment
    out = {
        "dimension": s.dimension,
        "partition": s.partition.knots.tolist(),
        "representation": rep,
        "initial": s.initial.tolist(),
        "tolerances": {
            "tol_unit": s.tolerances.tol_unit,
            "tol_singular": s.tolerances.tol_singular,
            "tol_rank": s.tolerances.tol_rank,
            "tol_reach": s.tolerances.tol_reach,
            "tol_solve": s.tolerances.tol_solve,
        },
    }
    if s.target is not None:
        out["target"] = _target_canonical(s.target)
    out["integrator"] = {
        "scheme": s.integrator.scheme,
        "dt": s.integrator.dt,
        "feedback_gain": s.integrator.feedback_gain,
    }
    out["seed"] = s.seed
    return out


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"{path}: not valid JSON ({err})")
    return scenario_from_dict(data)


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(dumps_canonical(scenario_to_dict(s)) + "\n")


# -- reports and trajectories ---------------------------------------------------


def _now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def save_report(report: Mapping, path, *, created: Optional[str] = None) -> None:
    """Write a canonical JSON report; the timestamp is the single first field."""
    body = dict(report)
    stamp = created or body.pop("created", None) or _now_iso()
    body.pop("created", None)
    ordered = {"created": stamp}
    ordered.update(body)
    Path(path).write_text(dumps_canonical(ordered) + "\n")


def trajectory_records(traj: Trajectory) -> Iterator[dict]:
    for k in range(traj.n_steps):
        yield {
            "t": float(traj.times[k]),
            "head": traj.heads[k].tolist(),
            "config": traj.values[k].tolist(),
            "w": traj.controls[k].tolist(),
            "margin": float(traj.margins[k]),
            "tracking_error": float(traj.tracking_errors[k]),
            "energy": float(traj.energies[k]),
        }


def export_trajectory(traj: Trajectory, path, *, append: bool = False) -> None:
    """Append-only JSONL export, one record per integrator step."""
    with open(path, "a" if append else "w") as fh:
        for rec in trajectory_records(traj):
            fh.write(dumps_canonical(rec, pretty=False) + "\n")


def load_trajectory(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def export_matrix_csv(matrix, path, header: Optional[list] = None) -> None:
    """Write a matrix (or a vector, as one row) as 17-digit CSV."""
    arr = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in arr:
            writer.writerow([format_float(v) for v in row])
