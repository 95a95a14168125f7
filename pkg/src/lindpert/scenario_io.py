"""JSON scenario files and deterministic run reports.

Complex scalars are two-element arrays ``[re, im]`` (plain reals are also
accepted on input); matrices are row-major nested arrays of scalars.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .linalg import BipartiteDims
from .model import LindbladSpec

__all__ = [
    "SCHEMA_VERSION",
    "ScenarioFile",
    "parse_scenario",
    "load_scenario",
    "scenario_to_dict",
    "dump_scenario",
    "canonical_json",
    "digest",
    "encode",
    "decode_matrix",
    "decode_vector",
]

SCHEMA_VERSION = 1
REQUIRED = ("schema_version", "dim", "hamiltonian0")
OPTIONAL = ("name", "description", "hamiltonian1", "jumps0", "jumps1", "bipartite", "tolerances")
TOLERANCE_KEYS = ("kernel", "ppt", "obstruction")


@dataclass(frozen=True)
class ScenarioFile:
    name: str
    dim: int
    l0spec: LindbladSpec
    l1spec: LindbladSpec
    bipartite: BipartiteDims | None = None
    tolerances: dict = field(default_factory=dict)
    description: str = ""


def _scalar(x, where: str) -> complex:
    if isinstance(x, bool):
        raise ValidationError(f"{where}: expected a number or [re, im], got {x!r}")
    if isinstance(x, (int, float)):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
    ):
        return complex(float(x[0]), float(x[1]))
    raise ValidationError(f"{where}: expected a number or [re, im], got {x!r}")


def decode_vector(v, where: str, size: int | None = None) -> np.ndarray:
    if not isinstance(v, list):
        raise ValidationError(f"{where}: expected an array")
    if size is not None and len(v) != size:
        raise ValidationError(f"{where}: expected {size} entries, got {len(v)}")
    return np.array([_scalar(x, f"{where}[{i}]") for i, x in enumerate(v)], dtype=np.complex128)


def decode_matrix(m, where: str, dim: int | None = None) -> np.ndarray:
    if not isinstance(m, list) or not m:
        raise ValidationError(f"{where}: expected a non-empty nested array")
    n = dim if dim is not None else len(m)
    if len(m) != n:
        raise ValidationError(f"{where}: expected {n} rows, got {len(m)}")
    rows = [decode_vector(r, f"{where}[{i}]", n) for i, r in enumerate(m)]
    return np.array(rows, dtype=np.complex128)


def _jumps(v, where, dim) -> tuple:
    if v is None:
        return ()
    if not isinstance(v, list):
        raise ValidationError(f"{where}: expected a list of matrices")
    return tuple(decode_matrix(j, f"{where}[{i}]", dim) for i, j in enumerate(v))


def parse_scenario(data) -> ScenarioFile:
    if not isinstance(data, dict):
        raise ValidationError("scenario: top level must be an object")
    unknown = sorted(set(data) - set(REQUIRED) - set(OPTIONAL))
    if unknown:
        raise ValidationError(f"scenario: unknown field(s) {', '.join(unknown)}")
    for key in REQUIRED:
        if key not in data:
            raise ValidationError(f"scenario: missing required field {key!r}")
    if data["schema_version"] != SCHEMA_VERSION:
        raise ValidationError(f"scenario: unsupported schema_version {data['schema_version']!r}")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or not 1 <= dim <= 16:
        raise ValidationError(f"scenario: dim must be an integer in 1..16, got {dim!r}")
    h0 = decode_matrix(data["hamiltonian0"], "hamiltonian0", dim)
    h1 = decode_matrix(data["hamiltonian1"], "hamiltonian1", dim) if "hamiltonian1" in data else np.zeros((dim, dim))
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ValidationError("scenario: name must be a string")
    l0 = LindbladSpec(h0, _jumps(data.get("jumps0"), "jumps0", dim), name)
    l1 = LindbladSpec(h1, _jumps(data.get("jumps1"), "jumps1", dim), f"{name}-perturbation" if name else "")

    dims = None
    if data.get("bipartite") is not None:
        bp = data["bipartite"]
        if not (isinstance(bp, list) and len(bp) == 2 and all(isinstance(x, int) and x > 0 for x in bp)):
            raise ValidationError("bipartite: expected [d1, d2] with positive integers")
        if bp[0] * bp[1] != dim:
            raise ValidationError(f"bipartite: {bp[0]} x {bp[1]} does not equal dim {dim}")
        dims = BipartiteDims(bp[0], bp[1])

    tols = data.get("tolerances") or {}
    if not isinstance(tols, dict):
        raise ValidationError("tolerances: expected an object")
    bad = sorted(set(tols) - set(TOLERANCE_KEYS))
    if bad:
        raise ValidationError(f"tolerances: unknown key(s) {', '.join(bad)}")
    for k, v in tols.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            raise ValidationError(f"tolerances.{k}: expected a positive number")
    description = data.get("description", "")
    if not isinstance(description, str):
        raise ValidationError("scenario: description must be a string")
    return ScenarioFile(name, dim, l0, l1, dims, {k: float(v) for k, v in tols.items()}, description)


def load_scenario(path) -> tuple[ScenarioFile, str]:
    """Parse a scenario file; returns it together with its canonical digest."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    sf = parse_scenario(data)
    return sf, digest(data)


def encode(obj):
    """JSON-ready form: complex -> [re, im], arrays -> nested lists,
    non-finite floats -> strings."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _float(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


_LEAF_ARRAY = re.compile(r"\[([^\[\]{}]*)\]")


def _collapse(match) -> str:
    return "[" + re.sub(r"\s*\n\s*", " ", match.group(1)).strip() + "]"


def canonical_json(obj, indent: int | None = 2) -> str:
    """Sorted-key JSON; with ``indent`` the innermost arrays stay on one line."""
    text = json.dumps(encode(obj), sort_keys=True, indent=indent, allow_nan=False)
    return _LEAF_ARRAY.sub(_collapse, text) if indent is not None else text


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj, indent=None).encode("utf-8")).hexdigest()


def _complex_matrix(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=np.complex128)]


def scenario_to_dict(name, l0spec: LindbladSpec, l1spec: LindbladSpec, dims: BipartiteDims | None = None,
                     tolerances: dict | None = None, description: str = "") -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "dim": l0spec.dim,
        "hamiltonian0": _complex_matrix(l0spec.hamiltonian),
        "hamiltonian1": _complex_matrix(l1spec.hamiltonian),
        "jumps0": [_complex_matrix(j) for j in l0spec.jumps],
        "jumps1": [_complex_matrix(j) for j in l1spec.jumps],
    }
    if description:
        out["description"] = description
    if dims is not None:
        out["bipartite"] = [dims.d1, dims.d2]
    if tolerances:
        out["tolerances"] = dict(tolerances)
    return out


def dump_scenario(data: dict, path) -> None:
    Path(path).write_text(canonical_json(data) + "\n", encoding="utf-8")
