"""TOML experiment configuration with strict key checking.

Blocks and their keys are listed in :data:`SCHEMA`; unknown blocks or keys are
rejected.  Matrices are given as flattened row-major arrays.  The resolved
configuration (defaults merged with file and command-line values) is hashed
with SHA-256 over its canonical JSON form.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigParseError
from .lie_algebra import LieAlgebraSpec, from_structure_constants, load_preset
from .splitting import SplittingSpec, canonical_preset, derive_Q

NUM = (int, float)
ARRAY = "array"
NUM_OR_ARRAY = "number-or-array"

SCHEMA: dict[str, dict[str, Any]] = {
    "lie_algebra": {"preset": str, "dim": int, "f": ARRAY},
    "splitting": {
        "preset": str, "genus": int, "n_amplitude": NUM,
        "omega": ARRAY, "s_star": ARRAY, "lambda_plus": ARRAY, "n_tensor": ARRAY, "v_vec": ARRAY,
        "vol": NUM, "airy_J": ARRAY, "airy_K": ARRAY, "airy_B": ARRAY, "airy_F": ARRAY,
    },
    "model": {"null_modes": int, "seed": int},
    "fock": {"d": int},
    "partition": {"eps": NUM, "lambda": NUM, "n_max": int, "order": str, "direct": bool},
    "airy": {"lambda": NUM_OR_ARRAY, "method": str, "samples": int, "order": int, "seed": int},
    "sweep": {
        "eps": ARRAY, "lambda": ARRAY, "d": ARRAY, "seeds": ARRAY, "n_scale": ARRAY, "v_scale": ARRAY,
        "n_max": int, "order": str, "direct": bool,
    },
}

REQUIRED = {"splitting": ("genus",)}
LIE_PRESETS = ("u1", "su2", "su3")

DEFAULTS: dict[str, dict[str, Any]] = {
    "lie_algebra": {"preset": "su2"},
    "splitting": {"preset": "canonical", "n_amplitude": 1.0},
    "model": {"null_modes": 1, "seed": 0},
    "fock": {"d": 2},
    "partition": {"eps": 0.1, "lambda": 0.5, "n_max": 64, "order": "bf-b", "direct": True},
    "airy": {"lambda": 0.0, "method": "monte_carlo", "samples": 100000, "seed": 0},
    "sweep": {"eps": [0.1], "lambda": [0.0, 0.5], "d": [2], "seeds": [0], "n_scale": [1.0],
              "v_scale": [1.0], "n_max": 16, "order": "bf-b", "direct": False},
}


def _check_type(where: str, value, expected) -> None:
    if expected is ARRAY:
        ok = isinstance(value, list) and all(isinstance(x, NUM) and not isinstance(x, bool) for x in value)
    elif expected is NUM_OR_ARRAY:
        ok = (isinstance(value, NUM) and not isinstance(value, bool)) or (
            isinstance(value, list) and all(isinstance(x, NUM) and not isinstance(x, bool) for x in value))
    elif expected is NUM:
        ok = isinstance(value, NUM) and not isinstance(value, bool)
    elif expected is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, expected)
    if not ok:
        name = {ARRAY: "array of numbers", NUM_OR_ARRAY: "number or array", NUM: "number"}.get(
            expected, getattr(expected, "__name__", str(expected)))
        raise ConfigParseError(f"{where}: expected {name}, got {type(value).__name__}")
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigParseError(f"{where}: non-finite value")


def check_document(doc: dict, require: bool = True) -> None:
    for block, body in doc.items():
        if block not in SCHEMA:
            raise ConfigParseError(f"unknown block [{block}]; allowed: {', '.join(SCHEMA)}")
        if not isinstance(body, dict):
            raise ConfigParseError(f"[{block}] must be a table")
        for key, value in body.items():
            if key not in SCHEMA[block]:
                raise ConfigParseError(f"{block}.{key}: unknown key; allowed: {', '.join(SCHEMA[block])}")
            _check_type(f"{block}.{key}", value, SCHEMA[block][key])
    if require:
        for block, keys in REQUIRED.items():
            for key in keys:
                if key not in doc.get(block, {}):
                    raise ConfigParseError(f"{block}.{key}: required field is missing")


def load_document(path: Optional[str]) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigParseError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc


def resolve(doc: dict, overrides: Optional[dict] = None) -> dict:
    """Defaults merged with ``doc`` and then ``overrides`` (``{block: {key: value}}``); validated."""
    merged = copy.deepcopy(DEFAULTS)
    for source in (doc, overrides or {}):
        for block, body in source.items():
            merged.setdefault(block, {})
            for key, value in body.items():
                if value is not None:
                    merged[block][key] = value
    present = copy.deepcopy(doc)
    for block, body in (overrides or {}).items():
        present.setdefault(block, {}).update({k: v for k, v in body.items() if v is not None})
    check_document(present)
    check_document(merged, require=False)
    if "preset" in doc.get("lie_algebra", {}) and "dim" in doc.get("lie_algebra", {}):
        raise ConfigParseError("lie_algebra: give either preset or dim/f, not both")
    if "dim" in merged["lie_algebra"]:
        merged["lie_algebra"].pop("preset", None)
    return merged


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_lie(cfg: dict) -> LieAlgebraSpec:
    block = cfg["lie_algebra"]
    if "dim" in block:
        if "f" not in block:
            raise ConfigParseError("lie_algebra.f: required with dim")
        dim = block["dim"]
        if len(block["f"]) != dim ** 3:
            raise ConfigParseError(f"lie_algebra.f: expected {dim ** 3} entries, got {len(block['f'])}")
        return from_structure_constants(dim, block["f"], "custom")
    name = block.get("preset", "su2")
    if name not in LIE_PRESETS:
        raise ConfigParseError(f"lie_algebra.preset: unknown preset {name!r}; allowed: {', '.join(LIE_PRESETS)}")
    return load_preset(name)


def _array(block: dict, key: str, shape: tuple) -> np.ndarray:
    data = np.asarray(block[key], dtype=float)
    if data.size != int(np.prod(shape)):
        raise ConfigParseError(f"splitting.{key}: expected {int(np.prod(shape))} entries for shape {shape}, got {data.size}")
    return data.reshape(shape)


def build_spec(cfg: dict, lie: LieAlgebraSpec) -> SplittingSpec:
    block = cfg["splitting"]
    if block.get("preset", "canonical") != "canonical":
        raise ConfigParseError(f"splitting.preset: unknown preset {block['preset']!r}")
    g = block["genus"]
    if g < 1:
        raise ConfigParseError("splitting.genus: must be >= 1")
    spec = canonical_preset(g, lie, block.get("n_amplitude", 1.0))
    changes = {}
    for key, shape in (("omega", (2 * g, 2 * g)), ("s_star", (2 * g, 2 * g)), ("lambda_plus", (2 * g, g)),
                       ("n_tensor", (g, g, g)), ("v_vec", (g,)), ("airy_J", (g, g))):
        if key in block:
            changes[key] = _array(block, key, shape)
    if "airy_K" in block:
        m = int(round(math.sqrt(len(block["airy_K"]))))
        changes["airy_K"] = _array(block, "airy_K", (m, m))
    m = changes.get("airy_K", spec.airy_K).shape[0]
    if "airy_B" in block:
        changes["airy_B"] = _array(block, "airy_B", (g, m, m))
    if "airy_F" in block:
        changes["airy_F"] = _array(block, "airy_F", (lie.dim, m, m))
    elif m != spec.airy_F.shape[1]:
        raise ConfigParseError("splitting.airy_F: required when airy_K changes the block size")
    if "airy_B" not in block and m != spec.airy_B.shape[1]:
        raise ConfigParseError("splitting.airy_B: required when airy_K changes the block size")
    if "vol" in block:
        changes["vol"] = float(block["vol"])
    spec = spec.replace(**changes)
    if any(k in changes for k in ("omega", "s_star", "lambda_plus")):
        lam = spec.s_star @ spec.lambda_plus
        spec = spec.replace(lam=lam, q_mat=derive_Q(spec.omega, spec.s_star, lam))
        if "airy_J" not in changes:
            spec = spec.replace(airy_J=spec.q_mat.copy())
    return spec


def parse_lambdas(value) -> list[float]:
    if isinstance(value, list):
        return [float(x) for x in value]
    return [float(value)]
