"""JSON system specification files.

A spec is a JSON object with a ``family`` key, the family's parameters and a
``control`` section::

    {"family": "aff2", "a": 1, "d": 1, "h_coeffs": [1, 1], "g_coeffs": [0],
     "control": {"kind": "box", "lo": [-0.5], "hi": [0.5]}}

Families and their keys (polynomial coefficients are in ascending powers):

``euclidean``   ``A`` (d x d, row-major), ``B`` (d x m)
``aff2``        ``a``, ``d``, ``h_coeffs`` (``h_coeffs[0] == 1``), ``g_coeffs`` (``g_coeffs[0] == 0``)
``heisenberg``  ``M`` (2 x 2), ``c`` (length 2), ``beta_coeffs`` (3 lists)
``nilpotent``   ``structure_constants`` (n x n x n), ``L`` (n x n algebra automorphism,
                i.e. f0 in exponential coordinates), ``beta_coeffs`` (n lists)

``control`` is ``{"kind": "box", "lo": [...], "hi": [...]}`` or
``{"kind": "finite", "points": [[...], ...]}``. An optional ``name`` string
labels the system.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

from .errors import LieCtrlError, SpecError
from .system import (
    ControlRange,
    LinearSystem,
    aff2_system,
    euclidean_system,
    heisenberg_example_system,
    heisenberg_system,
    nilpotent_system,
)

__all__ = [
    "FAMILIES",
    "PRESETS",
    "parse_control",
    "parse_spec",
    "load_spec",
    "system_to_spec",
    "dump_spec",
    "canonical_json",
    "spec_digest",
    "preset_spec",
    "load_preset",
]

FAMILIES = {
    "euclidean": ("A", "B"),
    "aff2": ("a", "d", "h_coeffs", "g_coeffs"),
    "heisenberg": ("M", "c", "beta_coeffs"),
    "nilpotent": ("structure_constants", "L", "beta_coeffs"),
}


def _as_floats(obj):
    # 1 and 1.0 describe the same system, so they must hash the same
    if isinstance(obj, dict):
        return {k: _as_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_as_floats(v) for v in obj]
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return float(obj)
    return obj


def canonical_json(spec: dict) -> str:
    """Key-sorted compact JSON with every number written as a float."""
    return json.dumps(_as_floats(spec), sort_keys=True, separators=(",", ":"))


def spec_digest(spec: dict) -> str:
    return hashlib.sha256(canonical_json(spec).encode()).hexdigest()


def parse_control(doc) -> ControlRange:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SpecError("control section must be an object with a 'kind' key")
    try:
        if doc["kind"] == "box":
            return ControlRange.box(doc["lo"], doc["hi"])
        if doc["kind"] == "finite":
            return ControlRange.finite(doc["points"])
    except KeyError as exc:
        raise SpecError(f"control section is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise SpecError(f"invalid control section: {exc}") from None
    raise SpecError(f"unknown control kind {doc['kind']!r} (expected 'box' or 'finite')")


def parse_spec(doc: dict) -> LinearSystem:
    """Build a system from a parsed spec document; raises ``SpecError`` on bad input."""
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    family = doc.get("family")
    if family not in FAMILIES:
        raise SpecError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    missing = [k for k in FAMILIES[family] + ("control",) if k not in doc]
    if missing:
        raise SpecError(f"{family} spec is missing keys: {missing}")
    extra = set(doc) - set(FAMILIES[family]) - {"family", "control", "name"}
    if extra:
        raise SpecError(f"unexpected keys for {family}: {sorted(extra)}")
    control = parse_control(doc["control"])
    name = doc.get("name", family)
    if not isinstance(name, str):
        raise SpecError("name must be a string")
    try:
        if family == "euclidean":
            sys = euclidean_system(doc["A"], doc["B"], control, name=name)
        elif family == "aff2":
            sys = aff2_system(doc["a"], doc["d"], doc["h_coeffs"], doc["g_coeffs"], control, name=name)
        elif family == "heisenberg":
            sys = heisenberg_system(doc["M"], doc["c"], doc["beta_coeffs"], control, name=name)
        else:
            sys = nilpotent_system(doc["structure_constants"], doc["L"], doc["beta_coeffs"], control, name=name)
    except SpecError:
        raise
    except (LieCtrlError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid {family} spec: {exc}") from None
    return sys


def load_spec(path) -> LinearSystem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file is not valid JSON: {exc}") from None
    return parse_spec(doc)


def system_to_spec(sys: LinearSystem) -> dict:
    """Spec document for a system built from a spec or a family constructor."""
    if sys.spec is None:
        raise SpecError("system has no spec form (reversed or hand-built systems are not serializable)")
    doc = copy.deepcopy(sys.spec)
    doc["name"] = sys.name
    return doc


def dump_spec(sys: LinearSystem, path) -> None:
    Path(path).write_text(json.dumps(system_to_spec(sys), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# presets

PRESETS = {
    "heisenberg-paper": {
        "family": "heisenberg",
        "name": "heisenberg-paper",
        "M": [[1.0, 0.0], [1.0, 1.0]],
        "c": [1.0, 0.0],
        "beta_coeffs": [[0.0, -0.5, -1.0 / 3.0], [0.0, 1.0], [0.0, -0.5]],
        "control": {"kind": "box", "lo": [-1.0], "hi": [1.0]},
    },
    "aff2-theorem39": {
        "family": "aff2",
        "name": "aff2-theorem39",
        "a": 1.0,
        "d": 1.0,
        "h_coeffs": [1.0, 1.0],
        "g_coeffs": [0.0],
        "control": {"kind": "box", "lo": [-0.5], "hi": [0.5]},
    },
}

_PRESET_DIGESTS = {
    "heisenberg-paper": "6187e37164e085c68b57f8ed7837e841b0c62ac9cd8a53f4fc811a3ef0c5308f",
    "aff2-theorem39": "9176717e80890b53d3aee285a85afebd8b79a15ac2e92bba36089ec66dcca4cf",
}


def preset_spec(name: str) -> dict:
    if name not in PRESETS:
        raise SpecError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    doc = copy.deepcopy(PRESETS[name])
    if spec_digest(doc) != _PRESET_DIGESTS[name]:
        raise SpecError(f"preset {name!r} failed its digest check")
    return doc


def load_preset(name: str) -> LinearSystem:
    sys = parse_spec(preset_spec(name))
    if name == "heisenberg-paper":
        # the preset must agree with the hand-written constructor
        ref = heisenberg_example_system(sys.range)
        if ref.spec["beta_coeffs"] != sys.spec["beta_coeffs"]:
            raise SpecError("heisenberg-paper preset drifted from its constructor")
    return sys
