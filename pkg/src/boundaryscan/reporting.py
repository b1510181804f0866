"""Canonical JSON: sorted keys, floats at 9 significant digits.

Reports are meant to be diffed between runs, so serialization must be a
pure function of the data: keys sorted, floats rounded to 9 significant
digits before encoding, arrays expanded to lists, two-space indent, one
trailing newline.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def _canon(obj):
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canon(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.9g}")
    return obj


def canonical_json(obj) -> str:
    """Serialize to the canonical report form."""
    return json.dumps(_canon(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    """Write canonical JSON, creating parent directories as needed."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(canonical_json(obj), encoding="utf-8")
