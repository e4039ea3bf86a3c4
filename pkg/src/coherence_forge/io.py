"""JSON interchange for complex matrices: ``{"d": n, "re": [[...]], "im": [[...]]}``."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .linalg import ValidationError


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("only square matrices are serialized")
    return {"d": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict) and "re" in obj:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float) if "im" in obj else np.zeros_like(re)
        if re.shape != im.shape or re.ndim != 2 or re.shape[0] != re.shape[1]:
            raise ValidationError("'re' and 'im' must be equally sized square arrays")
        if "d" in obj and int(obj["d"]) != re.shape[0]:
            raise ValidationError(f"declared d={obj['d']} but matrix is {re.shape[0]}x{re.shape[1]}")
        return re + 1j * im
    if isinstance(obj, list):
        # bare real matrix, convenient for hand-written inputs
        arr = np.asarray(obj, dtype=float)
        if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
            return arr.astype(complex)
    raise ValidationError("matrix JSON must be {'d', 're', 'im'} or a square list of lists")


def load_json(path) -> object:
    try:
        with open(Path(path)) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def load_matrix(path) -> np.ndarray:
    return matrix_from_json(load_json(path))


def load_matrix_list(path) -> list[np.ndarray]:
    data = load_json(path)
    if isinstance(data, dict) and "matrices" in data:
        data = data["matrices"]
    if not isinstance(data, list) or not data:
        raise ValidationError(f"{path}: expected a non-empty list of matrices")
    return [matrix_from_json(m) for m in data]


def save_matrix(path, m) -> None:
    with open(Path(path), "w") as f:
        json.dump(matrix_to_json(m), f)


def to_jsonable(obj):
    """Recursively convert numpy values so ``json.dump`` accepts them."""
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2 and obj.shape[0] == obj.shape[1] and np.iscomplexobj(obj):
            return matrix_to_json(obj)
        return obj.tolist()
    if isinstance(obj, (float, np.floating)):
        # strict JSON has no NaN or infinity
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return obj
