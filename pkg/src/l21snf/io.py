"""File formats: numeric CSV for matrices/histories/summaries, key=value text.

Floats are written with ``repr``, i.e. the shortest string that round-trips
to the exact same double, so files are byte-stable across reruns and load
back without precision loss.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from .linalg import check_matrix
from .metrics import LossHistory, LossRecord

__all__ = [
    "save_matrix",
    "load_matrix",
    "save_history",
    "load_history",
    "save_summary",
    "load_summary",
    "read_kv_pairs",
    "load_config",
]

HISTORY_HEADER = "iter,objective,nfl,nl21"


def _fmt(x) -> str:
    return repr(float(x))


def save_matrix(M, path) -> None:
    """Write a matrix as plain numeric CSV: one row per line, no header."""
    M = check_matrix(M, "matrix")
    lines = [",".join(_fmt(v) for v in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n")


def load_matrix(path):
    """Read a matrix written by :func:`save_matrix` (or any numeric CSV)."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    return check_matrix(arr, f"matrix from {path}")


def save_history(history: LossHistory, path) -> None:
    """Write a loss history as CSV with header ``iter,objective,nfl,nl21``."""
    lines = [HISTORY_HEADER]
    for rec in history:
        obj = "" if rec.objective is None else _fmt(rec.objective)
        lines.append(f"{rec.iteration},{obj},{_fmt(rec.nfl)},{_fmt(rec.nl21)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_history(path) -> LossHistory:
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0] != HISTORY_HEADER:
        raise ValueError(f"{path} is not a loss-history CSV")
    history = LossHistory()
    for line in text[1:]:
        it, obj, nfl_s, nl21_s = line.split(",")
        history.append(
            LossRecord(
                int(it),
                None if obj == "" else float(obj),
                float(nfl_s),
                float(nl21_s),
            )
        )
    return history


def save_summary(fields: Dict[str, object], path) -> None:
    """Write a one-row CSV whose header is the field names, in order."""
    keys = list(fields)
    vals = []
    for k in keys:
        v = fields[k]
        if v is None:
            vals.append("")
        elif isinstance(v, float):
            vals.append(_fmt(v))
        else:
            vals.append(str(v))
    Path(path).write_text(",".join(keys) + "\n" + ",".join(vals) + "\n")


def load_summary(path) -> Dict[str, str]:
    lines = Path(path).read_text().strip().splitlines()
    if len(lines) != 2:
        raise ValueError(f"{path} is not a one-row summary CSV")
    keys = lines[0].split(",")
    vals = lines[1].split(",")
    if len(keys) != len(vals):
        raise ValueError(f"{path} has mismatched header and row")
    return dict(zip(keys, vals))


def read_kv_pairs(path) -> List[Tuple[str, str]]:
    """Read ``key=value`` lines, in order; blank lines and ``#`` comments skipped."""
    pairs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def load_config(path) -> Dict[str, str]:
    """Flat config file as a dict; keys may use ``-`` or ``_``, the last wins."""
    return {k.replace("-", "_"): v for k, v in read_kv_pairs(path)}
