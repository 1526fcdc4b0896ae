"""
Atomic output helpers
All reports are written to a temp file in the target directory, then renamed
"""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd

PathLike = Union[str, Path]


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write UTF-8 text with LF line endings via temp file + rename"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_frame(frame: pd.DataFrame, path: PathLike, float_format: str = "%.9g") -> Path:
    """Write a DataFrame as CSV (header row, UTF-8, LF)"""
    text = frame.to_csv(index=False, float_format=float_format, lineterminator="\n")
    return atomic_write_text(path, text)


def write_json(data: Dict[str, Any], path: PathLike) -> Path:
    text = json.dumps(data, indent=2, sort_keys=True, default=str) + "\n"
    return atomic_write_text(path, text)
