"""
Deterministic artifact serialization.

JSON is written with sorted keys and every float rendered with 17
significant digits so that reloading reproduces the stored doubles bit for
bit and reruns produce byte-identical files.
"""

import hashlib
import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from utils.errors import ParseError

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """Render a double with 17 significant digits (lossless)."""
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        raise ValueError(f"non-finite value {value!r} cannot be serialized")
    text = format(value, '.17g')
    if text in ('0', '-0'):
        return '0.0'
    if 'e' not in text and '.' not in text and 'n' not in text:
        text += '.0'
    return text


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, 'to_dict'):
        return obj.to_dict()
    return obj


def _encode(obj: Any, indent: int, level: int) -> str:
    obj = _plain(obj)
    pad = ' ' * (indent * (level + 1))
    end = ' ' * (indent * level)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [
            f"{pad}{json.dumps(str(key))}: {_encode(obj[key], indent, level + 1)}"
            for key in sorted(obj, key=str)
        ]
        return '{\n' + ',\n'.join(items) + '\n' + end + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        values = [_plain(v) for v in obj]
        # numeric rows stay on one line
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            return '[' + ', '.join(_encode(v, indent, level + 1) for v in values) + ']'
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in values]
        return '[\n' + ',\n'.join(items) + '\n' + end + ']'
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def dumps_json(obj: Any, indent: int = 2) -> str:
    """
    Serialize an artifact to deterministic JSON text.

    Args:
        obj: Nested dicts/lists of plain values, numpy values or objects
            exposing to_dict()
        indent: Indentation width

    Returns:
        str: JSON document terminated by a newline
    """
    return _encode(obj, indent, 0) + '\n'


def write_json(path: PathLike, obj: Any) -> Path:
    """Write an artifact as deterministic JSON and return its path."""
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    path.write_text(dumps_json(obj), encoding='utf-8')
    return path


def read_json(path: PathLike) -> Any:
    """
    Read a JSON document.

    Raises:
        ParseError: With line/column context when the document is malformed
    """
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e.msg}", line=e.lineno, column=e.colno,
                         offset=e.pos) from e


def file_checksum(path: PathLike) -> str:
    """SHA-256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


def text_checksum(text: str) -> str:
    """SHA-256 hex digest of a text (e.g. serialized generator parameters)."""
    return hashlib.sha256(text.encode('utf-8')).hexdigest()
