"""
Machine-readable output: JSON and CSV with round-trip float formatting
"""
import csv
import io
import json
import math
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np


def format_float(x: float) -> str:
    """
    Format a float with 17 significant digits, always in JSON number syntax

    Args:
        x: Finite float

    Returns:
        String that parses back to the identical double

    Raises:
        ValueError: for NaN or infinity
    """
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"Cannot serialize non-finite value {x}")
    text = format(x, '.17g')
    if not any(c in text for c in '.e'):
        text += '.0'
    return text


def _encode(obj, indent: int, level: int) -> str:
    pad = ' ' * (indent * (level + 1))
    end_pad = ' ' * (indent * level)
    if obj is None:
        return 'null'
    if isinstance(obj, (bool, np.bool_)):
        return 'true' if obj else 'false'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return '{\n' + ',\n'.join(items) + '\n' + end_pad + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return '[' + ', '.join(_encode(v, indent, level + 1) for v in obj) + ']'
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return '[\n' + ',\n'.join(items) + '\n' + end_pad + ']'
    raise TypeError(f"Cannot serialize object of type {type(obj).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    """Serialize dicts/lists/scalars to JSON text ending in a newline; key order is preserved"""
    return _encode(obj, indent, 0) + '\n'


def _csv_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def dumps_csv(rows: List[Dict], columns: Optional[Sequence[str]] = None) -> str:
    """
    Serialize flat dictionaries as CSV with a header row

    Args:
        rows: Records sharing the same keys
        columns: Column order (defaults to the keys of the first row)

    Returns:
        CSV text with '\\n' line endings
    """
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def write_output(text: str, out_path: Optional[str] = None, stream=None):
    """
    Write serialized output to a file or to a stream (stdout by default)
    """
    if out_path:
        with open(out_path, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        return
    if stream is None:
        stream = sys.stdout
    stream.write(text)
    stream.flush()
