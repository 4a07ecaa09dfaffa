"""Deterministic JSON/CSV/OBJ writers (floats at 17 significant digits)."""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np


def fmt(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return json.dumps(x)  # NaN / Infinity, as the json module writes them
    s = format(x, ".17g")
    return "0" if s == "-0" else s


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent=2):
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def obj_text(objects, header=()):
    """Wavefront OBJ with one ``o`` block per (name, vertices, triangles)."""
    lines = [f"# {h}" for h in header]
    base = 0
    for name, V, T in objects:
        lines.append(f"o {name}")
        lines.extend("v " + " ".join(fmt(x) for x in p) for p in V)
        lines.extend(f"f {a + 1 + base} {b + 1 + base} {c + 1 + base}" for a, b, c in T)
        base += len(V)
    return "\n".join(lines) + "\n"
