"""Body files, CSV tables and JSON reports.

Body file (JSON), one of::

    {"dimension": 3, "vertices": [[x, y, z], ...]}
    {"generator": "zindler", "params": {"amplitude": 0.2}, "N": 4096}

A top-level ``N`` is passed to the generator as the mesh size.

Column orders are fixed:

* scan CSV: ``dir_index, xi_1..xi_d, t, volume, c_1..c_d, residual_rad``
* metacentre CSV: ``xi_1..xi_d, zeta_1..zeta_d, h, R_fd, R_pred, rel_gap``
"""
import csv
import io
import json
import math

import numpy as np

from .exceptions import GeometryError
from .kernel import ConvexBody
from .zoo import generate


class BodyFileError(GeometryError):
    """Malformed body description; the message names the file, line or field."""


def _fmt(x):
    """Shortest round-tripping text for a float (``repr``), ints kept as ints."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj):
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def body_from_dict(doc, source="<body>"):
    if not isinstance(doc, dict):
        raise BodyFileError(f"{source}: top level must be an object")
    if "generator" in doc:
        params = doc.get("params", {})
        if not isinstance(params, dict):
            raise BodyFileError(f"{source}: field 'params' must be an object")
        params = dict(params)
        if "N" in doc:
            params["N"] = doc["N"]
        try:
            return generate(doc["generator"], params)
        except TypeError as exc:
            raise BodyFileError(f"{source}: field 'params': {exc}") from None
    if "vertices" not in doc:
        raise BodyFileError(f"{source}: need either 'vertices' or 'generator'")
    verts = doc["vertices"]
    if not isinstance(verts, list) or not verts:
        raise BodyFileError(f"{source}: field 'vertices' must be a non-empty list")
    d = doc.get("dimension", len(verts[0]) if isinstance(verts[0], list) else None)
    if not isinstance(d, int) or d < 2:
        raise BodyFileError(f"{source}: field 'dimension' must be an integer >= 2")
    for i, v in enumerate(verts):
        if not isinstance(v, list) or len(v) != d:
            raise BodyFileError(f"{source}: field 'vertices[{i}]' must be a list of {d} numbers")
        for j, x in enumerate(v):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise BodyFileError(f"{source}: field 'vertices[{i}][{j}]' is not a finite number")
    meta = {k: v for k, v in doc.items() if k not in ("vertices", "dimension")}
    return ConvexBody.from_points(np.array(verts, dtype=float), meta=meta)


def loads_body(text, source="<body>"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BodyFileError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return body_from_dict(doc, source)


def load_body(path):
    with open(path, encoding="utf-8") as fh:
        return loads_body(fh.read(), str(path))


def body_to_dict(body):
    return {"dimension": body.dimension, "vertices": body.vertices.tolist()}


def dump_body(body, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(body_to_dict(body)))


# ----------------------------------------------------------------------
# CSV


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def scan_header(d):
    return (["dir_index"] + [f"xi_{k + 1}" for k in range(d)] + ["t", "volume"]
            + [f"c_{k + 1}" for k in range(d)] + ["residual_rad"])


def scan_csv(records):
    """CSV text for buoyancy records, one row per direction in input order."""
    d = len(records[0].xi)
    rows = ([i, *r.xi, r.t, r.volume, *r.center, r.residual] for i, r in enumerate(records))
    return _csv_text(scan_header(d), rows)


def metacenter_header(d):
    return ([f"xi_{k + 1}" for k in range(d)] + [f"zeta_{k + 1}" for k in range(d)]
            + ["h", "R_fd", "R_pred", "rel_gap"])


def metacenter_csv(estimates):
    d = len(estimates[0].xi)
    rows = ([*e.xi, *e.zeta, e.h, e.R_fd, e.R_pred, e.rel_gap] for e in estimates)
    return _csv_text(metacenter_header(d), rows)


def read_csv(text):
    """Parse a CSV written above back into a header and a float array."""
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)
