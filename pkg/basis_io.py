"""Basis files.

JSON layout::

    {"n": 3, "s": 5,
     "columns": [[...n floats...], ...s columns...],
     "partition": {"blocks": [{"m": 2, "column_indices": [0, 1, 2],
                               "critical_vector": [0.0, 0.0, 0.0]}, ...]},
     "meta": {"generator": "optimal_intermediate", ...}}

CSV layout: n rows by s comma-separated columns, no header, no partition.
"""
import io
import json
import os
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from loguru import logger

from construct import Partition
from exceptions import BasisFileError

JSON = "json"
CSV = "csv"
FORMATS = (JSON, CSV)
CSV_FLOAT_FORMAT = "%.17g"


@dataclass
class BasisFile:
    matrix: np.ndarray
    partition: Optional[Partition] = None
    meta: Dict[str, str] = field(default_factory=dict)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def s(self):
        return self.matrix.shape[1]

    def to_dict(self):
        out = {
            "n": self.n,
            "s": self.s,
            "columns": [[float(x) for x in col] for col in self.matrix.T],
        }
        if self.partition is not None:
            out["partition"] = self.partition.to_dict()
        if self.meta:
            out["meta"] = {str(k): str(v) for k, v in self.meta.items()}
        return out


def infer_format(path, fmt=None):
    if fmt is not None:
        if fmt not in FORMATS:
            raise BasisFileError(f"unknown format {fmt!r}, expected one of {FORMATS}")
        return fmt
    if path is not None and str(path).lower().endswith(".csv"):
        return CSV
    return JSON


def dumps(basis, fmt=JSON):
    if fmt == CSV:
        if basis.partition is not None or basis.meta:
            logger.info("csv output drops partition and meta information")
        buf = io.StringIO()
        np.savetxt(buf, basis.matrix, fmt=CSV_FLOAT_FORMAT, delimiter=",")
        return buf.getvalue()
    return json.dumps(basis.to_dict(), indent=2) + "\n"


def _parse_json(text, with_partition=True):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise BasisFileError(f"invalid JSON: {e}")
    if not isinstance(data, dict) or "columns" not in data:
        raise BasisFileError("basis file must be an object with a 'columns' list")
    try:
        columns = np.array(data["columns"], dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise BasisFileError(f"columns are not a rectangular list of numbers: {e}")
    if columns.ndim != 2 or columns.size == 0:
        raise BasisFileError("columns must be a non-empty list of equal-length lists")
    matrix = columns.T.copy()
    n, s = matrix.shape
    if data.get("n", n) != n or data.get("s", s) != s:
        raise BasisFileError(
            f"header says {data.get('n')}x{data.get('s')}, columns give {n}x{s}"
        )
    partition = None
    if with_partition and data.get("partition") is not None:
        partition = Partition.from_dict(data["partition"], n, s)
    meta = data.get("meta") or {}
    if not isinstance(meta, dict):
        raise BasisFileError("meta must be an object")
    return BasisFile(matrix, partition, {str(k): str(v) for k, v in meta.items()})


def _parse_csv(text):
    try:
        matrix = np.loadtxt(io.StringIO(text), delimiter=",", ndmin=2, dtype=np.float64)
    except ValueError as e:
        raise BasisFileError(f"invalid CSV: {e}")
    if matrix.size == 0:
        raise BasisFileError("CSV file holds no entries")
    return BasisFile(matrix)


def loads(text, fmt=JSON, with_partition=True):
    basis = _parse_csv(text) if fmt == CSV else _parse_json(text, with_partition)
    if not np.all(np.isfinite(basis.matrix)):
        raise BasisFileError("matrix has non-finite entries")
    return basis


def read_basis_file(path, fmt=None, with_partition=True):
    fmt = infer_format(path, fmt)
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise BasisFileError(f"cannot read {path}: {e.strerror}")
    logger.debug("reading {} basis file {}", fmt, path)
    return loads(text, fmt, with_partition)


def write_basis_file(basis, path, fmt=None):
    fmt = infer_format(path, fmt)
    text = dumps(basis, fmt)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.debug("wrote {}x{} basis to {}", basis.n, basis.s, path)
