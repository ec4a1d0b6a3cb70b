"""Generators for positive bases and their partitions into minimal blocks.

A partition lists the minimal sub-positive bases of a positive basis of R^n.
Block j (j >= 1) may carry a critical vector: its columns are the columns of
a minimal positive basis of a subspace shifted by that vector. Bases whose
critical vectors are all zero form the family Omega; if in addition the
blocks are pairwise orthogonal the basis is in Omega+.
"""
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from loguru import logger
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

import matkernel
import spanning
from exceptions import (
    CompositionNotPositiveBasis,
    CriticalVectorRejected,
    DimensionError,
    InvalidBlock,
    InvalidPartition,
    NotOmegaPlus,
    SizeOutOfRange,
)

ORTHOGONALITY_TOL = 1e-9
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class PartitionBlock:
    column_indices: Tuple[int, ...]
    m: int
    critical_vector: np.ndarray = field(compare=False)

    @property
    def has_zero_critical(self):
        return float(np.linalg.norm(self.critical_vector)) <= ZERO_TOL

    def to_dict(self):
        return {
            "m": self.m,
            "column_indices": list(self.column_indices),
            "critical_vector": [float(x) for x in self.critical_vector],
        }


@dataclass(frozen=True)
class Partition:
    blocks: Tuple[PartitionBlock, ...]
    n: int
    s: int

    def __post_init__(self):
        dims = [b.m for b in self.blocks]
        if any(m < 1 or m > self.n for m in dims):
            raise InvalidPartition(f"block dimensions {dims} outside [1, {self.n}]")
        if sum(dims) != self.n:
            raise InvalidPartition(f"block dimensions {dims} do not sum to n={self.n}")
        if len(self.blocks) != self.s - self.n:
            raise InvalidPartition(
                f"{len(self.blocks)} blocks for s-n={self.s - self.n}"
            )
        seen = []
        for b in self.blocks:
            if len(b.column_indices) != b.m + 1:
                raise InvalidPartition(
                    f"block of dimension {b.m} lists {len(b.column_indices)} columns"
                )
            if np.asarray(b.critical_vector).shape != (self.n,):
                raise InvalidPartition(f"critical vector must have {self.n} entries")
            seen.extend(b.column_indices)
        if sorted(seen) != list(range(self.s)):
            raise InvalidPartition("block columns must be disjoint and cover every column")

    @property
    def dims(self):
        return [b.m for b in self.blocks]

    @property
    def q(self):
        return len(self.blocks)

    @property
    def zero_critical(self):
        return all(b.has_zero_critical for b in self.blocks)

    def to_dict(self):
        return {"blocks": [b.to_dict() for b in self.blocks]}

    @classmethod
    def from_blocks(cls, n, s, blocks):
        """blocks: iterable of (column_indices, m, critical_vector or None)."""
        built = []
        for cols, m, c in blocks:
            c = np.zeros(n) if c is None else np.asarray(c, dtype=np.float64).ravel()
            built.append(PartitionBlock(tuple(int(i) for i in cols), int(m), c))
        return cls(tuple(built), n, s)

    @classmethod
    def from_dict(cls, data, n, s):
        try:
            blocks = [
                (b["column_indices"], b["m"], b.get("critical_vector"))
                for b in data["blocks"]
            ]
        except (KeyError, TypeError) as e:
            raise InvalidPartition(f"malformed partition: {e}")
        return cls.from_blocks(n, s, blocks)


def _check_size(n, s):
    if n < 1 or not n + 1 <= s <= 2 * n:
        raise SizeOutOfRange(
            f"size s={s} outside [n+1, 2n] = [{n + 1}, {2 * n}] for n={n}"
        )


def size_class(n, s):
    if n < 1 or not n + 1 <= s <= 2 * n:
        return "invalid"
    if s == n + 1:
        return "minimal"
    if s == 2 * n:
        return "maximal"
    return "intermediate"


def optimal_minimal(m, ambient=None, offset=0):
    """Regular simplex: m+1 unit columns with pairwise dot products -1/m,
    supported on coordinates offset..offset+m-1 of R^ambient."""
    ambient = m if ambient is None else ambient
    if m < 1 or ambient < m or offset < 0 or offset + m > ambient:
        raise DimensionError(
            f"cannot place a {m}-dimensional simplex at offset {offset} in R^{ambient}"
        )
    centered = np.eye(m + 1) - 1.0 / (m + 1)
    Q, R = np.linalg.qr(centered[:, :m])
    coords = Q.T @ centered
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    coords *= signs[:, None]
    coords /= np.linalg.norm(coords, axis=0)

    out = np.zeros((ambient, m + 1))
    out[offset : offset + m, :] = coords
    return out


def maximal(n):
    if n < 1:
        raise DimensionError(f"dimension must be positive, got {n}")
    D = np.hstack([np.eye(n), -np.eye(n)])
    part = Partition.from_blocks(n, 2 * n, [((i, n + i), 1, None) for i in range(n)])
    return D, part


def dims_for(n, s):
    _check_size(n, s)
    q = s - n
    floor, r = divmod(n, q)
    return [floor] * (q - r) + [floor + 1] * r


def cm_formula(n, s):
    _check_size(n, s)
    q = s - n
    floor, r = divmod(n, q)
    ceil = floor + (1 if r else 0)
    return 1.0 / math.sqrt((q - r) * floor**2 + r * ceil**2)


def count_bases(part):
    return math.prod(m + 1 for m in part.dims)


def _assemble(n, dims):
    blocks, layout = [], []
    offset = col = 0
    for m in dims:
        blocks.append(optimal_minimal(m, n, offset))
        layout.append((range(col, col + m + 1), m, None))
        offset += m
        col += m + 1
    return np.hstack(blocks), Partition.from_blocks(n, col, layout)


def optimal_intermediate(n, s):
    dims = dims_for(n, s)
    D, part = _assemble(n, dims)
    logger.debug("optimal basis n={} s={} dims={}", n, s, dims)
    return D, part


def block_notation(dims):
    counts = Counter(dims)
    parts = []
    for m in sorted(counts, reverse=True):
        k = counts[m]
        parts.append(f"D{m}" if k == 1 else f"(D{m})^{k}")
    return ",".join(parts)


def table_cells(max_n):
    """Rows s = 3..2*max_n of (s, [cell for n = 2..max_n]); a cell is None
    when no positive basis of that size exists."""
    if max_n < 2:
        raise ValueError(f"max_n must be at least 2, got {max_n}")
    rows = []
    for s in range(3, 2 * max_n + 1):
        cells = []
        for n in range(2, max_n + 1):
            if n + 1 <= s <= 2 * n:
                dims = dims_for(n, s)
                cells.append(
                    {
                        "n": n,
                        "s": s,
                        "dims": dims,
                        "notation": block_notation(dims),
                        "cm": cm_formula(n, s),
                    }
                )
            else:
                cells.append(None)
        rows.append((s, cells))
    return rows


def validate_partition(
    D,
    part,
    require_orthogonal=False,
    require_zero_critical=True,
    tol=ORTHOGONALITY_TOL,
):
    """Check part against the columns of D.

    Blocks without a critical vector must be minimal positive bases of their
    span. Shifted blocks are only checked structurally.
    """
    D = matkernel.as_matrix(D)
    n, s = D.shape
    if (part.n, part.s) != (n, s):
        raise InvalidPartition(
            f"partition is for {part.n}x{part.s}, matrix is {n}x{s}"
        )
    if require_zero_critical and not part.zero_critical:
        raise InvalidPartition("partition has nonzero critical vectors")
    for j, block in enumerate(part.blocks):
        cols = list(block.column_indices)
        if not block.has_zero_critical:
            continue
        sub = D[:, cols]
        if matkernel.rank(sub) != block.m:
            raise InvalidPartition(f"block {j} does not span a {block.m}-dimensional subspace")
        if not spanning.is_minimal_positive_basis_of_span(sub):
            raise InvalidPartition(f"block {j} is not a minimal positive basis of its span")
    if matkernel.rank(D) != n:
        raise InvalidPartition("block subspaces do not form a direct sum of R^n")
    if require_orthogonal:
        G = np.abs(matkernel.gram(D))
        for a, b in itertools.combinations(part.blocks, 2):
            cross = G[np.ix_(list(a.column_indices), list(b.column_indices))]
            if cross.max() > tol:
                raise InvalidPartition(
                    f"blocks are not orthogonal (max |dot| = {cross.max():.3e})"
                )
    return part


def compose_partition(blocks, normalize=True, threads=1):
    """Concatenate minimal sub-positive bases, shifting block j by the
    critical vector paired with it; the first vector must be zero."""
    if not blocks:
        raise InvalidBlock("no blocks given")
    mats, shifts = [], []
    n = None
    for j, (mat, c) in enumerate(blocks):
        mat = matkernel.as_matrix(mat)
        if n is None:
            n = mat.shape[0]
        if mat.shape[0] != n:
            raise InvalidBlock(f"block {j} lives in R^{mat.shape[0]}, expected R^{n}")
        c = np.zeros(n) if c is None else np.asarray(c, dtype=np.float64).ravel()
        if c.shape != (n,):
            raise InvalidBlock(f"critical vector {j} must have {n} entries")
        if not spanning.is_minimal_positive_basis_of_span(mat):
            raise InvalidBlock(f"block {j} is not a minimal positive basis of its span")
        mats.append(mat)
        shifts.append(c)

    if np.linalg.norm(shifts[0]) > ZERO_TOL:
        raise InvalidBlock("the first block cannot carry a critical vector")
    dims = [mat.shape[1] - 1 for mat in mats]
    if sum(dims) != n or matkernel.rank(np.hstack(mats)) != n:
        raise InvalidBlock(
            f"block subspaces of dimensions {dims} do not form a direct sum of R^{n}"
        )

    for j in range(1, len(mats)):
        if np.linalg.norm(shifts[j]) <= ZERO_TOL:
            continue
        if j == 1:
            if not spanning.is_critical_vector_minimal(mats[0], shifts[j], threads=threads):
                raise CriticalVectorRejected(
                    f"{shifts[j].tolist()} is not a critical vector of the first block"
                )
        else:
            logger.info("critical vector of block {} checked only on the composed set", j)

    columns, layout = [], []
    col = 0
    for mat, c, m in zip(mats, shifts, dims):
        shifted = mat + c[:, None]
        if np.any(np.linalg.norm(shifted, axis=0) <= ZERO_TOL):
            raise CompositionNotPositiveBasis("a shifted column vanished")
        if normalize:
            shifted = matkernel.normalize_columns(shifted)
        columns.append(shifted)
        layout.append((range(col, col + m + 1), m, c))
        col += m + 1
    D = np.hstack(columns)
    part = Partition.from_blocks(n, col, layout)

    if not spanning.is_positive_basis(D, require_unit=normalize, threads=threads):
        raise CompositionNotPositiveBasis("composed set is not a positive basis")
    return D, part


def detect_partition_orthogonal(D, tol=ORTHOGONALITY_TOL):
    D = matkernel.as_matrix(D)
    spanning._columns(D, require_unit=True)
    n, s = D.shape
    adjacency = np.abs(matkernel.gram(D)) > tol
    np.fill_diagonal(adjacency, False)
    _, labels = connected_components(csr_matrix(adjacency), directed=False)

    order = []
    for label in labels:
        if label not in order:
            order.append(label)
    layout = []
    for label in order:
        cols = [int(i) for i in np.flatnonzero(labels == label)]
        sub = D[:, cols]
        if not spanning.is_minimal_positive_basis_of_span(sub):
            raise NotOmegaPlus(
                f"columns {cols} (rank {matkernel.rank(sub)}) are not a minimal positive basis"
            )
        layout.append((cols, len(cols) - 1, None))
    dims = [m for _, m, _ in layout]
    if sum(dims) != n or matkernel.rank(D) != n or len(layout) != s - n:
        raise NotOmegaPlus(f"components of dimensions {dims} do not split R^{n}")
    return Partition.from_blocks(n, s, layout)


def realign_transform(D, w):
    """Orthonormal T with T d1 = w."""
    D = matkernel.as_matrix(D)
    w = np.asarray(w, dtype=np.float64).ravel()
    matkernel.check_unit(w)
    if w.shape[0] != D.shape[0]:
        raise DimensionError(f"target vector has {w.shape[0]} entries, expected {D.shape[0]}")
    first = D[:, 0] / np.linalg.norm(D[:, 0])
    return matkernel.householder_align(w) @ matkernel.householder_align(first).T


def realign(D, w):
    """Orthonormal transform of D whose first column becomes w."""
    D = matkernel.as_matrix(D)
    return realign_transform(D, w) @ D


def realign_block(D, part, block, w):
    """Rotate one block inside its own span so that its first column becomes w."""
    D = matkernel.as_matrix(D).copy()
    w = np.asarray(w, dtype=np.float64).ravel()
    matkernel.check_unit(w)
    cols = list(part.blocks[block].column_indices)
    Q = linalg.orth(D[:, cols])
    if np.linalg.norm(w - Q @ (Q.T @ w)) > matkernel.UNIT_TOL:
        raise InvalidPartition(f"target vector is outside the span of block {block}")
    a = Q.T @ (D[:, cols[0]] / np.linalg.norm(D[:, cols[0]]))
    b = Q.T @ w
    v = a - b
    vv = float(v @ v)
    if vv < 1e-30:
        return D
    H = np.eye(Q.shape[1]) - (2.0 / vv) * np.outer(v, v)
    T = np.eye(D.shape[0]) + Q @ (H - np.eye(Q.shape[1])) @ Q.T
    D[:, cols] = T @ D[:, cols]
    return D


def _random_dims(n, q, rng):
    if q == 1:
        return [n]
    cuts = np.sort(rng.choice(np.arange(1, n), size=q - 1, replace=False))
    return np.diff(np.concatenate([[0], cuts, [n]])).astype(int).tolist()


def random_positive_basis(n, s, rng, critical=False):
    """Seeded random positive basis: randomly sized simplices mixed by a
    random invertible map, composed (optionally with a critical vector on the
    second block) and realigned by a random orthonormal matrix."""
    _check_size(n, s)
    dims = _random_dims(n, s - n, rng)
    base, _ = _assemble(n, dims)
    mix = matkernel.random_orthonormal(n, rng) @ np.diag(rng.uniform(0.5, 1.5, n)) @ matkernel.random_orthonormal(n, rng)
    mixed = matkernel.normalize_columns(mix @ base)

    blocks = []
    col = 0
    for m in dims:
        blocks.append([mixed[:, col : col + m + 1], None])
        col += m + 1
    if critical and len(blocks) > 1 and dims[0] >= 2:
        first = blocks[0][0]
        drop = rng.choice(first.shape[1], size=2, replace=False)
        rest = np.delete(first, drop, axis=1)
        blocks[1][1] = -0.5 * rest @ rng.uniform(0.1, 1.0, rest.shape[1])

    D, part = compose_partition([tuple(b) for b in blocks])
    Q = matkernel.random_orthonormal(n, rng)
    rotated = Partition.from_blocks(
        n, s, [(b.column_indices, b.m, Q @ b.critical_vector) for b in part.blocks]
    )
    return Q @ D, rotated
