"""Cosine measure of a positive basis.

The deterministic method evaluates every basis of R^n contained in the set:
for a basis B, u_B = gamma_B B^-T 1 has the same dot product gamma_B with
each column of B, and the cosine measure is the smallest value of
max_j u_B . d_j over all bases. For bases built from orthogonal minimal
blocks only one column per block is dropped and max_j u_B . d_j = gamma_B.
"""
import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import tqdm
from loguru import logger

import matkernel
import minmax_sampling
import spanning
import utils
from construct import validate_partition
from exceptions import NotPositiveBasis, NumericalFailure, Singular

TIE_TOL = 1e-8
DEDUP_TOL = 1e-6
ACTIVE_TOL = 1e-8

FULL = "full"
STRUCTURED = "structured"
SAMPLED = "sampled"

_EVAL_BATCH = 1024


@dataclass(frozen=True)
class BasisEvaluation:
    column_indices: Tuple[int, ...]
    gamma: float
    u: np.ndarray = field(compare=False)
    p: Optional[np.ndarray] = field(default=None, compare=False)
    p_max: float = 0.0


@dataclass
class CmResult:
    value: float
    cosine_vectors: List[np.ndarray]
    active_sets: List[List[int]]
    argmin_bases: List[List[int]]
    method: str = FULL

    def to_dict(self):
        return {
            "method": self.method,
            "value": float(self.value),
            "cosine_vectors": [[float(x) for x in u] for u in self.cosine_vectors],
            "active_sets": [list(a) for a in self.active_sets],
            "argmin_bases": [list(b) for b in self.argmin_bases],
        }


def enumerate_bases(D):
    """Rank-n column subsets of D, in lexicographic order."""
    D = matkernel.as_matrix(D)
    n, s = D.shape
    for idx in itertools.combinations(range(s), n):
        if matkernel.rank(D[:, idx]) == n:
            yield list(idx)


def structured_bases(part):
    """Bases obtained by dropping one column from every block."""
    choices = [
        [tuple(c for c in b.column_indices if c != drop) for drop in b.column_indices]
        for b in part.blocks
    ]
    for combo in itertools.product(*choices):
        yield sorted(itertools.chain.from_iterable(combo))


def evaluate_basis(D, idx, with_dots=True):
    D = matkernel.as_matrix(D)
    idx = [int(i) for i in idx]
    B = D[:, idx]
    # x = B^-T 1, so 1^T G^-1 1 = |x|^2 without forming the Gram matrix
    x = matkernel.solve_transposed(B, np.ones(len(idx)))
    total = float(x @ x)
    if total <= 0.0:
        raise NumericalFailure(f"grand sum {total:.3e} of an inverse Gram matrix is not positive")
    gamma = 1.0 / math.sqrt(total)
    u = gamma * x
    u /= np.linalg.norm(u)
    if not with_dots:
        return BasisEvaluation(tuple(idx), gamma, u, None, gamma)
    p = u @ D
    return BasisEvaluation(tuple(idx), gamma, u, p, float(p.max()))


def active_set(D, u, cm_value, tol=ACTIVE_TOL):
    D = matkernel.as_matrix(D)
    u = np.asarray(u, dtype=np.float64).ravel()
    matkernel.check_unit(u, what="cosine vector")
    dots = u @ D
    return [int(i) for i in np.flatnonzero(np.abs(dots - cm_value) <= tol)]


def _evaluate_all(D, bases, with_dots, threads, quiet):
    evaluations = []
    with tqdm.tqdm(total=len(bases), disable=quiet, desc="bases") as pbar:
        for start in range(0, len(bases), _EVAL_BATCH):
            batch = bases[start : start + _EVAL_BATCH]
            evaluations.extend(
                utils.parallel_map(lambda idx: evaluate_basis(D, idx, with_dots), batch, threads)
            )
            pbar.update(len(batch))
    return evaluations


def _reduce(D, evaluations, method, tie_tol, dedup_tol, active_tol):
    value = min(e.p_max for e in evaluations)
    winners = [e for e in evaluations if e.p_max <= value + tie_tol]
    cosine_vectors = []
    for e in winners:
        if all(np.abs(e.u - u).max() > dedup_tol for u in cosine_vectors):
            cosine_vectors.append(e.u)
    return CmResult(
        value=float(value),
        cosine_vectors=cosine_vectors,
        active_sets=[active_set(D, u, value, active_tol) for u in cosine_vectors],
        argmin_bases=[list(e.column_indices) for e in winners],
        method=method,
    )


def cosine_measure_full(
    D,
    threads=None,
    quiet=True,
    tie_tol=TIE_TOL,
    dedup_tol=DEDUP_TOL,
    active_tol=ACTIVE_TOL,
):
    D = matkernel.as_matrix(D)
    if not spanning.is_positive_basis(D, threads=threads):
        raise NotPositiveBasis(f"columns of the {D.shape[0]}x{D.shape[1]} matrix are not a positive basis")
    bases = list(enumerate_bases(D))
    logger.debug("evaluating {} bases of R^{}", len(bases), D.shape[0])
    evaluations = _evaluate_all(D, bases, True, threads, quiet)
    return _reduce(D, evaluations, FULL, tie_tol, dedup_tol, active_tol)


def cosine_measure_structured(
    D,
    part,
    threads=None,
    quiet=True,
    tie_tol=TIE_TOL,
    dedup_tol=DEDUP_TOL,
    active_tol=ACTIVE_TOL,
):
    D = matkernel.as_matrix(D)
    spanning._columns(D, require_unit=True)
    validate_partition(D, part, require_zero_critical=True)
    bases = list(structured_bases(part))
    logger.debug("evaluating {} structured bases, block dims {}", len(bases), part.dims)
    evaluations = _evaluate_all(D, bases, False, threads, quiet)
    return _reduce(D, evaluations, STRUCTURED, tie_tol, dedup_tol, active_tol)


def cosine_measure_sampled(D, samples, seed, threads=None, chunk_size=None, quiet=True):
    """min over seeded random unit u of max_j u . d_j / |d_j|.

    Samples come in fixed-size chunks with per-chunk seeds, so the value for a
    fixed seed never increases with the sample count.
    """
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    try:
        directions = matkernel.normalize_columns(D)
    except ValueError as e:
        raise NotPositiveBasis(str(e))
    n = directions.shape[0]
    if chunk_size is None:
        chunk_size = utils.get_hparams().sampling.chunk_size
    chunks = [
        (i, min(chunk_size, samples - i * chunk_size))
        for i in range(math.ceil(samples / chunk_size))
    ]

    def run(chunk):
        i, size = chunk
        units = minmax_sampling.unit_vectors_chunk(n, chunk_size, seed, i)[:size]
        return minmax_sampling.minmax(units, directions)

    values = []
    with tqdm.tqdm(total=samples, disable=quiet, desc="samples") as pbar:
        for start in range(0, len(chunks), 16):
            batch = chunks[start : start + 16]
            values.extend(utils.parallel_map(run, batch, threads))
            pbar.update(sum(size for _, size in batch))
    value = min(values)
    logger.debug("sampled min-max {:.6f} from {} unit vectors (seed {})", value, samples, seed)
    return value


def grand_sum_decomposition_check(B2, b1):
    """Grand sum of the inverse Gram matrix of [B2 | b1], computed directly
    and through the rank-one update of the Gram inverse of B2."""
    B2 = matkernel.as_matrix(B2)
    b1 = np.asarray(b1, dtype=np.float64).ravel()
    lhs = matkernel.grand_sum(matkernel.invert(matkernel.gram(np.column_stack([B2, b1]))))

    G2_inv = matkernel.invert(matkernel.gram(B2))
    v = B2.T @ b1
    schur = float(b1 @ b1) - float(v @ G2_inv @ v)
    if abs(schur) < matkernel.DEFAULT_RANK_TOL:
        raise Singular(f"Schur complement {schur:.3e} is numerically zero")
    c = 1.0 / schur
    ones = np.ones(B2.shape[1])
    rhs = matkernel.grand_sum(G2_inv) + c * (1.0 - float(ones @ G2_inv @ v)) ** 2
    return lhs, rhs
