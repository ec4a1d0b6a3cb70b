"""Positive spanning, positive independence and critical-vector tests.

Every decision is backed by a small linear program solved with a dense
phase-one simplex tableau (Bland's rule); the primal solution or the Farkas
dual of that program is returned as a certificate.
"""
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger
from scipy import linalg

import matkernel
import utils
from exceptions import (
    InternalConsistencyError,
    NotMinimalPositiveBasis,
    NotUnit,
    NumericalFailure,
)

FEASIBILITY_TOL = 1e-8
PIVOT_TOL = 1e-10
DUAL_TOL = 1e-9

POSITIVE_COEFFICIENTS = "PositiveCoefficients"
SEPARATING_VECTOR = "SeparatingVector"


@dataclass(frozen=True)
class Feasible:
    x: np.ndarray

    feasible = True


@dataclass(frozen=True)
class Infeasible:
    # Farkas ray for the shifted system A z = b - lower * A 1, z >= 0:
    # dual^T A <= 0 and dual^T (b - lower * A 1) > 0.
    dual: np.ndarray

    feasible = False


@dataclass(frozen=True)
class SpanCertificate:
    kind: str
    alpha: Optional[np.ndarray] = None
    witness: Optional[np.ndarray] = None

    def verify(self, S, residual_tol=FEASIBILITY_TOL, dual_tol=DUAL_TOL):
        S = matkernel.as_matrix(S)
        if self.kind == POSITIVE_COEFFICIENTS:
            alpha = self.alpha
            return bool(
                np.linalg.norm(S @ alpha) <= residual_tol * np.linalg.norm(alpha)
                and alpha.min() >= 1.0 - 1e-9
            )
        witness = self.witness
        return bool(
            abs(np.linalg.norm(witness) - 1.0) <= 1e-9
            and np.all(witness @ S >= -dual_tol)
        )

    def to_dict(self):
        out = {"kind": self.kind}
        if self.alpha is not None:
            out["alpha"] = self.alpha.tolist()
        if self.witness is not None:
            out["witness"] = self.witness.tolist()
        return out


@dataclass(frozen=True)
class SpanningCheck:
    spans: bool
    certificate: SpanCertificate

    def __bool__(self):
        return self.spans


def _pivot(T, row, col):
    T[row, :] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r, :] -= T[r, col] * T[row, :]


def lp_nonneg_feasible(
    A,
    b,
    lower=0.0,
    feasibility_tol=FEASIBILITY_TOL,
    pivot_tol=PIVOT_TOL,
    max_iter_factor=None,
):
    """Decide whether A x = b has a solution with x >= lower componentwise."""
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).ravel()
    if A.ndim == 1:
        A = A.reshape(b.shape[0], -1)
    m, k = A.shape
    if b.shape[0] != m:
        raise ValueError(f"A has {m} rows but b has {b.shape[0]} entries")

    rhs = b - lower * A.sum(axis=1)
    scale = 1.0 + float(np.abs(rhs).max(initial=0.0))
    if k == 0:
        norm = float(np.linalg.norm(rhs))
        if norm <= feasibility_tol * scale:
            return Feasible(np.zeros(0))
        return Infeasible(rhs / norm)

    signs = np.where(rhs < 0.0, -1.0, 1.0)
    T = np.zeros((m + 1, k + m + 1))
    T[:m, :k] = A * signs[:, None]
    T[:m, k : k + m] = np.eye(m)
    T[:m, -1] = rhs * signs
    T[m, :k] = -T[:m, :k].sum(axis=0)
    T[m, -1] = -T[:m, -1].sum()
    basis = list(range(k, k + m))

    if max_iter_factor is None:
        max_iter_factor = utils.get_hparams().lp.max_iter_factor
    max_iter = max_iter_factor * (m + k)
    for _ in range(max_iter):
        entering = np.flatnonzero(T[m, : k + m] < -pivot_tol)
        if entering.size == 0:
            break
        col = int(entering[0])
        best = None
        for i in range(m):
            a = T[i, col]
            if a > pivot_tol:
                key = (T[i, -1] / a, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            # phase one is bounded below by zero
            raise NumericalFailure("phase-one simplex reported an unbounded ray")
        row = best[1]
        _pivot(T, row, col)
        basis[row] = col
    else:
        raise NumericalFailure(f"simplex did not converge in {max_iter} iterations")

    objective = -T[m, -1]
    if objective <= feasibility_tol * scale:
        z = np.zeros(k)
        structural = [(i, j) for i, j in enumerate(basis) if j < k]
        if structural:
            cols = [j for _, j in structural]
            sol, *_ = linalg.lstsq(A[:, cols], rhs, check_finite=False)
            z[cols] = np.maximum(sol, 0.0)
        x = z + lower
        logger.debug("lp feasible: {}x{} residual {:.2e}", m, k, np.linalg.norm(A @ x - b))
        return Feasible(x)

    pi = 1.0 - T[m, k : k + m]
    dual = signs * pi
    dual /= np.linalg.norm(dual)
    logger.debug("lp infeasible: {}x{} phase-one objective {:.3e}", m, k, objective)
    return Infeasible(dual)


def _columns(S, require_unit):
    S = matkernel.as_matrix(S)
    if require_unit:
        norms = np.linalg.norm(S, axis=0)
        bad = np.flatnonzero(np.abs(norms - 1.0) > matkernel.UNIT_TOL)
        if bad.size:
            raise NotUnit(f"columns {bad.tolist()} are not unit vectors")
    return S


def is_positive_spanning(S, require_unit=True):
    S = _columns(S, require_unit)
    n, s = S.shape
    if matkernel.rank(S) < n:
        witness = linalg.null_space(S.T)[:, 0]
        logger.debug("rank deficient {}x{} set: not positively spanning", n, s)
        return SpanningCheck(False, SpanCertificate(SEPARATING_VECTOR, witness=witness))
    result = lp_nonneg_feasible(S, np.zeros(n), 1.0)
    if result.feasible:
        return SpanningCheck(True, SpanCertificate(POSITIVE_COEFFICIENTS, alpha=result.x))
    witness = -result.dual
    return SpanningCheck(False, SpanCertificate(SEPARATING_VECTOR, witness=witness))


def _in_positive_span_of_others(S, i):
    others = np.delete(S, i, axis=1)
    return lp_nonneg_feasible(others, S[:, i], 0.0).feasible


def is_positively_independent(S, require_unit=True, threads=1):
    S = _columns(S, require_unit)
    hits = utils.parallel_map(
        lambda i: _in_positive_span_of_others(S, i), range(S.shape[1]), threads
    )
    return not any(hits)


def is_positive_basis(S, require_unit=True, threads=1):
    S = _columns(S, require_unit)
    n, s = S.shape
    if not is_positive_spanning(S, require_unit=False):
        return False
    if not is_positively_independent(S, require_unit=False, threads=threads):
        return False
    if not n + 1 <= s <= 2 * n:
        raise InternalConsistencyError(
            f"positive basis of R^{n} reported with {s} vectors, outside [{n + 1}, {2 * n}]"
        )
    return True


def is_minimal_positive_basis_of_span(D):
    """True when the columns of D form a minimal positive basis of their span."""
    D = matkernel.as_matrix(D)
    r = matkernel.rank(D)
    if r == 0 or D.shape[1] != r + 1:
        return False
    return lp_nonneg_feasible(D, np.zeros(D.shape[0]), 1.0).feasible


def is_critical_vector_minimal(D, c, zero_tol=1e-12, threads=1):
    D = matkernel.as_matrix(D)
    c = np.asarray(c, dtype=np.float64).ravel()
    if c.shape[0] != D.shape[0]:
        raise ValueError(f"critical vector has dimension {c.shape[0]}, expected {D.shape[0]}")
    if not is_minimal_positive_basis_of_span(D):
        raise NotMinimalPositiveBasis(
            f"{D.shape[0]}x{D.shape[1]} set is not a minimal positive basis of its span"
        )
    if np.linalg.norm(c) <= zero_tol:
        return True

    def reaches(pair):
        rest = np.delete(D, list(pair), axis=1)
        return lp_nonneg_feasible(rest, -c, 0.0).feasible

    pairs = list(itertools.combinations(range(D.shape[1]), 2))
    return any(utils.parallel_map(reaches, pairs, threads))
