"""Sparse ridge regression with per-coefficient shrinkage targets.

Solves

    min_{b0, b}  ||y - b0 - X b||^2 + sum_j w_j (b_j - c_j)^2

with an unpenalized intercept ``b0``. Writing ``b = c + d`` turns this into
plain ridge on the adjusted response ``y - X c``. The intercept is profiled
out by centering, leaving the normal equations

    (Xc'Xc + W) d = Xc' (y - X c)

with ``Xc`` the column-centred design. ``Xc`` is never formed; products go
through the sparse ``X`` and its column means. The system is solved with
Jacobi-preconditioned conjugate gradient.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .core import OFF, DEF, EmptyData, LrapmError, Possession

logger = logging.getLogger(__name__)

PLAYER, LINEUP = "player", "lineup"
DEFAULT_TOL = 1e-8


class NonConvergence(LrapmError):
    pass


class DimensionMismatch(LrapmError, ValueError):
    pass


@dataclass(frozen=True)
class SparseDesign:
    """Possession-by-column design with +1 for offense and -1 for defense.

    Columns come in pairs: entity ``k`` owns column ``2k`` (offense) and
    ``2k + 1`` (defense), entities in sorted order.
    """

    matrix: sp.csr_matrix
    entities: tuple
    mode: str

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def column_index(self) -> dict:
        out = {}
        for k, ent in enumerate(self.entities):
            out[(ent, OFF)] = 2 * k
            out[(ent, DEF)] = 2 * k + 1
        return out

    @property
    def off_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_cols, dtype=bool)
        mask[0::2] = True
        return mask

    def entries(self, row: int) -> list:
        lo, hi = self.matrix.indptr[row], self.matrix.indptr[row + 1]
        return list(zip(self.matrix.indices[lo:hi].tolist(), self.matrix.data[lo:hi].tolist()))


@dataclass(frozen=True)
class PenaltySpec:
    weights: np.ndarray
    centers: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        c = np.asarray(self.centers, dtype=float)
        if w.shape != c.shape or w.ndim != 1:
            raise DimensionMismatch("weights and centers must be 1-d arrays of equal length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("penalty weights must be finite and >= 0")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "centers", c)

    @classmethod
    def uniform(cls, n_cols: int, lam: float, centers=None) -> "PenaltySpec":
        c = np.zeros(n_cols) if centers is None else centers
        return cls(np.full(n_cols, float(lam)), c)

    @classmethod
    def sided(cls, lam_off: float, lam_def: float, centers) -> "PenaltySpec":
        """Offense columns get ``lam_off``, defense columns ``lam_def``."""
        c = np.asarray(centers, dtype=float)
        w = np.empty(len(c))
        w[0::2] = lam_off
        w[1::2] = lam_def
        return cls(w, c)

    def scaled(self, candidate) -> "PenaltySpec":
        """Template weights multiplied by a scalar or an (off, def) pair."""
        if np.ndim(candidate) == 0:
            return PenaltySpec(self.weights * float(candidate), self.centers)
        lam_off, lam_def = candidate
        mult = np.empty(len(self.weights))
        mult[0::2] = lam_off
        mult[1::2] = lam_def
        return PenaltySpec(self.weights * mult, self.centers)


@dataclass(frozen=True)
class RidgeSolution:
    intercept: float
    coefficients: np.ndarray
    iterations: int
    residual_norm: float

    def predict(self, design: SparseDesign) -> np.ndarray:
        return self.intercept + design.matrix @ self.coefficients


def _entity_keys(p: Possession, mode: str) -> tuple:
    if mode == PLAYER:
        return p.offense.players, p.defense.players
    if mode == LINEUP:
        return (p.offense,), (p.defense,)
    raise ValueError(f"unknown design mode {mode!r}")


def design_entities(possessions: Iterable[Possession], mode: str) -> tuple:
    ents = set()
    for p in possessions:
        off, deff = _entity_keys(p, mode)
        ents.update(off)
        ents.update(deff)
    return tuple(sorted(ents))


def build_design(
    possessions: Iterable[Possession],
    mode: str,
    entities: Optional[Sequence] = None,
) -> tuple:
    """Encode possessions as a sparse design and response vector.

    ``entities`` fixes the column layout, e.g. to share it between a training
    and a validation set. By default it is every entity in ``possessions``.
    """
    poss = list(possessions)
    if not poss:
        raise EmptyData("cannot build a design from zero possessions")
    if entities is None:
        entities = design_entities(poss, mode)
    entities = tuple(entities)
    index = {e: k for k, e in enumerate(entities)}
    per_side = 5 if mode == PLAYER else 1
    nnz = 2 * per_side
    cols = np.empty(len(poss) * nnz, dtype=np.int64)
    y = np.empty(len(poss), dtype=float)
    try:
        for i, p in enumerate(poss):
            off, deff = _entity_keys(p, mode)
            base = i * nnz
            for j, e in enumerate(off):
                cols[base + j] = 2 * index[e]
            for j, e in enumerate(deff):
                cols[base + per_side + j] = 2 * index[e] + 1
            y[i] = p.points
    except KeyError as exc:
        raise KeyError(f"entity {exc.args[0]!r} missing from the column layout") from None
    vals = np.tile(np.r_[np.ones(per_side), -np.ones(per_side)], len(poss))
    indptr = np.arange(0, len(poss) * nnz + 1, nnz)
    X = sp.csr_matrix((vals, cols, indptr), shape=(len(poss), 2 * len(entities)))
    X.sort_indices()
    return SparseDesign(X, entities, mode), y


def solve(
    design: SparseDesign,
    y,
    penalty: PenaltySpec,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
) -> RidgeSolution:
    X = design.matrix if isinstance(design, SparseDesign) else sp.csr_matrix(design)
    y = np.asarray(y, dtype=float)
    n, m = X.shape
    if y.shape != (n,) or penalty.weights.shape != (m,):
        raise DimensionMismatch(f"X is {n}x{m}, y has {y.shape}, penalty has {penalty.weights.shape}")
    if n == 0:
        raise EmptyData("no rows")
    if max_iter is None:
        max_iter = max(10 * m, 50)

    w = penalty.weights
    c = penalty.centers
    Xt = X.T.tocsr()
    xbar = np.asarray(X.mean(axis=0)).ravel()

    adj = y - X @ c
    adj_mean = adj.mean()
    rhs = Xt @ (adj - adj_mean)

    def matvec(v):
        u = X @ v
        u -= u.mean()
        return Xt @ u + w * v

    col_sq = np.asarray(X.multiply(X).sum(axis=0)).ravel()
    diag = col_sq - n * xbar**2 + w
    diag[diag <= 1e-12 * max(diag.max(initial=0.0), 1.0)] = 1.0

    delta, iters, rel = _pcg(matvec, rhs, 1.0 / diag, tol, max_iter)
    if rel > tol:
        raise NonConvergence(f"residual {rel:.3e} > tol {tol:.1e} after {iters} iterations")
    intercept = float(adj_mean - xbar @ delta)
    return RidgeSolution(intercept, c + delta, iters, rel)


def _pcg(matvec, b, inv_diag, tol, max_iter):
    """Preconditioned CG from zero; returns (x, iterations, relative residual).

    The recursive residual drifts from the true one, so convergence is
    confirmed against a recomputed residual and CG restarts if they disagree.
    """
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if bnorm == 0.0:
        return x, 0, 0.0
    iters = 0
    r = b.copy()
    rel = 1.0
    while iters < max_iter:
        z = inv_diag * r
        p = z.copy()
        rz = r @ z
        while iters < max_iter:
            Ap = matvec(p)
            pAp = p @ Ap
            if pAp <= 0.0:
                break
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            iters += 1
            if np.linalg.norm(r) <= tol * bnorm:
                break
            z = inv_diag * r
            rz_next = r @ z
            p = z + (rz_next / rz) * p
            rz = rz_next
        r = b - matvec(x)
        rel = np.linalg.norm(r) / bnorm
        if rel <= tol or pAp <= 0.0:
            break
    return x, iters, rel


def rmse(pred, actual) -> float:
    d = np.asarray(pred, dtype=float) - np.asarray(actual, dtype=float)
    return float(np.sqrt(np.mean(d * d)))


def _threads(threads: Optional[int]) -> int:
    if threads is None:
        threads = int(os.environ.get("LRAPM_THREADS", "1") or 1)
    return max(1, threads)


def _candidate_order(candidate) -> tuple:
    # larger lambda wins ties; pairs compare by total then offense
    if np.ndim(candidate) == 0:
        return (float(candidate),)
    return (float(candidate[0]) + float(candidate[1]), float(candidate[0]))


def grid_scores(
    train: tuple,
    val: tuple,
    candidates: Sequence,
    penalty_template: PenaltySpec,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    threads: Optional[int] = None,
) -> list:
    """Validation RMSE for each candidate, in candidate order."""
    candidates = list(candidates)
    if not candidates:
        raise EmptyData("no candidate lambdas")
    tr_design, tr_y = train
    va_design, va_y = val
    if tr_design.n_cols != va_design.n_cols or (
        isinstance(tr_design, SparseDesign) and tr_design.entities != va_design.entities
    ):
        raise DimensionMismatch("train and validation designs must share their column layout")
    if len(va_y) == 0:
        raise EmptyData("empty validation set")

    def score(cand):
        sol = solve(tr_design, tr_y, penalty_template.scaled(cand), tol, max_iter)
        return rmse(sol.predict(va_design), va_y)

    n_workers = min(_threads(threads), len(candidates))
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            scores = list(pool.map(score, candidates))
    else:
        scores = [score(c) for c in candidates]
    for cand, s in zip(candidates, scores):
        logger.debug("lambda %s -> validation rmse %.6f", cand, s)
    return list(zip(candidates, scores))


def grid_search(
    train: tuple,
    val: tuple,
    candidate_lambdas: Sequence,
    penalty_template: PenaltySpec,
    tol: float = DEFAULT_TOL,
    max_iter: Optional[int] = None,
    threads: Optional[int] = None,
) -> Union[float, tuple]:
    scores = grid_scores(train, val, candidate_lambdas, penalty_template, tol, max_iter, threads)
    best, _ = min(scores, key=lambda cs: (cs[1], tuple(-v for v in _candidate_order(cs[0]))))
    return best
