"""Log-determinant objective over pose-graph topology.

f(A) = (1/n) * logdet(L0 + sum_{z in A} gamma_z * b_z b_z^T)
       - alpha * sum_{z in A} 2 * omega_z + d_max

evaluated through a Cholesky factor that is rank-one updated/downdated as
edges enter and leave the selected set.  Marginal gains use the matrix
determinant lemma with a single triangular solve.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky as _cholesky
from scipy.linalg import solve_triangular

log = logging.getLogger(__name__)

# downdates accumulate roundoff in the factor; refactorize periodically
REFACTOR_EVERY = 64


def chol_rank1_update(L: np.ndarray, x: np.ndarray, downdate: bool = False) -> None:
    """In-place rank-one update of a lower Cholesky factor.

    After the call L L^T equals the old L L^T + x x^T (or - x x^T when
    downdating).  x is consumed.  Raises FloatingPointError if a downdate
    would lose positive definiteness.
    """
    n = L.shape[0]
    sign = -1.0 if downdate else 1.0
    nz = np.nonzero(x)[0]
    if nz.size == 0:
        return
    for k in range(int(nz[0]), n):
        xk = x[k]
        if xk == 0.0:
            continue
        Lkk = L[k, k]
        r2 = Lkk * Lkk + sign * xk * xk
        if r2 <= 0.0:
            raise FloatingPointError("cholesky downdate lost positive definiteness")
        r = math.sqrt(r2)
        c = r / Lkk
        s = xk / Lkk
        L[k, k] = r
        if k + 1 < n:
            col = L[k + 1:, k]
            col += (sign * s) * x[k + 1:]
            col /= c
            x[k + 1:] = c * x[k + 1:] - s * col


class CallCounter:
    """Shared tally of objective-oracle evaluations."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def bump(self):
        self.count += 1


@dataclass(frozen=True)
class EdgeVector:
    """Incidence data of one candidate edge in the reduced index space.

    rows holds the non-anchored row indices touched by the edge (0, 1 or 2
    of them); gamma the edge weight; cost the traversal price 2 * omega.
    """

    rows: tuple[int, ...]
    gamma: float
    cost: float
    index: int = -1

    def b(self, n: int) -> np.ndarray:
        v = np.zeros(n)
        if len(self.rows) == 1:
            v[self.rows[0]] = 1.0
        elif len(self.rows) == 2:
            v[self.rows[0]] = 1.0
            v[self.rows[1]] = -1.0
        return v


class ObjectiveState:
    """Mutable evaluation state for one selected-edge set.

    Holds the base matrix, the current Cholesky factor, the cached log
    determinant and the running distance cost.  Cloning is cheap and clones
    share the base matrix and the oracle-call counter.
    """

    def __init__(self, L0: np.ndarray, alpha: float, d_max: float,
                 counter: CallCounter | None = None):
        self.L0 = L0
        self.n = L0.shape[0]
        self.alpha = alpha
        self.d_max = d_max
        self.counter = counter if counter is not None else CallCounter()
        self.chol = _cholesky(L0, lower=True, check_finite=False)
        self.logdet = 2.0 * float(np.sum(np.log(np.diag(self.chol))))
        self.cost = 0.0
        self.selected: dict[int, EdgeVector] = {}
        self.version = 0  # mutation counter, lets callers detect staleness
        self._downdates = 0

    def clone(self) -> "ObjectiveState":
        other = object.__new__(ObjectiveState)
        other.L0 = self.L0
        other.n = self.n
        other.alpha = self.alpha
        other.d_max = self.d_max
        other.counter = self.counter
        other.chol = self.chol.copy()
        other.logdet = self.logdet
        other.cost = self.cost
        other.selected = dict(self.selected)
        other.version = self.version
        other._downdates = self._downdates
        return other

    # -- oracle queries ----------------------------------------------------

    def value(self) -> float:
        """f at the current selected set."""
        self.counter.bump()
        val = self.logdet / self.n - self.alpha * self.cost + self.d_max
        if val < -1e-9:
            log.warning("objective went negative (%.6g) for set %s",
                        val, sorted(self.selected))
        return val

    def quad(self, edge: EdgeVector) -> float:
        """gamma-free quadratic form b^T (L L^T)^-1 b for the edge."""
        if not edge.rows:
            return 0.0
        y = solve_triangular(self.chol, edge.b(self.n), lower=True,
                             check_finite=False)
        return float(y @ y)

    def marginal(self, edge: EdgeVector) -> float:
        """f(A + z) - f(A) without mutating the state."""
        if edge.index in self.selected:
            raise ValueError(f"edge {edge.index} already selected")
        self.counter.bump()
        q = self.quad(edge)
        return math.log1p(edge.gamma * q) / self.n - self.alpha * edge.cost

    def removal_gain(self, edge: EdgeVector) -> float:
        """f(A - z) - f(A) without mutating the state."""
        if edge.index not in self.selected:
            raise ValueError(f"edge {edge.index} not selected")
        self.counter.bump()
        q = self.quad(edge)
        u = edge.gamma * q
        if u >= 1.0:
            # impossible for a member edge up to roundoff; recover exactly
            self._refactor()
            u = edge.gamma * self.quad(edge)
        return math.log1p(-u) / self.n + self.alpha * edge.cost

    # -- state transitions -------------------------------------------------

    def add(self, edge: EdgeVector) -> None:
        if edge.index in self.selected:
            raise ValueError(f"edge {edge.index} already selected")
        q = self.quad(edge)
        self.logdet += math.log1p(edge.gamma * q)
        if edge.rows:
            chol_rank1_update(self.chol, math.sqrt(edge.gamma) * edge.b(self.n))
        self.selected[edge.index] = edge
        self.cost += edge.cost
        self.version += 1

    def bulk_load(self, edges) -> None:
        """Load many edges at once through a single refactorization."""
        for edge in edges:
            if edge.index in self.selected:
                raise ValueError(f"edge {edge.index} already selected")
            self.selected[edge.index] = edge
            self.cost += edge.cost
        self.version += 1
        self._refactor()

    def remove(self, edge: EdgeVector) -> None:
        if edge.index not in self.selected:
            raise ValueError(f"edge {edge.index} not selected")
        del self.selected[edge.index]
        self.cost -= edge.cost
        self.version += 1
        if edge.rows:
            q = self.quad(edge)
            u = edge.gamma * q
            try:
                if u >= 1.0:
                    raise FloatingPointError
                chol_rank1_update(self.chol,
                                  math.sqrt(edge.gamma) * edge.b(self.n),
                                  downdate=True)
                self.logdet += math.log1p(-u)
            except FloatingPointError:
                self._refactor()
                return
            self._downdates += 1
            if self._downdates % REFACTOR_EVERY == 0:
                self._refactor()

    def _assemble(self) -> np.ndarray:
        M = self.L0.copy()
        for edge in self.selected.values():
            _stamp(M, edge)
        return M

    def _refactor(self) -> None:
        self.chol = _cholesky(self._assemble(), lower=True, check_finite=False)
        self.logdet = 2.0 * float(np.sum(np.log(np.diag(self.chol))))


def _stamp(M: np.ndarray, edge: EdgeVector) -> None:
    g = edge.gamma
    if len(edge.rows) == 1:
        i = edge.rows[0]
        M[i, i] += g
    elif len(edge.rows) == 2:
        i, j = edge.rows
        M[i, i] += g
        M[j, j] += g
        M[i, j] -= g
        M[j, i] -= g


def dense_objective(L0: np.ndarray, edges, alpha: float, d_max: float) -> float:
    """From-scratch evaluation of f: assemble and take a dense logdet.

    Independent of the incremental path; used as the second route in
    equivalence checks.
    """
    M = L0.copy()
    cost = 0.0
    for edge in edges:
        _stamp(M, edge)
        cost += edge.cost
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0:
        raise FloatingPointError("assembled matrix is not positive definite")
    n = L0.shape[0]
    return float(logdet) / n - alpha * cost + d_max


def evaluate_set(base: ObjectiveState, edges) -> float:
    """f at an arbitrary edge set, counted as a single oracle call."""
    state = base.clone()
    for edge in edges:
        state.add(edge)
    return state.value()
