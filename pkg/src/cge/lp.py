"""Small dense bounded-variable simplex, specialized for the per-element
linear program of the LP-based double-greedy selection rule.

The program over support pairs (p_k, a_k, b_k) with variables z_k, w_k:

    minimize    wz * sum z_k + ww * sum w_k
    subject to  E[z a + w b] >= 2 E[z b]
                E[z a + w b] >= 2 E[w a]
                z_k + w_k = 1,  z_k, w_k >= 0

Substituting w = 1 - z leaves k box variables and two inequality rows, so a
vertex of the feasible region has at most two fractional coordinates.
"""

from __future__ import annotations

import numpy as np

_TOL = 1e-9


class LpError(RuntimeError):
    """Internal solver failure; the program is feasible by construction."""


def lp_extreme_point(
    pairs: list[tuple[float, float, float]],
    weights: tuple[float, float] = (0.5, 0.6),
) -> list[tuple[float, float]]:
    """Vertex solution (z_k, w_k) per support pair.

    pairs holds (probability, a_k, b_k) per support pair; weights are the
    objective prices of z and w.
    """
    if not pairs:
        raise ValueError("no support pairs")
    k = len(pairs)
    p = np.array([t[0] for t in pairs])
    a = np.array([t[1] for t in pairs])
    b = np.array([t[2] for t in pairs])
    wz, ww = weights

    # rows of G z >= h after eliminating w = 1 - z
    G = np.vstack([p * (a - 3.0 * b), p * (3.0 * a - b)])
    h = np.array([-float(p @ b), float(p @ (2.0 * a - b))])

    # scale rows for conditioning; scale of each row is data dependent
    for r in range(2):
        s = max(np.max(np.abs(G[r])), abs(h[r]), 1.0)
        G[r] /= s
        h[r] /= s

    n_var = k + 2  # z variables plus two surplus variables
    A = np.hstack([G, -np.eye(2)])
    c = np.full(n_var, 0.0)
    c[:k] = wz - ww
    lo = np.zeros(n_var)
    hi = np.concatenate([np.ones(k), np.full(2, np.inf)])

    z = _bounded_simplex(c, A, h, lo, hi)[:k]
    z = np.clip(z, 0.0, 1.0)
    return [(float(zk), float(1.0 - zk)) for zk in z]


def _bounded_simplex(c, A, b, lo, hi, max_iter: int = 20000) -> np.ndarray:
    """Two-phase primal simplex for min c x s.t. A x = b, lo <= x <= hi.

    Nonbasic variables rest at a bound; Bland's rule everywhere, so the
    method terminates.  Returns a basic (vertex) solution.
    """
    m, n = A.shape

    x = lo.copy()
    r = b - A @ x
    art_sign = np.where(r >= 0.0, 1.0, -1.0)
    A_full = np.hstack([A, np.diag(art_sign)])
    lo_full = np.concatenate([lo, np.zeros(m)])
    hi_full = np.concatenate([hi, np.full(m, np.inf)])
    x_full = np.concatenate([x, np.abs(r)])
    # status: 0 nonbasic-at-lower, 1 nonbasic-at-upper, 2 basic
    status = np.zeros(n + m, dtype=int)
    basis = list(range(n, n + m))
    for j in basis:
        status[j] = 2

    c_phase1 = np.concatenate([np.zeros(n), np.ones(m)])
    obj = _simplex_loop(c_phase1, A_full, lo_full, hi_full, x_full, status,
                        basis, max_iter)
    if obj > 1e-7:
        raise LpError(f"phase 1 failed to reach feasibility (residual {obj:.3g})")
    # pin artificials at zero and reoptimize with the true costs
    hi_full[n:] = 0.0
    x_full[n:] = np.minimum(x_full[n:], 0.0)
    c_phase2 = np.concatenate([c, np.zeros(m)])
    _simplex_loop(c_phase2, A_full, lo_full, hi_full, x_full, status,
                  basis, max_iter)
    return x_full[:n]


def _simplex_loop(c, A, lo, hi, x, status, basis, max_iter) -> float:
    m = A.shape[0]
    for _ in range(max_iter):
        B = A[:, basis]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise LpError("singular basis") from exc
        y = c[basis] @ Binv

        entering = -1
        direction = 0.0
        for j in range(A.shape[1]):
            if status[j] == 2 or hi[j] - lo[j] <= _TOL:
                continue
            d = c[j] - y @ A[:, j]
            if status[j] == 0 and d < -_TOL:
                entering, direction = j, 1.0
                break  # Bland: first eligible index
            if status[j] == 1 and d > _TOL:
                entering, direction = j, -1.0
                break
        if entering < 0:
            return float(c @ x)

        w = Binv @ A[:, entering]
        # ratio test: blockers are the entering variable's own range and any
        # basic variable driven to one of its bounds
        blockers = [(hi[entering] - lo[entering], entering, -1, -1)]
        for i in range(m):
            step = direction * w[i]
            vi = basis[i]
            if step > _TOL:
                blockers.append((max((x[vi] - lo[vi]) / step, 0.0), vi, i, 0))
            elif step < -_TOL:
                blockers.append((max((hi[vi] - x[vi]) / (-step), 0.0), vi, i, 1))
        limit = min(t[0] for t in blockers)
        if not np.isfinite(limit):
            raise LpError("unbounded direction")
        # Bland again: smallest variable index among the tight blockers
        _, _, pos, to = min(
            (t for t in blockers if t[0] <= limit + _TOL), key=lambda t: t[1])

        delta = direction * limit
        x[entering] += delta
        for i in range(m):
            x[basis[i]] -= delta * w[i]
        if pos < 0:
            # bound flip: entering crosses its range, basis unchanged
            status[entering] = 1 - status[entering]
            x[entering] = hi[entering] if status[entering] == 1 else lo[entering]
        else:
            out = basis[pos]
            status[out] = to
            x[out] = lo[out] if to == 0 else hi[out]
            basis[pos] = entering
            status[entering] = 2
    raise LpError("iteration limit exceeded")
