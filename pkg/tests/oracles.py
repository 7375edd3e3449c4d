"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
import math

import numpy as np


def simplex_min(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol=1e-10):
    """Textbook two-phase tableau simplex with Bland's rule.

    Solves ``min c^T x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
    ``x >= 0``. Returns ``(status, x, value)`` with status ``optimal``,
    ``infeasible`` or ``unbounded``.
    """
    c = np.asarray(c, float)
    nv = c.size
    rows, rhs, n_slack = [], [], 0
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, float))
        n_slack = A_ub.shape[0]
        for i in range(A_ub.shape[0]):
            slack = np.zeros(n_slack)
            slack[i] = 1.0
            rows.append(np.concatenate([A_ub[i], slack]))
            rhs.append(b_ub[i])
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, float))
        for i in range(A_eq.shape[0]):
            rows.append(np.concatenate([A_eq[i], np.zeros(n_slack)]))
            rhs.append(b_eq[i])
    M = np.array(rows)
    b = np.array(rhs, float)
    neg = b < 0
    M[neg] *= -1
    b[neg] *= -1
    k, nx = M.shape
    # tableau columns: x (incl. slacks), artificials, rhs
    T = np.hstack([M, np.eye(k), b[:, None]])
    basis = list(range(nx, nx + k))

    def pivot(r, col):
        T[r] /= T[r, col]
        for i in range(T.shape[0]):
            if i != r and T[i, col] != 0.0:
                T[i] -= T[i, col] * T[r]
        basis[r] = col

    def run(cost, allowed):
        for _ in range(50000):
            cb = cost[basis]
            reduced = cost[:-1] - cb @ T[:, :-1]
            enter = next((j for j in allowed if reduced[j] < -tol), None)
            if enter is None:
                return "optimal"
            col = T[:, enter]
            ratios = [(T[i, -1] / col[i], basis[i], i) for i in range(k) if col[i] > tol]
            if not ratios:
                return "unbounded"
            best = min(r[0] for r in ratios)
            # Bland: among ties pick the smallest basic index
            leave = min((r for r in ratios if r[0] <= best + tol), key=lambda r: r[1])[2]
            pivot(leave, enter)
        raise RuntimeError("simplex did not terminate")

    cost1 = np.concatenate([np.zeros(nx), np.ones(k), [0.0]])
    run(cost1, range(nx + k))
    if T[:, -1] @ cost1[basis] > 1e-8 * max(1.0, np.abs(b).max()):
        return "infeasible", None, math.inf
    # drive remaining artificials out of the basis
    for i in range(k):
        if basis[i] >= nx:
            j = next((j for j in range(nx) if abs(T[i, j]) > tol), None)
            if j is not None:
                pivot(i, j)
    cost2 = np.concatenate([c, np.zeros(n_slack), np.zeros(k), [0.0]])
    status = run(cost2, [j for j in range(nx)])
    if status != "optimal":
        return status, None, -math.inf
    x = np.zeros(nx + k)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    return "optimal", x[:nv], float(c @ x[:nv])


def bpdn_lp(A, y, p, eps):
    """Exact optimum of ``min ||z||_1 s.t. ||Az - y||_p <= eps`` for ``p`` in ``{1, inf}``.

    Variables ``z = u - v`` with ``u, v >= 0``; for ``p = 1`` residual bounds
    ``r >= |Az - y|`` with ``sum r <= eps``.
    """
    A = np.asarray(A, float)
    y = np.asarray(y, float)
    m, n = A.shape
    if math.isinf(p):
        G = np.vstack([np.hstack([A, -A]), np.hstack([-A, A])])
        h = np.concatenate([y + eps, eps - y])
        c = np.ones(2 * n)
    elif p == 1:
        I = np.eye(m)
        G = np.vstack([
            np.hstack([A, -A, -I]),
            np.hstack([-A, A, -I]),
            np.concatenate([np.zeros(2 * n), np.ones(m)])[None, :],
        ])
        h = np.concatenate([y, -y, [eps]])
        c = np.concatenate([np.ones(2 * n), np.zeros(m)])
    else:
        raise ValueError("LP form exists for p in {1, inf} only")
    status, x, val = simplex_min(c, G, h)
    if status != "optimal":
        return status, None, val
    return status, x[:n] - x[n:2 * n], val


def exhaustive_best_s_term(x, s):
    x = np.asarray(x, float)
    n = x.size
    best = math.inf
    for S in itertools.combinations(range(n), s):
        mask = np.ones(n, bool)
        mask[list(S)] = False
        best = min(best, np.abs(x[mask]).sum())
    return best


def exhaustive_cone_member(x, rho, s, q):
    """Membership in the cone by checking every support of size ``s``."""
    x = np.asarray(x, float)
    n = x.size
    for S in itertools.combinations(range(n), s):
        mask = np.zeros(n, bool)
        mask[list(S)] = True
        head = np.sum(np.abs(x[mask]) ** q) ** (1.0 / q)
        tail = np.abs(x[~mask]).sum()
        if head >= rho / s ** (1.0 - 1.0 / q) * tail:
            return True
    return False
