"""Primal active-set solver for small convex QPs with x >= 0 and A x = b."""
import numpy as np


class QPResult:
    __slots__ = ("x", "iterations", "converged")

    def __init__(self, x, iterations, converged):
        self.x = x
        self.iterations = iterations
        self.converged = converged


def _lstsq(m, rhs):
    return np.linalg.lstsq(m, rhs, rcond=1e-13)[0]


def solve_qp(H, g, A, b, x0, tol=1e-12, max_iter=100_000):
    """Minimize ``x'Hx/2 + g'x`` subject to ``A x = b``, ``x >= 0``.

    ``x0`` must be feasible.  Singular ``H`` is allowed as long as the
    objective is bounded on the feasible set; equality-constrained
    subproblems are solved in the least-squares / minimum-norm sense.
    Stops when every multiplier of an active bound is >= ``-tol`` (scaled by
    the gradient magnitude) and the step vanishes.
    """
    H = np.asarray(H, float)
    g = np.asarray(g, float)
    A = np.asarray(A, float)
    x = np.array(x0, float)
    n = x.size
    active = x <= 0
    x[active] = 0.0
    neq = A.shape[0]
    scale = max(1.0, float(np.abs(H).max()), float(np.abs(g).max()))

    for it in range(1, max_iter + 1):
        grad = H @ x + g
        free = ~active
        F = np.flatnonzero(free)
        nf = F.size
        kkt = np.zeros((nf + neq, nf + neq))
        kkt[:nf, :nf] = H[np.ix_(F, F)]
        kkt[:nf, nf:] = A[:, F].T
        kkt[nf:, :nf] = A[:, F]
        rhs = np.concatenate([-grad[F], np.zeros(neq)])
        sol = _lstsq(kkt, rhs)
        p = np.zeros(n)
        p[F] = sol[:nf]

        if np.abs(p).max(initial=0.0) <= 1e-13 * max(1.0, np.abs(x).max()):
            nu = _lstsq(A[:, F].T, grad[F]) if nf else _lstsq(A.T, grad)
            mu = grad - A.T @ nu
            mu_active = np.where(active, mu, np.inf)
            j = int(np.argmin(mu_active))
            if mu_active[j] >= -tol * scale:
                return QPResult(x, it, True)
            active[j] = False
            continue

        blocking = np.flatnonzero(free & (p < 0))
        alpha, hit = 1.0, -1
        if blocking.size:
            ratios = -x[blocking] / p[blocking]
            k = int(np.argmin(ratios))
            if ratios[k] < 1.0:
                alpha, hit = float(ratios[k]), int(blocking[k])
        x = x + alpha * p
        if hit >= 0:
            x[hit] = 0.0
            active[hit] = True
        x[x < 0] = 0.0
    return QPResult(x, max_iter, False)
