"""Independent reference computations used to cross-check the package.

Nothing here may call into shearctl's numerical paths: the eigen oracle
uses the general nonsymmetric solver on M^-1 K, the time-history oracle
discretizes the first-order form exactly (matrix exponential with
first-order-hold input), and the scalar Riccati oracle is plain bisection.
"""

import numpy as np
from scipy.linalg import expm


def eigenfrequencies(M, K):
    """Natural frequencies via the nonsymmetric standard eigenproblem."""
    lam = np.linalg.eigvals(np.linalg.solve(M, K))
    lam = np.sort(lam.real)
    return np.sqrt(lam)


def exact_response(M, C, K, ag, dt, x0=None, v0=None):
    """Exact linear response to piecewise-linear ground acceleration.

    Integrates z' = A z + E ag(t) with ag linear inside each sample
    interval (first-order hold), which is exact for the sampled record.
    Returns (x, v, a) histories aligned with ``ag``.
    """
    M = np.asarray(M, dtype=float)
    C = np.asarray(C, dtype=float)
    K = np.asarray(K, dtype=float)
    n = M.shape[0]
    minv = np.linalg.inv(M)
    A = np.block([[np.zeros((n, n)), np.eye(n)], [-minv @ K, -minv @ C]])
    E = np.concatenate([np.zeros(n), -np.ones(n)])

    # augmented state (z, u, du/dt): exact one-step map under linear input
    aug = np.zeros((2 * n + 2, 2 * n + 2))
    aug[: 2 * n, : 2 * n] = A
    aug[: 2 * n, 2 * n] = E
    aug[2 * n, 2 * n + 1] = 1.0
    phi = expm(aug * dt)
    Fz = phi[: 2 * n, : 2 * n]
    Fu = phi[: 2 * n, 2 * n]
    Fr = phi[: 2 * n, 2 * n + 1]

    nsamp = len(ag)
    z = np.zeros(2 * n)
    if x0 is not None:
        z[:n] = x0
    if v0 is not None:
        z[n:] = v0
    xs = np.empty((nsamp, n))
    vs = np.empty((nsamp, n))
    accs = np.empty((nsamp, n))
    xs[0], vs[0] = z[:n], z[n:]
    accs[0] = minv @ (-M @ np.ones(n) * ag[0] - C @ z[n:] - K @ z[:n])
    for i in range(1, nsamp):
        rate = (ag[i] - ag[i - 1]) / dt
        z = Fz @ z + Fu * ag[i - 1] + Fr * rate
        xs[i], vs[i] = z[:n], z[n:]
        accs[i] = minv @ (-M @ np.ones(n) * ag[i] - C @ z[n:] - K @ z[:n])
    return xs, vs, accs


def scalar_dare_bisect(a, b, q, r, lo=0.0, hi=None, tol=1e-14):
    """Nonnegative root of the scalar Riccati fixed-point equation."""

    def g(p):
        return a * p * a - p - (a * p * b) ** 2 / (r + b * p * b) + q

    if hi is None:
        hi = max(1.0, q)
        while g(hi) > 0.0:
            hi *= 2.0
            if hi > 1e300:
                raise RuntimeError("no sign change found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)
