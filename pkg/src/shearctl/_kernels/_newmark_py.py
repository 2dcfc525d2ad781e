"""Pure-numpy Newmark recurrence, signature-compatible with the C kernel."""

import numpy as np
from scipy.linalg import cho_solve


def run_newmark(m_diag, C, L, coef, x, v, a, loads, out_x, out_v, out_a):
    """Advance the Newmark recurrence one step per row of ``loads``.

    Parameters mirror the compiled kernel: ``m_diag`` is the diagonal of the
    mass matrix, ``C`` the damping matrix, ``L`` the lower Cholesky factor of
    the effective stiffness, ``coef`` the eight Newmark update coefficients,
    ``x``/``v``/``a`` the current state (mutated in place to the final state)
    and ``loads[s]`` the external load vector at target time ``s``.  Each
    accepted step is written to row ``s`` of ``out_x``/``out_v``/``out_a``.
    """
    c0, c1, c2, c3, c4, c5, c6, c7 = coef
    factor = (L, True)
    for s in range(loads.shape[0]):
        rhs = loads[s] + m_diag * (c0 * x + c2 * v + c3 * a)
        rhs += C @ (c1 * x + c4 * v + c5 * a)
        xn = cho_solve(factor, rhs, overwrite_b=True, check_finite=False)
        an = c0 * (xn - x) - c2 * v - c3 * a
        vn = v + c6 * a + c7 * an
        x[:] = xn
        v[:] = vn
        a[:] = an
        out_x[s] = x
        out_v[s] = v
        out_a[s] = a
