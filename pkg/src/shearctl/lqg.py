"""LQG baseline: state-space realization, Riccati synthesis, estimator.

The regulator cost is built from the same weights and scales as the
environment reward, so the per-step quadratic cost equals the negated
reward on simulated trajectories: the base shear is linear in
(displacements, velocities, forces) through the equation of motion, which
makes the shear penalty an exact quadratic form with a state-input cross
term.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .dynamics import SystemMatrices
from .errors import ContractError, ModelError, NumericalError, ParameterError

DARE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """First-order form z' = A z + B u + E ag with acceleration outputs.

    The state is z = (x, v).  Outputs are absolute story accelerations at
    ``measured_stories``; ground acceleration does not appear in the output
    equation because it cancels against the relative-frame inertia term.
    """

    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    C_obs: np.ndarray
    D_obs: np.ndarray
    measured_stories: tuple[int, ...]
    discrete: bool = False
    dt: float | None = None

    @property
    def n_states(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class LQGDesign:
    """Synthesized gains plus everything needed to reproduce them."""

    model: StateSpaceModel
    Q: np.ndarray
    N: np.ndarray
    R: np.ndarray
    W: np.ndarray
    V: np.ndarray
    K_lqr: np.ndarray
    L_kal: np.ndarray
    L_corr: np.ndarray
    P_reg: np.ndarray
    P_filt: np.ndarray


def build_state_space(
    mats: SystemMatrices, measured_stories=None
) -> StateSpaceModel:
    """Continuous realization of the controlled building.

    ``measured_stories`` are 1-based story indices whose absolute
    accelerations form the output (default: all stories).
    """
    n = mats.n
    m_diag = mats.M.diagonal()
    if np.any(m_diag == 0.0):
        raise ModelError("mass matrix is singular")
    minv = 1.0 / m_diag
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = -minv[:, None] * mats.K
    A[n:, n:] = -minv[:, None] * mats.C
    B = np.zeros((2 * n, mats.n_act))
    B[n:, :] = minv[:, None] * mats.B_u
    E = np.zeros((2 * n, 1))
    E[n:, 0] = -mats.iota
    if measured_stories is None:
        measured_stories = tuple(range(1, n + 1))
    rows = np.array([s - 1 for s in measured_stories], dtype=int)
    C_obs = A[n:, :][rows, :]
    D_obs = B[n:, :][rows, :]
    return StateSpaceModel(
        A=A, B=B, E=E, C_obs=C_obs, D_obs=D_obs,
        measured_stories=tuple(int(s) for s in measured_stories),
    )


def discretize(model: StateSpaceModel, dt: float) -> StateSpaceModel:
    """Zero-order-hold discretization via the augmented matrix exponential."""
    if model.discrete:
        raise ParameterError("model is already discrete")
    if dt <= 0.0:
        raise ParameterError("dt must be positive")
    n = model.n_states
    inputs = np.hstack([model.B, model.E])
    m = inputs.shape[1]
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = model.A
    aug[:n, n:] = inputs
    phi = scipy.linalg.expm(aug * dt)
    A_d = phi[:n, :n]
    B_d = phi[:n, n : n + model.B.shape[1]]
    E_d = phi[:n, n + model.B.shape[1] :]
    return StateSpaceModel(
        A=A_d, B=B_d, E=E_d, C_obs=model.C_obs, D_obs=model.D_obs,
        measured_stories=model.measured_stories, discrete=True, dt=dt,
    )


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def dare_residual(P, A, B, Q, R, N=None) -> float:
    """Relative Frobenius residual of the Riccati fixed-point equation."""
    BtPA = B.T @ P @ A
    if N is not None:
        BtPA = BtPA + N.T
    gain_term = (BtPA.T) @ np.linalg.solve(R + B.T @ P @ B, BtPA)
    res = A.T @ P @ A - P - gain_term + Q
    return float(np.linalg.norm(res) / max(1.0, np.linalg.norm(P)))


def solve_dare(A, B, Q, R, N=None, tol=DARE_TOL, max_doubling=120, max_fixed_point=200_000):
    """Stabilizing solution of the discrete algebraic Riccati equation.

    Minimizes sum of z'Qz + 2 z'Nu + u'Ru over u = -Kz.  Uses the
    structure-preserving doubling iteration with a plain fixed-point
    fallback; the accepted solution must reach a relative residual of
    ``tol``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q = _symmetrize(np.asarray(Q, dtype=float))
    R = _symmetrize(np.asarray(R, dtype=float))
    n = A.shape[0]
    if np.linalg.eigvalsh(R).min() <= 0.0:
        raise ParameterError("control cost R must be positive definite")
    if np.linalg.eigvalsh(Q).min() < -1e-10 * max(1.0, np.linalg.norm(Q)):
        raise ParameterError("state cost Q must be positive semi-definite")

    if N is not None:
        # shift the cross term away: u = u_hat - R^{-1} N' z
        N = np.asarray(N, dtype=float)
        rinv_nt = np.linalg.solve(R, N.T)
        A_hat = A - B @ rinv_nt
        Q_hat = _symmetrize(Q - N @ rinv_nt)
    else:
        A_hat, Q_hat = A, Q

    G = _symmetrize(B @ np.linalg.solve(R, B.T))
    P = _doubling(A_hat, G, Q_hat, tol, max_doubling)
    if P is None or dare_residual(P, A, B, Q, R, N) > tol:
        P = _fixed_point(A_hat, B, Q_hat, R, tol, max_fixed_point, start=P)
    residual = dare_residual(P, A, B, Q, R, N)
    if residual > tol:
        raise NumericalError(
            f"Riccati iteration stalled at relative residual {residual:.3e} (tol {tol:.1e})"
        )
    return _symmetrize(P)


def _doubling(A, G, H, tol, max_iter):
    """Structure-preserving doubling; returns None if it breaks down."""
    n = A.shape[0]
    eye = np.eye(n)
    for _ in range(max_iter):
        try:
            T = np.linalg.solve(eye + G @ H, np.hstack([A, G @ A.T]))
        except np.linalg.LinAlgError:
            return None
        TA = T[:, :n]
        TGAt = T[:, n:]
        H_next = _symmetrize(H + A.T @ H @ TA)
        G_next = _symmetrize(G + A @ TGAt)
        A_next = A @ TA
        if not np.all(np.isfinite(H_next)):
            return None
        if np.linalg.norm(H_next - H) <= 1e-15 * max(1.0, np.linalg.norm(H_next)):
            return H_next
        A, G, H = A_next, G_next, H_next
    return H


def _fixed_point(A, B, Q, R, tol, max_iter, start=None):
    P = Q.copy() if start is None else start.copy()
    for _ in range(max_iter):
        BtPA = B.T @ P @ A
        P_next = _symmetrize(
            A.T @ P @ A - BtPA.T @ np.linalg.solve(R + B.T @ P @ B, BtPA) + Q
        )
        if np.linalg.norm(P_next - P) <= 0.1 * tol * max(1.0, np.linalg.norm(P_next)):
            return P_next
        P = P_next
    return P


def lqr_gain(P, A, B, R, N=None) -> np.ndarray:
    """Feedback gain u = -K z from a Riccati solution."""
    BtPA = B.T @ P @ A
    if N is not None:
        BtPA = BtPA + N.T
    S = R + B.T @ P @ B
    cond = np.linalg.cond(S)
    if not np.isfinite(cond) or cond > 1e14:
        raise NumericalError(f"gain system ill-conditioned (cond {cond:.3e})")
    return np.linalg.solve(S, BtPA)


def kalman_gain(A, C, W, V, tol=DARE_TOL):
    """Steady-state predictor gain via the dual Riccati problem.

    Returns (L, P) with L = A P C' (C P C' + V)^{-1}; by duality L is the
    transpose of the regulator gain for (A', C', W, V).
    """
    P = solve_dare(A.T, C.T, W, V, tol=tol)
    L = lqr_gain(P, A.T, C.T, V).T
    return L, P


def spectral_radius(a: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def cost_matrices(mats: SystemMatrices, weights, scales):
    """Exact quadratic (Q, N, R) matching the environment reward.

    The negated reward w_x sum((x/xs)^2) + w_v (V1/Vs)^2 + w_a sum((u/us)^2)
    equals z'Qz + 2 z'Nu + u'Ru with z = (x, v), using the equilibrium
    identity V1 = -1'Kx - 1'Cv + 1'B_u u.
    """
    w_x, w_v, w_a = weights
    x_scale, v_scale, u_scale = scales
    n, n_act = mats.n, mats.n_act
    ones = np.ones(n)
    Q = np.zeros((2 * n, 2 * n))
    Q[:n, :n] = (w_x / x_scale**2) * np.eye(n)
    c = np.concatenate([-(mats.K.T @ ones), -(mats.C.T @ ones)]) / v_scale
    d = (mats.B_u.T @ ones) / v_scale
    Q += w_v * np.outer(c, c)
    N = w_v * np.outer(c, d)
    R = (w_a / u_scale**2) * np.eye(n_act) + w_v * np.outer(d, d)
    return Q, N, R


def design_lqg(
    mats: SystemMatrices,
    dt: float,
    weights=(1.0, 1.0, 1.0),
    scales=(0.1, 1e5, 5e4),
    measured_stories=None,
    process_noise: float = 1.0,
    measurement_noise: float = 1e-4,
) -> LQGDesign:
    """Full LQG synthesis for the controlled building.

    ``process_noise`` scales the ground-excitation channel covariance
    W = q E_d E_d'; ``measurement_noise`` is the diagonal accelerometer
    covariance in (m/s^2)^2.
    """
    if mats.n_act == 0:
        raise ModelError("LQG design needs at least one actuator")
    ss = discretize(build_state_space(mats, measured_stories), dt)
    Q, N, R = cost_matrices(mats, weights, scales)
    P_reg = solve_dare(ss.A, ss.B, Q, R, N)
    K = lqr_gain(P_reg, ss.A, ss.B, R, N)
    W = _symmetrize(process_noise * (ss.E @ ss.E.T))
    V = measurement_noise * np.eye(ss.C_obs.shape[0])
    L, P_filt = kalman_gain(ss.A, ss.C_obs, W, V)
    S = ss.C_obs @ P_filt @ ss.C_obs.T + V
    L_corr = np.linalg.solve(S, ss.C_obs @ P_filt).T
    rho_cl = spectral_radius(ss.A - ss.B @ K)
    rho_est = spectral_radius(ss.A - L @ ss.C_obs)
    if rho_cl >= 1.0 or rho_est >= 1.0:
        raise NumericalError(
            f"unstable synthesis: closed-loop radius {rho_cl:.6f}, estimator radius {rho_est:.6f}"
        )
    return LQGDesign(
        model=ss, Q=Q, N=N, R=R, W=W, V=V,
        K_lqr=K, L_kal=L, L_corr=L_corr, P_reg=P_reg, P_filt=P_filt,
    )


class LqgController:
    """Output-feedback controller: Kalman correction then state feedback.

    ``act`` consumes the environment observation, using only the newest
    acceleration frame (the measurement) and the last applied action; the
    returned action is normalized to [-1, 1].
    """

    def __init__(self, design: LQGDesign, max_force: float):
        if max_force <= 0.0:
            raise ParameterError("max_force must be positive")
        self.design = design
        self.max_force = float(max_force)
        self._xhat = np.zeros(design.model.n_states)

    def reset(self) -> None:
        self._xhat = np.zeros(self.design.model.n_states)

    def step_measurement(self, measurement, last_force) -> np.ndarray:
        """Physical force from one raw accelerometer frame."""
        d = self.design
        y = np.asarray(measurement, dtype=float)
        if y.shape != (d.model.C_obs.shape[0],):
            raise ContractError(
                f"expected {d.model.C_obs.shape[0]} measurements, got {y.shape}"
            )
        last_force = np.asarray(last_force, dtype=float)
        innovation = y - d.model.C_obs @ self._xhat - d.model.D_obs @ last_force
        corrected = self._xhat + d.L_corr @ innovation
        u = np.clip(-(d.K_lqr @ corrected), -self.max_force, self.max_force)
        self._xhat = d.model.A @ corrected + d.model.B @ u
        return u

    def act(self, observation) -> np.ndarray:
        u = self.step_measurement(
            observation.accel_history[-1],
            observation.last_action * self.max_force,
        )
        return u / self.max_force

    @property
    def estimate(self) -> np.ndarray:
        """Current a-priori state estimate (diagnostic)."""
        return self._xhat.copy()


def dump_design(design: LQGDesign, path) -> None:
    """Write the discrete model and gains as JSON for cross-checking."""
    def mat(a):
        a = np.asarray(a)
        return {"rows": a.shape[0], "cols": a.shape[1], "data": a.ravel().tolist()}

    doc = {
        "dt": design.model.dt,
        "n_states": design.model.n_states,
        "n_act": design.model.B.shape[1],
        "n_meas": design.model.C_obs.shape[0],
        "measured_stories": list(design.model.measured_stories),
        "A_d": mat(design.model.A),
        "B_d": mat(design.model.B),
        "E_d": mat(design.model.E),
        "K_lqr": mat(design.K_lqr),
        "L_kal": mat(design.L_kal),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
