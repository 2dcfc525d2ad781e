"""Shear-building system matrices and Newmark time integration.

The building is an n-story lumped-mass chain: diagonal mass matrix,
tridiagonal stiffness, Rayleigh damping anchored at two modes.  Actuators
apply inter-story force pairs (+u on their story, -u on the story below;
the story-1 reaction goes to ground), so the equation of motion under
ground acceleration ``ag`` and actuator forces ``u`` reads

    M a + C v + K x = -M i ag + B_u u

with ``x`` relative to the ground and ``i`` a vector of ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import _kernels as kernels
from .errors import ContractError, ModelError, NumericalError, ParameterError

DEFAULT_DT = 0.01


@dataclass(frozen=True)
class BuildingModel:
    """Lumped-mass shear building with actuators at selected stories.

    masses are in kg, stiffnesses in N/m (one entry per story, bottom to
    top).  ``damping_spec`` gives two (mode index, damping ratio) anchors
    for Rayleigh damping; ``None`` means undamped (the only option for a
    single-story chain, where two distinct anchors cannot exist).  Mode
    indices are 1-based, as are ``actuator_stories``.
    """

    masses: tuple[float, ...]
    stiffnesses: tuple[float, ...]
    damping_spec: tuple[tuple[int, float], tuple[int, float]] | None
    actuator_stories: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        object.__setattr__(self, "stiffnesses", tuple(float(k) for k in self.stiffnesses))
        if self.damping_spec is not None:
            object.__setattr__(
                self,
                "damping_spec",
                tuple((int(m), float(z)) for m, z in self.damping_spec),
            )
        object.__setattr__(
            self, "actuator_stories", tuple(int(s) for s in self.actuator_stories)
        )
        n = self.n_stories
        if n == 0:
            raise ModelError("model needs at least one story")
        if len(self.stiffnesses) != n:
            raise ModelError("masses and stiffnesses must have equal length")
        if any(m <= 0 for m in self.masses):
            raise ModelError("all masses must be positive")
        if any(k <= 0 for k in self.stiffnesses):
            raise ModelError("all stiffnesses must be positive")
        if self.damping_spec is not None:
            if len(self.damping_spec) != 2:
                raise ModelError("damping_spec needs exactly two anchor modes")
            (mi, _), (mj, _) = self.damping_spec
            if mi == mj:
                raise ModelError("damping anchor modes must be distinct")
            for mode, zeta in self.damping_spec:
                if not 1 <= mode <= n:
                    raise ModelError(f"damping anchor mode {mode} outside [1, {n}]")
                if not 0.0 < zeta < 1.0:
                    raise ModelError(f"damping ratio {zeta} outside (0, 1)")
        if len(set(self.actuator_stories)) != len(self.actuator_stories):
            raise ModelError("actuator stories must be unique")
        for s in self.actuator_stories:
            if not 1 <= s <= n:
                raise ModelError(f"actuator story {s} outside [1, {n}]")

    @property
    def n_stories(self) -> int:
        return len(self.masses)

    @property
    def n_actuators(self) -> int:
        return len(self.actuator_stories)


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    """Assembled M, C, K plus actuator (B_u) and ground-motion (iota) influence."""

    M: np.ndarray
    C: np.ndarray
    K: np.ndarray
    B_u: np.ndarray
    iota: np.ndarray
    rayleigh: tuple[float, float]

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @property
    def n_act(self) -> int:
        return self.B_u.shape[1]


@dataclass(frozen=True)
class NewmarkParams:
    """Newmark integration constants; the default is average acceleration."""

    beta: float = 0.25
    gamma: float = 0.5
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if not 0.0 < self.beta <= 0.5:
            raise ParameterError(f"beta {self.beta} outside (0, 0.5]")
        if not 0.0 < self.gamma <= 1.0:
            raise ParameterError(f"gamma {self.gamma} outside (0, 1]")
        if not self.dt > 0.0:
            raise ParameterError(f"dt {self.dt} must be positive")


@dataclass(frozen=True)
class SimState:
    """Relative displacement/velocity/acceleration at time t."""

    t: float
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray


@dataclass(frozen=True, eq=False)
class ResponseHistory:
    """Uniformly sampled response of one simulation run.

    Row 0 is the initial condition; accelerations are relative unless noted.
    ``forces`` holds the physical actuator forces applied over each step
    (zeros in row 0).
    """

    dt: float
    t: np.ndarray
    ag: np.ndarray
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    abs_accel: np.ndarray
    forces: np.ndarray

    def __len__(self) -> int:
        return self.t.shape[0]


def stiffness_matrix(stiffnesses: Sequence[float]) -> np.ndarray:
    """Tridiagonal shear-building stiffness from per-story values."""
    k = np.asarray(stiffnesses, dtype=float)
    n = k.shape[0]
    K = np.zeros((n, n))
    for i in range(n):
        K[i, i] = k[i] + (k[i + 1] if i + 1 < n else 0.0)
        if i + 1 < n:
            K[i, i + 1] = K[i + 1, i] = -k[i + 1]
    return K


def actuator_matrix(n: int, actuator_stories: Sequence[int]) -> np.ndarray:
    """Influence matrix for inter-story actuators (1-based story indices).

    Column s has +1 at its story and -1 at the story below; an actuator at
    story 1 reacts against the ground, leaving a single +1.
    """
    B = np.zeros((n, len(actuator_stories)))
    for col, story in enumerate(actuator_stories):
        B[story - 1, col] = 1.0
        if story >= 2:
            B[story - 2, col] = -1.0
    return B


def modal_analysis(M: np.ndarray, K: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Natural frequencies (rad/s, ascending) and mass-normalized mode shapes.

    Solves K phi = omega^2 M phi; the returned shapes satisfy
    phi.T @ M @ phi = I.
    """
    M = np.asarray(M, dtype=float)
    K = np.asarray(K, dtype=float)
    try:
        w2, phi = scipy.linalg.eigh(K, M)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise NumericalError(
            "generalized eigensolve failed "
            f"(cond K ~ {np.linalg.cond(K):.3e}, cond M ~ {np.linalg.cond(M):.3e})"
        ) from exc
    if w2[0] <= 0.0:
        raise ModelError(
            f"stiffness matrix is not positive definite (min eigenvalue {w2[0]:.3e})"
        )
    return np.sqrt(w2), phi


def rayleigh_coefficients(
    omega_i: float, zeta_i: float, omega_j: float, zeta_j: float
) -> tuple[float, float]:
    """Solve zeta = a0/(2 w) + a1 w/2 at two anchor frequencies."""
    if omega_i <= 0.0 or omega_j <= 0.0:
        raise ParameterError("anchor frequencies must be positive")
    if abs(omega_i - omega_j) <= 1e-12 * max(omega_i, omega_j):
        raise ParameterError("anchor frequencies must be distinct")
    denom = omega_j**2 - omega_i**2
    a0 = 2.0 * omega_i * omega_j * (zeta_i * omega_j - zeta_j * omega_i) / denom
    a1 = 2.0 * (zeta_j * omega_j - zeta_i * omega_i) / denom
    return a0, a1


def assemble_matrices(model: BuildingModel) -> SystemMatrices:
    """System matrices for a building model, incl. Rayleigh damping.

    The damping coefficients are fit so that the modal damping ratios at the
    two anchor modes of ``model.damping_spec`` are met exactly.
    """
    M = np.diag(np.asarray(model.masses, dtype=float))
    K = stiffness_matrix(model.stiffnesses)
    omegas, _ = modal_analysis(M, K)  # also validates positive definiteness
    if model.damping_spec is None:
        a0, a1 = 0.0, 0.0
    else:
        (mode_i, zeta_i), (mode_j, zeta_j) = sorted(model.damping_spec)
        a0, a1 = rayleigh_coefficients(
            omegas[mode_i - 1], zeta_i, omegas[mode_j - 1], zeta_j
        )
    C = a0 * M + a1 * K
    B_u = actuator_matrix(model.n_stories, model.actuator_stories)
    return SystemMatrices(
        M=M, C=C, K=K, B_u=B_u, iota=np.ones(model.n_stories), rayleigh=(a0, a1)
    )


def load_vector(mats: SystemMatrices, ag: float, u: np.ndarray | None) -> np.ndarray:
    """External load -M i ag + B_u u for one time sample."""
    f = -mats.M.diagonal() * ag
    if u is not None and mats.n_act:
        f = f + mats.B_u @ u
    return f


class NewmarkIntegrator:
    """Newmark stepping with the effective stiffness factored once.

    Instances are immutable after construction; build a new one when the
    model or the time step changes.
    """

    def __init__(self, mats: SystemMatrices, params: NewmarkParams | None = None):
        params = params or NewmarkParams()
        beta, gamma, dt = params.beta, params.gamma, params.dt
        c0 = 1.0 / (beta * dt * dt)
        c1 = gamma / (beta * dt)
        coef = np.array(
            [
                c0,
                c1,
                1.0 / (beta * dt),
                1.0 / (2.0 * beta) - 1.0,
                gamma / beta - 1.0,
                dt / 2.0 * (gamma / beta - 2.0),
                dt * (1.0 - gamma),
                dt * gamma,
            ]
        )
        k_eff = mats.K + c0 * mats.M + c1 * mats.C
        try:
            L = np.linalg.cholesky(k_eff)
        except np.linalg.LinAlgError as exc:
            raise ParameterError(
                "effective stiffness is not positive definite; "
                "check model and Newmark parameters"
            ) from exc
        self.mats = mats
        self.params = params
        self._coef = coef
        self._m_diag = np.ascontiguousarray(mats.M.diagonal())
        self._C = np.ascontiguousarray(mats.C)
        self._L = np.ascontiguousarray(L)

    def initial_state(self, ag: float = 0.0, u: np.ndarray | None = None) -> SimState:
        """Rest state whose acceleration balances the initial load."""
        n = self.mats.n
        f = load_vector(self.mats, ag, u)
        return SimState(t=0.0, x=np.zeros(n), v=np.zeros(n), a=f / self._m_diag)

    def step(self, state: SimState, ag_next: float, u_next: np.ndarray | None) -> SimState:
        """Advance one step under the load at t + dt."""
        mats = self.mats
        if u_next is None:
            u_next = np.zeros(mats.n_act)
        else:
            u_next = np.asarray(u_next, dtype=float)
            if u_next.shape != (mats.n_act,):
                raise ContractError(
                    f"expected {mats.n_act} actuator forces, got shape {u_next.shape}"
                )
        if not np.isfinite(ag_next) or not np.all(np.isfinite(u_next)):
            raise ContractError("non-finite excitation or actuator force")
        loads = load_vector(mats, ag_next, u_next)[np.newaxis, :]
        x = state.x.copy()
        v = state.v.copy()
        a = state.a.copy()
        out = np.empty((3, 1, mats.n))
        kernels.run_newmark(
            self._m_diag, self._C, self._L, self._coef, x, v, a, loads,
            out[0], out[1], out[2],
        )
        return SimState(t=state.t + self.params.dt, x=x, v=v, a=a)

    def run(self, loads: np.ndarray, state: SimState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Advance ``loads.shape[0]`` steps from ``state``; returns histories."""
        steps = loads.shape[0]
        x = state.x.copy()
        v = state.v.copy()
        a = state.a.copy()
        out_x = np.empty((steps, self.mats.n))
        out_v = np.empty_like(out_x)
        out_a = np.empty_like(out_x)
        kernels.run_newmark(
            self._m_diag, self._C, self._L, self._coef, x, v, a,
            np.ascontiguousarray(loads), out_x, out_v, out_a,
        )
        return out_x, out_v, out_a


_integrator_cache: "dict[tuple[int, NewmarkParams], NewmarkIntegrator]" = {}


def newmark_step(
    state: SimState,
    mats: SystemMatrices,
    params: NewmarkParams,
    ag_next: float,
    u_next: np.ndarray | None = None,
) -> SimState:
    """One Newmark step; factorizations are cached per (matrices, params)."""
    key = (id(mats), params)
    integ = _integrator_cache.get(key)
    if integ is None or integ.mats is not mats:
        integ = NewmarkIntegrator(mats, params)
        _integrator_cache[key] = integ
    return integ.step(state, ag_next, u_next)


def simulate(
    model: BuildingModel,
    excitation,
    force_fn: Callable[[int, SimState], np.ndarray] | None = None,
    params: NewmarkParams | None = None,
) -> ResponseHistory:
    """Time-history response of ``model`` to a ground-motion record.

    ``excitation`` must already be sampled at the integration step
    (``resample`` first).  ``force_fn(i, state)`` supplies the physical
    actuator force vector applied over the step ending at sample ``i``;
    ``None`` runs the uncontrolled fast path.  Observation-driven
    controllers are run through ``environment.rollout`` instead, which
    produces identical histories for the same applied forces.
    """
    params = params or NewmarkParams(dt=float(excitation.dt))
    if abs(params.dt - excitation.dt) > 1e-12:
        raise ParameterError(
            f"excitation dt {excitation.dt} != integration dt {params.dt}; resample first"
        )
    ag = np.asarray(excitation.samples, dtype=float)
    if not np.all(np.isfinite(ag)):
        raise ContractError("excitation contains non-finite samples")
    mats = assemble_matrices(model)
    integ = NewmarkIntegrator(mats, params)
    n, n_act, nsamp = mats.n, mats.n_act, ag.shape[0]

    state = integ.initial_state(ag[0])
    x = np.empty((nsamp, n))
    v = np.empty_like(x)
    a = np.empty_like(x)
    forces = np.zeros((nsamp, n_act))
    x[0], v[0], a[0] = state.x, state.v, state.a

    if force_fn is None:
        loads = -np.outer(ag[1:], mats.M.diagonal())
        x[1:], v[1:], a[1:] = integ.run(loads, state)
    else:
        for i in range(1, nsamp):
            u = np.asarray(force_fn(i, state), dtype=float)
            state = integ.step(state, ag[i], u)
            x[i], v[i], a[i] = state.x, state.v, state.a
            forces[i] = u

    t = np.arange(nsamp) * params.dt
    return ResponseHistory(
        dt=params.dt,
        t=t,
        ag=ag,
        x=x,
        v=v,
        a=a,
        abs_accel=a + ag[:, np.newaxis],
        forces=forces,
    )


def story_responses(
    history: ResponseHistory, model: BuildingModel
) -> tuple[np.ndarray, np.ndarray]:
    """Per-story drift and story-shear time series.

    Drift of story j is x_j - x_{j-1} with the ground fixed; the shear in
    story j is the total inertial force (mass times absolute acceleration)
    carried by story j and everything above it, so column 0 is base shear.
    """
    isd = np.diff(history.x, axis=1, prepend=0.0)
    inertial = history.abs_accel * np.asarray(model.masses)
    shear = np.cumsum(inertial[:, ::-1], axis=1)[:, ::-1]
    return isd, shear


def mechanical_energy(mats: SystemMatrices, x: np.ndarray, v: np.ndarray) -> float:
    """Kinetic plus strain energy of one state."""
    return 0.5 * (v @ mats.M @ v + x @ mats.K @ x)
