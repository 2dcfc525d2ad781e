import numpy as np
import pytest

from oracles import eigenfrequencies, exact_response
from shearctl.dynamics import (
    BuildingModel,
    NewmarkIntegrator,
    NewmarkParams,
    SimState,
    SystemMatrices,
    assemble_matrices,
    mechanical_energy,
    modal_analysis,
    newmark_step,
    rayleigh_coefficients,
    simulate,
    stiffness_matrix,
    story_responses,
)
from shearctl.errors import ContractError, ModelError, ParameterError
from shearctl.excitation import GroundMotionRecord
from conftest import random_chain


def sdof_mats(m=1.0, k=1.0, c=0.0, with_actuator=False):
    B = np.ones((1, 1)) if with_actuator else np.zeros((1, 0))
    return SystemMatrices(
        M=np.array([[m]]), C=np.array([[c]]), K=np.array([[k]]),
        B_u=B, iota=np.ones(1), rayleigh=(0.0, 0.0),
    )


class TestAssembly:
    def test_benchmark_stiffness_corner(self, mats):
        assert mats.K[0, 0] == 9e6
        assert mats.K[0, 1] == -4e6
        assert mats.K[1, 0] == -4e6

    def test_single_story_degenerate_chain(self):
        model = BuildingModel(masses=(1.0,), stiffnesses=(1.0,), damping_spec=None)
        m = assemble_matrices(model)
        assert m.M == pytest.approx(np.array([[1.0]]))
        assert m.K == pytest.approx(np.array([[1.0]]))
        assert np.all(m.C == 0.0)

    def test_stiffness_is_symmetric_tridiagonal(self):
        K = stiffness_matrix([3.0, 2.0, 1.0])
        assert np.allclose(K, K.T)
        expected = np.array([[5.0, -2.0, 0.0], [-2.0, 3.0, -1.0], [0.0, -1.0, 1.0]])
        assert np.allclose(K, expected)

    def test_actuator_columns_sum_to_zero_or_one(self, mats):
        sums = mats.B_u.sum(axis=0)
        assert sums[0] == 1.0  # story-1 device reacts against the ground
        assert np.all(sums[1:] == 0.0)

    def test_mass_matrix_diagonal(self, mats, model):
        assert np.allclose(mats.M, np.diag(model.masses))

    def test_invalid_models_rejected(self):
        with pytest.raises(ModelError):
            BuildingModel(masses=(1.0, -1.0), stiffnesses=(1.0, 1.0), damping_spec=None)
        with pytest.raises(ModelError):
            BuildingModel(masses=(1.0,), stiffnesses=(0.0,), damping_spec=None)
        with pytest.raises(ModelError):
            BuildingModel(
                masses=(1.0, 1.0),
                stiffnesses=(1.0, 1.0),
                damping_spec=((1, 0.05), (1, 0.02)),
            )
        with pytest.raises(ModelError):
            BuildingModel(
                masses=(1.0, 1.0),
                stiffnesses=(1.0, 1.0),
                damping_spec=((1, 0.05), (3, 0.02)),
            )
        with pytest.raises(ModelError):
            BuildingModel(
                masses=(1.0, 1.0), stiffnesses=(1.0, 1.0), damping_spec=None,
                actuator_stories=(1, 1),
            )


class TestModalAnalysis:
    def test_sdof_frequency(self):
        w, phi = modal_analysis(np.array([[1.0]]), np.array([[4.0]]))
        assert w[0] == pytest.approx(2.0, rel=1e-14)

    def test_two_dof_characteristic_roots(self):
        # chain m=(1,1), k=(1,1): omega^2 solves l^2 - 3l + 1 = 0
        M = np.eye(2)
        K = stiffness_matrix([1.0, 1.0])
        w, _ = modal_analysis(M, K)
        expected = np.sqrt([(3 - np.sqrt(5)) / 2, (3 + np.sqrt(5)) / 2])
        assert w == pytest.approx(expected, rel=1e-12)

    def test_benchmark_matches_eigen_oracle(self, mats):
        w, _ = modal_analysis(mats.M, mats.K)
        ref = eigenfrequencies(mats.M, mats.K)
        assert np.all(np.abs(w - ref) / ref < 1e-8)

    def test_frequencies_ascend_and_shapes_mass_normalized(self, mats):
        w, phi = modal_analysis(mats.M, mats.K)
        assert np.all(np.diff(w) > 0)
        gram = phi.T @ mats.M @ phi
        assert np.max(np.abs(gram - np.eye(len(w)))) < 1e-9

    def test_non_positive_definite_rejected(self):
        K = np.array([[1.0, -2.0], [-2.0, 1.0]])  # indefinite
        with pytest.raises(ModelError):
            modal_analysis(np.eye(2), K)


class TestRayleigh:
    def test_hand_solved_coefficients(self):
        a0, a1 = rayleigh_coefficients(1.0, 0.05, 3.0, 0.05)
        assert a0 == pytest.approx(0.075, abs=1e-15)
        assert a1 == pytest.approx(0.025, abs=1e-15)

    def test_equal_frequencies_rejected(self):
        with pytest.raises(ParameterError):
            rayleigh_coefficients(2.0, 0.01, 2.0, 0.05)

    def test_benchmark_anchor_ratios_recovered(self, mats):
        w, _ = modal_analysis(mats.M, mats.K)
        a0, a1 = mats.rayleigh
        recovered = a0 / (2 * w) + a1 * w / 2
        assert abs(recovered[0] - 0.01) < 1e-10
        assert abs(recovered[4] - 0.05) < 1e-10

    def test_anchor_recovery_on_random_models(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            model = random_chain(rng)
            m = assemble_matrices(model)
            w, _ = modal_analysis(m.M, m.K)
            a0, a1 = m.rayleigh
            for mode, zeta in model.damping_spec:
                recovered = a0 / (2 * w[mode - 1]) + a1 * w[mode - 1] / 2
                assert abs(recovered - zeta) < 1e-10


class TestNewmarkStep:
    def test_zero_input_stays_zero(self):
        mats = sdof_mats(k=4.0)
        integ = NewmarkIntegrator(mats, NewmarkParams(dt=0.01))
        state = integ.initial_state()
        for _ in range(50):
            state = integ.step(state, 0.0, None)
        assert state.x == pytest.approx(np.zeros(1), abs=0.0)
        assert state.v == pytest.approx(np.zeros(1), abs=0.0)

    def test_free_vibration_tracks_cosine(self):
        mats = sdof_mats(k=4 * np.pi**2)
        dt = 0.001
        integ = NewmarkIntegrator(mats, NewmarkParams(dt=dt))
        state = SimState(t=0.0, x=np.ones(1), v=np.zeros(1), a=np.array([-4 * np.pi**2]))
        n = round(1.0 / dt)
        X, _, _ = integ.run(np.zeros((n, 1)), state)
        assert abs(X[-1, 0] - 1.0) < 1e-3

    def test_step_force_reaches_static_limit(self):
        mats = sdof_mats(k=4.0, c=1.0, with_actuator=True)
        integ = NewmarkIntegrator(mats, NewmarkParams(dt=0.01))
        d = 0.5
        force = np.array([4.0 * d])
        state = integ.initial_state(0.0, force)
        for _ in range(4000):
            state = integ.step(state, 0.0, force)
        assert abs(state.x[0] - d) < 1e-6

    def test_wrong_force_dimension_rejected(self, mats):
        integ = NewmarkIntegrator(mats, NewmarkParams(dt=0.01))
        with pytest.raises(ContractError):
            integ.step(integ.initial_state(), 0.0, np.zeros(2))

    def test_non_finite_input_rejected(self, mats):
        integ = NewmarkIntegrator(mats, NewmarkParams(dt=0.01))
        with pytest.raises(ContractError):
            integ.step(integ.initial_state(), np.nan, np.zeros(3))

    def test_module_level_step_uses_cached_factorization(self, mats):
        params = NewmarkParams(dt=0.01)
        state = SimState(t=0.0, x=np.zeros(5), v=np.zeros(5), a=np.zeros(5))
        s1 = newmark_step(state, mats, params, 1.0, np.zeros(3))
        s2 = newmark_step(state, mats, params, 1.0, np.zeros(3))
        assert np.array_equal(s1.x, s2.x)

    def test_invalid_newmark_params(self):
        with pytest.raises(ParameterError):
            NewmarkParams(beta=0.0)
        with pytest.raises(ParameterError):
            NewmarkParams(gamma=1.5)
        with pytest.raises(ParameterError):
            NewmarkParams(dt=-0.1)


def noise_record(seed, n=2000, dt=0.01, scale=1.0):
    rng = np.random.default_rng(seed)
    return GroundMotionRecord(name=f"n{seed}", dt=dt, samples=rng.normal(0, scale, n))


class TestSimulate:
    def test_zero_excitation_zero_histories(self, model):
        rec = GroundMotionRecord(name="z", dt=0.01, samples=np.zeros(100))
        hist = simulate(model, rec)
        assert np.all(hist.x == 0.0)
        assert np.all(hist.abs_accel == 0.0)

    def test_null_force_fn_matches_fast_path(self, model, backend):
        rec = noise_record(1, n=500)
        fast = simulate(model, rec)
        slow = simulate(model, rec, force_fn=lambda i, s: np.zeros(3))
        assert np.array_equal(fast.x, slow.x)
        assert np.array_equal(fast.v, slow.v)
        assert np.array_equal(fast.a, slow.a)

    def test_equilibrium_residual_at_every_step(self, model, mats):
        rec = noise_record(2, n=800)
        hist = simulate(model, rec)
        u = np.zeros((len(hist), 3))
        f = -(np.diag(mats.M)[None, :] * hist.ag[:, None]) + u @ mats.B_u.T
        residual = (
            hist.a @ mats.M.T + hist.v @ mats.C.T + hist.x @ mats.K.T - f
        )
        norm = np.linalg.norm(residual, axis=1)
        scale = np.maximum(1.0, np.linalg.norm(f, axis=1))
        assert np.max(norm / scale) < 1e-9

    def test_energy_decay_in_free_vibration(self, model, mats):
        # kick the building, then let damping drain the energy
        rec = GroundMotionRecord(name="kick", dt=0.01, samples=np.zeros(1000))
        integ = NewmarkIntegrator(mats, NewmarkParams(dt=0.01))
        state = SimState(
            t=0.0, x=np.zeros(5), v=np.linspace(0.1, 0.5, 5), a=np.zeros(5)
        )
        energies = [mechanical_energy(mats, state.x, state.v)]
        for _ in range(999):
            state = integ.step(state, 0.0, None)
            energies.append(mechanical_energy(mats, state.x, state.v))
        diffs = np.diff(energies)
        assert np.all(diffs <= 1e-12 * energies[0])

    def test_linearity_of_response(self, model):
        r1 = noise_record(3, n=600)
        r2 = noise_record(4, n=600)
        r12 = GroundMotionRecord(name="sum", dt=0.01, samples=r1.samples + r2.samples)
        h1 = simulate(model, r1)
        h2 = simulate(model, r2)
        h12 = simulate(model, r12)
        lhs = h12.x
        rhs = h1.x + h2.x
        denom = max(1.0, np.max(np.abs(lhs)))
        assert np.max(np.abs(lhs - rhs)) / denom < 1e-9

    def test_peak_drift_matches_exact_discretization(self, model, mats, data_dir):
        from shearctl.excitation import load_record, resample

        rec = resample(load_record(data_dir / "synth-broadband.csv"), 0.005)
        hist = simulate(model, rec, params=NewmarkParams(dt=0.005))
        xs, _, _ = exact_response(mats.M, mats.C, mats.K, rec.samples, rec.dt)
        isd = np.diff(hist.x, axis=1, prepend=0.0)
        isd_ref = np.diff(xs, axis=1, prepend=0.0)
        peaks = np.max(np.abs(isd), axis=0)
        ref_peaks = np.max(np.abs(isd_ref), axis=0)
        assert np.all(np.abs(peaks - ref_peaks) / ref_peaks < 0.01)

    def test_second_order_convergence(self, model, mats):
        # smooth excitation; halving dt should cut the error about 4x
        duration, coarse = 4.0, 0.02
        t = np.arange(int(duration / coarse) + 1) * coarse
        ag = np.sin(2 * np.pi * 1.3 * t) * np.minimum(1.0, t)
        errors = []
        for dt in (coarse, coarse / 2):
            factor = int(round(coarse / dt))
            tt = np.arange(int(duration / dt) + 1) * dt
            agg = np.sin(2 * np.pi * 1.3 * tt) * np.minimum(1.0, tt)
            rec = GroundMotionRecord(name="s", dt=dt, samples=agg)
            hist = simulate(model, rec, params=NewmarkParams(dt=dt))
            xs, _, _ = exact_response(mats.M, mats.C, mats.K, agg, dt)
            errors.append(np.max(np.abs(hist.x - xs)))
        ratio = errors[0] / errors[1]
        assert 3.2 < ratio < 4.8

    def test_dt_mismatch_rejected(self, model):
        rec = noise_record(5, dt=0.02, n=100)
        with pytest.raises(ParameterError):
            simulate(model, rec, params=NewmarkParams(dt=0.01))

    def test_backends_agree(self, model):
        from shearctl import _kernels

        rec = noise_record(6, n=2000)
        results = {}
        previous = _kernels.get_backend()
        try:
            for name in _kernels.available_backends():
                _kernels.set_backend(name)
                results[name] = simulate(model, rec).x
        finally:
            _kernels.set_backend(previous)
        if len(results) < 2:
            pytest.skip("compiled backend not built")
        a, b = results.values()
        assert np.max(np.abs(a - b)) < 1e-9 * np.max(np.abs(a))


class TestStoryResponses:
    def test_equal_displacements_give_single_drift(self, model):
        rec = GroundMotionRecord(name="z", dt=0.01, samples=np.zeros(3))
        hist = simulate(model, rec)
        hist.x[:] = 0.25
        isd, _ = story_responses(hist, model)
        assert np.all(isd[:, 0] == 0.25)
        assert np.all(isd[:, 1:] == 0.0)

    def test_zero_abs_accel_gives_zero_shear(self, model):
        rec = GroundMotionRecord(name="z", dt=0.01, samples=np.zeros(3))
        hist = simulate(model, rec)
        _, shear = story_responses(hist, model)
        assert np.all(shear == 0.0)

    def test_two_dof_hand_case(self):
        model = BuildingModel(masses=(2.0, 1.0), stiffnesses=(1.0, 1.0), damping_spec=None)
        rec = GroundMotionRecord(name="z", dt=0.01, samples=np.zeros(2))
        hist = simulate(model, rec)
        hist.abs_accel[:] = np.array([1.0, 2.0])
        _, shear = story_responses(hist, model)
        assert np.all(shear[:, 0] == 4.0)
        assert np.all(shear[:, 1] == 2.0)
