import numpy as np
import pytest

from shearctl.errors import ConfigError, FormatError
from shearctl.excitation import (
    G,
    GroundMotionRecord,
    TrainingExcitationConfig,
    generate_training_excitation,
    load_record,
    resample,
    save_record,
)


class TestLoadRecord:
    def test_csv_direct_parse(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("0.0,0.0\n0.01,1.0\n0.02,0.0\n")
        rec = load_record(path)
        assert rec.dt == pytest.approx(0.01)
        assert rec.samples == pytest.approx([0.0, 1.0, 0.0])

    def test_csv_header_skipped(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("time,accel\n0.0,1.0\n0.1,2.0\n")
        assert load_record(path).samples == pytest.approx([1.0, 2.0])

    def test_g_units_converted(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("0.0,1.0\n0.01,1.0\n")
        rec = load_record(path, units="g")
        assert rec.samples == pytest.approx([G, G])
        assert rec.scale_applied == (G,)

    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(0)
        rec = GroundMotionRecord(name="x", dt=0.005, samples=rng.normal(0, 2.3, 500))
        path = tmp_path / "rt.csv"
        save_record(rec, path)
        loaded = load_record(path)
        assert np.array_equal(loaded.samples, rec.samples)

    def test_non_uniform_sampling_rejected(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("0.0,0.0\n0.01,1.0\n0.03,0.0\n")
        with pytest.raises(FormatError):
            load_record(path)

    def test_strong_motion_format(self, tmp_path):
        path = tmp_path / "r.at2"
        path.write_text(
            "SOME DATABASE RECORD\n"
            "1994 EVENT, STATION, COMP\n"
            "ACCELERATION TIME SERIES IN UNITS OF G\n"
            "NPTS=   7, DT=   .0200 SEC\n"
            "  1.0 -1.0 0.5\n"
            "  0.25 -0.25 0.0 0.125\n"
        )
        rec = load_record(path)
        assert rec.dt == pytest.approx(0.02)
        assert rec.samples.shape == (7,)
        assert rec.samples[0] == pytest.approx(G)

    def test_strong_motion_unknown_units_need_flag(self, tmp_path):
        path = tmp_path / "r.at2"
        path.write_text(
            "HEADER\nHEADER\nACCELERATION\nNPTS=2, DT=0.02\n1.0 2.0\n"
        )
        with pytest.raises(FormatError, match="units"):
            load_record(path)
        rec = load_record(path, units="cm/s2")
        assert rec.samples == pytest.approx([0.01, 0.02])

    def test_npts_mismatch_rejected(self, tmp_path):
        path = tmp_path / "r.at2"
        path.write_text("A\nB\nC\nNPTS=5, DT=0.02\n1.0 2.0\n")
        with pytest.raises(FormatError):
            load_record(path, units="g")

    def test_missing_file(self):
        with pytest.raises(FormatError):
            load_record("/nonexistent/record.csv")


class TestResample:
    def test_identity_when_dt_matches(self):
        rec = GroundMotionRecord(name="x", dt=0.01, samples=np.arange(5.0))
        assert resample(rec, 0.01) is rec

    def test_linear_midpoint(self):
        rec = GroundMotionRecord(name="x", dt=0.02, samples=np.array([0.0, 1.0]))
        out = resample(rec, 0.01)
        assert out.samples == pytest.approx([0.0, 0.5, 1.0])

    def test_ramp_down_then_up(self):
        # a linear ramp is reproduced exactly by linear interpolation
        rec = GroundMotionRecord(name="ramp", dt=0.01, samples=np.linspace(0, 1, 101))
        down = resample(rec, 0.025)
        up = resample(down, 0.01)
        t = np.arange(up.samples.shape[0]) * 0.01
        assert np.max(np.abs(up.samples - t)) < 1e-12

    def test_envelope_preserved(self):
        rng = np.random.default_rng(1)
        rec = GroundMotionRecord(name="n", dt=0.01, samples=rng.normal(0, 1, 400))
        out = resample(rec, 0.004)
        assert out.samples.max() <= rec.samples.max() + 1e-12
        assert out.samples.min() >= rec.samples.min() - 1e-12


class TestGenerator:
    def test_silent_when_disabled(self):
        cfg = TrainingExcitationConfig(duration=2.0, noise_std=0.0, impulse_rate=0.0, seed=3)
        rec = generate_training_excitation(cfg)
        assert np.all(rec.samples == 0.0)

    def test_seed_determinism(self):
        cfg = TrainingExcitationConfig(seed=11)
        a = generate_training_excitation(cfg)
        b = generate_training_excitation(cfg)
        assert np.array_equal(a.samples, b.samples)

    def test_different_seeds_differ(self):
        a = generate_training_excitation(TrainingExcitationConfig(seed=1))
        b = generate_training_excitation(TrainingExcitationConfig(seed=2))
        assert not np.array_equal(a.samples, b.samples)

    def test_impulse_count_is_poisson(self):
        # rate 0.2/s over 30 s: mean 6 impulses; 1000 seeds pin the mean
        counts = []
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            rng.normal(0.0, 0.0, 3001)  # skip the noise draw
            counts.append(rng.poisson(0.2 * 30.0))
        mean = np.mean(counts)
        assert 5.4 <= mean <= 6.6

    def test_noise_mean_stays_small(self):
        cfg = TrainingExcitationConfig(
            duration=60.0, noise_std=0.5, impulse_rate=0.0, seed=8
        )
        rec = generate_training_excitation(cfg)
        n = rec.samples.shape[0]
        assert abs(rec.samples.mean()) < 3 * 0.5 / np.sqrt(n)

    def test_invalid_config_rejected(self):
        with pytest.raises(ConfigError):
            TrainingExcitationConfig(duration=-1.0)
        with pytest.raises(ConfigError):
            TrainingExcitationConfig(noise_std=-0.1)
        with pytest.raises(ConfigError):
            TrainingExcitationConfig(impulse_amp_range=(2.0, 1.0))
        with pytest.raises(ConfigError):
            TrainingExcitationConfig(impulse_width=0)

    def test_impulses_visible_over_silence(self):
        cfg = TrainingExcitationConfig(
            duration=30.0, noise_std=0.0, impulse_rate=0.5,
            impulse_amp_range=(1.0, 1.0), seed=4,
        )
        rec = generate_training_excitation(cfg)
        nonzero = np.abs(rec.samples) > 0
        assert nonzero.sum() > 0
        assert set(np.round(np.abs(rec.samples[nonzero]), 12)) <= {1.0, 2.0, 3.0}
