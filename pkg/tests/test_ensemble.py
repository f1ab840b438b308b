"""Ensemble propagation: determinism, conservation ledgers, sampling."""

from __future__ import annotations

import numpy as np
import pytest

import surfhop as sh
from surfhop.ensemble import consistency_report, sample_initial
from surfhop.errors import ConfigurationError, PropagationError

from stubmodels import NanForce


def _frames_equal(a, b) -> bool:
    if len(a) != len(b):
        return False
    fields = (
        "t",
        "p_plus",
        "p_minus",
        "mean_alpha",
        "mean_beta",
        "energy",
        "work",
        "frustrated_count",
        "consistency_gap",
    )
    return all(
        getattr(fa, f) == getattr(fb, f) for fa, fb in zip(a, b) for f in fields
    )


class TestSampling:
    def test_prefix_stability(self):
        ic = sh.InitialCondition()
        big = sample_initial(ic, 100, 42)
        small = sample_initial(ic, 50, 42)
        assert np.array_equal(big.q[:50], small.q)
        assert np.array_equal(big.pk[:50], small.pk)

    def test_marginal_moments(self):
        st = sample_initial(sh.InitialCondition(), 200000, 0)
        assert st.q.mean() == pytest.approx(-5.0, abs=0.02)
        assert st.q.std() == pytest.approx(1.0, abs=0.01)
        assert st.pk.mean() == pytest.approx(10.0, abs=0.01)
        # Minimum-uncertainty packet: momentum spread is 1/(2 sigma_q).
        assert st.pk.std() == pytest.approx(0.5, abs=0.005)

    def test_surface_initialization(self):
        up = sample_initial(sh.InitialCondition(), 10, 1)
        low = sample_initial(sh.InitialCondition(surface0="lower"), 10, 1)
        assert np.all(up.sigma == 1.0) and np.all(up.a_pp == 1.0)
        assert np.all(low.sigma == 0.0) and np.all(low.a_pp == 0.0)
        assert np.all(up.alpha == 0.0) and np.all(up.beta == 0.0)

    def test_invalid_arguments(self):
        with pytest.raises(ConfigurationError):
            sample_initial(sh.InitialCondition(), 0, 1)
        with pytest.raises(ConfigurationError):
            sh.InitialCondition(sigma_q=-1.0)
        with pytest.raises(ConfigurationError):
            sh.InitialCondition(surface0="middle")


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 0},
            {"dt": -0.25},
            {"dt": 0.0},
            {"t_final": -5.0},
            {"t_final": 2501.0},  # not an integer number of steps
            {"stride": 0},
            {"stride": 7},  # 10000 steps not divisible by 7
            {"seed": -1},
        ],
    )
    def test_bad_configs_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            sh.RunConfig(**kwargs)

    def test_unknown_record_field(self):
        with pytest.raises(ConfigurationError):
            sh.run_ensemble(sh.RunConfig(n=2, t_final=5.0), record=("bogus",))


class TestDeterminism:
    def test_identical_runs_identical_frames(self):
        cfg = sh.RunConfig(n=64, t_final=250.0, seed=11)
        assert _frames_equal(
            sh.run_ensemble(cfg).frames, sh.run_ensemble(cfg).frames
        )

    def test_worker_count_does_not_change_results(self):
        cfg = sh.RunConfig(n=64, t_final=250.0, seed=11)
        kw = dict(chunk_size=32, record=("q", "pk", "a_pp"))
        r1 = sh.run_ensemble(cfg, workers=1, **kw)
        r3 = sh.run_ensemble(cfg, workers=3, **kw)
        r4 = sh.run_ensemble(cfg, workers=4, **kw)
        assert _frames_equal(r1.frames, r3.frames)
        assert _frames_equal(r1.frames, r4.frames)
        for name in kw["record"]:
            assert np.array_equal(r1.trajectories[name], r3.trajectories[name])
            assert np.array_equal(r1.trajectories[name], r4.trajectories[name])

    def test_different_seeds_differ(self):
        cfg1 = sh.RunConfig(n=64, t_final=250.0, seed=11)
        cfg2 = sh.RunConfig(n=64, t_final=250.0, seed=12)
        assert not _frames_equal(
            sh.run_ensemble(cfg1).frames, sh.run_ensemble(cfg2).frames
        )


class TestFrames:
    def test_frame_grid(self):
        cfg = sh.RunConfig(n=4, t_final=100.0, dt=0.25, stride=20)
        frames = sh.run_ensemble(cfg).frames
        assert len(frames) == cfg.n_steps // cfg.stride + 1
        times = [f.t for f in frames]
        assert times[0] == 0.0 and times[-1] == 100.0
        assert np.allclose(np.diff(times), 5.0)

    def test_populations_sum_to_one(self):
        frames = sh.run_ensemble(sh.RunConfig(n=50, t_final=250.0)).frames
        for f in frames:
            assert f.p_plus + f.p_minus == pytest.approx(1.0, abs=1e-14)

    def test_work_starts_at_zero(self):
        frames = sh.run_ensemble(sh.RunConfig(n=50, t_final=250.0)).frames
        assert frames[0].work == 0.0
        assert frames[0].p_plus == 1.0

    def test_record_shapes(self):
        names = ("q", "pk", "sigma", "alpha", "beta", "a_pp", "work", "energy", "hop_dv")
        cfg = sh.RunConfig(n=7, t_final=50.0)
        r = sh.run_ensemble(cfg, record=names)
        for name in names:
            assert r.trajectories[name].shape == (11, 7)

    def test_no_record_request_returns_none(self):
        assert sh.run_ensemble(sh.RunConfig(n=2, t_final=5.0)).trajectories is None


class TestConservationLedgers:
    def test_qtsh_work_energy_ledger_per_trajectory(self):
        # Kinematic energy change = accumulated quantum work + potential
        # steps paid at hops, trajectory by trajectory.
        cfg = sh.RunConfig(n=300, seed=4)
        r = sh.run_ensemble(cfg, record=("energy", "work", "hop_dv"))
        e = r.trajectories["energy"]
        w = r.trajectories["work"]
        dv = r.trajectories["hop_dv"]
        residual = np.abs(e - e[0] - w - dv).max()
        assert residual <= 1e-10

    def test_fssh_energy_constant_per_trajectory(self):
        cfg = sh.RunConfig(n=300, seed=4, engine=sh.EngineKind.FSSH)
        r = sh.run_ensemble(cfg, record=("energy", "hop_dv"))
        e = r.trajectories["energy"]
        # The rescale pays each potential step from momentum on the spot, so
        # total energy is flat even though hops did occur.
        assert np.abs(e - e[0]).max() <= 1e-9
        assert np.any(r.trajectories["hop_dv"] != 0.0)

    def test_bo_stays_on_surface(self):
        cfg = sh.RunConfig(n=100, t_final=500.0, engine=sh.EngineKind.BORN_OPPENHEIMER)
        r = sh.run_ensemble(cfg, record=("a_pp",))
        for f in r.frames:
            assert f.p_plus == 1.0
            assert f.frustrated_count == 0
        assert np.all(r.trajectories["a_pp"] == 1.0)
        assert r.degenerate_hops == 0

    def test_frustrated_hops_at_low_momentum(self):
        ic = sh.InitialCondition(k0=5.0, surface0="lower")
        cfg = sh.RunConfig(
            n=200, seed=5, ic=ic, t_final=1500.0, engine=sh.EngineKind.FSSH
        )
        r = sh.run_ensemble(cfg, record=("energy",))
        assert r.frames[-1].frustrated_count == 2
        e = r.trajectories["energy"]
        assert np.abs(e - e[0]).max() <= 1e-9

    def test_frustrated_counter_is_cumulative(self):
        ic = sh.InitialCondition(k0=5.0, surface0="lower")
        cfg = sh.RunConfig(
            n=200, seed=5, ic=ic, t_final=1500.0, engine=sh.EngineKind.FSSH
        )
        counts = [f.frustrated_count for f in sh.run_ensemble(cfg).frames]
        assert counts == sorted(counts)
        assert counts[0] == 0 and counts[-1] == 2


class TestConsistencyReport:
    def test_report_matches_frames(self):
        frames = sh.run_ensemble(sh.RunConfig(n=200, t_final=1000.0, seed=8)).frames
        rep = consistency_report(frames)
        gaps = [f.consistency_gap for f in frames]
        drifts = [abs(f.energy - frames[0].energy) for f in frames]
        assert rep.max_consistency_gap == max(gaps)
        assert rep.max_energy_drift == pytest.approx(max(drifts), abs=1e-18)
        assert rep.frustrated_total == frames[-1].frustrated_count
        assert list(rep.consistency_gap_series) == gaps
        assert len(rep.energy_drift_series) == len(frames)


class TestFailurePropagation:
    def test_nan_force_raises_with_location(self):
        ic = sh.InitialCondition(k0=10.0, q0=-5.0)
        cfg = sh.RunConfig(
            n=4,
            dt=0.25,
            t_final=2000.0,
            seed=3,
            ic=ic,
            engine=sh.EngineKind.BORN_OPPENHEIMER,
            model=NanForce(),
        )
        with pytest.raises(PropagationError) as exc:
            sh.run_ensemble(cfg)
        assert exc.value.index == 2
        assert exc.value.t == 926.25
