from dataclasses import replace

import numpy as np
import pytest

from l0mix.errors import ContractError, DivergenceError
from l0mix.filters import FilterParams
from l0mix.harness import (
    CombinerSpec,
    ExperimentConfig,
    SweepSpec,
    kappa_sweep,
    preset,
    preset_variants,
    run_ensemble,
    run_single,
    steady_state_msd,
    PRESET_NAMES,
    SCALES,
)
from l0mix.sim import Scenario


def small(horizon=400, snr=((0, 30.0),), filters=(FilterParams(0.05, 1e-4), FilterParams(0.05, 1e-6)),
          combiner="grad", policy="full", runs=4, **kw):
    return ExperimentConfig(
        scenario=Scenario(length=8, n_active=2, horizon=horizon, snr_schedule=snr),
        filters=filters, policy=policy, combiner=CombinerSpec(combiner, mu_c=100.0), runs=runs, **kw,
    )


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig(Scenario(8, 2, 10, ((0, 10.0),)), (FilterParams(0.1),))
        assert (cfg.runs, cfg.steady_window, cfg.combiner.beta_f, cfg.combiner.lambda_f) == (100, 0.1, 0.99, 0.99)
        assert cfg.filters[0].beta == 10.0

    @pytest.mark.parametrize(
        "kw",
        [dict(runs=0), dict(steady_window=0.0), dict(steady_window=1.5), dict(policy="odd"),
         dict(combiner="softmax", filters=(FilterParams(0.1),)),
         dict(combiner="grad", filters=(FilterParams(0.1),) * 3)],
    )
    def test_rejects(self, kw):
        with pytest.raises(ContractError):
            small(**kw)

    def test_policy_needs_m_at_most_l(self):
        with pytest.raises(ContractError):
            small(filters=(FilterParams(0.1),) * 9, combiner="softmax", policy="exclusive")

    def test_sweep_grid(self):
        g = SweepSpec(1e-6, 1e-4, 3, (10.0,)).kappa_grid()
        np.testing.assert_allclose(g, [1e-6, 1e-5, 1e-4], rtol=1e-12)


class TestRunner:
    def test_single_filter_combined_equals_component(self, backend):
        cfg = small(filters=(FilterParams(0.05, 1e-5),), combiner="none", runs=2)
        t = run_ensemble(cfg, backend)
        np.testing.assert_array_equal(t.msd_comb, t.msd[:, 0])
        assert np.all(t.weights == 1.0)

    def test_noiseless_lms_is_monotone_in_mean(self, backend):
        cfg = small(filters=(FilterParams(0.02),), combiner="none", snr=((0, 400.0),), horizon=1500, runs=50)
        curve = run_ensemble(cfg, backend).msd[100:, 0]
        # compare block means to smooth ensemble jitter
        blocks = curve[: len(curve) // 50 * 50].reshape(-1, 50).mean(axis=1)
        assert np.all(np.diff(blocks) <= 0)

    def test_identical_filters_keep_lambda_central(self, backend):
        f = FilterParams(0.05, 1e-5)
        t = run_ensemble(small(filters=(f, f), runs=10), backend)
        assert np.all((t.weights >= 0.45) & (t.weights <= 0.55))

    def test_runs_one_equals_single(self, backend):
        cfg = small(runs=1)
        t = run_ensemble(cfg, backend)
        r = run_single(cfg, 0, backend)
        np.testing.assert_array_equal(t.msd, r.msd)
        np.testing.assert_array_equal(t.weights, r.weights)

    def test_first_runs_are_stable_under_more_runs(self, backend):
        cfg = small(runs=3)
        recs = [run_single(replace(cfg, runs=6), i, backend) for i in range(3)]
        t3 = run_ensemble(cfg, backend)
        np.testing.assert_allclose(t3.msd, sum(r.msd for r in recs) / 3, rtol=1e-15)

    def test_workers_do_not_change_result(self, backend):
        cfg = small(runs=6)
        a = run_ensemble(cfg, backend, workers=1)
        b = run_ensemble(cfg, backend, workers=3)
        np.testing.assert_array_equal(a.msd, b.msd)
        np.testing.assert_array_equal(a.msd_comb, b.msd_comb)

    def test_divergence(self, backend):
        cfg = small(filters=(FilterParams(2.0),), combiner="none", runs=2, horizon=3000)
        with pytest.raises(DivergenceError) as info:
            run_ensemble(cfg, backend)
        assert info.value.run_index == 0 and info.value.filter_index == 1
        with pytest.raises(DivergenceError):
            run_ensemble(replace(cfg, exclude_divergent=True), backend)

    def test_exclude_divergent_keeps_stable_runs(self, backend, monkeypatch):
        import l0mix.harness.runner as runner

        real = runner.run_single

        def flaky(cfg, i, *a, **k):
            if i == 1:
                raise DivergenceError("boom", run_index=i)
            return real(cfg, i, *a, **k)

        monkeypatch.setattr(runner, "run_single", flaky)
        t = run_ensemble(small(runs=3, exclude_divergent=True), backend)
        assert t.runs_used == 2 and t.runs_diverged == 1

    @pytest.mark.parametrize("combiner, label", [("grad", "lambda"), ("rls2", "lambda"), ("softmax", "psi")])
    def test_weight_layout(self, backend, combiner, label):
        t = run_ensemble(small(combiner=combiner, runs=2, horizon=50), backend)
        assert t.weight_label == label
        assert t.weights.shape == (50, 1 if label == "lambda" else 2)
        assert t.envelope_violations == 0 and t.weight_sum_error < 1e-12

    def test_update_counts(self):
        assert run_ensemble(small(policy="exclusive", runs=1, horizon=10)).updates_per_iteration == 8
        assert run_ensemble(small(policy="full", runs=1, horizon=10)).updates_per_iteration == 16


class TestSteadyState:
    def test_tail_means(self):
        cfg = small(horizon=200, snr=((0, 30.0), (100, 10.0)), runs=2)
        t = run_ensemble(cfg)
        ss = steady_state_msd(t, 0.1)
        assert ss.labels == ["msd_f1", "msd_f2", "msd_comb"]
        assert ss.table.shape == (2, 3)
        assert ss.table[1, 0] == pytest.approx(t.msd[190:200, 0].mean(), rel=1e-15)
        assert ss.column("msd_comb")[0] == pytest.approx(t.msd_comb[90:100].mean(), rel=1e-15)
        np.testing.assert_allclose(ss.db(), 10 * np.log10(ss.table))

    def test_kappa_sweep_shape_and_cells(self):
        cfg = small(filters=(FilterParams(0.05),), combiner="none", runs=2, horizon=200)
        grid = [1e-6, 1e-4]
        out = kappa_sweep(cfg, grid, [10.0, 30.0])
        assert out.shape == (2, 2)
        one = replace(cfg, filters=(FilterParams(0.05, 1e-4),),
                      scenario=replace(cfg.scenario, snr_schedule=((0, 30.0),)))
        assert out[1, 1] == steady_state_msd(run_ensemble(one)).table[0, 0]


class TestPresets:
    @pytest.mark.parametrize("scale", SCALES)
    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_all_variants_build(self, name, scale):
        variants = preset_variants(name, scale)
        assert variants
        for v, cfg in variants.items():
            assert isinstance(cfg, ExperimentConfig)
            if v.endswith("lms"):
                assert cfg.filters[0].kind == "lms" and cfg.combiner.kind == "none"

    def test_scales(self):
        p = preset("exp2", "paper")
        d = preset("exp2", "desk")
        assert (p.scenario.length, p.scenario.n_active, p.runs) == (128, 5, 100)
        assert (d.scenario.length, d.scenario.n_active) == (32, 2)
        assert p.scenario.snr_schedule == ((0, 60.0), (6000, 40.0), (12000, 20.0))
        assert [f.kappa for f in p.filters] == [5e-5, 5e-6]

    def test_m4_kappas(self):
        cfg = preset("exp4", "desk", "snr40")
        assert [f.kappa for f in cfg.filters] == [0.0, 1e-6, 1e-5, 5e-5]
        assert cfg.policy == "exclusive" and cfg.combiner.kind == "softmax"

    def test_unknown(self):
        with pytest.raises(ContractError):
            preset("exp9")
        with pytest.raises(ContractError):
            preset("exp2", "huge")
        with pytest.raises(ContractError):
            preset("exp2", "desk", "nope")
