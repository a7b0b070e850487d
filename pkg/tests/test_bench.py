import warnings

import numpy as np
import pytest

from structcov import bench
from structcov import matspace as ms
from structcov import sampling as sp
from structcov.bench import ConfigError, ExperimentConfig, MseRecord


def tiny_cfg(**kw):
    base = dict(experiment="mse_vs_n", p=4, K=8, n_grid=(20, 40), trials=3, seed=2)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="mse_vs_t")
    with pytest.raises(ConfigError):
        tiny_cfg(trials=0)
    with pytest.raises(ConfigError):
        tiny_cfg(n_grid=())
    with pytest.raises(ConfigError):
        tiny_cfg(n_grid=(50, 50))
    with pytest.raises(ConfigError):
        tiny_cfg(n_grid=(100, 50))
    with pytest.raises(ConfigError):
        tiny_cfg(estimators=("scm", "ridge"))
    cfg = tiny_cfg()
    assert cfg.estimators == ("scm", "projection", "tsvd-known", "tsvd-alpha")
    assert cfg.known_r == 3


def test_single_trial_single_grid_is_deterministic():
    cfg = tiny_cfg(n_grid=(25,), trials=1, fix_scenario=True)
    a = bench.run_mse_vs_n(cfg)
    b = bench.run_mse_vs_n(cfg)
    assert a == b
    assert all(rec.stderr == 0.0 for rec in a)
    assert {rec.estimator for rec in a} == {"scm", "projection", "tsvd-known", "tsvd-alpha", "crb"}


def test_projection_on_noiseless_injection_is_exact():
    # feeding the true covariances as SCMs gives zero projection error
    scen = sp.toeplitz_scenario(4, 8, 5)
    Y = scen.measurement_truth()
    Yhat, _ = bench._apply_estimator("projection", Y, scen, 10, 3, None)
    assert np.abs(Yhat - Y).max() < 1e-12
    Yscm, _ = bench._apply_estimator("scm", Y, scen, 10, 3, None)
    assert Yscm is Y


def test_crb_overlay_warns_on_redrawn_scenarios():
    cfg = tiny_cfg(trials=2)
    with pytest.warns(RuntimeWarning, match="fixed scenario"):
        recs = bench.run_mse_vs_n(cfg)
    crb_recs = [r for r in recs if r.estimator == "crb"]
    assert len(crb_recs) == 2
    # exact 1/n scaling between grid points
    assert np.isclose(crb_recs[0].mse * 20, crb_recs[1].mse * 40)


def test_thresholds_histograms_sum_to_trials():
    cfg = ExperimentConfig(
        experiment="thresholds", p=4, K=8, n_grid=(20,), trials=6, seed=3, fix_scenario=True
    )
    records, ranks = bench.run_thresholds(cfg)
    for tag in cfg.estimators:
        total = sum(r.count for r in ranks if r.estimator == tag)
        assert total == 6, tag
    assert {r.estimator for r in records} == set(cfg.estimators)


def test_thresholds_rules_see_identical_data():
    # reordering the estimator list must not change any per-rule result
    kw = dict(experiment="thresholds", p=4, K=8, n_grid=(25,), trials=4, seed=4, fix_scenario=True)
    a, _ = bench.run_thresholds(ExperimentConfig(**kw))
    b, _ = bench.run_thresholds(
        ExperimentConfig(estimators=("elbow-s-c", "tsvd-alpha", "aoht-s"), **kw)
    )
    for tag in ("tsvd-alpha", "elbow-s-c", "aoht-s"):
        ra = [r for r in a if r.estimator == tag][0]
        rb = [r for r in b if r.estimator == tag][0]
        assert ra.mse == rb.mse and ra.stderr == rb.stderr


def test_mse_vs_k_marginals_and_prediction():
    cfg = ExperimentConfig(
        experiment="mse_vs_k", p=4, K=8, n=40, k_grid=(6, 12), trials=40, seed=5
    )
    recs = bench.run_mse_vs_k(cfg)
    tags = {r.estimator for r in recs}
    assert tags == {"scm", "tsvd-known", "prediction"}
    # scm marginal (MSE/K) is K-independent: equal expectations across the grid
    scm_recs = sorted((r for r in recs if r.estimator == "scm"), key=lambda r: r.grid)
    pooled = np.hypot(scm_recs[0].stderr, scm_recs[1].stderr)
    assert abs(scm_recs[0].mse - scm_recs[1].mse) < 3 * pooled
    preds = [r for r in recs if r.estimator == "prediction"]
    assert all(r.stderr == 0.0 for r in preds)
    assert preds[0].mse > preds[1].mse  # shape decreases in K


def test_scm_record_matches_wishart_variance_identity():
    # at Q = I the per-group expected squared error is 2p/n + (l - p)/n
    p, n, K, trials = 10, 100, 2, 10_000
    l = p * (p + 1) // 2
    from structcov.structures import toeplitz_model

    scen = sp.Scenario(
        p=p,
        K=K,
        covariances=[np.eye(p)] * K,
        model=toeplitz_model(p),
        seed=0,
    )
    cfg = ExperimentConfig(
        experiment="mse_vs_n",
        p=p,
        K=K,
        n_grid=(n,),
        trials=trials,
        seed=10,
        estimators=("scm",),
        jobs=2,
    )
    rec = [r for r in bench.run_mse_vs_n(cfg, scenario=scen) if r.estimator == "scm"][0]
    expected = (2 * p + (l - p)) / n
    assert abs(rec.mse / K - expected) < 3 * rec.stderr / K


def test_alpha_rule_consistency_trend():
    # frequency of hitting the true rank is nondecreasing in n; the rank
    # histograms of the thresholds run carry the counts
    cfg = ExperimentConfig(
        experiment="thresholds",
        n_grid=(50, 100, 500, 2000),
        trials=200,
        seed=9,
        estimators=("tsvd-alpha",),
        jobs=2,
    )
    _, ranks = bench.run_thresholds(cfg)
    freqs = []
    for n in cfg.n_grid:
        rows = [r for r in ranks if r.grid == n]
        hits = sum(r.count for r in rows if r.r_hat == 9)
        freqs.append(hits / cfg.trials)
    assert all(b >= a for a, b in zip(freqs, freqs[1:])), freqs
    # median estimated rank at n = 2000 is the true 9
    rows = sorted((r for r in ranks if r.grid == 2000), key=lambda r: r.r_hat)
    acc = 0
    for r in rows:
        acc += r.count
        if acc >= cfg.trials / 2:
            assert r.r_hat == 9
            break


def test_tracking_projection_never_beaten_by_scm():
    # the target lies in the proper span, so projecting can only shrink error
    cfg = ExperimentConfig(
        experiment="tracking", p=2, K=8, n=8, trials=10, seed=11, beta=0.05
    )
    recs = bench.run_tracking(cfg)
    for b in range(1, 9):
        proj = [r for r in recs if r.estimator == "projection" and r.grid == b][0]
        scm_r = [r for r in recs if r.estimator == "scm" and r.grid == b][0]
        assert proj.mse <= scm_r.mse + 1e-12


def test_tracking_static_target_learns():
    # with beta = 0 the covariance is constant and the growing measurement
    # matrix lets the TSVD average the noise down below a single-block SCM
    cfg = ExperimentConfig(
        experiment="tracking", p=2, K=10, n=8, trials=30, seed=3, beta=0.0
    )
    recs = bench.run_tracking(cfg)
    last = max(r.grid for r in recs)
    tsvd_last = [r for r in recs if r.estimator == "tsvd" and r.grid == last][0]
    scm_last = [r for r in recs if r.estimator == "scm" and r.grid == last][0]
    assert tsvd_last.mse < scm_last.mse


def test_tracking_block_one_equals_scm():
    cfg = ExperimentConfig(
        experiment="tracking", p=2, K=3, n=5, trials=3, seed=6, beta=0.05
    )
    recs = bench.run_tracking(cfg)
    scm1 = [r for r in recs if r.estimator == "scm" and r.grid == 1][0]
    tsvd1 = [r for r in recs if r.estimator == "tsvd" and r.grid == 1][0]
    assert scm1.mse == tsvd1.mse
    assert len({r.grid for r in recs}) == 3


def test_tracking_blocks_override():
    cfg = ExperimentConfig(
        experiment="tracking", p=2, K=100, blocks=2, n=4, trials=2, seed=7
    )
    recs = bench.run_tracking(cfg)
    assert {r.grid for r in recs} == {1, 2}


def test_jobs_do_not_change_results():
    kw = dict(experiment="thresholds", p=4, K=8, n_grid=(20, 30), trials=6, seed=8)
    serial, ranks_serial = bench.run_thresholds(ExperimentConfig(**kw))
    parallel, ranks_parallel = bench.run_thresholds(ExperimentConfig(jobs=2, **kw))
    assert serial == parallel
    assert ranks_serial == ranks_parallel


def test_emit_csv(tmp_path):
    path = tmp_path / "out.csv"
    with pytest.raises(ValueError):
        bench.emit_csv([], path)
    rec = MseRecord("mse_vs_n", "scm", 100, 1.25, 0.5, 10)
    bench.emit_csv([rec], path)
    lines = path.read_text().splitlines()
    assert lines == [
        "experiment,estimator,grid,mse,stderr,trials",
        "mse_vs_n,scm,100,1.25,0.5,10",
    ]


def test_emit_csv_sorted_and_reproducible(tmp_path):
    recs = [
        MseRecord("e", "b", 2, 1.0, 0.0, 1),
        MseRecord("e", "a", 2, 1.0, 0.0, 1),
        MseRecord("e", "a", 1, 1.0, 0.0, 1),
    ]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    bench.emit_csv(recs, p1)
    bench.emit_csv(list(reversed(recs)), p2)
    assert p1.read_bytes() == p2.read_bytes()
    body = p1.read_text().splitlines()[1:]
    assert [row.split(",")[1:3] for row in body] == [["a", "1"], ["a", "2"], ["b", "2"]]


def test_load_experiment_config(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(
        "[experiment]\n"
        "experiment = mse-vs-n\n"
        "p = 4\nK = 8\ntrials = 5\nseed = 9\n"
        "n_grid = 10, 20, 40\n"
        "estimators = scm, tsvd-known\n"
        "alpha = formula\n"
    )
    cfg = bench.load_experiment_config(path)
    assert cfg.experiment == "mse_vs_n"
    assert cfg.n_grid == (10, 20, 40)
    assert cfg.estimators == ("scm", "tsvd-known")
    assert cfg.alpha is None
    cfg2 = bench.load_experiment_config(path, trials=2, seed=1)
    assert cfg2.trials == 2 and cfg2.seed == 1
    path2 = tmp_path / "fixed_alpha.ini"
    path2.write_text("[experiment]\nexperiment = tracking\np = 2\nK = 3\nn = 5\nalpha = 0.9\n")
    assert bench.load_experiment_config(path2).alpha == 0.9
    with pytest.raises(ConfigError):
        bench.load_experiment_config(tmp_path / "missing.ini")
