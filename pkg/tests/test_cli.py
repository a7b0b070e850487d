import numpy as np
import pytest

from structcov import cli
from structcov import matspace as ms
from structcov import sampling as sp


def write_sample_dump(tmp_path, p=4, K=6, n=30, seed=0):
    scen = sp.toeplitz_scenario(p, K, seed)
    groups = [
        sp.sample_gaussian(Q, n, sp.substream(seed, 50, k))
        for k, Q in enumerate(scen.covariances)
    ]
    path = tmp_path / "samples.csv"
    sp.write_samples_csv(groups, path)
    return path, scen


def test_estimate_cli(tmp_path, capsys):
    samples, scen = write_sample_dump(tmp_path)
    out = tmp_path / "est.csv"
    rc = cli.main(["estimate", "--input", str(samples), "--rank", "known:3", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# r_used=3, alpha=, sigma=")
    body = np.array([[float(x) for x in row.split(",")] for row in lines[1:]])
    assert body.shape == (6 * 4, 4)  # K blocks of p x p
    for k in range(6):
        Q = body[4 * k : 4 * (k + 1)]
        assert np.allclose(Q, Q.T, atol=1e-12)


def test_estimate_cli_alpha_and_psd_clip(tmp_path):
    samples, _ = write_sample_dump(tmp_path, n=8)
    out = tmp_path / "est.csv"
    rc = cli.main(
        ["estimate", "--input", str(samples), "--rank", "alpha:0.9", "--psd-clip", "--out", str(out)]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert "alpha=0.9" in lines[0]
    body = np.array([[float(x) for x in row.split(",")] for row in lines[1:]])
    for k in range(6):
        Q = body[4 * k : 4 * (k + 1)]
        assert np.linalg.eigvalsh((Q + Q.T) / 2)[0] >= -1e-10


def test_estimate_cli_bad_rule(tmp_path):
    samples, _ = write_sample_dump(tmp_path)
    assert cli.main(["estimate", "--input", str(samples), "--rank", "known"]) == 2
    assert cli.main(["estimate", "--input", str(samples), "--rank", "ridge"]) == 2


def test_crb_cli(tmp_path):
    scen_ini = tmp_path / "scen.ini"
    scen_ini.write_text("[scenario]\np = 4\nK = 10\nstructure = toeplitz\nseed = 3\n")
    out = tmp_path / "crb.csv"
    rc = cli.main(["crb", "--scenario", str(scen_ini), "--n", "50", "--out", str(out)])
    assert rc == 0
    header, row = out.read_text().splitlines()
    assert header == "l,r,K,n,rank_theory,rank_numeric,trace_bound,floor,marginal"
    vals = row.split(",")
    assert vals[:4] == ["10", "4", "10", "50"]
    assert vals[4] == vals[5]  # theory == numeric rank
    assert float(vals[6]) >= float(vals[7])


def test_crb_cli_other_structure(tmp_path):
    scen_ini = tmp_path / "scen.ini"
    scen_ini.write_text("[scenario]\np = 4\nK = 8\nstructure = diagonal\nseed = 1\n")
    out = tmp_path / "crb.csv"
    assert cli.main(["crb", "--scenario", str(scen_ini), "--n", "20", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2


def test_bench_cli_deterministic_across_runs_and_jobs(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[experiment]\np = 4\nK = 6\ntrials = 4\nn_grid = 15, 30\n"
    )
    outs = []
    for name, jobs in (("a", "1"), ("b", "1"), ("c", "2")):
        out = tmp_path / f"{name}.csv"
        rc = cli.main(
            [
                "bench", "mse-vs-n", "--config", str(cfg), "--out", str(out),
                "--seed", "11", "--jobs", jobs, "--fix-scenario",
            ]
        )
        assert rc == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_bench_cli_thresholds_writes_rank_histograms(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[experiment]\np = 4\nK = 6\ntrials = 3\nn_grid = 20\n")
    out = tmp_path / "thr.csv"
    rc = cli.main(
        ["bench", "thresholds", "--config", str(cfg), "--out", str(out), "--seed", "1", "--fix-scenario"]
    )
    assert rc == 0
    ranks = tmp_path / "thr_ranks.csv"
    assert ranks.exists()
    lines = ranks.read_text().splitlines()
    assert lines[0] == "experiment,estimator,grid,r_hat,count"
    assert len(lines) > 1


def test_bench_cli_tracking(tmp_path):
    out = tmp_path / "track.csv"
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[experiment]\np = 2\nK = 3\nn = 5\ntrials = 2\nbeta = 0.05\n")
    rc = cli.main(["bench", "tracking", "--config", str(cfg), "--out", str(out), "--seed", "2"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "experiment,estimator,grid,mse,stderr,trials"
    assert len(lines) == 1 + 3 * 3  # three estimators, three blocks


def test_bench_cli_config_errors(tmp_path):
    out = tmp_path / "x.csv"
    assert cli.main(["bench", "mse-vs-n", "--config", str(tmp_path / "nope.ini"), "--out", str(out)]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nn_grid = 50, 20\n")
    assert cli.main(["bench", "mse-vs-n", "--config", str(bad), "--out", str(out)]) == 2
    bad2 = tmp_path / "bad2.ini"
    bad2.write_text("[experiment]\ntrials = 0\n")
    assert cli.main(["bench", "mse-vs-n", "--config", str(bad2), "--out", str(out)]) == 2
