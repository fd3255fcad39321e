import json

import pytest

from cge.bench import ExperimentConfig, run_benchmark, write_reports
from cge.cli import main as cli_main
from cge.pipeline import StageError, derive_seed, run_pipeline


def test_smoke_tiny_grid_single_robot():
    run = run_pipeline(side=20, robots=1, lam=0.3, algorithm="sgre", seed=1,
                       vrp_time_limit=2)
    covered = set()
    for w in run.plan.walks:
        covered.update(w.vertices)
    assert covered >= set(run.env.vertices)


def test_same_seed_identical_outputs():
    a = run_pipeline(side=40, robots=2, algorithm="sgre", seed=9,
                     vrp_time_limit=2)
    b = run_pipeline(side=40, robots=2, algorithm="sgre", seed=9,
                     vrp_time_limit=2)
    assert a.result.selected == b.result.selected
    assert a.result.objective == b.result.objective
    assert [w.vertices for w in a.plan.walks] == [w.vertices for w in b.plan.walks]


def test_lambda_sweep_fewer_selections():
    low = run_pipeline(side=60, robots=3, lam=0.1, algorithm="sgre", seed=4,
                       vrp_time_limit=2)
    high = run_pipeline(side=60, robots=3, lam=0.9, algorithm="sgre", seed=4,
                        vrp_time_limit=2)
    assert len(high.result.selected) <= len(low.result.selected)
    assert len(high.ground) <= len(low.ground)


def test_stage_errors_are_tagged():
    with pytest.raises(StageError) as err:
        run_pipeline(side=40, robots=1, starts=[10 ** 9], seed=0,
                     vrp_time_limit=1)
    assert err.value.stage == "solve-vrp"


def test_derive_seed_stable():
    assert derive_seed(7, 60, 3) == derive_seed(7, 60, 3)
    assert derive_seed(7, 60, 3) != derive_seed(7, 60, 4)


def test_config_validation():
    cfg = ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        cfg.validate()
    cfg = ExperimentConfig(algorithms=["nope"])
    with pytest.raises(ValueError):
        cfg.validate()


def test_benchmark_row_count_and_coverage(tmp_path):
    cfg = ExperimentConfig(sizes=[40.0], trials=2, robots=2,
                           lambdas=[0.3, 0.5],
                           algorithms=["sgre", "dgre"], seed=3,
                           vrp_time_limit=2.0, out_dir=str(tmp_path / "out"))
    rows = run_benchmark(cfg)
    assert len(rows) == 2 * 2 * 2  # trials x lambdas x algorithms
    assert all(r["covered"] for r in rows)
    assert all(not r["error"] for r in rows)
    paths = write_reports(rows, cfg)
    for key in ("results", "fig4", "fig5", "fig6", "table1"):
        assert (tmp_path / "out").exists()
        assert paths[key]
    data = json.loads((tmp_path / "out" / "results.json").read_text())
    assert len(data["rows"]) == len(rows)


def test_benchmark_reproducible():
    cfg = ExperimentConfig(sizes=[40.0], trials=2, robots=2,
                           algorithms=["sgre"], seed=3, vrp_time_limit=2.0)
    a = run_benchmark(cfg)
    b = run_benchmark(cfg)
    drop = lambda r: {k: v for k, v in r.items() if k != "wall_time_s"}  # noqa: E731
    assert [drop(r) for r in a] == [drop(r) for r in b]


def test_cli_pipeline_roundtrip(tmp_path):
    env = tmp_path / "env.json"
    vrp = tmp_path / "vrp.json"
    pg = tmp_path / "pg.json"
    sel = tmp_path / "sel.json"
    plan = tmp_path / "plan.json"
    assert cli_main(["gen-env", "--side", "40", "--seed", "3",
                     "--out", str(env)]) == 0
    start = json.loads(env.read_text())["vertices"][0]["id"]
    assert cli_main(["solve-vrp", "--env", str(env),
                     "--starts", f"{start},{start}",
                     "--time-limit", "2", "--out", str(vrp)]) == 0
    assert cli_main(["build-pg", "--env", str(env), "--vrp", str(vrp),
                     "--out", str(pg)]) == 0
    assert cli_main(["select-loops", "--env", str(env), "--pg", str(pg),
                     "--algo", "sgre", "--lazy", "--seed", "7",
                     "--lambda", "0.3", "--out", str(sel)]) == 0
    assert cli_main(["finalize", "--env", str(env), "--vrp", str(vrp),
                     "--pg", str(pg), "--sel", str(sel),
                     "--out", str(plan)]) == 0
    payload = json.loads(plan.read_text())
    assert payload["makespan"] > 0
    sel_data = json.loads(sel.read_text())
    assert sel_data["oracle_calls"] > 0
    assert "alpha" in sel_data and "n_candidates" in sel_data


def test_cli_validate_fim(tmp_path):
    out = tmp_path / "fim.csv"
    assert cli_main(["validate-fim", "--side", "40", "--trials", "5",
                     "--robots", "2", "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 6  # header + 5 trials


def test_cli_error_exit_code(tmp_path):
    missing = tmp_path / "nope.json"
    assert cli_main(["solve-vrp", "--env", str(missing), "--starts", "0",
                     "--out", str(tmp_path / "x.json")]) == 1


def test_cli_bench(tmp_path):
    cfg = {"sizes": [40.0], "trials": 1, "robots": 2,
           "algorithms": ["sgre"], "seed": 1, "vrp_time_limit": 2.0,
           "out_dir": str(tmp_path / "bench")}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert cli_main(["bench", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "bench" / "table1_times.csv").exists()
