import csv
import json

import numpy as np
import pytest

from sparserecovery import analysis as an
from sparserecovery.cli import CSV_HEADER, ExperimentConfig, main, run_cell
from sparserecovery.errors import ConfigError


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


SMALL = {
    "example": 1, "d": 2, "index_sets": [{"s": 6}, {"s": 10}], "samples": [150, 300], "seeds": [0],
    "decoders": [{"kind": "omp", "steps": 20}],
}


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_header_and_grid_counts(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, SMALL), "--out", str(out)]) == 0
    rows = read_rows(out / "results.csv")
    assert rows[0] == CSV_HEADER
    assert ",".join(rows[0]) == "example,dict,d,J_size,m,decoder,seed,l2_error,trunc_error,nnz,iterations,wall_s"
    data = [r for r in rows[1:] if r[6] != "mean"]
    agg = [r for r in rows[1:] if r[6] == "mean"]
    assert len(data) == 4 and len(agg) == 4
    for r in data:
        assert float(r[7]) >= float(r[8]) * (1 - 1e-9)
    resolved = json.loads((out / "config.resolved.json").read_text())
    assert resolved["superset_factor"] == an.SUPERSET_FACTOR


def test_empty_sample_list(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, {**SMALL, "samples": []}), "--out", str(out)]) == 0
    assert (out / "results.csv").read_text() == ",".join(CSV_HEADER) + "\n"


def test_byte_identical_reruns(tmp_path):
    cfg = write(tmp_path, {**SMALL, "decoders": ["omp", {"kind": "cosamp", "sparsity": 5}, "rlasso"]})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(a), "--no-timing", "--seed", "3"]) == 0
    assert main(["run", "--config", cfg, "--out", str(b), "--no-timing", "--seed", "3"]) == 0
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()


@pytest.mark.parametrize("bad", [
    {"example": 9, "d": 2},
    {"example": 1},
    {"example": 1, "d": 2, "unknown": 1},
    {"example": 4, "d": 2, "error_mode": "parseval"},
    {"example": 3, "d": 2, "dictionary": "fourier"},
    {"example": 1, "d": 2, "decoders": [{"kind": "lasso"}]},
    {"example": 1, "d": 2, "decoders": [{"kind": "rlasso", "beta": 0.5}]},
    {"example": 1, "d": 2, "index_sets": [{"radius": 3}]},
])
def test_config_errors(tmp_path, bad):
    assert main(["run", "--config", write(tmp_path, bad), "--out", str(tmp_path / "o")]) == 2
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_missing_and_invalid_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "none.json")]) == 2
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["run", "--config", str(p)]) == 2
    assert main(["run"]) == 2


def test_numerical_failure_exit_code(tmp_path):
    cfg = {**SMALL, "samples": [10], "compress": "always", "index_sets": [{"s": 10}]}
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, cfg), "--out", str(out)]) == 3
    assert (out / "failures.jsonl").exists()
    rows = read_rows(out / "results.csv")
    assert rows[1][7] == "nan"


def test_example4_uses_monte_carlo(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "example": 4, "d": 2, "index_sets": [{"s": 8}], "samples": [200], "mc_points": 20000,
        "decoders": [{"kind": "rlasso"}],
    })
    (rec,) = run_cell(cfg, 200, 0)
    assert np.isnan(rec.trunc_error)
    assert 0 < rec.l2_error < 1


def test_legendre_dictionary_runs(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "example": 3, "d": 2, "dictionary": "legendre", "index_sets": [{"s": 6}], "samples": [300],
        "mc_points": 20000, "decoders": ["omp"],
    })
    (rec,) = run_cell(cfg, 300, 1)
    assert rec.dictionary == "legendre" and 0 < rec.l2_error < 0.2


def test_bounds_json(tmp_path, capsys):
    assert main(["bounds", "--B", "1", "--n", "10", "--J-size", "1000", "--gamma", "0.01",
                 "--N", "4000", "--C", "1", "--delta", "0.25"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["outputs"]["sample_complexity_upper"] == 421
    assert out["outputs"]["io_lower_bound_same-norm"]["m"] == 8
    assert out["outputs"]["io_lower_bound_mixed"]["m"] == 4
    assert out["outputs"]["nsp_from_rip"]["rho"] == pytest.approx(0.5)
    assert out["inputs"]["B"] == 1.0
    assert main(["bounds", "--delta", "0.5"]) == 2


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and all(line.startswith("PASS") for line in lines)


def test_threads_flag(tmp_path):
    assert main(["run", "--config", write(tmp_path, {**SMALL, "samples": [150]}), "--out",
                 str(tmp_path / "o"), "--threads", "1"]) == 0


def read_plot(path):
    rows = [line.split("\t") for line in path.read_text().splitlines()]
    assert rows[0] == ["series", "x", "error", "reference"]
    return rows[1:]


def test_plot_data_benchmark(tmp_path):
    cfg = {"example": 1, "d": 5, "index_sets": [{"target": 4500}], "plot": {"max_n": 100000, "points": 40}}
    out = tmp_path / "p"
    assert main(["plot-data", "--config", write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = read_plot(out / "plot_data.tsv")
    bench = [(float(r[1]), float(r[2])) for r in rows if r[0] == "best_n_term" and float(r[1]) >= 1000]
    fit = an.rate_fit(bench, kappa=8)
    assert -1.75 <= fit.rho <= -1.25
    last = [r for r in rows if r[0] == "best_n_term"][-1]
    assert float(last[3]) == pytest.approx(float(last[2]), rel=1e-5)


def test_plot_data_single_point_and_decoders(tmp_path):
    cfg = {**SMALL, "samples": [150], "index_sets": [{"s": 6}], "plot": {"points": 1, "max_n": 50}}
    out = tmp_path / "p"
    assert main(["plot-data", "--config", write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = read_plot(out / "plot_data.tsv")
    assert any(r[0].startswith("omp|J=") for r in rows)
    assert all(r[3] == "" for r in rows)


def test_grid_auto_size():
    from sparserecovery.cli import grid_size

    cfg = ExperimentConfig.from_dict({**SMALL, "grid": "auto", "index_sets": [{"s": 6}]})
    J = cfg.build_index_set({"s": 6})
    assert grid_size(cfg, J) == 5 * int(np.abs(J.indices).max())
    (rec,) = run_cell(cfg, 150, 0, J)
    assert np.isfinite(rec.l2_error)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**SMALL, "grid": 0})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"example": 3, "d": 2, "grid": 4})
