import csv
import json
import os

import numpy as np
import pytest

from fracdisp import cli
from fracdisp.comb import totient_count
from fracdisp.errors import ConvergenceError


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def manifest(out, command):
    with open(os.path.join(out, f"{command}.manifest.json")) as fh:
        return json.load(fh)


def test_comb_measure_rows(tmp_path):
    out = str(tmp_path)
    assert cli.main(["comb-measure", "--q-max", "100", "--output-dir", out]) == 0
    header, rows = read_csv(os.path.join(out, "comb_measure.csv"))
    assert header == ["p", "q", "weight"]
    assert len(rows) == totient_count(100)


def test_rerun_is_deterministic(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (a, b):
        assert cli.main(["dispersion-curve", "--delta", "0.25", "--n-t", "9", "--output-dir", out,
                         "--no-cache"]) == 0
    ma, mb = manifest(a, "dispersion-curve"), manifest(b, "dispersion-curve")
    assert ma["outputs"] == mb["outputs"]
    with open(os.path.join(a, "dispersion_curve.csv"), "rb") as fa, \
            open(os.path.join(b, "dispersion_curve.csv"), "rb") as fb:
        assert fa.read() == fb.read()


def test_cache_hit_gives_same_digests(tmp_path):
    out = str(tmp_path)
    args = ["divisor-check", "--k-max", "20", "--output-dir", out]
    assert cli.main(args) == 0
    first = manifest(out, "divisor-check")
    assert cli.main(args) == 0
    second = manifest(out, "divisor-check")
    assert not first["cached"] and second["cached"]
    assert first["outputs"] == second["outputs"]
    assert cli.main(args + ["--no-cache"]) == 0
    assert not manifest(out, "divisor-check")["cached"]


def test_dispersion_curve_matches_reference(tmp_path):
    out = str(tmp_path)
    assert cli.main(["dispersion-curve", "--delta", "0.5", "--output-dir", out]) == 0
    header, rows = read_csv(os.path.join(out, "dispersion_curve.csv"))
    assert header == ["t", "h", "ok", "reference"]
    h = np.array([float(r[1]) for r in rows])
    ref = np.array([float(r[3]) for r in rows])
    assert np.max(np.abs(h / ref - 1)) < 1e-6
    # 12 significant digits
    assert all(len(r[1].replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 12 for r in rows)


def test_json_outputs_have_sorted_keys(tmp_path):
    out = str(tmp_path)
    assert cli.main(["holder", "--q-max", "300", "--window", "2e-4,1e-2", "--n-t", "6",
                     "--output-dir", out]) == 0
    with open(os.path.join(out, "holder.json")) as fh:
        text = fh.read()
    data = json.loads(text)
    assert list(data) == sorted(data)
    assert text == json.dumps(data, sort_keys=True, indent=2) + "\n"


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"q-max": 30, "delta": 0.3, "output_dir": str(tmp_path / "o")}))
    assert cli.main(["comb-measure", "--config", str(cfg), "--q-max", "20"]) == 0
    m = manifest(str(tmp_path / "o"), "comb-measure")
    assert m["config"]["q_max"] == 20 and m["config"]["delta"] == 0.3


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert cli.main(["comb-measure", "--config", str(cfg)]) == cli.EXIT_INVALID


def test_validation_lists_every_violation(tmp_path, capsys):
    code = cli.main(["dispersion-curve", "--delta", "1.5", "--n-points", "7", "--output-dir",
                     str(tmp_path)])
    assert code == cli.EXIT_INVALID
    err = capsys.readouterr().err
    assert "delta=1.5" in err and "n_points" in err
    assert not any(f.endswith(".csv") for f in os.listdir(tmp_path)) if os.path.exists(tmp_path) else True


def test_scale_floor_enforced(tmp_path):
    assert cli.main(["holder", "--q-max", "100", "--window", "1e-6,1e-2",
                     "--output-dir", str(tmp_path)]) == cli.EXIT_INVALID


def test_lock_file_blocks_second_run(tmp_path):
    (tmp_path / ".lock").write_text("123")
    assert cli.main(["comb-measure", "--q-max", "5", "--output-dir", str(tmp_path)]) == cli.EXIT_INVALID


def test_failed_run_leaves_no_outputs(tmp_path, monkeypatch):
    def boom(cfg):
        raise ConvergenceError("no convergence", residual=1.0, iterations=3)
    monkeypatch.setitem(cli.HANDLERS, "comb-measure", boom)
    assert cli.main(["comb-measure", "--output-dir", str(tmp_path)]) == cli.EXIT_CONVERGENCE
    left = [f for f in os.listdir(tmp_path) if not f.startswith(".cache")]
    assert left == []


def test_gate_failure_exit_code(tmp_path, monkeypatch):
    def failing(cfg):
        return cli.Result({"x.json": {"a": 1}}, {}, [], gate_ok=False)
    monkeypatch.setitem(cli.HANDLERS, "divisor-check", failing)
    assert cli.main(["divisor-check", "--output-dir", str(tmp_path), "--no-cache"]) == cli.EXIT_GATE
    assert (tmp_path / "x.json").exists()


def test_counting_check_small(tmp_path):
    out = str(tmp_path)
    assert cli.main(["counting-check", "--n-trials", "50", "--q-max", "200", "--output-dir", out]) == 0
    with open(os.path.join(out, "counting_check.json")) as fh:
        data = json.load(fh)
    assert data["M_violations"] == 0 and data["N_abs_violations"] == 0


def test_fig3_small(tmp_path):
    out = str(tmp_path)
    assert cli.main(["fig3", "--q-max", "200", "--n-t", "1001", "--output-dir", out]) == 0
    header, rows = read_csv(os.path.join(out, "fig3.csv"))
    assert header == ["t", "H"] and len(rows) == 1001
    assert manifest(out, "fig3")["summary"]["atoms"] == totient_count(200)


def test_fig2_peaks_grow(tmp_path):
    out = str(tmp_path)
    assert cli.main(["fig2", "--eps1-list", "0.2,0.1", "--n-t", "201", "--output-dir", out]) == 0
    ratios = manifest(out, "fig2")["summary"]["peak_to_background_at_0_1_2/3"]
    assert ratios["0.1"][0] > ratios["0.2"][0]


def test_ground_state_command(tmp_path):
    out = str(tmp_path)
    assert cli.main(["ground-state", "--delta", "1", "--half-width", "8", "--n-points", "256",
                     "--output-dir", out]) == 0
    s = manifest(out, "ground-state")["summary"]
    assert s["eigenvalue"] == pytest.approx(1 / (2 * np.pi), abs=1e-6)


def test_bounds_check_command(tmp_path):
    out = str(tmp_path)
    assert cli.main(["bounds-check", "--delta", "1", "--datum", "random", "--output-dir", out]) == 0
    assert manifest(out, "bounds-check")["summary"]["ok"]


def test_every_command_has_handler():
    assert set(cli.COMMANDS) == set(cli.HANDLERS)
    parser = cli.build_parser()
    for c in cli.COMMANDS:
        args = parser.parse_args([c])
        assert args.command == c
