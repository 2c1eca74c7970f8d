import json
import math

import pytest

from frozen import CERTIFY_SEED7_ALPHA
from wellspread.cli import main


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _strip_timings(report):
    report = dict(report)
    report.pop("timings")
    return report


def test_certify_baseline(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = _run(["certify", "--n", "60", "--d", "3", "--t", "2", "--seed", "7", "--out", str(out)], capsys)
    assert code == 0
    report = json.loads(out.read_text())
    assert report["result"]["alpha"] > 0
    assert report["result"]["alpha"] == pytest.approx(CERTIFY_SEED7_ALPHA, rel=1e-10)
    assert report["result"]["distortion_bound"] is not None
    assert report["seed"] == 7 and report["command"] == "certify"
    assert {"version", "config", "timings"} <= report.keys()


def test_certify_deterministic_modulo_timings(tmp_path, capsys):
    args = ["certify", "--n", "40", "--d", "2", "--t", "1", "--seed", "3"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    _run(args + ["--out", str(a)], capsys)
    _run(args + ["--out", str(b)], capsys)
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert _strip_timings(ra) == _strip_timings(rb)
    assert json.dumps(_strip_timings(ra), sort_keys=True) == json.dumps(_strip_timings(rb), sort_keys=True)


def test_certify_not_certified_exit_2(tmp_path, capsys):
    # n = d leaves no room: sigma_min is tiny compared with the largest row
    code, _, _ = _run(["certify", "--n", "4", "--d", "4", "--t", "1", "--out", str(tmp_path / "r.json")], capsys)
    assert code == 2
    assert json.loads((tmp_path / "r.json").read_text())["result"]["verdict"] == "not-certified"


@pytest.mark.parametrize(
    "argv",
    [
        ["certify", "--n", "10", "--d", "20", "--t", "1"],
        ["certify", "--n", "10", "--d", "2", "--t", "0"],
        ["oracle-trace", "--n", "20", "--d", "2", "--t", "1", "--ell", "3"],
        ["oracle-net", "--n", "20", "--d", "4"],
        ["recover", "--n", "100", "--d", "5", "--rho", "0.05", "--restarts", "0"],
        ["recover", "--n", "100", "--d", "5", "--rho", "1.5"],
        ["certify", "--n", "300", "--d", "5", "--t", "4"],
        ["no-such-command"],
    ],
)
def test_error_exit_codes(argv, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("WELLSPREAD_OUTPUT_DIR", str(tmp_path))
    code, _, err = _run(argv, capsys)
    assert code == 1
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["reason"] in {"usage", "invalid-dimension", "domain", "resource-limit"}
    assert list(tmp_path.iterdir()) == []


def test_resource_limit_reports_count(capsys):
    code, _, err = _run(["certify", "--n", "300", "--d", "5", "--t", "4"], capsys)
    payload = json.loads(err)
    assert code == 1 and payload["reason"] == "resource-limit"
    assert payload["count"] == math.comb(300, 4)


def test_default_output_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("WELLSPREAD_OUTPUT_DIR", str(tmp_path))
    code, _, _ = _run(["oracle-ablation", "--n", "40", "--d", "3", "--replicates", "2", "--seed", "5"], capsys)
    assert code == 0
    report = json.loads((tmp_path / "oracle-ablation-seed5.json").read_text())
    assert len(report["result"]["ratios"]) == 2


def test_recover_reports_overlap(tmp_path, capsys):
    out = tmp_path / "r.json"
    argv = ["recover", "--n", "1000", "--d", "10", "--rho", "0.02", "--sigma", "0.1", "--restarts", "4"]
    code, _, _ = _run(argv + ["--seed", "3", "--out", str(out)], capsys)
    assert code == 0
    result = json.loads(out.read_text())["result"]
    assert 0.0 <= result["overlap"] <= 1.0
    assert 0.0 <= result["score"] <= 1.0


def test_blind_recover_from_file(tmp_path, capsys):
    inst = tmp_path / "inst.npz"
    plant = ["plant", "--n", "500", "--d", "6", "--rho", "0.04", "--sigma", "0.1", "--seed", "2"]
    assert _run(plant + ["--no-evaluation", "--out", str(inst)], capsys)[0] == 0
    out = tmp_path / "r.json"
    code, _, _ = _run(["recover", "--input", str(inst), "--rho", "0.04", "--restarts", "3", "--out", str(out)], capsys)
    assert code == 0
    result = json.loads(out.read_text())["result"]
    assert "overlap" not in result and "score" in result


def test_recover_from_file_never_reads_evaluation_block(tmp_path, capsys):
    inst = tmp_path / "inst.npz"
    _run(["plant", "--n", "300", "--d", "4", "--rho", "0.05", "--seed", "1", "--out", str(inst)], capsys)
    out = tmp_path / "r.json"
    _run(["recover", "--input", str(inst), "--rho", "0.05", "--restarts", "2", "--out", str(out)], capsys)
    assert "overlap" not in json.loads(out.read_text())["result"]


def test_oracle_trace_table(tmp_path, capsys):
    table = tmp_path / "sweep.tsv"
    argv = ["oracle-trace", "--n", "200", "--d", "10", "--t", "1", "--ell", "4", "--replicates", "20", "--seed", "1"]
    code, out, _ = _run(argv + ["--table", str(table), "--out", str(tmp_path / "r.json")], capsys)
    assert code == 0
    header, row = table.read_text().splitlines()
    assert "normalized_rate" in header.split("\t")
    rate = float(row.split("\t")[header.split("\t").index("normalized_rate")])
    assert rate > 0
    assert out == table.read_text()


def test_oracle_net_range(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = _run(["oracle-net", "--n", "50", "--d", "2", "--resolution", "0.001", "--out", str(out)], capsys)
    assert code == 0
    result = json.loads(out.read_text())["result"]
    assert 1.0 <= result["lower"] <= result["upper"] <= math.sqrt(50)


def test_certify_from_instance_file(tmp_path, capsys):
    inst = tmp_path / "inst.npz"
    _run(["plant", "--n", "80", "--d", "3", "--rho", "0.05", "--seed", "4", "--out", str(inst)], capsys)
    code, _, _ = _run(["certify", "--input", str(inst), "--t", "1", "--out", str(tmp_path / "r.json")], capsys)
    assert code in (0, 2)
    assert json.loads((tmp_path / "r.json").read_text())["result"]["n"] == 80
