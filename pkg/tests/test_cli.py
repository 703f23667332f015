import json

import pytest

from cclab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_gt_trace_json(capsys):
    code, out = run(capsys, "gt-trace", "--n", "64", "--t", "1", "--c", "1")
    assert code == 0
    report = json.loads(out.out)
    assert report["tool"] == "cclab" and report["version"] == 1
    assert report["feasible"] is True
    assert report["increment"] == pytest.approx(1 / 6)


def test_pred_trace_csv_keeps_fractions(capsys):
    code, out = run(capsys, "--format", "csv", "pred-trace", "--p0", "4096", "--a", "1",
                    "--t", "2", "--c1", "2")
    assert code == 0
    lines = out.out.strip().splitlines()
    assert lines[0].startswith("i,p,log2_p")
    assert lines[-1].split(",")[4] == "1/2"


def test_global_flags_work_in_either_position(capsys, tmp_path):
    target = tmp_path / "r.json"
    assert main(["--seed", "7", "gt-trace", "--n", "8", "--t", "2", "--c", "1",
                 "--out", str(target)]) == 0
    assert json.loads(target.read_text())["command"] == "gt-trace"


def test_usage_errors_exit_2(capsys):
    assert main([]) == 2
    assert main(["nope"]) == 2
    assert main(["pred-trace"]) == 2
    assert main(["roundelim"]) == 2
    assert main(["verify", "unknown-suite"]) == 2
    assert main(["gt-trace", "--n", "0", "--t", "1", "--c", "1"]) == 2
    assert main(["--format", "csv", "roundelim", "--protocol", "missing.json",
                 "--game", "g", "--dist", "d", "--n", "1"]) == 2


def test_roundelim_demo_round_trip(capsys, tmp_path):
    code, out = run(capsys, "--seed", "2", "roundelim", "--demo", "--dump", str(tmp_path))
    assert code == 0
    first = json.loads(out.out)
    n = json.loads((tmp_path / "lift.json").read_text())["n"]
    code, out = run(capsys, "roundelim", "--protocol", str(tmp_path / "protocol.json"),
                    "--game", str(tmp_path / "game.json"), "--dist",
                    str(tmp_path / "dist.json"), "--n", str(n))
    assert code == 0
    again = json.loads(out.out)
    for key in ("delta", "dstar_error", "achieved_error", "bound"):
        assert again[key] == pytest.approx(first[key], abs=1e-12)
    assert again["holds"]


def test_bench_csv(capsys):
    code, out = run(capsys, "--format", "csv", "bench", "--m", "16,64", "--n", "2,4",
                    "--sets", "3")
    assert code == 0
    rows = out.out.strip().splitlines()
    assert len(rows) == 1 + 2 * 2 * 2
    header = rows[0].split(",")
    probes, bound = header.index("max_probes"), header.index("loglog_bound")
    for row in rows[1:]:
        cols = row.split(",")
        assert int(cols[probes]) <= int(cols[bound])


def test_gt_run_small(capsys):
    code, out = run(capsys, "gt-run", "--n", "8", "--rounds", "2", "--samples", "3000",
                    "--pairs", "6")
    assert code == 0
    report = json.loads(out.out)
    assert report["trials"] == 3000
    assert report["max_error"] <= 1 / 3


def test_verify_subset(capsys):
    code, out = run(capsys, "verify", "info", "--scale", "0.05")
    assert code == 0
    report = json.loads(out.out)
    assert report["passed"]
    assert {c["name"] for c in report["checks"]} == {
        "average encoding (classical)", "Pinsker", "chain rules"}


def test_violation_exits_1(capsys, monkeypatch):
    from cclab import suites

    def broken(seed, scale):
        check = suites.Check("always fails")
        check.record(1.0, 0.0, "witness")
        return [check]

    monkeypatch.setitem(suites.SUITES, "broken", broken)
    code, out = run(capsys, "verify", "broken")
    assert code == 1
    assert json.loads(out.out)["checks"][0]["failures"] == ["'witness'"]
