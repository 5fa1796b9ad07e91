import json
import subprocess
import sys

import pytest

from liecurrent.cli import _normalize_argv, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_negative_window_is_glued():
    assert _normalize_argv(["verify", "--window", "-10:6"]) == ["verify", "--window=-10:6"]


def test_verify_passes_and_json_is_canonical(capsys):
    code, out, _ = run(capsys, "verify", "--case", "A3", "--algebra", "sl2", "--window", "-10:6", "--depth", "3",
                       "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["version"] == "report_v1" and rep["status"] == "pass"
    assert json.dumps(rep, indent=2, ensure_ascii=True) + "\n" == out
    assert "notes" in rep
    code2, out2, _ = run(capsys, "verify", "--case", "A3", "--algebra", "sl2", "--window", "-10:6", "--depth", "3",
                         "--format", "json")
    assert out2 == out


def test_verify_degenerate_parameters_exit_2(capsys):
    code, _, err = run(capsys, "verify", "--case", "A4", "--m1", "1", "--m2", "1")
    assert code == 2 and "DegenerateParameters" in err


def test_verify_bad_window_exit_2(capsys):
    code, _, err = run(capsys, "verify", "--case", "A1", "--window", "3:6")
    assert code == 2


def test_verify_cross_check_failure_exit_1(capsys):
    code, out, _ = run(capsys, "verify", "--case", "B1", "--depth", "2", "--cross-check")
    assert code == 1 and "[FAIL] manin_cobracket" in out


def test_bd(capsys):
    code, out, _ = run(capsys, "bd", "--algebra", "sl2", "--vertex", "1", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["count"] == 2
    assert [(t["v_dim"], t["s_dim"]) for t in rep["items"]] == [(1, 0), (0, 0)]


def test_trace_commands(capsys):
    code, out, _ = run(capsys, "trace", "classify", "--poly", "1,-3,2")
    assert code == 0 and "A4, j=9/2" in out
    code, out, _ = run(capsys, "trace", "normalize", "--n", "0", "--alpha", "1,0,0", "--order", "6")
    assert code == 0 and "[PASS] resubstitution" in out
    code, out, _ = run(capsys, "trace", "normalize", "--n", "2", "--alpha", "1,2,3")
    assert code == 1 and "alpha_0" in out


def test_export_and_output_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    code, _, _ = run(capsys, "export", "r", "--case", "A2", "--algebra", "sl2", "-o", str(target))
    assert code == 0 and json.loads(target.read_text())["version"] == "report_v1"
    code, out, _ = run(capsys, "export", "algebra", "--algebra", "g2")
    assert code == 0 and len(json.loads(out)["basis"]) == 14


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "liecurrent", "trace", "classify", "--poly", "1,-1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "A2" in res.stdout


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["verify"])
    assert info.value.code == 2
