from __future__ import annotations

import subprocess
import sys

from rperm.cli import main


def run(tmp_path, *argv):
    return main([*argv, "--out-dir", str(tmp_path)])


def test_verify_hardness_ordered_passes(tmp_path, capsys):
    assert run(tmp_path, "verify-hardness", "bundled:y1y2.expr", "--k", "2", "--ordered") == 0
    assert "PASS" in capsys.readouterr().out
    assert (tmp_path / "g3.graph").exists() and (tmp_path / "report.txt").exists()


def test_verify_hardness_stated_factor_fails_unordered(tmp_path):
    # two y-edges lie on one directed cycle, not 2! of them
    assert run(tmp_path, "verify-hardness", "bundled:y1y2.expr", "--k", "2") == 1
    assert run(tmp_path, "verify-hardness", "bundled:y1y2.expr", "--k", "2", "--factor", "cyclic") == 0


def test_verify_hardness_k1_instance(tmp_path, capsys):
    code = run(tmp_path, "verify-hardness", "bundled:y1.expr", "--k", "1")
    out = capsys.readouterr().out
    assert code == 1 and "lhs=0" in out


def test_fault_injection_fails(tmp_path):
    assert run(tmp_path, "verify-hardness", "bundled:y1y2.expr", "--k", "2", "--ordered",
               "--inject-fault", "ay:0") == 1
    assert run(tmp_path, "verify-hardness", "bundled:y1y2.expr", "--k", "2", "--ordered",
               "--inject-fault", "cloop:1") == 1


def test_bad_fault_spec(tmp_path):
    assert run(tmp_path, "verify-hardness", "bundled:y1y2.expr", "--k", "2", "--inject-fault", "xx:0") == 2


def test_dp_commands(tmp_path):
    assert run(tmp_path, "dp", "bundled:two_node.graph", "bundled:two_node.td", "2") == 0
    assert (tmp_path / "per_le_c.circuit").read_text().startswith("CIRCUIT")
    assert run(tmp_path, "dp", "bundled:eight_node.graph", "bundled:eight_node.td", "3") == 0


def test_dp_width_claim_rejected(tmp_path, capsys):
    assert run(tmp_path, "dp", "bundled:k4.graph", "bundled:k4_width2.td", "2") == 2
    assert "edges in no bag" in capsys.readouterr().err


def test_input_errors(tmp_path):
    assert run(tmp_path, "verify-hardness", str(tmp_path / "missing.txt"), "--k", "1") == 2
    bad = tmp_path / "bad.expr"
    bad.write_text("X1 +\n")
    assert run(tmp_path, "verify-hardness", str(bad), "--k", "1") == 2
    assert main(["no-such-command"]) == 2


def test_gadget_compile(tmp_path):
    for stage in ("g1", "g2", "g3", "g3-ordered"):
        assert run(tmp_path, "gadget", "compile", "bundled:x1y1_x2y2.expr", "--stage", stage) == 0
        for suffix in ("graph", "provenance", "couplings"):
            assert (tmp_path / f"{stage}.{suffix}").exists()


def test_expsum_and_classics(tmp_path):
    assert run(tmp_path, "expsum", "verify-split", "bundled:x1y1_x2y2.expr", "--blocks", "1") == 0
    for which in ("ryser", "esp", "bnk", "pochhammer", "bitpack", "towers"):
        assert run(tmp_path, "classics", which, "--n", "4") == 0


def test_suite_tiny_budget(tmp_path, capsys):
    assert run(tmp_path, "suite", "--budget", "10", "--only", "1,3") == 3
    assert "budget exceeded" in capsys.readouterr().out


def test_budget_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("RPERM_BUDGET", "10")
    assert run(tmp_path, "suite", "--only", "6") == 3
    monkeypatch.setenv("RPERM_BUDGET", "lots")
    assert run(tmp_path, "suite", "--only", "3") == 2


def test_suite_deterministic(tmp_path, capsys):
    argv = ["suite", "--sizes", "small", "--only", "3,4,6,9", "--seed", "7"]
    assert run(tmp_path, *argv) == 0
    first = capsys.readouterr().out
    assert run(tmp_path, *argv) == 0
    assert capsys.readouterr().out == first
    assert (tmp_path / "report.txt").read_text() == first


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rperm", "classics", "bitpack", "--n", "3",
                           "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "bitpack" in proc.stdout
