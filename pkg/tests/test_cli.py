import pytest

from relcollapse import gadgets
from relcollapse.cli import run
from relcollapse.scenario import emit


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", ["fig1", "fig2.scn", "fig3"])
def test_validate_shipped(capsys, name):
    code, out, _ = call(capsys, "validate", name)
    assert code == 0 and "valid" in out


def test_validate_superluminal_file(capsys, tmp_path):
    text = emit(gadgets.fig3()).replace("(0,0);(2,1);(12,1)", "(0,0);(1,3);(12,3)")
    path = tmp_path / "fast.scn"
    path.write_text(text)
    code, out, _ = call(capsys, "validate", str(path))
    assert code == 2 and "superluminal" in out


def test_parse_error_goes_to_stderr(capsys, tmp_path):
    path = tmp_path / "broken.scn"
    path.write_text("[subsystem] name=A dim=2\n[worldline] subsystem=A points=(0,0);(q,0)\n")
    code, out, err = call(capsys, "validate", str(path))
    assert code == 2 and out == "" and "broken.scn:2" in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["validate"], ["compare", "fig2", "--bogus"], []])
def test_usage_errors(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == 1 and err


def test_missing_file(capsys):
    code, _, err = call(capsys, "validate", "does-not-exist.scn")
    assert code == 1 and "no such scenario" in err


def test_compare_fig2(capsys):
    code, out, _ = call(capsys, "compare", "fig2.scn")
    assert code == 0
    assert "max discrepancy: 0 (PASS" in out


def test_compare_reports_failure_with_impossible_tolerance(capsys):
    code, out, _ = call(capsys, "compare", "fig3", "--tol", "0")
    assert code == 3 and "FAIL" in out


def test_simulate_csv(capsys, tmp_path):
    code, out, _ = call(capsys, "simulate", "fig3")
    assert code == 0 and out.splitlines()[0] == "M,probability"
    target = tmp_path / "d.csv"
    code, out, _ = call(capsys, "simulate", "fig3", "--prescription", "hk@A", "--out", str(target))
    assert code == 0 and out == "" and target.read_text().startswith("M,probability")


def test_state(capsys):
    code, out, _ = call(capsys, "state", "fig3", "--surface", "union(4,-1;4,1)", "--outcomes", "M:pi")
    assert code == 0
    assert "weight: 0.5" in out and "|3,3> 0.816497" in out


def test_state_missing_outcome(capsys):
    code, _, err = call(capsys, "state", "fig3", "--surface", "sigma(4,1)")
    assert code == 1 and "no assigned outcome" in err


def test_trace(capsys):
    code, out, _ = call(capsys, "trace", "fig3", "--worldline", "A", "--prescription", "hk", "--outcomes", "M:pi")
    assert code == 0
    assert "t in [0, 4/3]" in out and "t in (4/3, 12]  entered: M" in out


def test_trace_queries_in_file(capsys):
    code, out, _ = call(capsys, "trace", "fig1")
    assert code == 0 and out.count("worldline") == 2


def test_attribute(capsys):
    code, out, _ = call(capsys, "attribute", "fig3", "--format", "kv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("rule=ghirardi") and "definite=true" in lines[0]
    code, out, _ = call(capsys, "attribute", "fig3", "--rule", "uniform")
    assert all(line.startswith("uniform") for line in out.splitlines())


def test_attribute_explicit(capsys):
    code, out, _ = call(
        capsys, "attribute", "fig3", "--points", "(4,-1);(4,1)", "--observable", "builtin.meson_isospin_sq",
        "--targets", "A,B", "--outcomes", "M:K",
    )
    assert code == 0 and "definite (0)" in out


def test_curious(capsys):
    code, out, _ = call(capsys, "curious")
    assert code == 0 and out.splitlines()[0] == "ghirardi: I^2 definite (6), type(A) indefinite"
    code, out, _ = call(capsys, "curious", "--format", "kv")
    assert "observable=isospin_sq rule=ghirardi definite=true" in out


def test_output_is_deterministic(capsys):
    first = call(capsys, "state", "fig3")
    second = call(capsys, "state", "fig3")
    assert first == second


@pytest.mark.slow
def test_demo_figs(capsys):
    code, out, _ = call(capsys, "demo", "figs")
    assert code == 0
    for needle in (
        "feature alpha: PASS",
        "feature beta: PASS",
        "eq3=eq5: PASS",
        "curious attribution: I^2 definite (6), type(A) indefinite",
    ):
        assert needle in out
