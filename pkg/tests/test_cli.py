"""Command line and file format tests."""

import json
from fractions import Fraction

import pytest

from plgroup import cli, fileformat
from plgroup.geometry import Component, Point, SubInterval
from plgroup.plmap import PLMap
from plgroup.pseudogroup import Presentation, orbit_ball


def run(argv, tmp_path=None):
    return cli.main([str(a) for a in argv])


def write_example(tmp_path, name):
    path = tmp_path / f"{name}.plg"
    assert run(["examples", name, "--out", path]) == 0
    return path


# ---------------------------------------------------------------------------
# file format


def test_roundtrip_examples_byte_identical():
    for name, mk in cli.EXAMPLES.items():
        text = fileformat.serialize(mk())
        assert fileformat.serialize(fileformat.parse(text)) == text


def test_roundtrip_preserves_presentation():
    P = cli.EXAMPLES["g23"]()
    Q = fileformat.parse(fileformat.serialize(P))
    assert Q.transversal == P.transversal
    assert Q.generators == P.generators
    assert Q.extensions == P.extensions


def test_missing_header():
    with pytest.raises(ValueError, match="header"):
        fileformat.parse("component T interval 0 1 closed closed\n")


def test_unknown_keyword_rejected():
    with pytest.raises(ValueError, match="line 2.*frobnicate"):
        fileformat.parse("plgroup v1\nfrobnicate 1 2\n")


def test_unknown_field_rejected():
    text = ("plgroup v1\n"
            "component T interval 0 1 closed closed\n"
            "generator g | dom T 0 1 closed closed | codom T "
            "| bps 0:0 1:1 | sparkle 3\n")
    with pytest.raises(ValueError, match="line 3.*sparkle"):
        fileformat.parse(text)


def test_float_rejected():
    with pytest.raises(ValueError, match="rational"):
        fileformat.parse("plgroup v1\n"
                         "component T interval 0 1.5 closed closed\n")


def test_breakpoint_order_error_names_generator():
    text = ("plgroup v1\n"
            "component T interval 0 1 closed closed\n"
            "generator badg | dom T 0 1 closed closed | codom T "
            "| bps 0:0 1/2:3/4 1/4:1/2 1:1\n")
    with pytest.raises(ValueError, match="line 3.*badg"):
        fileformat.parse(text)


def test_non_rel_compact_extension_rejected():
    text = ("plgroup v1\n"
            "component T interval 0 1 closed closed\n"
            "generator g | dom T 1/4 1/2 open open | codom T "
            "| bps 1/4:1/4 1/2:1/2\n"
            "extension g | dom T 1/4 1/2 open open | codom T "
            "| bps 1/4:1/4 1/2:1/2\n")
    with pytest.raises(ValueError, match="relatively compact"):
        fileformat.parse(text)


def test_extension_without_generator_rejected():
    text = ("plgroup v1\n"
            "component T interval 0 1 closed closed\n"
            "extension h | dom T 0 1 closed closed | codom T | bps 0:0 1:1\n")
    with pytest.raises(ValueError, match="no generator"):
        fileformat.parse(text)


def test_rationals_in_reports_are_strings():
    out = fileformat.jsonable({"x": Fraction(3, 4), "n": Fraction(2)})
    assert out == {"x": "3/4", "n": "2"}
    with pytest.raises(TypeError):
        fileformat.jsonable(0.5)


# ---------------------------------------------------------------------------
# commands and exit codes


def test_taut_circle_exit_zero(tmp_path):
    f = write_example(tmp_path, "circle-rotation")
    out = tmp_path / "r.json"
    assert run(["taut", f, "--out", out]) == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["verdict"] == "taut"
    assert rep["command"] == "taut"
    # canonical form: sorted keys
    assert out.read_text() == json.dumps(rep, sort_keys=True, indent=2) + "\n"


def test_taut_nontaut_exit_zero(tmp_path):
    f = write_example(tmp_path, "g2-compact")
    out = tmp_path / "r.json"
    assert run(["taut", f, "--depth", 4, "--out", out]) == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["verdict"] == "not_taut"
    pts = rep["result"]["detail"]["witness"]["orbit_points"]
    assert [(p["component"]["cid"], p["coord"]) for p in pts] == [("T", "0")]


def test_orbit_count_matches_library(tmp_path):
    f = write_example(tmp_path, "g2")
    out = tmp_path / "r.json"
    assert run(["orbits", f, "--point", "T:1/2", "--depth", 3,
                "--out", out]) == 0
    rep = json.loads(out.read_text())
    P = cli.EXAMPLES["g2"]()
    ball = orbit_ball(P, Point(P.component("T"), Fraction(1, 2)), 3)
    assert rep["result"]["count"] == len(ball)
    coords = {q.coord for q in ball}
    assert {Fraction(p["point"][1]) for p in rep["result"]["points"]} == coords


def test_isotropy_rank(tmp_path):
    f = write_example(tmp_path, "g23-compact")
    out = tmp_path / "r.json"
    assert run(["isotropy", f, "--point", "T:0", "--depth", 4,
                "--out", out]) == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["rank"] == 2


def test_plan_want_closed_dimension(tmp_path):
    f = write_example(tmp_path, "g23-compact")
    out = tmp_path / "r.json"
    assert run(["plan", f, "--depth", 4, "--out", out]) == 0
    plain = json.loads(out.read_text())["result"]["plan"]
    assert plain["dimension"] == 3 and plain["closed"] is False
    assert run(["plan", f, "--depth", 4, "--want-closed", "--out", out]) == 0
    closed = json.loads(out.read_text())["result"]["plan"]
    assert closed["dimension"] == 4 and closed["closed"] is True


def test_plan_unknown_exit_two(tmp_path):
    # whole-line homotheties are not compactly generated: the pipeline
    # must come back inconclusive, not wrong
    f = write_example(tmp_path, "g2")
    out = tmp_path / "r.json"
    assert run(["plan", f, "--depth", 3, "--out", out]) == 2
    assert json.loads(out.read_text())["result"]["found"] is False


def test_missing_file_exit_one(tmp_path):
    assert run(["taut", tmp_path / "nope.plg"]) == 1


def test_bad_point_exit_one(tmp_path):
    f = write_example(tmp_path, "g2")
    assert run(["orbits", f, "--point", "T-1/2"]) == 1
    assert run(["orbits", f, "--point", "X:1/2"]) == 1


def test_examples_listing(capsys):
    assert run(["examples"]) == 0
    names = capsys.readouterr().out.split()
    assert "g23-compact" in names and "circle-rotation" in names
    assert run(["examples", "no-such-thing"]) == 1


# ---------------------------------------------------------------------------
# verify

def test_verify_roundtrip_and_mutation(tmp_path):
    f = write_example(tmp_path, "g23-compact")
    out = tmp_path / "r.json"
    assert run(["plan", f, "--depth", 4, "--out", out]) == 0
    assert run(["verify", out]) == 0
    rep = json.loads(out.read_text())
    rep["result"]["plan"]["dimension"] = 4
    mut = tmp_path / "mut.json"
    mut.write_text(json.dumps(rep))
    assert run(["verify", mut]) == 1


def test_verify_each_command(tmp_path):
    f = write_example(tmp_path, "g2-compact")
    out = tmp_path / "r.json"
    for argv in (["taut", f, "--depth", 4],
                 ["closed-orbits", f, "--depth", 4],
                 ["split", f, "--depth", 4],
                 ["hinge", f, "--point", "T:0", "--depth", 4],
                 ["ibundles", f, "--depth", 3],
                 ["inspect", f]):
        assert run(argv + ["--out", out]) == 0
        assert run(["verify", out]) == 0


def test_verify_rejects_non_report(tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"hello": 1}))
    assert run(["verify", p]) == 1


# ---------------------------------------------------------------------------
# plot


def test_plot_orbits(tmp_path):
    f = write_example(tmp_path, "g2")
    rep = tmp_path / "r.json"
    img = tmp_path / "orbit.png"
    assert run(["orbits", f, "--point", "T:1/2", "--depth", 3,
                "--out", rep]) == 0
    assert run(["plot", rep, "--out", img]) == 0
    assert img.stat().st_size > 0


def test_plot_chain_cover(tmp_path):
    f = write_example(tmp_path, "circle-rotation")
    rep = tmp_path / "r.json"
    img = tmp_path / "cover.png"
    assert run(["taut", f, "--out", rep]) == 0
    assert run(["plot", rep, "--out", img]) == 0
    assert img.stat().st_size > 0


def test_plot_empty_report_errors(tmp_path):
    rep = tmp_path / "r.json"
    rep.write_text(json.dumps({"plgroup_report": 1, "result": {}}))
    assert run(["plot", rep, "--out", tmp_path / "x.png"]) == 1
