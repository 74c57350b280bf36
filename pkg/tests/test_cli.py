"""End-to-end CLI runs through main(argv) with captured streams.

Expected strings were frozen from library-level runs of the same inputs;
exit codes follow the contract 0 success, 2 inconclusive, 1 error.
"""

import json

import pytest

from arcmetric.cli import main
from arcmetric.germs import builtin, sample_arcs
from arcmetric.germspec import germ_spec_json, serialize_arc

CUSP = "builtin:cusp:3:2"
BRANCH_POS = "(t^(3/2), t)"
BRANCH_NEG = "(-t^(3/2), t)"


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


# -- contact ------------------------------------------------------------------


def test_contact_orthogonal_lines(capsys):
    rc, out, err = run(capsys, "contact", "--arc1", "(t, 0)", "--arc2", "(0, t)")
    assert (rc, out, err) == (0, "1\n", "")


def test_contact_identical_arcs_inconclusive(capsys):
    rc, out, err = run(capsys, "contact", "--arc1", "(t, t^2)",
                       "--arc2", "(t, t^2)")
    assert (rc, out, err) == (2, ">= 8\n", "")


def test_contact_cusp_branches(capsys):
    rc, out, err = run(capsys, "contact", "--arc1", BRANCH_POS,
                       "--arc2", BRANCH_NEG)
    assert (rc, out, err) == (0, "3/2\n", "")


def test_contact_json_document(capsys):
    rc, out, _ = run(capsys, "contact", "--arc1", "(t, 0)",
                     "--arc2", "(t, t^2)", "--format", "json")
    assert rc == 0
    doc = json.loads(out)
    assert doc["kind"] == "contact"
    assert doc["outer_order"] == "2"
    assert doc["value"] == [2, 1]
    assert doc["finite"] is True
    assert len(doc["arcs"]) == 2


def test_contact_on_germ_check_passes(capsys):
    rc, out, _ = run(capsys, "contact", "--germ", CUSP,
                     "--arc1", BRANCH_POS, "--arc2", BRANCH_NEG)
    assert (rc, out) == (0, "3/2\n")


def test_contact_rejects_off_germ_arc(capsys):
    rc, out, err = run(capsys, "contact", "--germ", CUSP,
                       "--arc1", "(t, 0)", "--arc2", BRANCH_NEG)
    assert rc == 1
    assert out == ""
    assert "arc1 does not lie on germ cusp(3,2)" in err


def test_contact_writes_out_file(capsys, tmp_path):
    target = tmp_path / "order.txt"
    rc, out, _ = run(capsys, "contact", "--arc1", BRANCH_POS,
                     "--arc2", BRANCH_NEG, "--out", str(target))
    assert rc == 0
    assert out == ""
    assert target.read_text() == "3/2\n"


def test_contact_requires_both_arcs(capsys):
    rc, _, err = run(capsys, "contact", "--arc1", "(t, 0)")
    assert rc == 1
    assert "--arc2" in err


# -- inner --------------------------------------------------------------------


def test_inner_cusp_branches(capsys):
    rc, out, err = run(capsys, "inner", "--germ", CUSP,
                       "--arc1", BRANCH_POS, "--arc2", BRANCH_NEG)
    assert (rc, out, err) == (0, "slope 1.0000 [1], R^2 1.0000\n", "")


def test_inner_identical_arcs_degenerate(capsys):
    rc, out, _ = run(capsys, "inner", "--germ", CUSP,
                     "--arc1", BRANCH_POS, "--arc2", BRANCH_POS)
    assert rc == 2
    assert out == "degenerate (distances below resolution at every scale)\n"


def test_inner_csv_rows(capsys):
    rc, out, _ = run(capsys, "inner", "--germ", CUSP,
                     "--arc1", BRANCH_POS, "--arc2", BRANCH_NEG,
                     "--format", "csv")
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "t,d_outer,d_inner,ratio"
    assert len(lines) == 12
    # branch-to-branch paths cross the tip, so inner dominates outer
    assert all(float(line.split(",")[3]) >= 1.0 for line in lines[1:])


def test_inner_json_document(capsys):
    rc, out, _ = run(capsys, "inner", "--germ", CUSP,
                     "--arc1", BRANCH_POS, "--arc2", BRANCH_NEG,
                     "--format", "json")
    assert rc == 0
    doc = json.loads(out)
    assert doc["kind"] == "inner"
    assert doc["snapped"] == [1, 1]
    assert doc["degenerate"] is False
    assert doc["r_squared"] == pytest.approx(1.0, abs=1e-6)
    assert len(doc["samples"]) == 11


def test_inner_scales_flag_controls_sample_count(capsys):
    rc, out, _ = run(capsys, "inner", "--germ", CUSP,
                     "--arc1", BRANCH_POS, "--arc2", BRANCH_NEG,
                     "--scales", "4:9", "--format", "json")
    assert rc == 0
    assert len(json.loads(out)["samples"]) == 6


# -- verdict ------------------------------------------------------------------


def test_verdict_cusp_finds_witness(capsys):
    rc, out, _ = run(capsys, "verdict", "--germ", CUSP, "--budget", "4")
    assert rc == 0
    doc = json.loads(out)
    assert doc["kind"] == "verdict"
    assert doc["schema_version"] == "1"
    assert doc["outcome"] == "NotNormallyEmbedded"
    assert doc["seed"] == 0
    assert doc["budget"] == 4
    assert doc["witness"]["outer_order"]["value"] == [3, 2]


def test_verdict_plane_no_witness(capsys):
    rc, out, _ = run(capsys, "verdict", "--germ", "builtin:plane",
                     "--budget", "4")
    assert rc == 0
    doc = json.loads(out)
    assert doc["outcome"] == "NoWitnessFound"
    assert doc["notes"] == []
    assert doc["inconclusive_pairs"] == []


def test_verdict_rejects_csv(capsys):
    rc, out, err = run(capsys, "verdict", "--germ", "builtin:plane",
                       "--format", "csv")
    assert (rc, out) == (1, "")
    assert err == "error: verdict reports are JSON only\n"


def test_verdict_seed_from_env_config(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3, "scales": [4, 10, 0.5]}))
    monkeypatch.setenv("ARCMETRIC_CONFIG", str(cfg))
    rc, out, _ = run(capsys, "verdict", "--germ", "builtin:plane",
                     "--budget", "4")
    assert rc == 0
    assert json.loads(out)["seed"] == 3


def test_verdict_seed_flag_beats_env_config(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3}))
    monkeypatch.setenv("ARCMETRIC_CONFIG", str(cfg))
    rc, out, _ = run(capsys, "verdict", "--germ", "builtin:plane",
                     "--budget", "4", "--seed", "7")
    assert rc == 0
    assert json.loads(out)["seed"] == 7


def test_invalid_env_config_is_an_error(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{nope")
    monkeypatch.setenv("ARCMETRIC_CONFIG", str(cfg))
    rc, _, err = run(capsys, "verdict", "--germ", "builtin:plane",
                     "--budget", "4")
    assert rc == 1
    assert err.startswith("error: invalid JSON in")


# -- ultrametric --------------------------------------------------------------


def test_ultrametric_default_fixture(capsys):
    rc, out, err = run(capsys, "ultrametric")
    assert (rc, out, err) == (0, "true (2, 2, 3)\n", "")


def test_ultrametric_fractional_orders(capsys):
    rc, out, _ = run(capsys, "ultrametric", "--arc1", "(t, 0)",
                     "--arc2", "(t, t^(3/2))", "--arc3", "(t, 2*t^(3/2))")
    assert (rc, out) == (0, "true (3/2, 3/2, 3/2)\n")


def test_ultrametric_needs_all_or_none(capsys):
    rc, _, err = run(capsys, "ultrametric", "--arc1", "(t, 0)",
                     "--arc2", "(t, t^2)")
    assert rc == 1
    assert err == "error: ultrametric needs all of --arc1/--arc2/--arc3, or none\n"


def test_ultrametric_degenerate_triple_inconclusive(capsys):
    rc, out, _ = run(capsys, "ultrametric", "--arc1", "(t, 0)",
                     "--arc2", "(t, 0)", "--arc3", "(t, t^2)")
    assert rc == 2
    assert out == ("inconclusive (2, 2, >= 8): "
                   "some pairwise order is truncation-limited\n")


def test_ultrametric_json_document(capsys):
    rc, out, _ = run(capsys, "ultrametric", "--format", "json")
    assert rc == 0
    doc = json.loads(out)
    assert doc == {"kind": "ultrametric", "holds": True,
                   "orders": ["2", "2", "3"], "note": ""}


# -- scatter ------------------------------------------------------------------


def test_scatter_stdout_csv_and_summary(capsys):
    rc, out, err = run(capsys, "scatter", "--germ", "builtin:plane",
                       "--pairs", "16")
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "t,d_outer,d_inner"
    assert len(lines) == 1 + 11 * 16
    assert err == "ratio slope 0.0000, tangent: false\n"


def test_scatter_out_writes_csv_and_gnuplot_stub(capsys, tmp_path):
    target = tmp_path / "sc.csv"
    rc, out, err = run(capsys, "scatter", "--germ", "builtin:plane",
                       "--pairs", "16", "--out", str(target))
    assert rc == 0
    assert out == ""
    assert "tangent: false" in err
    assert target.read_text().startswith("t,d_outer,d_inner\n")
    stub = target.with_suffix(".gp")
    assert "gnuplot -p sc.gp" in stub.read_text()
    assert str(target) in stub.read_text()


# -- lemma-check --------------------------------------------------------------


def test_lemma_check_cusp_pairs(capsys):
    rc, out, _ = run(capsys, "lemma-check", "--germ", CUSP, "--pairs", "2")
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == ("pair (cusp(3,2)#0, cusp(3,2)#1): "
                        "inner point-to-arc 1 vs pairwise 1; "
                        "outer point-to-arc 3/2 vs exact 3/2 [ok]")
    assert lines[-1] == "lemma-check: 2 ok, 0 inconclusive, 0 mismatched of 2 pairs"


# -- flag and input errors ----------------------------------------------------


@pytest.mark.parametrize("flags,fragment", [
    (("--scales", "9:4"), "--scales needs k_min < k_max"),
    (("--scales", "x"), "--scales expects k_min:k_max"),
    (("--truncation", "0"), "--truncation must be positive"),
    (("--truncation", "junk"), "--truncation expects p/q"),
])
def test_bad_flag_values(capsys, flags, fragment):
    rc, _, err = run(capsys, "contact", "--arc1", "(t, 0)",
                     "--arc2", "(t, t^2)", *flags)
    assert rc == 1
    assert fragment in err


def test_unknown_builtin_germ(capsys):
    rc, _, err = run(capsys, "verdict", "--germ", "builtin:nosuch",
                     "--budget", "4")
    assert rc == 1
    assert err == "error: unknown builtin germ 'nosuch'\n"


def test_unknown_command(capsys):
    rc, _, err = run(capsys, "nope")
    assert rc == 1
    assert "invalid choice" in err


def test_missing_command(capsys):
    rc, _, err = run(capsys)
    assert rc == 1
    assert "command" in err


# -- file-based inputs --------------------------------------------------------


def test_germ_spec_file_and_arc_json_file(capsys, tmp_path):
    spec = tmp_path / "cusp.json"
    spec.write_text(germ_spec_json(builtin("cusp", 3, 2)))
    arc = sample_arcs(builtin("cusp", 3, 2), 2, 0)[0]
    arc_file = tmp_path / "arc.json"
    arc_file.write_text(json.dumps(serialize_arc(arc)))
    rc, out, _ = run(capsys, "contact", "--germ", str(spec),
                     "--arc1", str(arc_file), "--arc2", BRANCH_NEG)
    assert (rc, out) == (0, "3/2\n")


def test_arc_file_with_at_prefix(capsys, tmp_path):
    arc = sample_arcs(builtin("cusp", 3, 2), 2, 0)[0]
    arc_file = tmp_path / "arc.json"
    arc_file.write_text(json.dumps(serialize_arc(arc)))
    rc, out, _ = run(capsys, "contact", "--arc1", f"@{arc_file}",
                     "--arc2", BRANCH_NEG)
    assert (rc, out) == (0, "3/2\n")
