"""Order comparison, witness search, and the verdict pipeline.

The cusp(3,2) pair is the canonical mismatch: exact outer order 3/2 against
inner order 1, ratio exponent near -1/2, so the max inner/outer ratio over
scales 2^-4..2^-24 reaches 2^12 = 4096 and outruns any fixed Lipschitz k.
The plane and other embedded controls must come back clean at every stage.
"""

import json
import math
from fractions import Fraction

import pytest

from arcmetric import (
    builtin,
    compare_orders,
    distance_table_csv,
    lipschitz_probe,
    parse_arc_text,
    sample_arcs,
    scatter_csv,
    tangency_scatter,
    ultrametric_check,
    verdict,
    verdict_json_text,
)

F = Fraction

CUSP = builtin("cusp", 3, 2)
PLANE = builtin("plane")


def cusp_pair():
    return sample_arcs(CUSP, 2, seed=0)

def plane_arcs(n=2, seed=0):
    return sample_arcs(PLANE, n, seed=seed)


# -- order comparison ------------------------------------------------------------

def test_cusp_pair_is_a_witness():
    a, b = cusp_pair()
    rep = compare_orders(CUSP, a, b)
    assert rep.equal == "witness"
    assert rep.outer_order.is_finite
    assert rep.outer_order.value == F(3, 2)
    assert rep.inner_order.snapped == 1
    assert rep.ratio_exponent == pytest.approx(-0.5, abs=0.05)
    assert rep.pair == (a.label, b.label)

def test_plane_pair_orders_agree():
    a, b = plane_arcs()
    rep = compare_orders(PLANE, a, b)
    assert rep.equal == "equal"
    assert rep.inner_order.snapped == rep.outer_order.value

def test_same_arc_twice_is_inconclusive():
    a, _ = plane_arcs()
    rep = compare_orders(PLANE, a, a)
    assert rep.equal == "inconclusive"
    assert not rep.outer_order.is_finite
    assert rep.inner_order.degenerate
    assert any("truncation" in n for n in rep.notes)

def test_report_table_is_consistent():
    a, b = cusp_pair()
    rep = compare_orders(CUSP, a, b)
    assert rep.table  # one row per scale
    for t, d_out, d_inn in rep.table:
        assert 0 < t < 1
        assert d_out > 0 and d_inn > 0
        # Inner paths cannot undercut the ambient metric.
        assert d_inn >= d_out - 1e-12

def test_inner_never_snaps_above_outer():
    for germ, arcs in ((CUSP, cusp_pair()), (PLANE, plane_arcs(4, seed=3))):
        for i in range(len(arcs)):
            for j in range(i + 1, len(arcs)):
                rep = compare_orders(germ, arcs[i], arcs[j])
                if rep.outer_order.is_finite and rep.inner_order.snapped is not None:
                    assert rep.inner_order.snapped <= rep.outer_order.value


# -- Lipschitz probes ---------------------------------------------------------------

def test_plane_pair_is_lipschitz():
    a, b = plane_arcs()
    probe = lipschitz_probe(PLANE, a, b, 2.0)
    assert probe.passed
    assert probe.max_ratio == pytest.approx(1.0, abs=1e-9)
    assert len(probe.table) == 21  # scales 2^-4 .. 2^-24

def test_cusp_pair_outruns_any_fixed_k():
    a, b = cusp_pair()
    for k in (10.0, 100.0, 1000.0):
        probe = lipschitz_probe(CUSP, a, b, k)
        assert not probe.passed
    assert probe.max_ratio == pytest.approx(4096.0, rel=1e-6)

def test_identical_arcs_pass_trivially():
    a, _ = plane_arcs()
    probe = lipschitz_probe(PLANE, a, a, 1.0)
    assert probe.passed
    assert probe.table == ()  # every outer distance is degenerate

def test_probe_rejects_nonpositive_k():
    a, b = plane_arcs()
    with pytest.raises(ValueError, match="positive"):
        lipschitz_probe(PLANE, a, b, 0.0)


# -- ultrametric inequality ------------------------------------------------------------

def test_ultrametric_fixture_triple():
    rep = ultrametric_check(
        parse_arc_text("(t, 0)"),
        parse_arc_text("(t, t^2)"),
        parse_arc_text("(t, t^3)"),
    )
    assert rep.holds is True
    assert [o.value for o in rep.orders] == [F(2), F(2), F(3)]

def test_ultrametric_with_fractional_orders():
    rep = ultrametric_check(
        parse_arc_text("(t, 0)"),
        parse_arc_text("(t, t^(3/2))"),
        parse_arc_text("(t, 2*t^(3/2))"),
    )
    assert rep.holds is True
    assert rep.orders[0].value == F(3, 2)

def test_ultrametric_degenerate_triple():
    x = parse_arc_text("(t, 0)")
    rep = ultrametric_check(x, x, x)
    assert rep.holds is None
    assert "truncation" in rep.note


# -- tangency scatter -------------------------------------------------------------------

def test_cusp_scatter_detects_tangency():
    sc = tangency_scatter(CUSP, seed=1)
    assert sc.tangent
    assert sc.ratio_slope == pytest.approx(-0.5, abs=0.05)
    assert len(sc.rows) == 11 * 16  # scales x pairs_per_scale
    assert sc.pairs_per_scale == 16 and sc.seed == 1

def test_plane_scatter_is_flat():
    sc = tangency_scatter(PLANE, seed=1)
    assert not sc.tangent
    assert sc.ratio_slope == pytest.approx(0.0, abs=0.02)
    for _, r in sc.max_ratio_per_scale:
        assert r == pytest.approx(1.0, abs=1e-9)

def test_scatter_requires_enough_pairs():
    with pytest.raises(ValueError, match="16"):
        tangency_scatter(PLANE, pairs_per_scale=8)

def test_scatter_is_deterministic():
    a = tangency_scatter(CUSP, seed=4)
    b = tangency_scatter(CUSP, seed=4)
    assert a == b


# -- verdicts ------------------------------------------------------------------------------

def test_cusp_verdict_finds_witness():
    v = verdict(CUSP, 4, seed=0)
    assert v.outcome == "NotNormallyEmbedded"
    assert v.witness is not None
    assert v.witness.outer_order.value == F(3, 2)
    assert v.witness.inner_order.snapped == 1
    assert v.min_order_gap == pytest.approx(0.5)
    assert v.pairs_tested == 1  # two canonical arcs, one pair
    assert v.scatter.tangent

def test_plane_verdict_is_clean():
    v = verdict(PLANE, 6, seed=0)
    assert v.outcome == "NoWitnessFound"
    assert v.witness is None
    assert v.pairs_tested == 15
    assert v.inconclusive_pairs == ()
    assert v.min_order_gap == pytest.approx(0.0)
    assert not v.scatter.tangent

def test_verdict_budget_validation():
    with pytest.raises(ValueError, match="budget"):
        verdict(PLANE, 1)

def test_verdict_json_is_byte_stable():
    t1 = verdict_json_text(verdict(CUSP, 4, seed=0))
    t2 = verdict_json_text(verdict(CUSP, 4, seed=0))
    assert t1 == t2
    doc = json.loads(t1)
    assert doc["kind"] == "verdict"
    assert doc["schema_version"] == "1"
    assert doc["outcome"] == "NotNormallyEmbedded"
    assert t1.endswith("\n")
    # sort_keys layout: a re-dump reproduces the text exactly.
    assert json.dumps(doc, sort_keys=True, indent=2) + "\n" == t1


# -- CSV output ------------------------------------------------------------------------------

def test_distance_table_csv_shape():
    a, b = cusp_pair()
    rep = compare_orders(CUSP, a, b)
    lines = distance_table_csv(rep).splitlines()
    assert lines[0] == "t,d_outer,d_inner,ratio"
    assert len(lines) == 1 + len(rep.table)
    t, d_out, d_inn, ratio = (float(x) for x in lines[1].split(","))
    assert ratio == pytest.approx(d_inn / d_out)

def test_scatter_csv_shape():
    sc = tangency_scatter(PLANE, seed=2)
    lines = scatter_csv(sc).splitlines()
    assert lines[0] == "t,d_outer,d_inner"
    assert len(lines) == 1 + 11 * 16
