"""Manifold records: constructors, validation, admissibility, serialization."""
import json

import pytest

from exolink.fixtures import spec_text
from exolink.groupring import GroupRingElement, to_text
from exolink.grouppres import GroupPresentation
from exolink.lattice import IntSymMatrix, hyperbolic_pair
from exolink.manifold import (
    AdmissibilityError,
    ManifoldRecord,
    MarkedSubmanifold,
    admissible_from_spec,
    canonical_json,
    invariant_tuple,
    kodaira_thurston_block,
    product_T2_Sigma_g,
    record_from_json,
    record_to_json,
    simplifies_trivial,
    standard_block,
    u_factor,
    unit_vector,
)


def test_u_factor():
    u = u_factor(2, (1, 0))
    assert to_text(u) == "t1^-1 - t1"
    assert u_factor(2, (0, 2)) == GroupRingElement.from_terms(
        2, [((0, -2), 1), ((0, 2), -1)]
    )


def test_standard_blocks_invariants():
    expected = {
        "S4": {"euler": 2, "b1": 0, "b2": 0, "signature": 0},
        "S2xS2": {"euler": 4, "b1": 0, "b2": 2, "signature": 0},
        "S2xS2_twisted": {"euler": 4, "b1": 0, "b2": 2, "signature": 0},
        "T2xS2": {"euler": 0, "b1": 2, "b2": 2, "signature": 0},
        "S1xS3": {"euler": 0, "b1": 1, "b2": 0, "signature": 0},
    }
    for name, want in expected.items():
        tup = invariant_tuple(standard_block(name))
        got = {k: tup[k] for k in want}
        assert got == want, name
    assert invariant_tuple(standard_block("S2xS2"))["parity"] == "even"
    assert invariant_tuple(standard_block("S2xS2_twisted"))["parity"] == "odd"


def test_standard_block_unknown_name():
    with pytest.raises(ValueError):
        standard_block("CP2")


def test_product_block_shape():
    for g in (1, 2, 3):
        block = product_T2_Sigma_g(g)
        tup = invariant_tuple(block)
        assert tup["euler"] == 0
        assert tup["b1"] == 2 + 2 * g
        assert tup["b2"] == 4 * g + 2
        assert tup["signature"] == 0
        assert tup["parity"] == "even"
    assert to_text(product_T2_Sigma_g(2).sw) == "t1^-2 - 2 + t1^2"


def test_kodaira_block_shape():
    for g in (1, 2, 3):
        block = kodaira_thurston_block(g)
        tup = invariant_tuple(block)
        assert tup["euler"] == 0
        assert tup["b1"] == g + 2
        assert tup["b2"] == 2 * g + 2
        assert tup["parity"] == "even"
        # relative factor on T is sw * u
        rel = dict(block.rel_sw)
        assert rel["T"] == block.sw * u_factor(block.form.n, unit_vector(block.form.n, 0))
    assert to_text(kodaira_thurston_block(2).sw) == "t1^-2 - 2 + t1^2"


def test_record_validation_euler_mismatch():
    with pytest.raises(ValueError, match="chi"):
        ManifoldRecord(
            name="bad",
            pi1=GroupPresentation.parse("gens: ; rels: "),
            euler=5,
            form=hyperbolic_pair(),
            basis=("a", "b"),
            sw=None,
            sw_reason="untracked (test)",
            rel_sw=(),
            marks=(),
        )


def test_record_validation_rel_sw_consistency():
    form = hyperbolic_pair()
    sw = GroupRingElement.one(2)
    good_rel = sw * u_factor(2, (1, 0))
    mark = MarkedSubmanifold(
        kind="torus",
        label="T",
        homology_class=(1, 0),
        pi1_words=(),
        flags=frozenset({"self_intersection_zero"}),
    )
    record = ManifoldRecord(
        name="ok",
        pi1=GroupPresentation.parse("gens: ; rels: "),
        euler=4,
        form=form,
        basis=("T", "S"),
        sw=sw,
        sw_reason="tracked",
        rel_sw=(("T", good_rel),),
        marks=(mark,),
    )
    assert record.signature == 0
    with pytest.raises(ValueError, match="rel"):
        ManifoldRecord(
            name="bad",
            pi1=GroupPresentation.parse("gens: ; rels: "),
            euler=4,
            form=form,
            basis=("T", "S"),
            sw=sw,
            sw_reason="tracked",
            rel_sw=(("T", sw),),
            marks=(mark,),
        )


def test_record_serialization_round_trip():
    for build in (
        lambda: standard_block("S2xS2"),
        lambda: product_T2_Sigma_g(2),
        lambda: kodaira_thurston_block(3),
        lambda: admissible_from_spec(spec_text("even")),
    ):
        record = build()
        data = record_to_json(record)
        assert record_from_json(data) == record
        # canonical form is stable under a JSON round trip
        assert canonical_json(json.loads(canonical_json(data))) == canonical_json(data)


def test_invariant_tuple_keys():
    tup = invariant_tuple(standard_block("S4"))
    assert set(tup) == {
        "euler",
        "b1",
        "b2",
        "signature",
        "parity",
        "pi1_free_rank",
        "pi1_torsion",
    }


def test_simplifies_trivial():
    assert simplifies_trivial(GroupPresentation.parse("gens: a,b; rels: a, b"))
    assert not simplifies_trivial(GroupPresentation.parse("gens: a,b; rels: [a,b]"))


def test_admissible_accepts_both_fixtures():
    even = admissible_from_spec(spec_text("even"))
    tup = invariant_tuple(even)
    assert tup == {
        "euler": 24,
        "b1": 0,
        "b2": 22,
        "signature": -16,
        "parity": "even",
        "pi1_free_rank": 0,
        "pi1_torsion": [],
    }
    odd = admissible_from_spec(spec_text("odd"))
    assert invariant_tuple(odd)["parity"] == "odd"
    assert invariant_tuple(odd)["b2"] == 8


def _spec_with(**overrides):
    data = json.loads(spec_text("even"))
    data.update(overrides)
    return json.dumps(data)


def test_admissible_rejects_zero_sw():
    with pytest.raises(AdmissibilityError) as err:
        admissible_from_spec(_spec_with(sw="0"))
    assert "no basic class (sw = 0)" in err.value.violations


def test_admissible_rejects_definite_form():
    data = json.loads(spec_text("even"))
    n = len(data["basis"])
    data["gram"] = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    with pytest.raises(AdmissibilityError) as err:
        admissible_from_spec(json.dumps(data))
    assert "form not indefinite" in err.value.violations


def test_admissible_rejects_small_rank():
    # rank 6 with signature 4 violates the rank >= |signature| + 4 margin
    # (the hyperbolic pair keeps it indefinite so only the margin clause fires)
    data = json.loads(spec_text("even"))
    rows = [
        [0, 1, 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 0, 1],
    ]
    data["gram"] = rows
    data["basis"] = ["T1", "S1", "T2", "S2", "C1", "C2"]
    data["euler"] = 8
    for mark in data["marks"]:
        mark["class"] = [1 if b == mark["label"] else 0 for b in data["basis"]]
    with pytest.raises(AdmissibilityError) as err:
        admissible_from_spec(json.dumps(data))
    assert any(v.startswith("rank 6 < |signature| + 4") for v in err.value.violations)


def test_admissible_rejects_nontrivial_pi1():
    with pytest.raises(AdmissibilityError) as err:
        admissible_from_spec(_spec_with(pi1="gens: a,b; rels: [a,b]"))
    assert "pi1 does not simplify to the trivial presentation" in err.value.violations


def test_admissible_reports_all_clauses_not_just_first():
    with pytest.raises(AdmissibilityError) as err:
        admissible_from_spec(
            _spec_with(sw="0", pi1="gens: a,b; rels: [a,b]")
        )
    assert len(err.value.violations) >= 2


def test_admissible_trace_embeds_spec():
    record = admissible_from_spec(spec_text("even"))
    assert record.trace[0]["op"] == "base"
    assert record.trace[0]["constructor"] == "admissible_from_spec"
    assert record.trace[0]["args"]["spec"]["name"] == "M_even"
