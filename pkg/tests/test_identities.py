import csv
import io
import json
import math

import pytest

from flk.errors import UnknownFunction
from flk.identities import (FIELDS, e_transform_check, e_transform_ids, e_transform_pieces, expand_points,
                            lookup, parse_point_id, point_id, registry, reports_to_csv, reports_to_json,
                            verify, verify_all)

G = 0.91596559417721901505
ZETA3 = 1.2020569031595942854
LN2 = math.log(2)


@pytest.fixture(scope="module")
def all_reports():
    return verify_all(workers=1)


def test_registry_shape():
    recs = registry()
    assert len(recs) >= 30
    ids = [r.id for r in recs]
    assert len(ids) == len(set(ids))
    for r in recs:
        assert r.citation and r.formula
        assert len(r.plans) >= 1
        assert r.tol_class in ("tight", "standard", "loose")


def test_lookup_examples():
    assert lookup("HN_2NM1").rhs_value() == pytest.approx((8 * LN2 - 4) / math.pi, rel=1e-15)
    assert lookup("HN_2NM1").rhs_value() == pytest.approx(0.49184525648605, abs=1e-14)
    assert lookup("PI4_RATIO").parameterized
    assert not lookup("HN_2NM1").parameterized
    with pytest.raises(UnknownFunction):
        lookup("NOT_AN_IDENTITY")


def test_point_ids_roundtrip():
    assert point_id("PI4_RATIO", {"eta": 2.7}) == "PI4_RATIO[eta=2.7]"
    assert parse_point_id("PI4_RATIO[eta=2.7]") == ("PI4_RATIO", {"eta": 2.7})
    assert parse_point_id("HN_2NM1") == ("HN_2NM1", {})
    with pytest.raises(UnknownFunction):
        parse_point_id("lower case")


def test_verify_single():
    r = verify("HN_2NM1")
    assert r.passed
    assert [p.method for p in r.plans] == ["series", "integral"]
    assert r.abs_dev <= 1e-10 * abs(r.rhs_value)


def test_verify_method_selection():
    r = verify("DOUBLE_ZETA3_G", method="reduce-to-single")
    assert r.passed and [p.method for p in r.plans] == ["reduce-to-single"]
    assert r.rhs_value == pytest.approx((7 * ZETA3 - 4 * G) / math.pi**2, rel=1e-14)
    with pytest.raises(UnknownFunction):
        verify("DOUBLE_ZETA3_G", method="nope")


def test_verify_parameters():
    assert verify("LN_TRIO", m=1).passed
    assert verify("LN_TRIO[m=1]").id == "LN_TRIO[m=1]"
    with pytest.raises(UnknownFunction):
        verify("LN_TRIO", bogus=3)
    with pytest.raises(UnknownFunction):
        verify("HN_2NM1", m=1)


def test_verify_all_tags():
    reps = verify_all(tag="double-series", workers=1)
    assert len(reps) == 3
    assert all(r.passed for r in reps)
    assert verify_all(tag="nonexistent", workers=1) == []


def test_verify_all_everything(all_reports):
    assert len(all_reports) == len(expand_points())
    bad = [r.text() for r in all_reports if not r.passed]
    assert not bad, "\n".join(bad)
    ids = [r.id for r in all_reports]
    assert ids == sorted(ids)


def test_every_point_has_two_independent_plans(all_reports):
    # double series are judged by both the reduced and the truncated sum
    for r in all_reports:
        assert len(r.plans) >= 2 or r.id.startswith(("C2018NEW", "H2N_2NM1SQ", "HNP1_REL", "HSQ_2NM1SQ",
                                                      "PARAM_DERIV"))


def test_plans_pairwise_agree(all_reports):
    for r in all_reports:
        vals = [p for p in r.plans if p.value is not None]
        for a in vals:
            for b in vals:
                scale = max(abs(a.value), 1e-300)
                assert abs(a.value - b.value) <= a.abs_error + b.abs_error + 1e-5 * scale, r.id


def test_ratio_grids(all_reports):
    by_rec = {}
    for r in all_reports:
        by_rec.setdefault(parse_point_id(r.id)[0], []).append(r)
    assert len(by_rec["PI4_RATIO"]) == len(lookup("PI4_RATIO").points())
    assert len(by_rec["RATIO_PI_JM"]) == 18
    for r in by_rec["PI4_RATIO"] + by_rec["RATIO_15PI32"] + by_rec["RATIO_PI_JM"]:
        assert r.passed


def test_report_json_fields(all_reports):
    d = json.loads(reports_to_json(all_reports[:5]))
    for row in d:
        assert tuple(row) == FIELDS
        for p in row["plans"]:
            assert set(p) == {"method", "value", "abs_error"}


def test_stable_json_bit_identical():
    a = reports_to_json(verify_all(tag="harmonic-binomial", workers=1), stable=True)
    b = reports_to_json(verify_all(tag="harmonic-binomial", workers=2), stable=True)
    assert a == b
    assert '"runtime_ms": 0' in a


def test_csv_header(all_reports):
    rows = list(csv.reader(io.StringIO(reports_to_csv(all_reports[:3]))))
    assert tuple(rows[0]) == FIELDS
    assert len(rows) == 4
    assert json.loads(rows[1][1])[0]["method"]


def test_tiny_max_terms_is_not_a_pass():
    r = verify("HN_2NM1", max_terms=1000)
    assert r.status in ("tol-miss", "fail")
    assert not r.passed
    # the report still carries the best estimate it reached
    assert any(p.value is not None for p in r.plans)


def test_rhs_none_judged_by_consensus():
    recs = [r for r in registry() if r.parameterized]
    found = False
    for rec in recs:
        for p in rec.points():
            if rec.rhs_value(p) is None:
                rep = verify(point_id(rec.id, p))
                assert rep.passed and rep.rhs_value is not None
                found = True
                break
        if found:
            break
    assert found


# ------------------------------------------------------------- E-transform

@pytest.mark.parametrize("g", ["one", "sqrt", "K", "g3f2"])
def test_e_transform(g):
    r = e_transform_check(g)
    assert r.passed, r.text()
    assert [p.method for p in r.plans] == ["direct", "e-transform"]
    assert r.abs_dev <= 1e-9 * abs(r.rhs_value)


def test_e_transform_known_values():
    assert e_transform_ids() == ["one", "sqrt", "K", "g3f2"]
    assert e_transform_check("one").rhs_value == pytest.approx(4 / 3, rel=1e-15)
    pieces = e_transform_pieces("K")
    dbl = (2 + 7 * ZETA3) / 4 - (1 + 2 * G) / 2 - math.pi * (3 - 2 * G) / 4
    assert pieces["double"].value == pytest.approx(dbl, abs=1e-10)


def test_e_transform_unknown_weight():
    with pytest.raises(UnknownFunction):
        e_transform_check("nope")
