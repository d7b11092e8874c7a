import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causynth import cohort as cm
from causynth import errors
from causynth.cohort import (Cohort, NormStats, Session, SessionPair,
                             load_cohort, make_pairs, normalize, save_cohort,
                             split_by_subject)
from causynth.variables import TABULAR, Variable


def _values(age=70.0, **over):
    base = {Variable.AGE: age, Variable.SEX: 1.0, Variable.EDUCATION: 14.0,
            Variable.APOE: 1.0, Variable.ABETA: 900.0, Variable.TAU: 250.0,
            Variable.PTAU: 22.0, Variable.TIV: 1450.0, Variable.VV: 38.0,
            Variable.GMV: 610.0}
    base.update({Variable(k): v for k, v in over.items()})
    return base


def _write_csv(path, rows):
    header = ("subject_id,time_years,age,sex,education,apoe,"
              "abeta,tau,ptau,tiv,vv,gmv")
    path.write_text(header + "\n" + "\n".join(rows) + "\n")


def test_load_two_row_single_subject(tmp_path):
    p = tmp_path / "c.csv"
    _write_csv(p, [
        "a,0,70,1,14,1,900,250,22,1450,38,610",
        "a,1,71,1,14,1,880,260,23,1449,39,600",
    ])
    c = load_cohort(p)
    assert c.n_subjects == 1
    assert len(c.subjects["a"]) == 2


def test_load_rejects_bad_sex(tmp_path):
    p = tmp_path / "c.csv"
    _write_csv(p, ["a,0,70,3,14,1,900,250,22,1450,38,610"])
    with pytest.raises(errors.DomainViolation) as exc:
        load_cohort(p)
    assert exc.value.variable == "x2"


def test_load_missing_column(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("subject_id,time_years\n" "a,0\n")
    with pytest.raises(errors.MissingColumn):
        load_cohort(p)


def test_nonmonotone_time_rejected(tmp_path):
    p = tmp_path / "c.csv"
    _write_csv(p, [
        "a,1,71,1,14,1,900,250,22,1450,38,610",
        "a,1,71,1,14,1,900,250,22,1450,38,610",
    ])
    with pytest.raises(errors.NonMonotoneTime):
        load_cohort(p)


def test_export_reload_byte_identical(small_cohort, tmp_path):
    p1 = tmp_path / "a.csv"
    p2 = tmp_path / "b.csv"
    save_cohort(small_cohort, p1)
    save_cohort(load_cohort(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_make_pairs_adjacent_and_all():
    ss = [Session("a", t, _values(age=70.0 + t)) for t in (0.0, 1.0, 2.0)]
    c = Cohort(subjects={"a": ss})
    adj = make_pairs(c, "adjacent")
    assert [p.delta_t for p in adj] == [1.0, 1.0]
    alle = make_pairs(c, "all")
    assert sorted(p.delta_t for p in alle) == [1.0, 1.0, 2.0]


def test_make_pairs_single_session_empty():
    c = Cohort(subjects={"a": [Session("a", 0.0, _values())]})
    assert make_pairs(c) == []


def test_pair_requires_positive_gap():
    a = Session("a", 1.0, _values())
    b = Session("a", 1.0, _values())
    with pytest.raises(errors.NonMonotoneTime):
        SessionPair(a, b)


def test_normalize_two_point_column():
    ss = [Session("a", 0.0, _values(x6=100.0)),
          Session("a", 1.0, _values(age=71.0, x3=15.0, x5=880.0, x6=300.0,
                                    x7=23.0, x8=1449.0, x9=39.0, x10=600.0))]
    c = Cohort(subjects={"a": ss})
    normed, stats = normalize(c)
    vals = [s.values[Variable.TAU] for s in normed.sessions()]
    assert vals == pytest.approx([-1.0, 1.0])


def test_normalize_constant_column_rejected():
    # tau identical in both sessions while the rest varies
    ss = [Session("a", 0.0, _values()),
          Session("a", 1.0, _values(age=71.0, x3=15.0, x5=880.0, x7=23.0,
                                    x8=1449.0, x9=39.0, x10=600.0))]
    c = Cohort(subjects={"a": ss})
    with pytest.raises(errors.DegenerateVariable):
        normalize(c)


def test_denormalize_inverts(small_cohort):
    normed, stats = normalize(small_cohort)
    back = cm.denormalize(normed)
    for s0, s1 in zip(small_cohort.sessions(), back.sessions()):
        for v in TABULAR:
            assert s1.values[v] == pytest.approx(s0.values[v], abs=1e-9)


def test_split_by_subject_partition(small_cohort):
    tr, te = split_by_subject(small_cohort, 0.8, seed=1)
    assert tr.n_subjects == 48 and te.n_subjects == 12
    assert not set(tr.subjects) & set(te.subjects)
    tr2, te2 = split_by_subject(small_cohort, 0.8, seed=1)
    assert set(tr.subjects) == set(tr2.subjects)


def test_split_rounding_floor():
    subs = {f"s{i}": [Session(f"s{i}", 0.0, _values())] for i in range(5)}
    tr, te = split_by_subject(Cohort(subjects=subs), 0.8, seed=3)
    assert tr.n_subjects == 4 and te.n_subjects == 1


@given(mean=st.floats(-100, 100), std=st.floats(0.1, 100),
       x=st.floats(-1000, 1000))
def test_normstats_inverse_roundtrip(mean, std, x):
    stats = NormStats(mean={Variable.TAU: mean}, std={Variable.TAU: std})
    z = stats.transform(Variable.TAU, x)
    assert stats.inverse(Variable.TAU, z) == pytest.approx(x, abs=1e-6)


@settings(max_examples=25)
@given(st.lists(st.floats(0.1, 5.0), min_size=1, max_size=6))
def test_pairs_count_matches_sessions(gaps):
    t, ss = 0.0, []
    for gap in gaps:
        ss.append(Session("a", t, _values(age=70.0 + t)))
        t += gap
    ss.append(Session("a", t, _values(age=70.0 + t)))
    c = Cohort(subjects={"a": ss})
    assert len(make_pairs(c, "adjacent")) == len(ss) - 1
    assert len(make_pairs(c, "all")) == len(ss) * (len(ss) - 1) // 2
