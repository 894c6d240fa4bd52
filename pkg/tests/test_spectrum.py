import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crspectra.groups import dims_invariant, make_group
from crspectra.matrices import Enclosure
from crspectra.scalars import PerturbationParam
from crspectra.spectrum import (
    SchemaError,
    SpectrumEntry,
    SpectrumTable,
    classify_embeddability,
    invariant_eigenspace_crosscheck,
    rossi_spectrum,
    standard_spectrum,
)

HALF = PerturbationParam(Fraction(1, 2))
LABELS = ["C:1", "C:2", "C:3", "C:4", "C:5", "Dic:2", "2T", "2O", "2I"]


# frozen values ---------------------------------------------------------------


def test_trivial_group_small_window():
    S = standard_spectrum(make_group("C:1"), 2)
    assert [(e.eigenvalue, e.multiplicity) for e in S.entries] == [(0, 6), (2, 2), (4, 6)]
    assert S.entries[2].sources == [(0, 2), (1, 1)]


def test_cyclic_three_multiplicity_at_large_prime():
    S = standard_spectrum(make_group("C:3"), 2018, max_eigenvalue=2018)
    assert S.multiplicity(2018) == 672


def test_degree_zero_only():
    S = standard_spectrum(make_group("C:1"), 0)
    assert [(e.eigenvalue, e.multiplicity) for e in S.entries] == [(0, 1)]


def test_covers():
    S = standard_spectrum(make_group("C:2"), 10, max_eigenvalue=12)
    assert S.covers(12) and S.covers(20) is False and not S.covers(0)
    assert standard_spectrum(make_group("C:2"), 10).covers(20)
    assert not standard_spectrum(make_group("C:2"), 10).covers(22)


def test_rossi_two_fold_gap_at_half():
    S = rossi_spectrum(make_group("C:2"), HALF, 16)
    assert S.entries[0].eigenvalue.is_exact_zero()
    high = [e for e in S.entries if e.sources and min(d for d, _ in e.sources) >= 8 and not e.eigenvalue.is_exact_zero()]
    assert min(e.eigenvalue.lo for e in high) >= 40 / 9


def test_embeddability_report():
    r = classify_embeddability(make_group("C:2"), HALF, 30)
    assert r.verdict == "embeddable" and r.gap_holds and r.parity == "even"
    assert r.gap_bound == pytest.approx(40 / 9)
    r = classify_embeddability(make_group("C:3"), HALF, 41, windows=[11, 21, 41])
    assert r.verdict == "non-embeddable"
    assert r.minima_decreasing
    assert [w for w, _ in r.window_minima] == [11, 21, 41]
    assert json.loads(json.dumps(r.to_json()))["parity"] == "odd"


@pytest.mark.parametrize("label", ["C:2", "C:3", "Dic:2"])
def test_crosscheck_small(label):
    report = invariant_eigenspace_crosscheck(make_group(label), 4)
    assert report.matches


# schema ----------------------------------------------------------------------


def test_schema_round_trips():
    S = standard_spectrum(make_group("Dic:2"), 12)
    assert SpectrumTable.loads(S.dumps()) == S
    R = rossi_spectrum(make_group("C:2"), HALF, 8)
    back = SpectrumTable.loads(R.dumps())
    assert back == R
    assert back.t == HALF


def test_csv_header_and_rows():
    S = standard_spectrum(make_group("C:1"), 2)
    lines = S.to_csv().splitlines()
    assert lines[0] == "eigenvalue,lo,hi,multiplicity,sources"
    assert lines[1].startswith("0,0,0,6,")


@pytest.mark.parametrize(
    "mutate",
    [
        lambda o: o.update(structure="other"),
        lambda o: o["entries"][0].update(eigenvalue=2.0),
        lambda o: o["entries"][0].update(multiplicity="3"),
        lambda o: o["entries"][0].update(multiplicity=0),
        lambda o: o.pop("group"),
        lambda o: o.update(t={"re": "1/2", "im": "0"}),
        lambda o: o["entries"].reverse(),
    ],
)
def test_schema_rejects(mutate):
    obj = standard_spectrum(make_group("C:2"), 4).to_json()
    mutate(obj)
    with pytest.raises(SchemaError):
        SpectrumTable.from_json(obj)


def test_rossi_needs_t():
    with pytest.raises(SchemaError):
        SpectrumTable("rossi", "C:1", 0, [SpectrumEntry(Enclosure(0.0, 0.0), 1)])


# properties ------------------------------------------------------------------


@given(st.sampled_from(LABELS), st.integers(0, 30))
def test_total_multiplicity_counts_harmonics(label, K):
    G = make_group(label)
    dims = dims_invariant(G, K)
    S = standard_spectrum(G, K)
    assert sum(e.multiplicity for e in S.entries) == sum((n + 1) * dims[n] for n in range(K + 1))


@given(st.sampled_from(LABELS), st.integers(0, 40), st.integers(1, 200))
def test_capped_window_agrees_on_covered_eigenvalues(label, K, cap):
    G = make_group(label)
    full = standard_spectrum(G, K)
    capped = standard_spectrum(G, K, max_eigenvalue=cap)
    for lam in range(1, cap + 1):
        if capped.covers(lam):
            assert capped.multiplicity(lam) == full.multiplicity(lam)


@given(st.sampled_from(LABELS), st.integers(2, 30))
def test_wider_window_keeps_covered_multiplicities(label, K):
    G = make_group(label)
    small, big = standard_spectrum(G, K), standard_spectrum(G, K + 7)
    for e in small.entries:
        if small.covers(e.eigenvalue):
            assert big.multiplicity(e.eigenvalue) == e.multiplicity


@given(st.sampled_from(["C:1", "C:2", "C:3", "Dic:2"]), st.integers(0, 12))
def test_unperturbed_rossi_equals_standard(label, K):
    G = make_group(label)
    R = rossi_spectrum(G, PerturbationParam(0), K)
    S = standard_spectrum(G, K)
    got = {round(e.eigenvalue.mid, 9): e.multiplicity for e in R.entries}
    assert got == {e.eigenvalue: e.multiplicity for e in S.entries}
    for e in R.entries:
        assert e.eigenvalue.contains(round(e.eigenvalue.mid))


@given(
    st.sampled_from(["C:1", "C:2", "C:3", "C:4"]),
    st.integers(0, 10),
    st.fractions(min_value=Fraction(1, 20), max_value=Fraction(4, 5), max_denominator=20),
)
def test_perturbation_preserves_total_multiplicity_and_kernel(label, K, a):
    G = make_group(label)
    t = PerturbationParam(a)
    R = rossi_spectrum(G, t, K)
    dims = dims_invariant(G, K)
    assert sum(e.multiplicity for e in R.entries) == sum((n + 1) * dims[n] for n in range(K + 1))
    zero = [e for e in R.entries if e.eigenvalue.is_exact_zero()]
    # only even degrees keep a kernel vector once t != 0
    assert zero[0].multiplicity == sum(dims[0 : K + 1 : 2])
    assert all(e.eigenvalue.lo >= 0 for e in R.entries)
