import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crspectra.groups import make_group
from crspectra.hearing import (
    PRINTED_EVEN_CONSTANTS,
    HearingError,
    calibrate_even_constant,
    estimate_order_even,
    estimate_order_odd,
    hear_order,
    parity_probe,
    standard_window,
)
from crspectra.spectrum import standard_spectrum
from crspectra.verify import HEARING_TEST_GROUPS

C = Fraction(12)


def _raw_estimates(label, alpha_max):
    G = make_group(label)
    S = standard_window(G, alpha_max)
    est = estimate_order_odd if G.order % 2 else (lambda s: estimate_order_even(s, C))
    try:
        report = est(S)
    except HearingError as exc:
        report = exc.report
    return G.order, report.estimates


def test_calibrated_constant():
    assert calibrate_even_constant() == 12
    assert calibrate_even_constant(3000, 3200) == 12
    assert 12 not in PRINTED_EVEN_CONSTANTS.values()


def test_calibration_needs_primes():
    with pytest.raises(ValueError):
        calibrate_even_constant(2000, 2010)


def test_cyclic_four_estimates_are_not_monotone():
    _, est = _raw_estimates("C:4", 40)
    by_alpha = {e.alpha: e for e in est}
    assert by_alpha[17].multiplicity == 52 and by_alpha[19].multiplicity == 60
    err17 = abs(by_alpha[17].raw - 4)
    err19 = abs(by_alpha[19].raw - 4)
    assert err17 < err19


def test_parity_probe_needs_a_prime_above_the_order():
    S = standard_window(make_group("C:15"), 20)
    assert parity_probe(S, 3) == "even"
    assert parity_probe(S, 17) == "odd"
    with pytest.raises(ValueError):
        parity_probe(S, 9)


def test_parity_probe_outside_window():
    S = standard_window(make_group("C:3"), 20)
    with pytest.raises(HearingError):
        parity_probe(S, 43)


@pytest.mark.parametrize("label,order", [("C:1", 1), ("C:7", 7), ("C:2", 2), ("Dic:2", 8), ("2T", 24)])
def test_hear_small_groups(label, order):
    report = hear_order(standard_window(make_group(label), 1500), C)
    assert report.final_order == order and report.stabilized
    assert report.parity == ("odd" if order % 2 else "even")
    assert json.loads(json.dumps(report.to_json()))["final_order"] == order


def test_unstable_window_raises_with_report():
    with pytest.raises(HearingError) as info:
        hear_order(standard_window(make_group("2I"), 25), C)
    assert info.value.report is not None
    assert not info.value.report.stabilized


def test_hearing_needs_standard_spectrum():
    from crspectra.spectrum import rossi_spectrum
    from crspectra.scalars import PerturbationParam

    R = rossi_spectrum(make_group("C:2"), PerturbationParam(Fraction(1, 2)), 4)
    with pytest.raises(ValueError):
        hear_order(R)


def test_window_without_primes():
    with pytest.raises(HearingError):
        hear_order(standard_spectrum(make_group("C:1"), 2))


@given(st.sampled_from(HEARING_TEST_GROUPS))
def test_estimates_stay_in_order_envelope(label):
    # |estimate - |G|| <= 2 |G|^2 / alpha at every covered prime
    order, est = _raw_estimates(label, 1200)
    assert est
    for e in est:
        assert abs(e.raw - order) <= 2 * order**2 / e.alpha


@given(st.sampled_from([g for g in HEARING_TEST_GROUPS if make_group(g).order % 2]), st.integers(0, 30))
def test_odd_multiplicity_vanishes_for_even_groups_only(label, shift):
    odd = make_group(label)
    S = standard_window(odd, 400)
    primes = [a for a in (401, 397, 389, 383) if S.covers(2 * a)]
    assert all(S.multiplicity(2 * a) > 0 for a in primes if a >= odd.order)
    even = make_group(f"C:{2 * (1 + shift % 6)}")
    T = standard_window(even, 400)
    assert all(T.multiplicity(2 * a) == 0 for a in primes)
