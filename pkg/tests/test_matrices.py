from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crspectra.harmonics import oracle_matrix
from crspectra.matrices import (
    Enclosure,
    ScalingConvention,
    SymTriDiag,
    TriDiag,
    build_V_matrix,
    build_W_matrix,
    char_poly,
    convert,
    eigen_enclosures,
    flip,
    gershgorin_intervals,
    gershgorin_lower_bound_holds,
    gershgorin_W_rows_hold,
    min_nonzero_eigenvalue,
    symmetrize,
    zero_multiplicity,
)
from crspectra.scalars import GaussianRational as Q
from crspectra.scalars import PerturbationParam

HALF = PerturbationParam(Fraction(1, 2))
T = PerturbationParam(Fraction(1, 2), Fraction(1, 3))

part = st.fractions(min_value=-Fraction(7, 10), max_value=Fraction(7, 10), max_denominator=10)
params = st.builds(PerturbationParam, part, part).filter(lambda t: t.abs2 < Fraction(81, 100))
units = st.sampled_from([Q(1), Q(0, 1), Q(-1), Q(Fraction(3, 5), Fraction(4, 5)), Q(Fraction(-5, 13), Fraction(12, 13))])


# frozen values ---------------------------------------------------------------


def test_halved_W_degree_four():
    m = symmetrize(build_W_matrix(2, HALF), halved=True)
    assert m.diag == (7, Fraction(11, 2))
    assert m.off_sq == (9,)
    assert gershgorin_intervals(m) == [(4.0, 10.0), (2.5, 8.5)]
    assert gershgorin_lower_bound_holds(m, 1) == [True, True]
    assert gershgorin_lower_bound_holds(m, 3) == [True, False]


def test_char_poly_degree_two():
    assert char_poly(build_V_matrix(1, T)) == [0, Fraction(-49, 9), 1]
    assert zero_multiplicity(build_V_matrix(1, T)) == 1


def test_zero_t_spectrum_is_diagonal():
    V = build_V_matrix(3)
    assert all(x == 0 for x in V.sup)
    encs = eigen_enclosures(symmetrize(V))
    assert sorted(e.mid for e in encs) == pytest.approx(sorted(float(x.re) for x in V.diag))


def test_dimensions():
    assert build_V_matrix(0).dim == 1
    assert build_W_matrix(0).dim == 0
    assert build_W_matrix(5, T).dim == 5
    with pytest.raises(ValueError):
        build_V_matrix(-1)


def test_tridiag_validation():
    with pytest.raises(ValueError):
        TriDiag((1, 2), (), ())
    with pytest.raises(ValueError):
        TriDiag.from_dense([[1, 0, 1], [0, 1, 0], [0, 0, 1]])
    with pytest.raises(ValueError):
        SymTriDiag((1, 2), (-1,))
    with pytest.raises(ValueError):
        eigen_enclosures(SymTriDiag((1,), ()), tol=0)


def test_symmetrize_rejects_negative_products():
    with pytest.raises(ValueError):
        symmetrize(TriDiag((Q(1), Q(1)), (Q(1),), (Q(-1),)))


def test_convention_conversion():
    v = Fraction(4)
    assert convert(v, HALF, ScalingConvention.UNSCALED, ScalingConvention.RAW) == Fraction(80, 9)
    assert convert(v, HALF, ScalingConvention.RAW, ScalingConvention.HALVED) == Fraction(9, 10)
    e = convert(Enclosure(1.0, 2.0), HALF, ScalingConvention.UNSCALED, ScalingConvention.HALVED)
    assert e == Enclosure(0.5, 1.0)


def test_min_nonzero_in_raw_convention():
    m = min_nonzero_eigenvalue(4, HALF)
    assert m >= Fraction(40, 9)
    assert min_nonzero_eigenvalue(4, HALF, ScalingConvention.UNSCALED) == pytest.approx(m * 9 / 20)


# properties ------------------------------------------------------------------


@given(st.integers(1, 6), params)
def test_closed_forms_match_oracle(k, t):
    assert build_V_matrix(k, t).to_dense() == oracle_matrix(2 * k, t, "V")
    assert build_W_matrix(k, t).to_dense() == oracle_matrix(2 * k, t, "W")


@given(st.integers(0, 12), params, units)
def test_spectrum_depends_only_on_modulus(k, t, u):
    r = t.rotated(u)
    assert r.abs2 == t.abs2
    assert symmetrize(build_V_matrix(k, t)) == symmetrize(build_V_matrix(k, r))
    assert symmetrize(build_W_matrix(k, t)) == symmetrize(build_W_matrix(k, r))


@given(st.integers(1, 10), params)
def test_flip_is_an_involution_preserving_spectrum(k, t):
    a = build_V_matrix(k, t).to_numpy()
    assert np.array_equal(flip(flip(a)), a)
    dense = build_V_matrix(k, t).to_dense()
    assert flip(flip(dense)) == dense
    ev = np.sort_complex(np.linalg.eigvals(a))
    ef = np.sort_complex(np.linalg.eigvals(flip(a)))
    assert np.allclose(ev, ef, rtol=1e-8, atol=1e-8 * np.abs(ev).max())


def test_flip_rejects_non_square():
    with pytest.raises(ValueError):
        flip(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        flip([[1, 2]])


@given(st.integers(1, 15), params)
def test_eigenvalues_lie_in_gershgorin_union(k, t):
    m = symmetrize(build_W_matrix(k, t))
    intervals = gershgorin_intervals(m)
    for e in eigen_enclosures(m):
        assert any(lo - 1e-9 * abs(lo) <= e.mid <= hi + 1e-9 * abs(hi) for lo, hi in intervals)


@given(st.integers(1, 20), params)
def test_V_and_W_share_nonzero_spectrum(k, t):
    v = [e for e in eigen_enclosures(symmetrize(build_V_matrix(k, t))) if not e.is_exact_zero()]
    w = eigen_enclosures(symmetrize(build_W_matrix(k, t)))
    assert len(v) == len(w) == k
    for a, b in zip(v, w):
        assert abs(a.mid - b.mid) <= 1e-9 * max(abs(a.mid), abs(b.mid))


@given(st.integers(0, 20), params)
def test_V_kernel_is_one_dimensional(k, t):
    assert zero_multiplicity(build_V_matrix(k, t)) == 1
    assert zero_multiplicity(build_W_matrix(k, t)) == 0


@given(st.integers(1, 25), params)
def test_enclosures_contain_lapack_eigenvalues(k, t):
    m = symmetrize(build_V_matrix(k, t))
    encs = eigen_enclosures(m)
    ref = np.linalg.eigvalsh(m.to_numpy())
    scale = np.abs(ref).max()
    assert len(encs) == len(ref)
    for e, x in zip(encs, ref):
        assert e.lo <= e.hi
        assert e.lo - 1e-12 * scale <= x <= e.hi + 1e-12 * scale


@pytest.mark.parametrize("n", [21, 41, 61])
def test_tiny_eigenvalues_against_multiprecision(n):
    # odd-degree W chains carry eigenvalues far below double-precision resolution
    W = TriDiag.from_dense(oracle_matrix(n, HALF, "W"))
    m = symmetrize(W)
    encs = eigen_enclosures(m)
    assert encs[0].hi < 1e-5
    with mpmath.workdps(200):
        size = m.dim
        A = mpmath.matrix(size, size)
        for i, d in enumerate(m.diag):
            A[i, i] = mpmath.mpf(d.numerator) / d.denominator
        for i, s in enumerate(m.off_sq):
            A[i, i + 1] = A[i + 1, i] = mpmath.sqrt(mpmath.mpf(s.numerator) / s.denominator)
        ref = sorted(mpmath.eigsy(A, eigvals_only=True))
        ref = [float(x) for x in ref]
    for e, x in zip(encs, ref):
        assert e.lo <= x <= e.hi
        assert e.hi - e.lo <= 1e-9 * abs(x)


@given(st.integers(1, 40), params, st.fractions(min_value=0, max_value=4, max_denominator=7))
def test_integer_gershgorin_matches_generic(k, t, bound):
    generic = gershgorin_lower_bound_holds(symmetrize(build_W_matrix(k, t), halved=True), bound)
    assert gershgorin_W_rows_hold(k, t, bound) == generic


@given(st.integers(4, 60), st.integers(1, 99))
def test_gershgorin_bound_one_from_degree_eight(k, a):
    assert all(gershgorin_W_rows_hold(k, PerturbationParam(Fraction(a, 100)), 1))
