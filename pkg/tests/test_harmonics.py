import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crspectra.groups import make_group
from crspectra.harmonics import (
    OracleError,
    Poly,
    apply_box_t,
    apply_L,
    apply_Lbar,
    chain_basis,
    inner_product,
    oracle_matrix,
    project_invariant,
    pullback,
)
from crspectra.scalars import GaussianRational as Q
from crspectra.scalars import PerturbationParam

T = PerturbationParam(Fraction(1, 2), Fraction(1, 3))
HALF = PerturbationParam(Fraction(1, 2))

small = st.fractions(min_value=-3, max_value=3, max_denominator=6)
coeffs = st.builds(Q, small, small)
exponents = st.tuples(*[st.integers(0, 3)] * 4)
polys = st.dictionaries(exponents, coeffs, min_size=1, max_size=5).map(Poly)
params = st.builds(
    PerturbationParam,
    st.fractions(min_value=-Fraction(2, 3), max_value=Fraction(2, 3), max_denominator=9),
    st.fractions(min_value=-Fraction(2, 3), max_value=Fraction(2, 3), max_denominator=9),
)


def harmonic(p: int, q: int, a: int) -> Poly:
    """Lbar^p conj(z1)^a conj(z2)^(p+q-a), an element of H_{p,q}."""
    f = Poly.monomial(0, 0, a, p + q - a)
    for _ in range(p):
        f = apply_Lbar(f)
    return f


# frozen values ---------------------------------------------------------------


def test_vector_fields_on_coordinates():
    assert apply_L(Poly.z2()) == Poly.zb1()
    assert apply_L(Poly.z1()) == -Poly.zb2()
    assert apply_Lbar(Poly.monomial(0, 0, 2, 0)) == Poly.monomial(0, 1, 1, 0, -2)


def test_box_on_degree_two():
    f = Poly.monomial(0, 0, 1, 1)
    assert apply_box_t(f) == f.scale(4)
    g = Poly.monomial(0, 0, 2, 0)
    assert apply_box_t(g, T) == Poly({(0, 0, 2, 0): Q(4), (0, 2, 0, 0): Q(-2, Fraction(4, 3))})


def test_chain_basis_degree_two():
    assert chain_basis(2) == [
        Poly.monomial(0, 0, 2, 0),
        Poly.monomial(0, 1, 1, 0, -2),
        Poly.monomial(0, 2, 0, 0, 2),
    ]


def test_inner_product_values():
    assert inner_product(Poly.zb1(), Poly.zb1()) == Fraction(1, 2)
    assert inner_product(Poly.zb1(), Poly.zb2()) == 0
    assert inner_product(Poly.const(), Poly.const()) == 1


def test_oracle_degree_two():
    assert oracle_matrix(2, T, "V") == [[Q(4), Q(-8, Fraction(-16, 3))], [Q(Fraction(-1, 2), Fraction(1, 3)), Q(Fraction(13, 9))]]
    assert oracle_matrix(2, T, "W") == [[Q(Fraction(49, 9))]]


def test_oracle_degree_four():
    V = oracle_matrix(4, HALF, "V")
    W = oracle_matrix(4, HALF, "W")
    assert [V[i][i] for i in range(3)] == [8, 15, 2]
    assert [V[i][i + 1] for i in range(2)] == [-48, -48]
    assert [V[i + 1][i] for i in range(2)] == [Fraction(-1, 2)] * 2
    assert [W[0][0], W[1][1], W[0][1], W[1][0]] == [14, 11, -72, Fraction(-1, 2)]


def test_oracle_rejects_bad_seed():
    with pytest.raises(ValueError):
        oracle_matrix(3, seed=Poly.monomial(1, 0, 2, 0))
    with pytest.raises(ValueError):
        oracle_matrix(-1)
    with pytest.raises(ValueError):
        oracle_matrix(2, which="X")
    assert issubclass(OracleError, RuntimeError)


# properties ------------------------------------------------------------------


def _quadrature(f: Poly, g: Poly, deg: int) -> complex:
    # s = |z1|^2 is uniform on [0, 1]; both angles are uniform
    nodes, weights = np.polynomial.legendre.leggauss(deg + 2)
    s = (nodes + 1) / 2
    w = weights / 2
    n = 2 * deg + 3
    phis = 2 * np.pi * np.arange(n) / n
    total = 0j
    for si, wi in zip(s, w):
        r1, r2 = math.sqrt(si), math.sqrt(1 - si)
        for a in phis:
            for b in phis:
                z1, z2 = r1 * np.exp(1j * a), r2 * np.exp(1j * b)
                total += wi * f.evaluate(z1, z2) * np.conj(g.evaluate(z1, z2))
    return total / n**2


@given(polys, polys)
def test_inner_product_matches_quadrature(f, g):
    deg = max(f.degree(), g.degree())
    assert abs(complex(inner_product(f, g)) - _quadrature(f, g, deg)) < 1e-9


@given(st.integers(0, 8).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n), st.integers(0, n))))
def test_eigenrelation_on_chain_elements(pqa):
    p, n, a = pqa
    q = n - p
    f = harmonic(p, q, a)
    assert apply_box_t(f) == f.scale(2 * q * (p + 1))


@given(params, st.integers(0, 5))
def test_kernel_contains_constants_and_holomorphic_at_zero(t, p):
    assert apply_box_t(Poly.const(3), t).is_zero()
    assert apply_box_t(Poly.monomial(p, 0, 0, 0)).is_zero()


@given(polys, polys, params)
def test_box_is_self_adjoint(f, g, t):
    assert inner_product(apply_box_t(f, t), g) == inner_product(f, apply_box_t(g, t))


@given(polys, params)
def test_box_is_nonnegative(f, t):
    v = inner_product(apply_box_t(f, t), f)
    assert v.im == 0 and v.re >= 0


@given(polys, params)
def test_scaled_box_is_h_multiple(f, t):
    assert apply_box_t(f, t, scaled=True) == apply_box_t(f, t).scale(t.h())


@given(polys, params, st.sampled_from(["C:4", "Dic:2", "2T"]), st.data())
def test_box_commutes_with_group_action(f, t, label, data):
    G = make_group(label)
    g = data.draw(st.sampled_from(G.elements))
    lhs = pullback(apply_box_t(f, t), g)
    rhs = apply_box_t(pullback(f, g), t)
    if lhs.is_exact and rhs.is_exact:
        assert lhs == rhs
    else:
        assert lhs.allclose(rhs)


@given(polys, st.sampled_from(["C:2", "C:4", "Dic:2"]))
def test_projection_is_invariant_and_idempotent(f, label):
    G = make_group(label)
    p = project_invariant(f, G)
    for g in G.elements:
        assert pullback(p, g) == p
    assert project_invariant(p, G) == p


@given(polys, params)
def test_box_preserves_invariance(f, t):
    G = make_group("C:4")
    p = project_invariant(f, G)
    image = apply_box_t(p, t)
    for g in G.elements:
        assert pullback(image, g) == image


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))), params, st.sampled_from(["V", "W", "full"]))
def test_oracle_is_seed_independent(na, t, which):
    n, a = na
    seed = Poly.monomial(0, 0, a, n - a, Q(2, -1))
    if which == "W" and n == 0:
        return
    assert oracle_matrix(n, t, which, seed=seed) == oracle_matrix(n, t, which)
