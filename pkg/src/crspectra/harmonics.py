"""Symbolic polynomials on the 3-sphere and the CR vector fields acting on them.

Polynomials are in z1, z2, conj(z1), conj(z2) and are read as functions on
the unit sphere of C^2.  With exact (Gaussian rational) coefficients every
operation here is exact; this module is the ground truth the closed-form
matrices are checked against.

The unperturbed Kohn Laplacian is normalized so that it acts on H_{p,q} by
2q(p+1).  With the literal vector fields

    L    = conj(z1) d/dz2 - conj(z2) d/dz1
    Lbar = z1 d/dconj(z2) - z2 d/dconj(z1)

one has -L Lbar = q(p+1) on H_{p,q}, so box_t carries an explicit factor 2.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

from .scalars import GaussianRational, PerturbationParam, conj, is_exact, to_scalar

__all__ = [
    "Monomial",
    "Poly",
    "apply_L",
    "apply_Lbar",
    "apply_box_t",
    "inner_product",
    "pullback",
    "project_invariant",
    "chain_basis",
    "chain_from",
    "oracle_matrix",
    "OracleError",
]


class OracleError(RuntimeError):
    """Raised when an internal consistency check of the symbolic oracle fails."""


class Monomial(NamedTuple):
    """Exponents of z1, z2, conj(z1), conj(z2)."""

    a: int
    b: int
    c: int
    d: int

    @property
    def bidegree(self) -> tuple[int, int]:
        return (self.a + self.b, self.c + self.d)

    @property
    def degree(self) -> int:
        return self.a + self.b + self.c + self.d


_ONE = GaussianRational(1)
_ZERO = GaussianRational(0)


def _is_zero(x) -> bool:
    return not x


class Poly:
    """A finite linear combination of monomials, stored in canonical form.

    Coefficients are GaussianRational in exact mode and complex otherwise;
    a single float coefficient makes the whole polynomial inexact.
    """

    __slots__ = ("terms", "_exact")

    def __init__(self, terms: dict | None = None):
        clean = {}
        exact = True
        for m, c in (terms or {}).items():
            c = to_scalar(c)
            if _is_zero(c):
                continue
            if not isinstance(c, GaussianRational):
                exact = False
            clean[Monomial(*m)] = c
        if not exact:
            clean = {m: complex(c) for m, c in clean.items()}
        self.terms = clean
        self._exact = exact

    # constructors
    @classmethod
    def zero(cls) -> "Poly":
        return cls({})

    @classmethod
    def const(cls, c=1) -> "Poly":
        return cls({Monomial(0, 0, 0, 0): c})

    @classmethod
    def monomial(cls, a: int, b: int, c: int, d: int, coeff=1) -> "Poly":
        return cls({Monomial(a, b, c, d): coeff})

    @classmethod
    def z1(cls) -> "Poly":
        return cls.monomial(1, 0, 0, 0)

    @classmethod
    def z2(cls) -> "Poly":
        return cls.monomial(0, 1, 0, 0)

    @classmethod
    def zb1(cls) -> "Poly":
        return cls.monomial(0, 0, 1, 0)

    @classmethod
    def zb2(cls) -> "Poly":
        return cls.monomial(0, 0, 0, 1)

    @property
    def is_exact(self) -> bool:
        return self._exact

    def is_zero(self) -> bool:
        return not self.terms

    def bidegrees(self) -> set[tuple[int, int]]:
        return {m.bidegree for m in self.terms}

    def pure_bidegree(self) -> tuple[int, int] | None:
        """The bidegree (p, q) if every monomial shares it, else None."""
        bd = self.bidegrees()
        return next(iter(bd)) if len(bd) == 1 else None

    def degree(self) -> int:
        return max((m.degree for m in self.terms), default=0)

    def coeff(self, a: int, b: int, c: int, d: int):
        return self.terms.get(Monomial(a, b, c, d), _ZERO if self._exact else 0j)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly(0)"
        parts = []
        for m, c in sorted(self.terms.items()):
            parts.append(f"({c})*z1^{m.a}*z2^{m.b}*zb1^{m.c}*zb2^{m.d}")
        return "Poly(" + " + ".join(parts) + ")"

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, s) -> "Poly":
        s = to_scalar(s)
        if _is_zero(s):
            return Poly.zero()
        return Poly({m: c * s for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Poly):
            out: dict = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    m = (m1.a + m2.a, m1.b + m2.b, m1.c + m2.c, m1.d + m2.d)
                    v = c1 * c2
                    out[m] = out[m] + v if m in out else v
            return Poly(out)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        result = Poly.const(1)
        for _ in range(n):
            result = result * self
        return result

    def conjugate(self) -> "Poly":
        """The complex conjugate function: swaps z and conj(z)."""
        return Poly({Monomial(m.c, m.d, m.a, m.b): conj(c) for m, c in self.terms.items()})

    def evaluate(self, z1: complex, z2: complex) -> complex:
        w1, w2 = z1.conjugate(), z2.conjugate()
        return sum(
            complex(c) * z1**m.a * z2**m.b * w1**m.c * w2**m.d for m, c in self.terms.items()
        )

    def to_complex(self) -> "Poly":
        return Poly({m: complex(c) for m, c in self.terms.items()}) if self._exact else self

    def chop(self, tol: float = 1e-12) -> "Poly":
        """Drop coefficients of modulus below ``tol`` (no-op in exact mode)."""
        if self._exact:
            return self
        return Poly({m: c for m, c in self.terms.items() if abs(c) > tol})

    def allclose(self, other: "Poly", tol: float = 1e-10) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(complex(self.coeff(*k)) - complex(other.coeff(*k))) <= tol for k in keys)


def _accumulate(out: dict, m: tuple, v) -> None:
    if m in out:
        out[m] = out[m] + v
    else:
        out[m] = v


def apply_L(f: Poly) -> Poly:
    """L f with L = conj(z1) d/dz2 - conj(z2) d/dz1; bidegree (p,q) -> (p-1,q+1)."""
    out: dict = {}
    for (a, b, c, d), x in f.terms.items():
        if b:
            _accumulate(out, (a, b - 1, c + 1, d), x * b)
        if a:
            _accumulate(out, (a - 1, b, c, d + 1), x * (-a))
    return Poly(out)


def apply_Lbar(f: Poly) -> Poly:
    """Lbar f with Lbar = z1 d/dconj(z2) - z2 d/dconj(z1); (p,q) -> (p+1,q-1)."""
    out: dict = {}
    for (a, b, c, d), x in f.terms.items():
        if d:
            _accumulate(out, (a + 1, b, c, d - 1), x * d)
        if c:
            _accumulate(out, (a, b + 1, c - 1, d), x * (-c))
    return Poly(out)


def apply_box_t(f: Poly, t: PerturbationParam | None = None, scaled: bool = False) -> Poly:
    """Perturbed Kohn Laplacian -2 L_t Lbar_t f, with L_t = L + conj(t) Lbar.

    Expanded: -2 (L Lbar + |t|^2 Lbar L + t L^2 + conj(t) Lbar^2) f.  With
    ``scaled`` the result is multiplied by h(t) = (1+|t|^2)/(1-|t|^2)^2.
    """
    t = t if t is not None else PerturbationParam(0)
    Lf = apply_L(f)
    out = apply_L(apply_Lbar(f))
    if not t.is_zero():
        out = out + apply_Lbar(Lf).scale(t.abs2)
        out = out + apply_L(Lf).scale(t.t)
        out = out + apply_Lbar(apply_Lbar(f)).scale(t.tbar)
    out = out.scale(-2)
    if scaled:
        out = out.scale(t.h())
    return out


@lru_cache(maxsize=None)
def _sphere_moment(m1: int, m2: int) -> Fraction:
    # normalized surface measure: int |z1|^(2 m1) |z2|^(2 m2) = m1! m2! / (m1 + m2 + 1)!
    return Fraction(math.factorial(m1) * math.factorial(m2), math.factorial(m1 + m2 + 1))


def inner_product(f: Poly, g: Poly):
    """<f, g> = int_{S^3} f conj(g) dsigma for the normalized measure."""
    by_charge: dict = {}
    for m, c in g.terms.items():
        by_charge.setdefault((m.a - m.c, m.b - m.d), []).append((m, c))
    total = _ZERO if (f.is_exact and g.is_exact) else 0j
    for m, x in f.terms.items():
        # f-monomial times conj(g-monomial) survives iff the charges match
        for m2, y in by_charge.get((m.a - m.c, m.b - m.d), ()):
            w = _sphere_moment(m.a + m2.c, m.b + m2.d)
            total = total + x * conj(y) * w
    return total


def _check_unit(g) -> bool:
    xi1, xi2 = g.xi1, g.xi2
    if is_exact(xi1) and is_exact(xi2):
        n = to_scalar(xi1).norm2() + to_scalar(xi2).norm2()
        if n != 1:
            raise ValueError(f"group element is not a unit: |xi1|^2 + |xi2|^2 = {n}")
        return True
    n = abs(complex(xi1)) ** 2 + abs(complex(xi2)) ** 2
    if abs(n - 1) > 1e-12:
        raise ValueError(f"group element is not a unit: |xi1|^2 + |xi2|^2 = {n}")
    return False


def pullback(f: Poly, g) -> Poly:
    """f composed with the left action of g = (xi1, xi2) on C^2.

    The action is (z1, z2) -> (xi1 z1 - conj(xi2) z2, xi2 z1 + conj(xi1) z2).
    The result is inexact when either f or g is.
    """
    exact = _check_unit(g) and f.is_exact
    xi1, xi2 = to_scalar(g.xi1), to_scalar(g.xi2)
    if not exact:
        xi1, xi2 = complex(xi1), complex(xi2)
    images = (
        Poly({(1, 0, 0, 0): xi1, (0, 1, 0, 0): -conj(xi2)}),
        Poly({(1, 0, 0, 0): xi2, (0, 1, 0, 0): conj(xi1)}),
        Poly({(0, 0, 1, 0): conj(xi1), (0, 0, 0, 1): -xi2}),
        Poly({(0, 0, 1, 0): conj(xi2), (0, 0, 0, 1): xi1}),
    )
    powers: list[dict[int, Poly]] = [{0: Poly.const(1)} for _ in range(4)]

    def power(i: int, n: int) -> Poly:
        cache = powers[i]
        if n not in cache:
            cache[n] = power(i, n - 1) * images[i]
        return cache[n]

    out = Poly.zero()
    for m, c in f.terms.items():
        term = power(0, m.a) * power(1, m.b) * power(2, m.c) * power(3, m.d)
        out = out + term.scale(c)
    return out


def project_invariant(f: Poly, group: Iterable) -> Poly:
    """Average of the pullbacks of f over a finite group."""
    elements = list(group)
    total = Poly.zero()
    for g in elements:
        total = total + pullback(f, g)
    n = len(elements)
    if total.is_exact:
        return total.scale(GaussianRational(Fraction(1, n)))
    return total.scale(1.0 / n)


def chain_from(f: Poly, length: int) -> list[Poly]:
    """[f, Lbar f, ..., Lbar^(length-1) f]."""
    out = [f]
    for _ in range(length - 1):
        out.append(apply_Lbar(out[-1]))
    return out


def chain_basis(n: int) -> list[Poly]:
    """The Lbar-chain of conj(z1)^n: element sigma lies in H_{sigma, n-sigma}."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    return chain_from(Poly.monomial(0, 0, n, 0), n + 1)


def _subchain(n: int, which: str) -> tuple[list[int], list]:
    if which == "full":
        idx = list(range(n + 1))
        scales = [GaussianRational(1)] * len(idx)
    elif which in ("V", "W"):
        start = 0 if which == "V" else 1
        idx = list(range(start, n + 1, 2))
        # w_j = 2^j Lbar^(start + 2j) f reproduces the closed-form matrices
        scales = [GaussianRational(2**j) for j in range(len(idx))]
    else:
        raise ValueError(f"unknown chain {which!r}; expected 'V', 'W' or 'full'")
    return idx, scales


def oracle_matrix(
    n: int,
    t: PerturbationParam | None = None,
    which: str = "full",
    seed: Poly | None = None,
) -> list[list]:
    """Matrix of the unscaled box_t on an Lbar-chain, by exact Gram solving.

    The chain starts at ``seed`` (default conj(z1)^n, which must lie in
    H_{0,n}).  ``which`` selects the full chain (basis Lbar^sigma f), or the
    even/odd sub-chains V/W with basis 2^j Lbar^(2j [+1]) f.  Entry [i][j] is
    the coefficient of basis vector i in box_t(basis vector j).
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    t = t if t is not None else PerturbationParam(0)
    f = seed if seed is not None else Poly.monomial(0, 0, n, 0)
    if f.is_zero() or f.pure_bidegree() != (0, n):
        raise ValueError("chain seed must be a nonzero element of H_{0,n}")
    chain = chain_from(f, n + 1)
    gram = [inner_product(v, v) for v in chain]
    for s in range(n + 1):
        if not gram[s]:
            raise OracleError(f"chain element {s} vanished")
        for r in range(s + 1, min(n, s + 2) + 1):
            if inner_product(chain[s], chain[r]):
                raise OracleError("chain Gram matrix is not diagonal")

    idx, scales = _subchain(n, which)
    basis = [chain[s].scale(sc) for s, sc in zip(idx, scales)]
    size = len(basis)
    exact = f.is_exact
    zero = GaussianRational(0) if exact else 0j
    mat = [[zero] * size for _ in range(size)]
    pos = {s: i for i, s in enumerate(idx)}
    for j, b in enumerate(basis):
        image = apply_box_t(b, t, scaled=False)
        residual = image
        # chain[s] spans the chain's part of bidegree (s, n - s)
        for s in sorted(p for p, _ in image.bidegrees()):
            if not 0 <= s <= n:
                raise OracleError("box_t image left the degree-n harmonics")
            c = inner_product(image, chain[s]) / gram[s]
            if not c:
                continue
            residual = residual - chain[s].scale(c)
            if s not in pos:
                raise OracleError(f"box_t leaves the {which} chain at sigma={s}")
            i = pos[s]
            mat[i][j] = c / scales[i]
        if not (residual.is_zero() if exact else residual.chop(1e-9).is_zero()):
            raise OracleError("box_t image is not in the span of the chain")
    return mat
