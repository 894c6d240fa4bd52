"""Finite subgroups of SU(2) and dimensions of their invariants in H_{0,k}.

An element (xi1, xi2) is the matrix [[xi1, -conj(xi2)], [xi2, conj(xi1)]];
its eigenvalues are exp(+-i theta) with cos(theta) = Re(xi1), so the
character of H_{0,k} is the Chebyshev value U_k(cos theta).
"""

from __future__ import annotations

import cmath
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .linalg import gadd, gaussian_integer_rank, gmul
from .scalars import GaussianRational, conj, is_exact, parse_rational, to_scalar

__all__ = [
    "SU2Element",
    "GroupSpec",
    "FiniteSubgroup",
    "GroupError",
    "IntegralityError",
    "make_group",
    "parse_group",
    "dim_invariant",
    "dims_invariant",
    "count_invariant_monomials",
    "cyclic_dim",
    "printed_cyclic_formula",
    "proof_cyclic_formula",
    "character",
    "character_sum",
    "pullback_matrix_0k",
    "invariant_rank_0k",
    "dims_conjugation_invariance",
    "even_cyclic_cover",
]

FLOAT_TOL = 1e-9
INTEGRALITY_TOL = 1e-6


class GroupError(ValueError):
    """Invalid group data: bad spec, non-unit element, or failed closure."""


class IntegralityError(ArithmeticError):
    """A character average was not within tolerance of an integer."""


# elements -------------------------------------------------------------------


@dataclass(frozen=True)
class SU2Element:
    """A unit pair (xi1, xi2), exact (Gaussian rational) or complex."""

    xi1: object
    xi2: object

    def __post_init__(self):
        a, b = to_scalar(self.xi1), to_scalar(self.xi2)
        if not (is_exact(a) and is_exact(b)):
            a, b = complex(a), complex(b)
        object.__setattr__(self, "xi1", a)
        object.__setattr__(self, "xi2", b)
        if self.exact:
            if a.norm2() + b.norm2() != 1:
                raise GroupError(f"({a}, {b}) is not a unit vector")
        elif abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-12:
            raise GroupError(f"({a}, {b}) is not a unit vector")

    @classmethod
    def identity(cls) -> "SU2Element":
        return cls(1, 0)

    @classmethod
    def parse(cls, text: str) -> "SU2Element":
        """Parse ``"xi1,xi2"`` where each part is rational or ``a+bi`` style."""
        parts = text.split(",")
        if len(parts) != 2:
            raise GroupError(f"expected 'xi1,xi2', got {text!r}")
        return cls(_parse_gaussian(parts[0]), _parse_gaussian(parts[1]))

    @property
    def exact(self) -> bool:
        return isinstance(self.xi1, GaussianRational)

    def __mul__(self, other: "SU2Element") -> "SU2Element":
        a1, a2, b1, b2 = self.xi1, self.xi2, other.xi1, other.xi2
        if self.exact != other.exact:
            a1, a2, b1, b2 = (complex(x) for x in (a1, a2, b1, b2))
        return SU2Element(a1 * b1 - conj(a2) * b2, a2 * b1 + conj(a1) * b2)

    def inverse(self) -> "SU2Element":
        return SU2Element(conj(self.xi1), -self.xi2)

    def __neg__(self) -> "SU2Element":
        return SU2Element(-self.xi1, -self.xi2)

    def to_complex(self) -> tuple[complex, complex]:
        return complex(self.xi1), complex(self.xi2)

    def close_to(self, other: "SU2Element", tol: float = FLOAT_TOL) -> bool:
        if self.exact and other.exact:
            return self == other
        a, b = self.to_complex()
        c, d = other.to_complex()
        return abs(a - c) <= tol and abs(b - d) <= tol

    def is_identity(self, tol: float = FLOAT_TOL) -> bool:
        return self.close_to(SU2Element.identity(), tol)

    @property
    def trace_half(self):
        """Re(xi1) = cos(theta); exact for exact elements."""
        return self.xi1.re if self.exact else self.xi1.real

    def angle(self) -> float:
        """The eigenphase theta in [0, pi], computed without acos cancellation."""
        a, b = self.to_complex()
        return math.atan2(math.sqrt(a.imag**2 + abs(b) ** 2), a.real)

    def order(self, bound: int = 100000) -> int:
        """Multiplicative order, or GroupError if it exceeds ``bound``."""
        x = self
        for n in range(1, bound + 1):
            if x.is_identity():
                return n
            x = x * self
        raise GroupError("element order exceeds bound")

    def __str__(self) -> str:
        return f"({self.xi1}, {self.xi2})"


def _parse_gaussian(text: str):
    """Parse a rational or decimal, optionally with an imaginary part: ``3/5``, ``4/5i``, ``1/2-1/2i``."""
    s = text.strip().replace(" ", "")
    try:
        if not s.endswith("i"):
            return GaussianRational(parse_rational(s), 0)
        body = s[:-1]
        cut = max(body.rfind("+"), body.rfind("-"))
        while cut > 0 and body[cut - 1] in "eE":
            cut = max(body.rfind("+", 0, cut - 1), body.rfind("-", 0, cut - 1))
        re_txt, im_txt = (body[:cut], body[cut:]) if cut > 0 else ("0", body)
        if im_txt in ("", "+", "-"):
            im_txt += "1"
        return GaussianRational(parse_rational(re_txt), parse_rational(im_txt))
    except (ValueError, ZeroDivisionError) as exc:
        raise GroupError(f"cannot parse complex number {text!r}") from exc


def _format_gaussian(x) -> str:
    if isinstance(x, GaussianRational):
        re_v, im_v = x.re, x.im
    else:
        re_v, im_v = complex(x).real, complex(x).imag
    if im_v == 0:
        return str(re_v)
    if re_v == 0:
        return f"{im_v}i"
    sign = "+" if im_v > 0 else "-"
    return f"{re_v}{sign}{abs(im_v)}i"


# specs ----------------------------------------------------------------------

_SIMPLE = {"2T": 24, "2O": 48, "2I": 120}


@dataclass(frozen=True)
class GroupSpec:
    """Parsed group spec: ``C:n``, ``Dic:n``, ``2T``, ``2O``, ``2I`` or ``conj:<spec>:<xi1>,<xi2>``."""

    kind: str
    n: int | None = None
    inner: "GroupSpec | None" = None
    conjugator: SU2Element | None = field(default=None, compare=True)

    @classmethod
    def parse(cls, text: str) -> "GroupSpec":
        s = text.strip()
        if s.startswith("conj:"):
            rest = s[len("conj:"):]
            cut = rest.rfind(":")
            if cut < 0:
                raise GroupError(f"bad conj spec {text!r}")
            inner = cls.parse(rest[:cut])
            tau = SU2Element.parse(rest[cut + 1:])
            return cls("conj", None, inner, tau)
        if s in _SIMPLE:
            return cls(s)
        m = re.fullmatch(r"(C|Dic):(\d+)", s)
        if not m:
            raise GroupError(f"unknown group spec {text!r}")
        n = int(m.group(2))
        if n < 1 or (m.group(1) == "Dic" and n < 1):
            raise GroupError(f"group parameter must be positive in {text!r}")
        return cls(m.group(1), n)

    def format(self) -> str:
        if self.kind == "conj":
            tau = self.conjugator
            return f"conj:{self.inner.format()}:{_format_gaussian(tau.xi1)},{_format_gaussian(tau.xi2)}"
        if self.kind in _SIMPLE:
            return self.kind
        return f"{self.kind}:{self.n}"

    def __str__(self) -> str:
        return self.format()

    @property
    def order(self) -> int:
        if self.kind == "C":
            return self.n
        if self.kind == "Dic":
            return 4 * self.n
        if self.kind == "conj":
            return self.inner.order
        return _SIMPLE[self.kind]


# groups ---------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteSubgroup:
    label: str
    elements: tuple
    order: int
    # d when the group is <(zeta_d, 0)>, enabling direct monomial counting
    diagonal_cyclic: int | None = None

    def __post_init__(self):
        if len(self.elements) != self.order:
            raise GroupError("element count does not match order")

    def __iter__(self) -> Iterator[SU2Element]:
        return iter(self.elements)

    def __len__(self) -> int:
        return self.order

    @property
    def exact(self) -> bool:
        return all(g.exact for g in self.elements)

    @property
    def spec(self) -> GroupSpec:
        return GroupSpec.parse(self.label)

    @cached_property
    def _keys(self) -> frozenset:
        return frozenset(_key(g) for g in self.elements)

    def contains(self, g: SU2Element) -> bool:
        return _key(g) in self._keys or any(g.close_to(h) for h in self.elements)

    def element_orders(self) -> list[int]:
        return [o for o, _ in self.angle_classes_list()]

    def angle_classes_list(self) -> list[tuple[int, int]]:
        """For each element the pair (o, j) with theta = 2 pi j / o, o the order."""
        out = []
        for g in self.elements:
            x = g.angle() / (2 * math.pi)
            r = Fraction(x).limit_denominator(self.order)
            if abs(float(r) - x) > FLOAT_TOL:
                raise GroupError(f"element {g} does not have order dividing {self.order}")
            out.append((r.denominator, r.numerator))
        return out

    def angle_classes(self) -> Counter:
        return Counter(self.angle_classes_list())

    def conjugate_by(self, tau: SU2Element) -> "FiniteSubgroup":
        inv = tau.inverse()
        elems = tuple(tau * g * inv for g in self.elements)
        label = f"conj:{self.label}:{_format_gaussian(tau.xi1)},{_format_gaussian(tau.xi2)}"
        return FiniteSubgroup(label, elems, self.order)

    def verify(self) -> None:
        """Check closure, inverses, identity and the structural facts about order parity."""
        if not any(g.is_identity() for g in self.elements):
            raise GroupError("identity missing")
        for g in self.elements:
            if not self.contains(g.inverse()):
                raise GroupError("not closed under inverses")
            for h in self.elements:
                if not self.contains(g * h):
                    raise GroupError("not closed under products")
        minus = SU2Element(-1, 0)
        if self.order % 2 == 0:
            if not self.contains(minus):
                raise GroupError("even-order subgroup lacks -1")
            involutions = [g for g in self.elements if g.order(self.order) == 2]
            if len(involutions) != 1:
                raise GroupError("even-order subgroup must have a unique involution")
        elif max(self.element_orders()) != self.order:
            raise GroupError("odd-order subgroup is not cyclic")


def _key(g: SU2Element) -> tuple:
    a, b = g.to_complex()
    return tuple(round(v, 7) + 0.0 for v in (a.real, a.imag, b.real, b.imag))


def _close(label: str, gens: Sequence[SU2Element], order: int, diagonal_cyclic=None) -> FiniteSubgroup:
    elems = [SU2Element.identity()]
    seen = {_key(elems[0])}
    frontier = list(elems)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g
                if _key(y) in seen or any(y.close_to(e) for e in elems):
                    continue
                seen.add(_key(y))
                elems.append(y)
                nxt.append(y)
                if len(elems) > order:
                    raise GroupError(f"closure of {label} exceeds declared order {order}")
        frontier = nxt
    if len(elems) != order:
        raise GroupError(f"closure of {label} has order {len(elems)}, expected {order}")
    return FiniteSubgroup(label, tuple(elems), order, diagonal_cyclic)


def _root_of_unity(n: int):
    """exp(2 pi i / n), exact when it is a Gaussian rational."""
    exact = {1: GaussianRational(1), 2: GaussianRational(-1), 4: GaussianRational(0, 1)}
    if n in exact:
        return exact[n]
    return cmath.exp(2j * math.pi / n)


def _quat(a, b, c, d) -> SU2Element:
    """Unit quaternion a + b i + c j + d k as (a + b i, c + d i)."""
    if all(isinstance(x, (int, Fraction)) for x in (a, b, c, d)):
        return SU2Element(GaussianRational(a, b), GaussianRational(c, d))
    return SU2Element(complex(a, b), complex(c, d))


def make_group(spec: "GroupSpec | str") -> FiniteSubgroup:
    """Construct a finite subgroup of SU(2) by closure from generators."""
    if isinstance(spec, str):
        spec = GroupSpec.parse(spec)
    label = spec.format()
    half = Fraction(1, 2)
    if spec.kind == "C":
        return _close(label, [SU2Element(_root_of_unity(spec.n), 0)], spec.n, spec.n)
    if spec.kind == "Dic":
        gens = [SU2Element(_root_of_unity(2 * spec.n), 0), SU2Element(0, 1)]
        return _close(label, gens, 4 * spec.n)
    if spec.kind == "2T":
        return _close(label, [_quat(0, 1, 0, 0), _quat(half, half, half, half)], 24)
    if spec.kind == "2O":
        r = 1 / math.sqrt(2)
        return _close(label, [_quat(half, half, half, half), _quat(r, r, 0, 0)], 48)
    if spec.kind == "2I":
        phi = (1 + math.sqrt(5)) / 2
        return _close(label, [_quat(half, half, half, half), _quat(phi / 2, 1 / (2 * phi), 0.5, 0)], 120)
    if spec.kind == "conj":
        inner = make_group(spec.inner)
        g = inner.conjugate_by(spec.conjugator)
        return FiniteSubgroup(label, g.elements, g.order)
    raise GroupError(f"unknown group kind {spec.kind!r}")


def parse_group(text: str) -> FiniteSubgroup:
    return make_group(GroupSpec.parse(text))


# dimensions -----------------------------------------------------------------


def count_invariant_monomials(d: int, k: int) -> int:
    """#{a in [0, k] : d | 2a - k}, by enumeration."""
    return sum(1 for a in range(k + 1) if (2 * a - k) % d == 0)


def cyclic_dim(d: int, k: int) -> int:
    """Closed-form count of #{a in [0, k] : d | 2a - k}."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if d % 2:
        r = (k * pow(2, -1, d)) % d if d > 1 else 0
        return (k - r) // d + 1 if r <= k else 0
    if k % 2:
        return 0
    h = d // 2
    r = (k // 2) % h
    return (k - r) // h + 1 if r <= k else 0


def printed_cyclic_formula(d: int, k: int) -> int:
    """Published closed form: 2 floor(k/d) + 1 or 0 for even d; 2 floor(k/2d) + (1 - (-1)^k)/2 for odd d."""
    if d % 2 == 0:
        return 2 * (k // d) + 1 if k % 2 == 0 else 0
    return 2 * (k // (2 * d)) + (1 - (-1) ** k) // 2


def proof_cyclic_formula(d: int, k: int) -> int:
    """Case split used in the published derivation: odd d gives 2 floor(k/2d) (+1 when k is even)."""
    if d % 2 == 0:
        return printed_cyclic_formula(d, k)
    return 2 * (k // (2 * d)) + (1 if k % 2 == 0 else 0)


def _chebyshev_u(x, k_max: int) -> list:
    """U_0(x), ..., U_k_max(x) by the three-term recurrence (exact for rational x)."""
    out = [1, 2 * x] if k_max >= 1 else [1]
    for _ in range(2, k_max + 1):
        out.append(2 * x * out[-1] - out[-2])
    return out[: k_max + 1]


def character(g: SU2Element, k: int):
    """chi_k(g) = sum_{a=0..k} exp(i (2a - k) theta); exact Fraction for exact g."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if g.exact:
        return Fraction(_chebyshev_u(g.trace_half, k)[k])
    theta = g.angle()
    s = math.sin(theta)
    if s < 1e-12:
        return float(k + 1) if g.trace_half > 0 else float((-1) ** k * (k + 1))
    return math.sin((k + 1) * theta) / s


def _class_characters(o: int, j: int, ks: np.ndarray) -> np.ndarray:
    if j == 0:
        return (ks + 1).astype(float)
    if 2 * j == o:
        return np.where(ks % 2 == 0, 1.0, -1.0) * (ks + 1)
    r = ((ks + 1) * j) % o
    return np.sin(2 * np.pi * r / o) / math.sin(2 * math.pi * j / o)


def character_sum(G: FiniteSubgroup, k_max: int) -> np.ndarray:
    """sum_g chi_k(g) for k = 0..k_max, in double precision."""
    ks = np.arange(k_max + 1, dtype=np.int64)
    total = np.zeros(k_max + 1)
    # deterministic class order
    for (o, j), cnt in sorted(G.angle_classes().items()):
        total += cnt * _class_characters(o, j, ks)
    return total


def _exact_dims(G: FiniteSubgroup, k_max: int) -> list[int]:
    classes = Counter(g.trace_half for g in G.elements)
    total = [Fraction(0)] * (k_max + 1)
    for x, cnt in classes.items():
        for k, u in enumerate(_chebyshev_u(x, k_max)):
            total[k] += cnt * u
    out = []
    for k, s in enumerate(total):
        v = s / G.order
        if v.denominator != 1:
            raise IntegralityError(f"exact character average {v} at k={k} is not an integer")
        out.append(int(v))
    return out


def dims_invariant(G: FiniteSubgroup, k_max: int) -> list[int]:
    """dim H_{0,k}^G for k = 0..k_max.

    Diagonal cyclic groups are counted directly; other exact groups use an
    exact character average; float groups use a double-precision average
    that must land within 1e-6 of an integer.
    """
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if G.diagonal_cyclic is not None:
        return [cyclic_dim(G.diagonal_cyclic, k) for k in range(k_max + 1)]
    if G.exact:
        return _exact_dims(G, k_max)
    avg = character_sum(G, k_max) / G.order
    rounded = np.rint(avg)
    bad = np.nonzero(np.abs(avg - rounded) > INTEGRALITY_TOL)[0]
    if bad.size:
        k = int(bad[0])
        raise IntegralityError(f"character average {avg[k]!r} at k={k} is not within {INTEGRALITY_TOL} of an integer")
    return [int(v) for v in rounded]


def dim_invariant(G: FiniteSubgroup, k: int) -> int:
    if k < 0:
        raise ValueError("k must be non-negative")
    if G.diagonal_cyclic is not None:
        return cyclic_dim(G.diagonal_cyclic, k)
    return dims_invariant(G, k)[k]


# explicit pullback matrices on H_{0,k} --------------------------------------


def _sym_power_columns(l1, l2, k: int, zero, mul, add, power, from_int) -> list[list]:
    """Columns of the k-th symmetric power of the linear substitution (l1, l2)."""
    def binom(alpha, beta, n):
        return [
            mul(from_int(math.comb(n, i)), mul(power(alpha, n - i), power(beta, i)))
            for i in range(n + 1)
        ]

    cols = []
    for a in range(k + 1):
        p1 = binom(l1[0], l1[1], a)
        p2 = binom(l2[0], l2[1], k - a)
        prod = [zero] * (k + 1)
        for i, u in enumerate(p1):
            for j, v in enumerate(p2):
                prod[i + j] = add(prod[i + j], mul(u, v))
        # prod[m] multiplies zbar1^(k-m) zbar2^m, i.e. basis index k-m
        cols.append(prod[::-1])
    return cols


def pullback_matrix_0k(g: SU2Element, k: int) -> list[list]:
    """Matrix of f -> f o l_g on the basis zbar1^a zbar2^(k-a), a = 0..k.

    Column a holds the image of the a-th basis monomial.
    """
    xi1, xi2 = g.xi1, g.xi2
    # zbar1 -> conj(xi1) zbar1 - xi2 zbar2 and zbar2 -> conj(xi2) zbar1 + xi1 zbar2
    zero = GaussianRational(0) if g.exact else 0j
    cols = _sym_power_columns(
        (conj(xi1), -xi2), (conj(xi2), xi1), k, zero,
        lambda x, y: x * y, lambda x, y: x + y, lambda x, n: x**n, lambda n: n,
    )
    return [[cols[c][r] for c in range(k + 1)] for r in range(k + 1)]


def _gint_pow(x, n: int):
    out = (1, 0)
    for _ in range(n):
        out = gmul(out, x)
    return out


def _scaled_pullback_int(g: SU2Element, k: int, den: int) -> list[list]:
    """den^k times the pullback matrix on H_{0,k}, as Gaussian integer pairs."""
    def gi(x):
        return (int(x.re * den), int(x.im * den))

    xi1, xi2 = g.xi1, g.xi2
    l1 = (gi(xi1.conjugate()), gi(-xi2))
    l2 = (gi(xi2.conjugate()), gi(xi1))
    cache: dict = {}

    def power(x, n):
        key = (x, n)
        if key not in cache:
            cache[key] = _gint_pow(x, n)
        return cache[key]

    cols = _sym_power_columns(l1, l2, k, (0, 0), gmul, gadd, power, lambda n: (n, 0))
    return [[cols[c][r] for c in range(k + 1)] for r in range(k + 1)]


def invariant_rank_0k(G: FiniteSubgroup, k: int) -> int:
    """Rank of the group-averaged pullback on H_{0,k}; exact for exact groups."""
    n = k + 1
    if G.exact:
        den = 1
        for g in G.elements:
            for x in (g.xi1, g.xi2):
                den = math.lcm(den, x.re.denominator, x.im.denominator)
        total = [[(0, 0)] * n for _ in range(n)]
        for g in G.elements:
            m = _scaled_pullback_int(g, k, den)
            for r in range(n):
                total[r] = [gadd(x, y) for x, y in zip(total[r], m[r])]
        return gaussian_integer_rank(total)
    avg = np.zeros((n, n), dtype=complex)
    for g in G.elements:
        avg += np.array(pullback_matrix_0k(g, k), dtype=complex)
    avg /= G.order
    return int(np.linalg.matrix_rank(avg, tol=1e-8))


@dataclass
class ConjugationReport:
    group: str
    conjugated: str
    k_max: int
    dims: list[int]
    conjugated_dims: list[int]
    projection_ranks: list[int] | None

    @property
    def equal(self) -> bool:
        ok = self.dims == self.conjugated_dims
        if self.projection_ranks is not None:
            ok = ok and self.projection_ranks == self.dims[: len(self.projection_ranks)]
        return ok


def dims_conjugation_invariance(
    G: FiniteSubgroup, tau: SU2Element, k_max: int, projection_k_max: int | None = None
) -> ConjugationReport:
    """Compare invariant dimensions of G and tau G tau^-1 for k <= k_max.

    The conjugated side is computed without using that it is conjugate:
    character averages over its own elements, plus (for k up to
    ``projection_k_max``) ranks of its averaged pullback matrices.
    """
    H = G.conjugate_by(tau)
    dims = dims_invariant(G, k_max)
    cdims = dims_invariant(H, k_max)
    ranks = None
    if projection_k_max is not None:
        ranks = [invariant_rank_0k(H, k) for k in range(min(projection_k_max, k_max) + 1)]
    return ConjugationReport(G.label, H.label, k_max, dims, cdims, ranks)


def even_cyclic_cover(G: FiniteSubgroup) -> list[FiniteSubgroup]:
    """The distinct even-order cyclic subgroups <g>, verified to cover G."""
    if G.order % 2:
        raise GroupError("even cyclic cover needs a group of even order")
    subgroups: list[FiniteSubgroup] = []
    for g in G.elements:
        o = g.order(G.order)
        if o % 2:
            continue
        elems = [SU2Element.identity()]
        x = g
        while not x.is_identity():
            elems.append(x)
            x = x * g
        if any(len(s.elements) == o and all(s.contains(e) for e in elems) for s in subgroups):
            continue
        subgroups.append(FiniteSubgroup(f"<{g}>", tuple(elems), o))
    for g in G.elements:
        if not any(s.contains(g) for s in subgroups):
            raise GroupError(f"element {g} not covered by even cyclic subgroups")
    return subgroups
