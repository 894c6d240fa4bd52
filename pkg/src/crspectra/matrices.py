"""Tridiagonal representations of box_t on the V and W chains.

Closed forms, diagonal-similarity symmetrization, certified Sturm-bisection
eigenvalues, exact characteristic polynomials, Gershgorin intervals and the
antidiagonal flip.

Matrices here are in the *unscaled* convention (no h(t) factor, but with the
overall factor 2 kept) unless a ScalingConvention says otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from .scalars import GaussianRational, PerturbationParam

__all__ = [
    "ScalingConvention",
    "convert",
    "TriDiag",
    "SymTriDiag",
    "Enclosure",
    "build_V_matrix",
    "build_W_matrix",
    "symmetrize",
    "eigenvalues",
    "eigen_enclosures",
    "char_poly",
    "zero_multiplicity",
    "gershgorin_intervals",
    "gershgorin_lower_bound_holds",
    "gershgorin_W_rows_hold",
    "flip",
    "min_nonzero_eigenvalue",
    "degree_spectrum",
]

_EPS = np.finfo(float).eps
# double-precision enclosures are kept only when this relatively accurate
_FLOAT_REL = 1e-9


class ScalingConvention(enum.Enum):
    RAW = "raw"  # physical operator: includes h(t)
    UNSCALED = "unscaled"  # no h(t)
    HALVED = "halved"  # no h(t), overall factor 2 dropped

    def factor(self, t: PerturbationParam) -> Fraction:
        """Multiplier taking an unscaled value into this convention."""
        if self is ScalingConvention.RAW:
            return t.h()
        if self is ScalingConvention.HALVED:
            return Fraction(1, 2)
        return Fraction(1)


def convert(value, t: PerturbationParam, src: ScalingConvention, dst: ScalingConvention):
    """Rescale an eigenvalue (number or Enclosure) between conventions."""
    ratio = dst.factor(t) / src.factor(t)
    if isinstance(value, Enclosure):
        return Enclosure(value.lo * float(ratio), value.hi * float(ratio))
    if isinstance(value, Fraction):
        return value * ratio
    return value * float(ratio)


@dataclass(frozen=True)
class TriDiag:
    """A (generally non-symmetric) tridiagonal matrix with exact entries.

    ``sup[j]`` sits at (j, j+1) and ``sub[j]`` at (j+1, j).
    """

    diag: tuple
    sup: tuple
    sub: tuple

    def __post_init__(self):
        n = len(self.diag)
        if len(self.sup) != max(n - 1, 0) or len(self.sub) != max(n - 1, 0):
            raise ValueError("off-diagonals must have length dim - 1")

    @property
    def dim(self) -> int:
        return len(self.diag)

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "TriDiag":
        n = len(rows)
        for i in range(n):
            for j in range(n):
                if abs(i - j) > 1 and rows[i][j]:
                    raise ValueError(f"matrix is not tridiagonal: entry ({i},{j}) = {rows[i][j]}")
        return cls(
            tuple(rows[i][i] for i in range(n)),
            tuple(rows[i][i + 1] for i in range(n - 1)),
            tuple(rows[i + 1][i] for i in range(n - 1)),
        )

    def to_dense(self) -> list[list]:
        n = self.dim
        zero = GaussianRational(0)
        rows = [[zero] * n for _ in range(n)]
        for i in range(n):
            rows[i][i] = self.diag[i]
        for i in range(n - 1):
            rows[i][i + 1] = self.sup[i]
            rows[i + 1][i] = self.sub[i]
        return rows

    def to_numpy(self) -> np.ndarray:
        return np.array([[complex(x) for x in row] for row in self.to_dense()], dtype=complex).reshape(
            self.dim, self.dim
        )

    def off_products(self) -> tuple:
        return tuple(a * b for a, b in zip(self.sup, self.sub))


@dataclass(frozen=True)
class SymTriDiag:
    """Real symmetric tridiagonal matrix held as (diagonal, squared off-diagonal).

    Entries are Fractions when ``exact`` (so only the squares of the
    off-diagonal entries need be rational), floats otherwise.
    """

    diag: tuple
    off_sq: tuple

    def __post_init__(self):
        if len(self.off_sq) != max(len(self.diag) - 1, 0):
            raise ValueError("off-diagonal must have length dim - 1")
        if any(x < 0 for x in self.off_sq):
            raise ValueError("squared off-diagonal entries must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.diag)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in self.diag + self.off_sq)

    @property
    def off(self) -> np.ndarray:
        return np.sqrt(np.array([float(x) for x in self.off_sq], dtype=float))

    def diag_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.diag], dtype=float)

    def to_numpy(self) -> np.ndarray:
        n = self.dim
        out = np.diag(self.diag_array()) if n else np.zeros((0, 0))
        if n > 1:
            off = self.off
            out += np.diag(off, 1) + np.diag(off, -1)
        return out

    def norm_bound(self) -> float:
        """Infinity-norm bound, used to scale rounding-error estimates."""
        if not self.dim:
            return 0.0
        d = np.abs(self.diag_array())
        off = self.off
        r = d.copy()
        r[:-1] += off
        r[1:] += off
        return float(r.max())

    @classmethod
    def from_dense(cls, a) -> "SymTriDiag":
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        return cls(tuple(float(a[i, i]) for i in range(n)), tuple(float(a[i, i + 1]) ** 2 for i in range(n - 1)))


class Enclosure(NamedTuple):
    """A certified interval [lo, hi] containing one eigenvalue."""

    lo: float
    hi: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "Enclosure") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def is_exact_zero(self) -> bool:
        return self.lo == 0.0 and self.hi == 0.0


# closed forms ---------------------------------------------------------------


def _as_param(t) -> PerturbationParam:
    if t is None:
        return PerturbationParam(0)
    return t if isinstance(t, PerturbationParam) else PerturbationParam(t)


def build_V_matrix(k: int, t=None) -> TriDiag:
    """box_t on V_f for f in H_{0,2k}: dimension k+1."""
    if k < 0:
        raise ValueError("k must be non-negative")
    t = _as_param(t)
    a2, tt, tb = t.abs2, t.t, t.tbar
    diag = tuple(
        GaussianRational(2 * ((2 * k - 2 * j + 2) * (2 * j - 1) + a2 * (2 * j - 2) * (2 * k - 2 * j + 3)))
        for j in range(1, k + 2)
    )
    sup = tuple(
        -(tt * (4 * (2 * j) * (2 * j - 1) * (2 * k - 2 * j + 1) * (2 * k - 2 * j + 2))) for j in range(1, k + 1)
    )
    sub = tuple(-tb for _ in range(k))
    return TriDiag(diag, sup, sub)


def build_W_matrix(k: int, t=None) -> TriDiag:
    """box_t on W_f for f in H_{0,2k}: dimension k (empty when k = 0)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    t = _as_param(t)
    a2, tt, tb = t.abs2, t.t, t.tbar
    diag = tuple(
        GaussianRational(2 * ((2 * k - 2 * j + 1) * (2 * j) + a2 * (2 * j - 1) * (2 * k - 2 * j + 2)))
        for j in range(1, k + 1)
    )
    sup = tuple(
        -(tt * (4 * (2 * j + 1) * (2 * j) * (2 * k - 2 * j) * (2 * k - 2 * j + 1))) for j in range(1, k)
    )
    sub = tuple(-tb for _ in range(max(k - 1, 0)))
    return TriDiag(diag, sup, sub)


def symmetrize(m: TriDiag, halved: bool = False) -> SymTriDiag:
    """Diagonal similarity to a real symmetric matrix: off_j = sqrt(sup_j * sub_j)."""
    diag = []
    for x in m.diag:
        x = GaussianRational.coerce(x) if not isinstance(x, complex) else x
        if isinstance(x, GaussianRational):
            if x.im != 0:
                raise ValueError("diagonal entries must be real")
            diag.append(x.re)
        else:
            diag.append(float(x.real))
    off_sq = []
    for j, p in enumerate(m.off_products()):
        if isinstance(p, GaussianRational):
            if p.im != 0 or p.re < 0:
                raise ValueError(f"off-diagonal product {j} is {p}; need a non-negative real")
            off_sq.append(p.re)
        else:
            p = complex(p)
            if abs(p.imag) > 1e-12 * max(1.0, abs(p)) or p.real < 0:
                raise ValueError(f"off-diagonal product {j} is {p}; need a non-negative real")
            off_sq.append(p.real)
    if halved:
        diag = [x / 2 for x in diag]
        off_sq = [x / 4 for x in off_sq]
    return SymTriDiag(tuple(diag), tuple(off_sq))


# characteristic polynomial --------------------------------------------------


def _real_entries(m) -> tuple[list, list]:
    if isinstance(m, SymTriDiag):
        if not m.exact:
            raise ValueError("exact characteristic polynomial needs exact entries")
        return [Fraction(x) for x in m.diag], [Fraction(x) for x in m.off_sq]
    diag, prods = [], []
    for x in m.diag:
        x = GaussianRational.coerce(x)
        diag.append(x)
    for p in m.off_products():
        prods.append(GaussianRational.coerce(p))
    if all(x.im == 0 for x in diag) and all(p.im == 0 for p in prods):
        return [x.re for x in diag], [p.re for p in prods]
    return diag, prods


def char_poly(m, max_order: int | None = None) -> list:
    """Coefficients (ascending powers of lambda) of det(M - lambda I).

    Uses the three-term recurrence p_i = (d_i - lambda) p_{i-1} - e_{i-1} p_{i-2},
    with e the products of opposite off-diagonal entries.  With ``max_order``
    only coefficients of lambda^0..lambda^max_order are tracked.
    """
    diag, prods = _real_entries(m)
    cap = len(diag) if max_order is None else max_order

    def trunc(p):
        return p[: cap + 1]

    prev2: list = []
    prev = [Fraction(1)]
    for i, d in enumerate(diag):
        cur = [d * c for c in prev] + [0]
        for r, c in enumerate(prev):
            cur[r + 1] -= c
        if i >= 1:
            e = prods[i - 1]
            for r, c in enumerate(prev2):
                cur[r] -= e * c
        prev2, prev = prev, trunc(cur)
    return prev


def zero_multiplicity(m) -> int:
    """Exact algebraic multiplicity of the eigenvalue 0."""
    n = m.dim
    order = 2
    while True:
        order = min(order, n)
        coeffs = char_poly(m, max_order=order)
        for r, c in enumerate(coeffs):
            if c != 0:
                return r
        if order >= n:
            return n
        order *= 2


# Sturm bisection ------------------------------------------------------------


def _sturm_counts(d: np.ndarray, e2: np.ndarray, xs: np.ndarray, pivmin: float) -> np.ndarray:
    """Number of eigenvalues strictly below each x (vectorized over xs)."""
    q = d[0] - xs
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0).astype(int)
    for i in range(1, d.shape[0]):
        q = d[i] - xs - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0
    return count


def _float_enclosures(m: SymTriDiag, tol: float) -> tuple[list[Enclosure], float]:
    n = m.dim
    d = m.diag_array()
    e2 = np.array([float(x) for x in m.off_sq], dtype=float)
    norm = max(m.norm_bound(), np.finfo(float).tiny)
    resolution = float(4.0 * n * _EPS * norm)
    pivmin = np.finfo(float).tiny * max(1.0, float(e2.max()) if e2.size else 1.0) / _EPS
    off = np.sqrt(e2)
    radius = np.zeros(n)
    radius[:-1] += off
    radius[1:] += off
    lo = np.full(n, float((d - radius).min()) - resolution)
    hi = np.full(n, float((d + radius).max()) + resolution)
    idx = np.arange(n)
    for _ in range(200):
        width = hi - lo
        target = np.maximum(tol * np.maximum(np.abs(lo), np.abs(hi)), resolution)
        active = width > target
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        c = _sturm_counts(d, e2, mid, pivmin)
        up = c <= idx  # lambda_i >= mid
        lo = np.where(active & up, mid, lo)
        hi = np.where(active & ~up, mid, hi)
    return [Enclosure(float(a) - resolution, float(b) + resolution) for a, b in zip(lo, hi)], resolution


def _mp_count(diag, off_sq, x, pivmin) -> int:
    q = diag[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    count = 1 if q < 0 else 0
    for i in range(1, len(diag)):
        q = diag[i] - x - off_sq[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def _refine_mp(m: SymTriDiag, i: int, start: Enclosure, tol: float, max_dps: int = 2000) -> Enclosure:
    """Resolve eigenvalue i to relative accuracy ``tol`` in multiprecision."""
    n = m.dim
    norm = max(m.norm_bound(), 1.0)
    dps = 30
    while dps <= max_dps:
        with mpmath.workdps(dps):
            diag = [_to_mpf(x) for x in m.diag]
            off_sq = [_to_mpf(x) for x in m.off_sq]
            pivmin = mpmath.mpf(10) ** (-2 * dps) * norm
            err = 4 * n * mpmath.mpf(10) ** (1 - dps) * norm
            floor = err * 10**6
            sign = 1 if _mp_count(diag, off_sq, mpmath.mpf(0), pivmin) <= i else -1

            def ge(x):  # |lambda_i| >= x
                c = _mp_count(diag, off_sq, sign * x, pivmin)
                return c <= i if sign > 0 else c > i

            far = 2 * mpmath.mpf(max(abs(start.lo), abs(start.hi))) + err
            while ge(far):
                far *= 10**4
            near = far
            while not ge(near) and near > floor:
                far, near = near, near / 10**4
            if near <= floor:
                dps *= 2
                continue
            while far / near - 1 > tol / 4:
                mid = mpmath.sqrt(near * far)
                if ge(mid):
                    near = mid
                else:
                    far = mid
            if err > tol * near / 4:
                dps *= 2
                continue
            a, b = sorted((sign * (near - err), sign * (far + err)))
            return Enclosure(float(a), float(b))
    raise ArithmeticError(f"eigenvalue {i} could not be resolved within {max_dps} digits")


def _to_mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def eigen_enclosures(m: SymTriDiag, tol: float = 1e-12, exact_kernel: bool = True) -> list[Enclosure]:
    """Certified enclosures of all eigenvalues, ascending.

    Each enclosure has relative width about ``tol`` (plus a rounding-error
    margin).  For exact matrices the number of zero eigenvalues is read off
    the exact characteristic polynomial: those come back as [0, 0], and any
    other eigenvalue too small for double precision is refined with
    multiprecision Sturm counts.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = m.dim
    if n == 0:
        return []
    encs, resolution = _float_enclosures(m, tol)
    if not (m.exact and exact_kernel):
        return encs
    z = zero_multiplicity(m)
    if z:
        # the z enclosures nearest zero must straddle it
        order = sorted(range(n), key=lambda i: abs(encs[i].mid))
        for i in order[:z]:
            if not encs[i].contains(0.0):
                raise ArithmeticError("exact kernel dimension disagrees with Sturm enclosures")
        zeros = set(order[:z])
    else:
        zeros = set()
    out = []
    for i, e in enumerate(encs):
        if i in zeros:
            out.append(Enclosure(0.0, 0.0))
        elif e.lo <= 0.0 <= e.hi or min(abs(e.lo), abs(e.hi)) * _FLOAT_REL < resolution:
            out.append(_refine_mp(m, i, e, tol))
        else:
            out.append(e)
    # zero eigenvalues must keep their sorted position
    return sorted(out, key=lambda e: e.mid)


def eigenvalues(m: SymTriDiag, tol: float = 1e-12) -> np.ndarray:
    """Sorted eigenvalues (enclosure midpoints)."""
    return np.array([e.mid for e in eigen_enclosures(m, tol)], dtype=float)


# Gershgorin -----------------------------------------------------------------


def gershgorin_intervals(m: SymTriDiag) -> list[tuple[float, float]]:
    """Row intervals [d_i - R_i, d_i + R_i] of a real symmetric tridiagonal matrix."""
    d = m.diag_array()
    off = m.off
    out = []
    for i in range(m.dim):
        r = (off[i - 1] if i > 0 else 0.0) + (off[i] if i < m.dim - 1 else 0.0)
        out.append((float(d[i] - r), float(d[i] + r)))
    return out


def gershgorin_lower_bound_holds(m: SymTriDiag, bound) -> list[bool]:
    """Per row, whether the lower Gershgorin endpoint is >= ``bound``, decided exactly."""
    if not m.exact:
        raise ValueError("exact Gershgorin test needs exact entries")
    diag = [Fraction(x) for x in m.diag]
    off_sq = [Fraction(x) for x in m.off_sq]
    bound = Fraction(bound)
    # with D = lcm of diagonal denominators and E = lcm of off_sq denominators,
    # scaling by D*E turns d_i - bound and sqrt(off_sq) * D*E into integer data
    D = math.lcm(bound.denominator, *(x.denominator for x in diag))
    E = math.lcm(1, *(x.denominator for x in off_sq))
    s = D * E
    L = [(x - bound).numerator * (s // (x - bound).denominator) for x in diag]
    sq = [x.numerator * (s // x.denominator) * s for x in off_sq]
    n = m.dim
    return [
        _sqrt_sum_le_int(L[i], sq[i - 1] if i > 0 else 0, sq[i] if i < n - 1 else 0) for i in range(n)
    ]


def gershgorin_W_rows_hold(k: int, t, bound=1) -> list[bool]:
    """Integer-only equivalent of the exact Gershgorin test on the halved W matrix.

    Same answer as ``gershgorin_lower_bound_holds(symmetrize(build_W_matrix(k, t),
    halved=True), bound)`` but built directly from the closed-form entries,
    which depend on t only through |t|^2 = P/Q.
    """
    t = _as_param(t)
    a2 = t.abs2
    bound = Fraction(bound)
    P, Q = a2.numerator, a2.denominator
    R, S = bound.numerator, bound.denominator
    # scale everything by Q*S: diagonal -> integer, sqrt(off_sq) -> sqrt(integer)
    QS = Q * S
    L = [
        S * (Q * (2 * k - 2 * i + 1) * (2 * i) + P * (2 * i - 1) * (2 * k - 2 * i + 2)) - Q * R
        for i in range(1, k + 1)
    ]
    sq = [QS * S * P * (2 * i + 1) * (2 * i) * (2 * k - 2 * i) * (2 * k - 2 * i + 1) for i in range(1, k)]
    return [_sqrt_sum_le_int(L[i], sq[i - 1] if i > 0 else 0, sq[i] if i < k - 1 else 0) for i in range(k)]


def _sqrt_sum_le_int(L: int, A: int, B: int) -> bool:
    if L < 0:
        return False
    x = L * L - A - B
    return x >= 0 and x * x >= 4 * A * B


# flips ----------------------------------------------------------------------


def flip(m):
    """Reflect a square matrix across its antidiagonal: F(M) = E M^T E."""
    if isinstance(m, np.ndarray):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("flip needs a square matrix")
        return m.T[::-1, ::-1].copy()
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("flip needs a square matrix")
    return [[m[n - 1 - j][n - 1 - i] for j in range(n)] for i in range(n)]


# spectra at one even degree -------------------------------------------------


def degree_spectrum(k: int, t=None, tol: float = 1e-12) -> dict[str, list[Enclosure]]:
    """Unscaled V and W enclosures at degree 2k."""
    t = _as_param(t)
    return {
        "V": eigen_enclosures(symmetrize(build_V_matrix(k, t)), tol),
        "W": eigen_enclosures(symmetrize(build_W_matrix(k, t)), tol),
    }


def min_nonzero_eigenvalue(
    k: int, t=None, convention: ScalingConvention = ScalingConvention.RAW, tol: float = 1e-12
) -> float:
    """Smallest nonzero eigenvalue of box_t over V and W at degree 2k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    t = _as_param(t)
    spec = degree_spectrum(k, t, tol)
    nonzero = [e for e in spec["V"] + spec["W"] if not e.is_exact_zero()]
    lowest = min(nonzero, key=lambda e: e.mid)
    return convert(lowest.mid, t, ScalingConvention.UNSCALED, convention)
