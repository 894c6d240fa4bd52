"""Recovering |G| from the standard spectrum of S^3 / G.

Odd order shows up as a nonzero multiplicity at 2*alpha for a large odd
prime alpha.  The order then follows from the growth of mult(2 alpha)
(odd case) or mult(4 alpha) (even case) along primes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from sympy import primerange

from .groups import make_group
from .spectrum import SpectrumTable, standard_spectrum

__all__ = [
    "HearingError",
    "HearingReport",
    "Estimate",
    "parity_probe",
    "estimate_order_odd",
    "estimate_order_even",
    "calibrate_even_constant",
    "hear_order",
    "standard_window",
    "PRINTED_EVEN_CONSTANTS",
]

STABLE_PRIMES = 3
# the published even-case constants, kept for reporting next to the calibrated one
PRINTED_EVEN_CONSTANTS = {"hearing_estimate": 6, "asymptotic_limit": 1}


class HearingError(RuntimeError):
    """Estimates did not stabilize, or the window is too small to probe."""

    def __init__(self, message: str, report: "HearingReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Estimate:
    alpha: int
    multiplicity: int
    raw: float
    rounded: int


@dataclass
class HearingReport:
    group: str
    parity: str
    probe_prime: int
    estimates: list[Estimate] = field(default_factory=list)
    final_order: int | None = None
    agreeing: int = 0
    constant: Fraction | None = None

    @property
    def stabilized(self) -> bool:
        return self.agreeing >= STABLE_PRIMES

    def to_json(self) -> dict:
        out = {
            "group": self.group,
            "parity": self.parity,
            "probe_prime": self.probe_prime,
            "final_order": self.final_order,
            "agreeing_primes": self.agreeing,
            "stabilized": self.stabilized,
        }
        if self.constant is not None:
            out["even_constant"] = str(self.constant)
            out["printed_even_constants"] = dict(PRINTED_EVEN_CONSTANTS)
        out["estimates"] = [
            {"alpha": e.alpha, "multiplicity": e.multiplicity, "raw": e.raw, "rounded": e.rounded}
            for e in self.estimates
        ]
        return out


def _check_standard(S: SpectrumTable) -> None:
    if S.structure != "standard":
        raise ValueError("hearing needs a standard-structure spectrum")


def _odd_primes_covered(S: SpectrumTable, factor: int) -> list[int]:
    """Odd primes alpha whose eigenvalue factor*alpha is complete in the window."""
    top = S.max_degree * 2 // factor
    if S.max_eigenvalue is not None:
        top = min(top, S.max_eigenvalue // factor)
    return [int(p) for p in primerange(3, top + 1)]


def parity_probe(S: SpectrumTable, alpha: int) -> str:
    """'odd' iff 2*alpha is an eigenvalue.

    Reliable only for alpha >= |G| (for C_d with d > alpha the eigenvalue
    is absent even though d is odd), so callers probe with a large prime.
    """
    _check_standard(S)
    if alpha < 3 or alpha % 2 == 0 or not _is_prime(alpha):
        raise ValueError("probe needs an odd prime")
    if not S.covers(2 * alpha):
        raise HearingError(f"window does not cover eigenvalue {2 * alpha}")
    return "odd" if S.multiplicity(2 * alpha) > 0 else "even"


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % p for p in range(2, int(n**0.5) + 1))


def _nearest_odd(x: float) -> int:
    return max(1, 2 * round((x - 1) / 2) + 1)


def _nearest_even(x: float) -> int:
    return max(2, 2 * round(x / 2))


def _trailing_agreement(estimates: Sequence[Estimate]) -> int:
    if not estimates:
        return 0
    last = estimates[-1].rounded
    n = 0
    for e in reversed(estimates):
        if e.rounded != last:
            break
        n += 1
    return n


def _finish(report: HearingReport) -> HearingReport:
    report.agreeing = _trailing_agreement(report.estimates)
    report.final_order = report.estimates[-1].rounded if report.estimates else None
    if not report.stabilized:
        raise HearingError(
            f"order estimate not stabilized: last {report.agreeing} prime(s) agree, need {STABLE_PRIMES}",
            report,
        )
    return report


def estimate_order_odd(S: SpectrumTable, probe_prime: int | None = None) -> HearingReport:
    """d(alpha) = 2 alpha / mult(2 alpha), rounded to the nearest odd integer."""
    _check_standard(S)
    primes = _odd_primes_covered(S, 2)
    if not primes:
        raise HearingError("window covers no odd prime")
    report = HearingReport(S.group, "odd", probe_prime or primes[-1])
    for a in primes:
        m = S.multiplicity(2 * a)
        if m == 0:
            continue
        raw = 2 * a / m
        report.estimates.append(Estimate(a, m, raw, _nearest_odd(raw)))
    return _finish(report)


def _calibration_slope(label: str, primes: Sequence[int]) -> Fraction:
    """Exact slope of alpha -> mult(4 alpha) along primes of one residue class mod 8."""
    G = make_group(label)
    top = max(primes)
    S = standard_spectrum(G, 2 * top, max_eigenvalue=4 * top)
    slopes = set()
    by_class: dict[int, list[int]] = {}
    for a in primes:
        by_class.setdefault(a % 8, []).append(a)
    for cls_primes in by_class.values():
        for a, b in zip(cls_primes, cls_primes[1:]):
            slopes.add(Fraction(S.multiplicity(4 * b) - S.multiplicity(4 * a), b - a))
    if len(slopes) != 1:
        raise ArithmeticError(f"calibration on {label} did not converge: slopes {sorted(slopes)}")
    return slopes.pop() * G.order


def calibrate_even_constant(lo: int = 2000, hi: int = 2200) -> Fraction:
    """The constant c with mult(4 alpha) / alpha -> c / |G| for even |G|.

    Computed from exact C_2 and C_4 spectra over primes in [lo, hi]: within a
    residue class mod 8 the multiplicity is exactly affine in alpha, so the
    slope is read off exactly.  Both groups must agree.
    """
    primes = [int(p) for p in primerange(max(lo, 3), hi)]
    if len(primes) < 8:
        raise ValueError("calibration range holds too few primes")
    c2 = _calibration_slope("C:2", primes)
    c4 = _calibration_slope("C:4", primes)
    if c2 != c4:
        raise ArithmeticError(f"calibration disagrees between C:2 ({c2}) and C:4 ({c4})")
    return c2


def estimate_order_even(
    S: SpectrumTable, constant: Fraction | None = None, probe_prime: int | None = None
) -> HearingReport:
    """|G|(alpha) = c alpha / mult(4 alpha), rounded to the nearest even integer."""
    _check_standard(S)
    c = calibrate_even_constant() if constant is None else Fraction(constant)
    primes = _odd_primes_covered(S, 4)
    if not primes:
        raise HearingError("window covers no odd prime for the even estimator")
    report = HearingReport(S.group, "even", probe_prime or primes[-1], constant=c)
    for a in primes:
        m = S.multiplicity(4 * a)
        if m == 0:
            continue
        raw = float(c * a / m)
        report.estimates.append(Estimate(a, m, raw, _nearest_even(raw)))
    return _finish(report)


def hear_order(S: SpectrumTable, constant: Fraction | None = None) -> HearingReport:
    """Parity probe at the largest usable prime, then the matching estimator."""
    _check_standard(S)
    primes = _odd_primes_covered(S, 2)
    if not primes:
        raise HearingError("window covers no odd prime")
    alpha = primes[-1]
    if parity_probe(S, alpha) == "odd":
        return estimate_order_odd(S, alpha)
    return estimate_order_even(S, constant, alpha)


def standard_window(G, alpha_max: int) -> SpectrumTable:
    """The standard spectrum window needed to hear G with primes up to alpha_max."""
    return standard_spectrum(G, 2 * alpha_max, max_eigenvalue=4 * alpha_max)
