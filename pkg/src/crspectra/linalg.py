"""Small exact linear algebra over the Gaussian rationals.

Ranks are computed by fraction-free (Bareiss) elimination on Gaussian
integers, represented as pairs of Python ints, so entries stay bounded by
minors instead of accumulating huge denominators.
"""

from __future__ import annotations

import math
from typing import Sequence

from .scalars import GaussianRational, to_scalar

__all__ = ["exact_rank", "gaussian_integer_rank", "clear_denominators", "gmul", "gadd"]

GInt = tuple  # (re, im) with int parts


def gmul(x: GInt, y: GInt) -> GInt:
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def gadd(x: GInt, y: GInt) -> GInt:
    return (x[0] + y[0], x[1] + y[1])


def _gsub(x: GInt, y: GInt) -> GInt:
    return (x[0] - y[0], x[1] - y[1])


def _gdiv_exact(x: GInt, y: GInt) -> GInt:
    n = y[0] * y[0] + y[1] * y[1]
    re = x[0] * y[0] + x[1] * y[1]
    im = x[1] * y[0] - x[0] * y[1]
    if re % n or im % n:
        raise ArithmeticError("inexact Gaussian integer division")
    return (re // n, im // n)


def clear_denominators(rows: Sequence[Sequence]) -> list[list[GInt]]:
    """Scale each row by the lcm of its denominators; returns Gaussian integers."""
    out = []
    for row in rows:
        vals = [to_scalar(x) for x in row]
        if not all(isinstance(v, GaussianRational) for v in vals):
            raise TypeError("exact linear algebra needs Gaussian rational entries")
        den = 1
        for v in vals:
            den = math.lcm(den, v.re.denominator, v.im.denominator)
        out.append([(int(v.re * den), int(v.im * den)) for v in vals])
    return out


def gaussian_integer_rank(rows: Sequence[Sequence[GInt]]) -> int:
    """Rank over Q(i) of a matrix of Gaussian integers (Bareiss elimination)."""
    m = [list(r) for r in rows if any(x != (0, 0) for x in r)]
    if not m:
        return 0
    ncols = len(m[0])
    prev = (1, 0)
    rank = 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c] != (0, 0)), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][c]
        for r in range(rank + 1, len(m)):
            a = m[r][c]
            m[r] = [
                _gdiv_exact(_gsub(gmul(p, m[r][j]), gmul(a, m[rank][j])), prev) if j > c else (0, 0)
                for j in range(ncols)
            ]
        prev = p
        rank += 1
        if rank == len(m):
            break
    return rank


def exact_rank(rows: Sequence[Sequence]) -> int:
    """Rank of a matrix with Gaussian rational entries, computed exactly."""
    return gaussian_integer_rank(clear_denominators(rows))
