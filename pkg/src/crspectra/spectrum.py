"""Spectra of the standard and perturbed Kohn Laplacian on S^3 / G.

On H_{p,q} the standard operator acts by 2q(p+1), and the G-invariant part
of H_{p,q} has the same dimension as that of H_{0,p+q}.  For the perturbed
operator every invariant chain in degree n contributes one copy of the V(n)
and W(n) spectra.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .groups import FiniteSubgroup, dims_invariant
from .harmonics import OracleError, Poly, apply_Lbar, apply_box_t, oracle_matrix, project_invariant
from .linalg import exact_rank
from .matrices import (
    Enclosure,
    TriDiag,
    build_V_matrix,
    build_W_matrix,
    eigen_enclosures,
    symmetrize,
)
from .scalars import GaussianRational, PerturbationParam

__all__ = [
    "SpectrumEntry",
    "SpectrumTable",
    "EmbeddabilityReport",
    "standard_spectrum",
    "rossi_spectrum",
    "degree_blocks",
    "classify_embeddability",
    "invariant_eigenspace_crosscheck",
    "SchemaError",
]

# degrees up to this use the printed formulas only after an oracle equality check
ORACLE_CHECK_MAX_DEGREE = 12
DEFAULT_WINDOWS = (21, 51, 101, 201)


class SchemaError(ValueError):
    """A serialized spectrum does not match the schema."""


# tables ---------------------------------------------------------------------


@dataclass
class SpectrumEntry:
    eigenvalue: object  # int for standard, Enclosure for rossi
    multiplicity: int
    sources: list = field(default_factory=list)
    merged: bool = False

    @property
    def value(self) -> float:
        if isinstance(self.eigenvalue, Enclosure):
            return self.eigenvalue.mid
        return float(self.eigenvalue)

    def to_json(self) -> dict:
        out: dict = {}
        if isinstance(self.eigenvalue, Enclosure):
            out["eigenvalue"] = self.eigenvalue.mid
            out["enclosure"] = [self.eigenvalue.lo, self.eigenvalue.hi]
        else:
            out["eigenvalue"] = str(self.eigenvalue)
        out["multiplicity"] = self.multiplicity
        out["sources"] = [_source_json(s) for s in self.sources]
        if self.merged:
            out["merged"] = True
        return out


def _source_json(s: tuple) -> dict:
    if isinstance(s[1], str):
        return {"degree": s[0], "chain": s[1]}
    return {"p": s[0], "q": s[1]}


def _source_from_json(obj: dict) -> tuple:
    if "chain" in obj:
        if obj["chain"] not in ("V", "W"):
            raise SchemaError(f"unknown chain {obj['chain']!r}")
        return (int(obj["degree"]), obj["chain"])
    return (int(obj["p"]), int(obj["q"]))


@dataclass
class SpectrumTable:
    """A finite window of a quotient spectrum.

    Standard tables list exactly the eigenvalues coming from bidegrees with
    p + q <= max_degree (and, when set, eigenvalue <= max_eigenvalue).
    """

    structure: str
    group: str
    max_degree: int
    entries: list[SpectrumEntry]
    t: PerturbationParam | None = None
    max_eigenvalue: int | None = None

    def __post_init__(self):
        if self.structure not in ("standard", "rossi"):
            raise SchemaError(f"unknown structure {self.structure!r}")
        if self.max_degree < 0:
            raise SchemaError("max_degree must be non-negative")
        if self.structure == "standard" and self.t is not None:
            raise SchemaError("standard spectra carry no t")
        if self.structure == "rossi" and self.t is None:
            raise SchemaError("rossi spectra need t")
        for e in self.entries:
            if not isinstance(e.multiplicity, int) or e.multiplicity <= 0:
                raise SchemaError("multiplicities must be positive integers")
        values = [e.value for e in self.entries]
        if values != sorted(values):
            raise SchemaError("entries must be sorted by eigenvalue")

    # queries
    def multiplicity(self, eigenvalue) -> int:
        """Multiplicity of an exact standard eigenvalue (0 if absent)."""
        if self.structure != "standard":
            raise ValueError("exact lookup is for standard spectra")
        return self._lookup().get(int(eigenvalue), 0)

    def _lookup(self) -> dict:
        cache = self.__dict__.get("_cache")
        if cache is None:
            cache = {int(e.eigenvalue): e.multiplicity for e in self.entries}
            self.__dict__["_cache"] = cache
        return cache

    def covers(self, eigenvalue: int) -> bool:
        """Whether the multiplicity of a standard eigenvalue is complete in this window.

        A nonzero eigenvalue 2q(p+1) forces p + q <= lambda/2, so it is complete
        once lambda/2 <= max_degree (and lambda <= max_eigenvalue if capped).
        """
        if eigenvalue == 0:
            return False
        if self.max_eigenvalue is not None and eigenvalue > self.max_eigenvalue:
            return False
        return eigenvalue // 2 <= self.max_degree

    def nonzero_min(self) -> float | None:
        vals = [e for e in self.entries if not _is_zero_key(e.eigenvalue)]
        return min((e.value for e in vals), default=None)

    # serialization
    def to_json(self) -> dict:
        out = {
            "structure": self.structure,
            "t": self.t.to_json() if self.t is not None else None,
            "group": self.group,
            "max_degree": self.max_degree,
        }
        if self.max_eigenvalue is not None:
            out["max_eigenvalue"] = self.max_eigenvalue
        out["entries"] = [e.to_json() for e in self.entries]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> "SpectrumTable":
        try:
            structure = obj["structure"]
            entries = []
            for e in obj["entries"]:
                if structure == "standard":
                    key = e["eigenvalue"]
                    if not isinstance(key, str) or not key.lstrip("-").isdigit():
                        raise SchemaError("standard eigenvalues must be exact integer strings")
                    ev = int(key)
                else:
                    lo, hi = e["enclosure"]
                    ev = Enclosure(float(lo), float(hi))
                m = e["multiplicity"]
                if isinstance(m, bool) or not isinstance(m, int):
                    raise SchemaError("multiplicity must be an integer")
                entries.append(
                    SpectrumEntry(ev, m, [_source_from_json(s) for s in e["sources"]], bool(e.get("merged", False)))
                )
            return cls(
                structure=structure,
                group=str(obj["group"]),
                max_degree=int(obj["max_degree"]),
                entries=entries,
                t=PerturbationParam.from_json(obj.get("t")),
                max_eigenvalue=obj.get("max_eigenvalue"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaError):
                raise
            raise SchemaError(f"invalid spectrum table: {exc}") from exc

    @classmethod
    def loads(cls, text: str) -> "SpectrumTable":
        return cls.from_json(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eigenvalue", "lo", "hi", "multiplicity", "sources"])
        for e in self.entries:
            if isinstance(e.eigenvalue, Enclosure):
                row = [repr(e.eigenvalue.mid), repr(e.eigenvalue.lo), repr(e.eigenvalue.hi)]
            else:
                row = [str(e.eigenvalue)] * 3
            srcs = ";".join(f"{a}{b}" if isinstance(b, str) else f"({a},{b})" for a, b in e.sources)
            w.writerow(row + [e.multiplicity, srcs])
        return buf.getvalue()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpectrumTable):
            return NotImplemented
        return self.to_json() == other.to_json()


def _is_zero_key(ev) -> bool:
    if isinstance(ev, Enclosure):
        return ev.is_exact_zero()
    return ev == 0


# standard -------------------------------------------------------------------


def standard_spectrum(G: FiniteSubgroup, K: int, max_eigenvalue: int | None = None) -> SpectrumTable:
    """Exact spectrum of the standard operator from all bidegrees p + q <= K.

    With ``max_eigenvalue`` only eigenvalues up to that bound are listed,
    which keeps wide degree windows cheap.
    """
    if K < 0:
        raise ValueError("K must be non-negative")
    dims = dims_invariant(G, K)
    mult: dict[int, int] = {}
    sources: dict[int, list] = {}

    def add(lam: int, p: int, q: int) -> None:
        m = dims[p + q]
        if m:
            mult[lam] = mult.get(lam, 0) + m
            sources.setdefault(lam, []).append((p, q))

    for p in range(K + 1):
        add(0, p, 0)
    for q in range(1, K + 1):
        p_max = K - q
        if max_eigenvalue is not None:
            p_max = min(p_max, max_eigenvalue // (2 * q) - 1)
        for p in range(p_max + 1):
            add(2 * q * (p + 1), p, q)
    entries = [SpectrumEntry(lam, mult[lam], sorted(sources[lam])) for lam in sorted(mult)]
    return SpectrumTable("standard", G.label, K, entries, None, max_eigenvalue)


# rossi ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def _chain_matrices(n: int, t: PerturbationParam) -> tuple[TriDiag, TriDiag]:
    """Unscaled V and W matrices in degree n (formulas for even n, oracle for odd n)."""
    if n % 2:
        return (
            TriDiag.from_dense(oracle_matrix(n, t, "V")),
            TriDiag.from_dense(oracle_matrix(n, t, "W")),
        )
    k = n // 2
    V, W = build_V_matrix(k, t), build_W_matrix(k, t)
    if n <= ORACLE_CHECK_MAX_DEGREE:
        if V.to_dense() != oracle_matrix(n, t, "V") or (k and W.to_dense() != oracle_matrix(n, t, "W")):
            raise OracleError(f"closed-form matrices disagree with the oracle in degree {n}")
    return V, W


def _scale_enclosure(e: Enclosure, h: float) -> Enclosure:
    if e.is_exact_zero():
        return e
    # one ulp outward on each side absorbs the rounding of the product
    return Enclosure(math.nextafter(e.lo * h, -math.inf), math.nextafter(e.hi * h, math.inf))


def _degree_block(args) -> list[tuple[str, list[Enclosure]]]:
    n, t, tol = args
    if n == 0:
        return [("V", [Enclosure(0.0, 0.0)])]
    V, W = _chain_matrices(n, t)
    h = float(t.h())
    out = []
    for name, m in (("V", V), ("W", W)):
        if m.dim:
            out.append((name, [_scale_enclosure(e, h) for e in eigen_enclosures(symmetrize(m), tol)]))
    return out


@dataclass
class DegreeBlock:
    degree: int
    chain: str
    multiplicity: int
    enclosures: list[Enclosure]  # raw convention


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("CRSPECTRA_JOBS", "1")))
    except ValueError:
        return 1


def degree_blocks(
    G: FiniteSubgroup, t: PerturbationParam, K: int, tol: float = 1e-12, jobs: int | None = None
) -> list[DegreeBlock]:
    """Per degree n <= K and chain, the raw eigenvalue enclosures and their multiplicity."""
    if K < 0:
        raise ValueError("K must be non-negative")
    dims = dims_invariant(G, K)
    degrees = [n for n in range(K + 1) if dims[n] > 0]
    jobs = _default_jobs() if jobs is None else max(1, jobs)
    tasks = [(n, t, tol) for n in degrees]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_degree_block, tasks, chunksize=1))
    else:
        results = [_degree_block(a) for a in tasks]
    blocks = []
    for n, res in zip(degrees, results):
        for chain, encs in res:
            blocks.append(DegreeBlock(n, chain, dims[n], encs))
    return blocks


def _merge(blocks: Iterable[DegreeBlock]) -> list[SpectrumEntry]:
    items = sorted(
        (e.lo, e.hi, b.multiplicity, (b.degree, b.chain)) for b in blocks for e in b.enclosures
    )
    groups: list[list] = []
    for lo, hi, m, src in items:
        if groups and lo <= groups[-1][1]:
            g = groups[-1]
            g[1] = max(g[1], hi)
            g[2] += m
            g[3].add(src)
            g[4] += 1
        else:
            groups.append([lo, hi, m, {src}, 1])
    return [
        SpectrumEntry(Enclosure(lo, hi), m, sorted(srcs), count > 1 and not lo == hi == 0.0)
        for lo, hi, m, srcs, count in groups
    ]


def rossi_spectrum(
    G: FiniteSubgroup, t: PerturbationParam, K: int, tol: float = 1e-12, jobs: int | None = None
) -> SpectrumTable:
    """Raw-convention spectrum of box_t on S^3/G from degrees n <= K.

    Overlapping enclosures are merged into one entry (flagged ``merged`` when
    distinct blocks were combined); exact zeros always merge.
    """
    blocks = degree_blocks(G, t, K, tol, jobs)
    return SpectrumTable("rossi", G.label, K, _merge(blocks), t)


# embeddability --------------------------------------------------------------


@dataclass
class EmbeddabilityReport:
    group: str
    order: int
    t: PerturbationParam
    max_degree: int
    verdict: str
    gap_bound: float  # 2 h(t), raw convention
    gap_min_degree: int
    gap_min: float | None  # min nonzero eigenvalue lower endpoint over degrees >= gap_min_degree
    gap_holds: bool | None
    degree_minima: list[tuple[int, float]]
    window_minima: list[tuple[int, float]]

    @property
    def parity(self) -> str:
        return "even" if self.order % 2 == 0 else "odd"

    @property
    def minima_decreasing(self) -> bool:
        vals = [m for _, m in self.window_minima]
        return all(b < a for a, b in zip(vals, vals[1:]))

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "order": self.order,
            "parity": self.parity,
            "t": self.t.to_json(),
            "max_degree": self.max_degree,
            "verdict": self.verdict,
            "gap_bound": self.gap_bound,
            "gap_min_degree": self.gap_min_degree,
            "gap_min": self.gap_min,
            "gap_holds": self.gap_holds,
            "degree_minima": [[n, v] for n, v in self.degree_minima],
            "window_minima": [[k, v] for k, v in self.window_minima],
            "minima_decreasing": self.minima_decreasing,
        }


def classify_embeddability(
    G: FiniteSubgroup,
    t: PerturbationParam,
    K: int,
    windows: Sequence[int] | None = None,
    gap_min_degree: int = 8,
    tol: float = 1e-12,
    jobs: int | None = None,
) -> EmbeddabilityReport:
    """Verdict from the parity of |G|, with spectral evidence from the window.

    Even order: the smallest nonzero eigenvalue from degrees >= gap_min_degree
    is compared with 2 h(t) using certified lower endpoints.  Odd order: the
    running minimum over growing degree windows is reported.
    """
    blocks = degree_blocks(G, t, K, tol, jobs)
    per_degree: dict[int, float] = {}
    per_degree_lo: dict[int, float] = {}
    for b in blocks:
        for e in b.enclosures:
            if e.is_exact_zero():
                continue
            if b.degree not in per_degree or e.mid < per_degree[b.degree]:
                per_degree[b.degree] = e.mid
            per_degree_lo[b.degree] = min(per_degree_lo.get(b.degree, math.inf), e.lo)
    degree_minima = sorted(per_degree.items())
    if windows is None:
        windows = [w for w in DEFAULT_WINDOWS if w < K] + [K]
    window_minima = []
    for w in sorted(set(windows)):
        vals = [v for n, v in degree_minima if n <= w]
        if vals:
            window_minima.append((w, min(vals)))
    bound = float(2 * t.h())
    tail = [v for n, v in per_degree_lo.items() if n >= gap_min_degree]
    gap_min = min(tail) if tail else None
    gap_holds = None if gap_min is None else gap_min >= bound
    verdict = "embeddable" if G.order % 2 == 0 else "non-embeddable"
    return EmbeddabilityReport(
        G.label, G.order, t, K, verdict, bound, gap_min_degree, gap_min, gap_holds, degree_minima, window_minima
    )


# brute-force quotient eigenspaces -------------------------------------------


@dataclass
class CrosscheckReport:
    group: str
    max_degree: int
    ranks: dict  # (p, q) -> dim of invariants in H_{p,q}
    brute: dict  # eigenvalue -> multiplicity
    assembled: dict

    @property
    def matches(self) -> bool:
        return self.brute == self.assembled


def _coeff_vector(f: Poly, monos: Sequence) -> list:
    return [f.terms.get(m, 0) for m in monos]


def invariant_eigenspace_crosscheck(G: FiniteSubgroup, K: int) -> CrosscheckReport:
    """Brute-force multiplicities from projected invariant harmonics, compared with standard_spectrum.

    For every bidegree (p, q) with p + q <= K the space Lbar^p H_{0,p+q} is
    projected onto G-invariants; the rank of the projection gives the
    invariant dimension and each projected vector is checked to be an
    eigenvector of box_0.
    """
    ranks: dict = {}
    brute: dict = {}
    for k in range(K + 1):
        seeds = [Poly.monomial(0, 0, a, k - a) for a in range(k + 1)]
        for p in range(k + 1):
            q = k - p
            lam = 2 * q * (p + 1)
            projected = [project_invariant(f, G.elements) for f in seeds]
            for v in projected:
                image = apply_box_t(v)
                if G.exact:
                    if image != v.scale(GaussianRational(lam)):
                        raise OracleError(f"invariant vector in H_{p},{q} is not a box eigenvector")
                elif not image.allclose(v.scale(lam), tol=1e-8 * max(1, lam)):
                    raise OracleError(f"invariant vector in H_{p},{q} is not a box eigenvector")
            monos = sorted({m for v in projected for m in v.terms})
            if not monos:
                r = 0
            elif G.exact:
                r = exact_rank([_coeff_vector(v, monos) for v in projected])
            else:
                mat = np.array([[complex(x) for x in _coeff_vector(v, monos)] for v in projected])
                r = int(np.linalg.matrix_rank(mat, tol=1e-8))
            ranks[(p, q)] = r
            if r:
                brute[lam] = brute.get(lam, 0) + r
            seeds = [apply_Lbar(f) for f in seeds]
    assembled = {int(e.eigenvalue): e.multiplicity for e in standard_spectrum(G, K).entries}
    return CrosscheckReport(G.label, K, ranks, brute, assembled)
