"""Brute-force cross-check of the one-boson 3-3 relation over a prime field.

Variables take values in Z/p, the Gaussian is replaced by ``e(-x^T F x / 2)``
with the additive character ``e(k) = exp(2 pi i c k / p)``, and integrals by
sums over the field.  Inner sums are evaluated by counting how often each
residue of the quadratic form occurs; the counts are exact integers, so the
only rounding is in the final p-term character sum.
"""

from __future__ import annotations

import cmath
import itertools
import math
import random
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import gmpy2
import numpy as np

from .complexes import MoveComplex33, Pentachoron
from .errors import PreconditionError, StructuralError
from .one_boson import canonical_matrix
from .report import Check, Verification
from .scalars import exact
from .symplectic import simplex

MAX_PRIME = 13


def check_prime(p: int) -> int:
    p = int(p)
    if p == 2:
        raise PreconditionError("1/2 is undefined in characteristic 2")
    if p < 2 or not gmpy2.is_prime(p):
        raise PreconditionError(f"{p} is not a prime")
    if p > MAX_PRIME:
        raise PreconditionError(f"p must be at most {MAX_PRIME}")
    return p


def to_field(value: Any, p: int) -> int:
    """Image of an exact rational in Z/p."""
    q = exact(value)
    if q.y:
        raise PreconditionError("complex entries have no image in the prime field")
    r = gmpy2.mpq(q.x)
    den = int(r.denominator) % p
    if den == 0:
        raise PreconditionError(f"denominator of {r} vanishes mod {p}")
    return int(r.numerator) * pow(den, -1, p) % p


@dataclass(frozen=True)
class Character:
    p: int
    c: int = 1

    def __post_init__(self):
        check_prime(self.p)
        if not 1 <= self.c < self.p:
            raise PreconditionError(f"character index must lie in 1..{self.p - 1}")

    def __call__(self, k: int) -> complex:
        return cmath.exp(2j * math.pi * self.c * (k % self.p) / self.p)

    def table(self) -> list[complex]:
        return [self(k) for k in range(self.p)]

    def weight_table(self) -> list[complex]:
        """e(-r/2) for each residue r of x^T F x."""
        half = pow(2, -1, self.p)
        return [self(-r * half) for r in range(self.p)]


def field_matrix(F: Sequence[Sequence], p: int) -> np.ndarray:
    m = np.array([[to_field(c, p) for c in row] for row in F], dtype=np.int64)
    if m.shape[0] != m.shape[1] or np.any(m != m.T):
        raise StructuralError("F must be square and symmetric")
    return m


def discrete_weight(F: Sequence[Sequence], assignment: Mapping[Any, int] | Sequence[int], p: int, c: int = 1,
                    u: Pentachoron | None = None) -> complex:
    """e(-x^T F x / 2) for one assignment of field elements to the faces."""
    chi = Character(p, c)
    m = field_matrix(F, p)
    if isinstance(assignment, Mapping):
        faces = (u or Pentachoron((1, 2, 3, 4, 5))).faces
        keys = {simplex(k): v for k, v in assignment.items()}
        try:
            x = [int(keys[t]) % p for t in faces]
        except KeyError as exc:
            raise StructuralError(f"assignment misses face {exc.args[0]}") from None
    else:
        x = [int(v) % p for v in assignment]
    if len(x) != m.shape[0]:
        raise StructuralError("assignment does not cover every face")
    v = np.array(x, dtype=np.int64)
    return chi.weight_table()[int(v @ m @ v) % p]


def gauss_sum(F: Sequence[Sequence], p: int, c: int = 1) -> complex:
    """Sum of the discrete weight over all p^n assignments (residue counting)."""
    chi = Character(p, c)
    m = field_matrix(F, p)
    n = m.shape[0]
    pts = np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)
    q = np.einsum("ij,jk,ik->i", pts, m, pts) % p
    counts = np.bincount(q, minlength=p)
    return _character_sum(counts, chi.weight_table())


def _character_sum(counts, table) -> complex:
    re = math.fsum(int(k) * z.real for k, z in zip(counts, table))
    im = math.fsum(int(k) * z.imag for k, z in zip(counts, table))
    return complex(re, im)


class DiscreteSide:
    """One side of the move as an integer quadratic form on boundary + inner variables."""

    def __init__(self, side: str, p: int, F=None):
        self.p = check_prime(p)
        self.complex = MoveComplex33(side)
        self.boundary = list(self.complex.boundary_tetra)
        self.inner = list(self.complex.inner_tetra)
        order = self.boundary + self.inner
        index = {t: k for k, t in enumerate(order)}
        base = field_matrix(canonical_matrix() if F is None else F, p)
        m = np.zeros((len(order), len(order)), dtype=np.int64)
        for u in self.complex.pentachora:
            fu = (base * u.orientation) % p
            pos = [index[t] for t in u.faces]
            for a, ta in enumerate(pos):
                for b, tb in enumerate(pos):
                    m[ta, tb] += fu[a, b]
        m %= p
        nb = len(self.boundary)
        self.m_bb, self.m_bz, self.m_zz = m[:nb, :nb], m[:nb, nb:], m[nb:, nb:]
        self.inner_points = np.array(list(itertools.product(range(p), repeat=len(self.inner))), dtype=np.int64)

    def residue_counts(self, boundary_points: np.ndarray) -> np.ndarray:
        """For each boundary point, how many inner assignments give each value of x^T M x."""
        b, z, p = boundary_points, self.inner_points, self.p
        qb = np.einsum("ij,jk,ik->i", b, self.m_bb, b) % p
        qz = np.einsum("ij,jk,ik->i", z, self.m_zz, z) % p
        cross = (2 * (b @ self.m_bz) % p) @ z.T % p
        q = (qb[:, None] + cross + qz[None, :]) % p
        return np.stack([(q == r).sum(axis=1) for r in range(p)], axis=1)

    def values(self, boundary_points: np.ndarray, chi: Character) -> np.ndarray:
        table = chi.weight_table()
        return np.array([_character_sum(row, table) for row in self.residue_counts(boundary_points)])


def boundary_points(p: int, exhaustive: bool, samples: int = 1000, seed: int = 1) -> np.ndarray:
    if exhaustive:
        return np.array(list(itertools.product(range(p), repeat=9)), dtype=np.int64)
    rng = random.Random(seed)
    return np.array([[rng.randrange(p) for _ in range(9)] for _ in range(samples)], dtype=np.int64)


def verify_33_discrete(p: int, c: int = 1, exhaustive: bool | None = None, samples: int = 1000, seed: int = 1,
                       tol: float = 1e-9, chunk: int = 20000) -> Verification:
    """Ratio of the two sides of the discrete 3-3 relation over boundary points."""
    chi = Character(check_prime(p), c)
    if exhaustive is None:
        exhaustive = p == 3
    left, right = DiscreteSide("L", p), DiscreteSide("R", p)
    if left.boundary != right.boundary:
        raise StructuralError("the two sides have different boundaries")
    pts = boundary_points(p, exhaustive, samples, seed)
    lv = np.concatenate([left.values(pts[k:k + chunk], chi) for k in range(0, len(pts), chunk)])
    rv = np.concatenate([right.values(pts[k:k + chunk], chi) for k in range(0, len(pts), chunk)])

    eps = tol * p ** 1.5
    lz, rz = np.abs(lv) <= eps, np.abs(rv) <= eps
    mismatch = np.flatnonzero(lz != rz)
    defined = np.flatnonzero(~rz)
    report = Verification(data={"p": p, "c": c, "points": len(pts), "defined": len(defined),
                                "exhaustive": exhaustive})
    report.add(Check.of("vanishing_loci", len(mismatch) == 0,
                        witness={"boundary_point": pts[mismatch[0]].tolist(), "L": repr(complex(lv[mismatch[0]])),
                                 "R": repr(complex(rv[mismatch[0]]))} if len(mismatch) else None,
                        detail={"mismatches": int(len(mismatch))}))
    if len(defined) == 0:
        report.add(Check("ratio_constant", "skipped", detail="right side vanishes everywhere"))
        return report
    ratios = lv[defined] / rv[defined]
    ref = ratios[0]
    dev = np.abs(ratios - ref)
    worst = int(np.argmax(dev))
    residual = float(dev[worst]) / max(1.0, abs(ref))
    report.add(Check.of("ratio_constant", residual <= tol, residual=residual,
                        witness={"boundary_point": pts[defined[worst]].tolist(),
                                 "ratio": repr(complex(ratios[worst])), "reference": repr(complex(ref))},
                        detail={"ratio": {"re": repr(float(ref.real)), "im": repr(float(ref.imag))}}))
    report.data["ratio"] = complex(ref)
    return report
