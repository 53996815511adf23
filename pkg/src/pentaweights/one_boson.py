"""One boson per tetrahedron: edge operators of a Gaussian pentachoron weight,
the canonical matrix, gauge reduction to it, and the 3-3 move.

Matrices ``F`` are indexed by opposite vertex: row ``a`` belongs to the face
opposite the ``a``-th vertex of the pentachoron, which is also the order of
``Pentachoron.faces``.
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import linalg
from .complexes import STANDARD, MoveComplex33, Pentachoron, edges_of, permutation_sign
from .errors import NonGenericError, StructuralError
from .quasi_gaussian import (
    QuasiGaussianWeight,
    annihilator_subspace,
    equal_up_to_constant,
    gaussian_from_matrix,
    integrate,
    lagrangian_of,
    multiply,
    weight_from_forms,
    weight_from_lagrangian,
)
from .report import Check, Verification
from .scalars import DEFAULT_TOL, ZERO, exact, is_zero, random_rational, to_complex
from .symplectic import (
    BlockGaugeTransform,
    FirstOrderOperator,
    OperatorSubspace,
    SpaceSpec,
    apply_gauge,
    commutator,
    partial_commutator,
    simplex,
    subspace_distance,
    subspaces_equal,
)

_CANONICAL = (
    (1, 0, -1, 1, 0),
    (0, 0, 0, -1, 1),
    (-1, 0, 1, 0, -1),
    (1, -1, 0, 0, 0),
    (0, 1, -1, 0, 1),
)

# (sign, five index pairs) for the cyclic part of det F, 1-based
_CYCLIC_TERMS = (
    (+1, ((1, 2), (1, 3), (2, 4), (3, 5), (4, 5))),
    (-1, ((1, 2), (1, 4), (2, 3), (3, 5), (4, 5))),
    (-1, ((1, 2), (1, 3), (2, 5), (3, 4), (4, 5))),
    (+1, ((1, 2), (1, 5), (2, 3), (3, 4), (4, 5))),
    (+1, ((1, 3), (1, 4), (2, 3), (2, 5), (4, 5))),
    (-1, ((1, 3), (1, 5), (2, 3), (2, 4), (4, 5))),
    (+1, ((1, 2), (1, 4), (2, 5), (3, 4), (3, 5))),
    (-1, ((1, 2), (1, 5), (2, 4), (3, 4), (3, 5))),
    (-1, ((1, 3), (1, 4), (2, 4), (2, 5), (3, 5))),
    (+1, ((1, 4), (1, 5), (2, 3), (2, 4), (3, 5))),
    (+1, ((1, 3), (1, 5), (2, 4), (2, 5), (3, 4))),
    (-1, ((1, 4), (1, 5), (2, 3), (2, 5), (3, 4))),
)

CLOSED_FORM_DELTAS = (
    {"1245": 1, "1246": -1, "1345": -1, "1346": 1},
    {"1356": 1, "2356": -1, "1346": -1, "2346": 1},
)
CLOSED_FORM_FACTORS = (
    {"1356": 1, "1346": -1, "1256": -1, "1246": 1},
    {"2346": 1, "2345": -1, "1346": -1, "1345": 1},
)


def canonical_matrix() -> list[list]:
    return [[exact(c) for c in row] for row in _CANONICAL]


def _checked_matrix(F: Sequence[Sequence]) -> list[list]:
    if len(F) != 5 or any(len(r) != 5 for r in F):
        raise StructuralError("F must be 5x5")
    F = linalg.as_exact(F) if linalg.is_exact_matrix(F) else [[to_complex(c) for c in r] for r in F]
    for a in range(5):
        for b in range(a):
            if not is_zero(F[a][b] - F[b][a], 0.0 if linalg.is_exact_matrix(F) else None):
                raise StructuralError("F must be symmetric")
    return F


def random_symmetric_matrix(rng: random.Random, n: int = 5, bound: int = 9) -> list[list]:
    m = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            m[a][b] = m[b][a] = random_rational(rng, bound)
    return m


def random_generic_matrix(rng: random.Random, bound: int = 9) -> tuple[list[list], int]:
    """Random rational F with nonzero cyclic quantity, and the number of resamples."""
    resamples = 0
    while True:
        F = random_symmetric_matrix(rng, 5, bound)
        if cyclic_quantity(F):
            return F, resamples
        resamples += 1


def cyclic_quantity(F: Sequence[Sequence]):
    """The twelve cyclic-permutation monomials of det F, with their signs."""
    F = _checked_matrix(F)
    total = ZERO if linalg.is_exact_matrix(F) else 0j
    for sign, pairs in _CYCLIC_TERMS:
        term = F[pairs[0][0] - 1][pairs[0][1] - 1]
        for a, b in pairs[1:]:
            term = term * F[a - 1][b - 1]
        total = total + term if sign > 0 else total - term
    return total


def commutator_sign(u: Pentachoron, t, i: int, j: int, k: int) -> int:
    """Sign s with [d_ij, d_ik]_t = s*c on the face t = ijkl."""
    t = simplex(t)
    (l,) = [v for v in t if v not in (i, j, k)]
    return permutation_sign((i, j, k, l), t) * u.face_sign(t)


def _ordered_rest(u: Pentachoron, t: tuple[int, ...], i: int, j: int) -> tuple[int, int]:
    """The other two vertices k, l of t, ordered so that ijkl carries the
    orientation induced on t from the increasing order of u."""
    k, l = (v for v in t if v not in (i, j))
    if permutation_sign((i, j, k, l), t) * u.face_sign(t) < 0:
        k, l = l, k
    return k, l


def edge_component(F, u: Pentachoron, i: int, j: int, m: int) -> tuple:
    """(beta, gamma) of d_ij on the face opposite vertex m."""
    t = u.opposite(m)
    k, l = _ordered_rest(u, t, i, j)
    a, b, c, d, e = (u.local(v) for v in (i, j, k, l, m))
    f = lambda p, q: F[p][q]  # noqa: E731
    beta = f(a, c) * f(b, d) - f(a, d) * f(b, c)
    gamma = (f(a, c) * f(b, d) * f(e, e) - f(a, d) * f(b, c) * f(e, e) - f(a, c) * f(b, e) * f(d, e)
             + f(a, e) * f(b, c) * f(d, e) + f(a, d) * f(b, e) * f(c, e) - f(a, e) * f(b, d) * f(c, e))
    return beta, gamma


def edge_operator(F, u: Pentachoron, i: int, j: int, spec: SpaceSpec | None = None) -> FirstOrderOperator:
    """The edge operator d_ij of the Gaussian weight exp(-x^T F x / 2) on u.

    ``(i, j)`` is ordered; d_ij and d_ji are computed independently.
    """
    F = _checked_matrix(F)
    if i == j or not u.contains((i, j)):
        raise StructuralError(f"{i}{j} is not an edge of {u.label}")
    spec = u.spec() if spec is None else spec
    zero = ZERO if linalg.is_exact_matrix(F) else 0j
    coeffs = [zero] * spec.dim
    for m in u.vertices:
        if m in (i, j):
            continue
        beta, gamma = edge_component(F, u, i, j, m)
        k = spec.index(u.opposite(m))
        coeffs[2 * k], coeffs[2 * k + 1] = beta, gamma
    return FirstOrderOperator(spec, tuple(coeffs))


@dataclass
class EdgeOperatorTable:
    pentachoron: Pentachoron
    F: list
    operators: dict
    c: Any

    @property
    def generic(self) -> bool:
        return not is_zero(self.c, None if linalg.is_exact_matrix(self.F) else DEFAULT_TOL)

    @property
    def spec(self) -> SpaceSpec:
        return self.pentachoron.spec()

    def __getitem__(self, edge) -> FirstOrderOperator:
        i, j = simplex(edge)
        return self.operators[(i, j)]

    def span(self) -> OperatorSubspace:
        return OperatorSubspace(self.spec, self.operators.values())


def edge_operators(F, u: Pentachoron = STANDARD) -> EdgeOperatorTable:
    F = _checked_matrix(F)
    ops = {(i, j): edge_operator(F, u, i, j) for i, j in u.edges}
    return EdgeOperatorTable(u, F, ops, cyclic_quantity(F))


def verify_edge_identities(F, u: Pentachoron = STANDARD) -> Verification:
    """Exact check of the edge-operator identities for one matrix F."""
    F = _checked_matrix(F)
    table = edge_operators(F, u)
    c = table.c
    spec = table.spec
    report = Verification(data={"table": table, "c": c, "generic": table.generic})

    ordered = {(i, j): edge_operator(F, u, i, j, spec) for i in u.vertices for j in u.vertices if i != j}

    def op(i, j):
        return ordered[(i, j)]

    bad = [f"{i}{j}" for i, j in u.edges if op(i, j).coeffs != op(j, i).coeffs]
    report.add(Check.of("symmetry", not bad, witness=bad))

    bad = []
    for i in u.vertices:
        total = FirstOrderOperator.zero(spec)
        for j in u.vertices:
            if j != i:
                total = total + op(i, j)
        if not total.is_zero(0.0):
            bad.append(i)
    report.add(Check.of("vertex_sum", not bad, witness=bad))

    bad = []
    for t in u.faces:
        for a, b in edges_of(t):
            k, l = (v for v in t if v not in (a, b))
            if op(a, b).component(t) != op(k, l).component(t):
                bad.append(f"{a}{b}|{''.join(map(str, t))}")
    report.add(Check.of("opposite_edges", not bad, witness=bad))

    bad = []
    for i, j in u.edges:
        d = table[(i, j)]
        outside = [t for t in d.support(0.0) if not (i in t and j in t)]
        if outside:
            bad.append(f"{i}{j}")
    report.add(Check.of("support", not bad, witness=bad))

    bad = []
    for t in u.faces:
        for b1 in edges_of(t):
            for b2 in u.edges:
                value = partial_commutator(op(*b1), op(*b2), t)
                shared = set(b1) & set(b2)
                if len(shared) == 1 and set(b2) <= set(t):
                    (i,) = shared
                    j = next(v for v in b1 if v != i)
                    k = next(v for v in b2 if v != i)
                    expected = commutator_sign(u, t, i, j, k) * c
                else:
                    expected = ZERO
                if value != expected:
                    bad.append(f"[{''.join(map(str, b1))},{''.join(map(str, b2))}]_{''.join(map(str, t))}")
    report.add(Check.of("partial_commutators", not bad, witness=bad[:5]))

    c12 = partial_commutator(op(1, 2), op(1, 3), (1, 2, 3, 4)) if u == STANDARD else None
    if c12 is not None:
        report.add(Check.of("cyclic_quantity", c12 == commutator_sign(u, (1, 2, 3, 4), 1, 2, 3) * c,
                            witness={"commutator": str(c12), "c": str(c)}))

    bad = [f"{a[0]}{a[1]},{b[0]}{b[1]}" for n, a in enumerate(u.edges) for b in u.edges[n + 1:]
           if commutator(op(*a), op(*b))]
    report.add(Check.of("isotropic", not bad, witness=bad[:5]))

    lag = lagrangian_of(F, spec)
    bad = [f"{i}{j}" for i, j in u.edges if not lag.contains(table[(i, j)])]
    report.add(Check.of("annihilation", not bad, witness=bad))

    if table.generic:
        span_rank = table.span().rank
        report.add(Check.of("span", span_rank == 5, witness={"rank": span_rank}))
    return report


def canonical_subspace(u: Pentachoron = STANDARD) -> OperatorSubspace:
    return lagrangian_of(canonical_matrix(), u.spec())


def reduce_to_canonical(F, u: Pentachoron = STANDARD, tol: float = DEFAULT_TOL) -> BlockGaugeTransform:
    """Per-face Sp(2) blocks sending the edge operators of F to those of the
    canonical matrix.  Uses sqrt(c) (principal branch), so blocks are complex."""
    F = _checked_matrix(F)
    c = cyclic_quantity(F)
    if is_zero(c, None if linalg.is_exact_matrix(F) else tol):
        raise NonGenericError("non-generic weight: cyclic quantity vanishes")
    root = cmath.sqrt(to_complex(c))
    cF = canonical_matrix()
    blocks = {}
    for t in u.faces:
        i, j, k, _ = t
        (m,) = [v for v in u.vertices if v not in t]
        a1, a2 = (np.array([to_complex(x) for x in edge_component(F, u, i, v, m)]) / root for v in (j, k))
        b1, b2 = (np.array([to_complex(x) for x in edge_component(cF, u, i, v, m)]) for v in (j, k))
        blocks[t] = np.column_stack([b1, b2]) @ np.linalg.inv(np.column_stack([a1, a2]))
    return BlockGaugeTransform(blocks, tol)


def pentachoron_matrix(u: Pentachoron) -> list[list]:
    """Canonical matrix for a plain pentachoron, its negative for a tilded one."""
    return [[c * u.orientation for c in row] for row in canonical_matrix()]


def pentachoron_weight(u: Pentachoron) -> QuasiGaussianWeight:
    return gaussian_from_matrix(pentachoron_matrix(u), u.spec())


def cluster_edge_operator(m: MoveComplex33, b) -> FirstOrderOperator:
    """Boundary components of the per-pentachoron edge operators of b."""
    i, j = simplex(b)
    if not (1 <= i < j <= 6):
        raise StructuralError(f"{b} is not an edge of the 3-3 complex")
    spec = m.boundary_spec()
    coeffs = [ZERO] * spec.dim
    for t in m.boundary_tetra:
        if i in t and j in t:
            u = m.owner(t)
            (opp,) = [v for v in u.vertices if v not in t]
            beta, gamma = edge_component(pentachoron_matrix(u), u, i, j, opp)
            k = spec.index(t)
            coeffs[2 * k], coeffs[2 * k + 1] = beta, gamma
    return FirstOrderOperator(spec, tuple(coeffs))


def cluster_span(m: MoveComplex33) -> OperatorSubspace:
    return OperatorSubspace(m.boundary_spec(), [cluster_edge_operator(m, b) for b in m.edges])


def integrate_side(m: MoveComplex33) -> QuasiGaussianWeight:
    """Product of the three pentachoron weights integrated over the inner faces."""
    w = None
    for u in m.pentachora:
        pw = pentachoron_weight(u)
        w = pw if w is None else multiply(w, pw)
    for t in m.inner_tetra:
        try:
            w = integrate(w, t)
        except Exception as exc:
            raise type(exc)(f"side {m.side}, variable x{''.join(map(str, t))}: {exc}") from exc
    return w


def closed_form_weight() -> QuasiGaussianWeight:
    return weight_from_forms(MoveComplex33("L").boundary_spec(), CLOSED_FORM_DELTAS, CLOSED_FORM_FACTORS)


def verify_33_one_boson() -> Verification:
    L, R = MoveComplex33("L"), MoveComplex33("R")
    report = Verification()
    wl, wr = integrate_side(L), integrate_side(R)
    closed = closed_form_weight()
    report.data.update(left=wl, right=wr, closed_form=closed)

    report.add(Check.of("sides_equal", equal_up_to_constant(wl, wr), witness=[wl.to_dict(), wr.to_dict()]))
    report.add(Check.of("closed_form", equal_up_to_constant(wl, closed) and equal_up_to_constant(wr, closed),
                        witness=[wl.to_dict(), closed.to_dict()]))
    agreement = wl.constant.compare(wr.constant)
    report.add(Check.of("constants", agreement is not None,
                        residual=abs(abs(wl.constant.value) - abs(wr.constant.value)),
                        witness=[str(wl.constant.value), str(wr.constant.value)],
                        detail={"agreement": agreement, "left": str(wl.constant.value),
                                "right": str(wr.constant.value)}))

    ops_l = [cluster_edge_operator(L, b) for b in L.edges]
    ops_r = [cluster_edge_operator(R, b) for b in R.edges]
    bad = [f"{b[0]}{b[1]}" for b, a, c in zip(L.edges, ops_l, ops_r) if a.coeffs != c.coeffs]
    report.add(Check.of("cluster_operators_match", not bad, witness=bad))

    ann_l, ann_r = annihilator_subspace(wl), annihilator_subspace(wr)
    bad = [f"{s}:{b[0]}{b[1]}" for s, ann, ops in (("L", ann_l, ops_l), ("R", ann_r, ops_r))
           for b, d in zip(L.edges, ops) if not ann.contains(d)]
    report.add(Check.of("annihilation", not bad, witness=bad))

    span_l = OperatorSubspace(L.boundary_spec(), ops_l)
    span_r = OperatorSubspace(R.boundary_spec(), ops_r)
    pure_l, pure_r = span_l.pure_multiplication(), span_r.pure_multiplication()
    report.add(Check.of("cluster_rank", span_l.rank == 9 and span_r.rank == 9,
                        witness={"L": span_l.rank, "R": span_r.rank}))
    report.add(Check.of("pure_multiplication", pure_l.rank == 2 and pure_r.rank == 2
                        and subspaces_equal(pure_l, pure_r), witness={"L": pure_l.rank, "R": pure_r.rank}))
    if span_l.rank == 9:
        unique = weight_from_lagrangian(span_l)
        report.add(Check.of("unique_solution", equal_up_to_constant(unique, wl), witness=unique.to_dict()))
    report.data.update(cluster_span=span_l, pure_multiplication=pure_l)
    return report


def gauge_residual(F, u: Pentachoron = STANDARD, tol: float = DEFAULT_TOL) -> float:
    """Distance between the gauge-reduced Lagrangian of F and the canonical one."""
    g = reduce_to_canonical(F, u, tol)
    moved = apply_gauge(g, lagrangian_of(F, u.spec()).to_complex())
    return subspace_distance(moved, canonical_subspace(u).to_complex(), tol)
