"""Two bosons per tetrahedron.

Every face ``t`` carries ``x_t`` (slot 0) and ``y_t`` (slot 1); a 10x10
matrix ``F`` follows the face order of the pentachoron (opposite-vertex
order), ``(x_2345, y_2345, ..., x_1234, y_1234)`` for ``12345``.

Edge spaces, vertex dependencies and holonomies are exact on rational input.
Eigenvalue work (cocycle extraction, standard bases, gauge maps) runs on
complex floats and reports its residuals.
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any, Iterable

import gmpy2
import mpmath
import numpy as np

from . import linalg
from .complexes import STANDARD, MoveComplex33, Pentachoron, edges_of, triangles_of
from .errors import (
    DefectiveHolonomyError,
    DegenerateWeightError,
    ExcludedCocycleValueError,
    NonGenericError,
    PreconditionError,
    StructuralError,
)
from .quasi_gaussian import (
    QuasiGaussianWeight,
    annihilator_subspace,
    equal_up_to_constant,
    integrate,
    lagrangian_of,
    multiply,
)
from .report import Check, Verification
from .scalars import DEFAULT_TOL, ONE, ZERO, exact, is_zero, random_nonzero_rational, to_complex
from .symplectic import (
    BlockGaugeTransform,
    FirstOrderOperator,
    OperatorSubspace,
    SpaceSpec,
    apply_gauge,
    simplex,
    simplex_label,
    subspace_distance,
    subspaces_equal,
    symplectic_form,
)

Edge = tuple[int, int]
Triangle = tuple[int, int, int]


# -- cochains ------------------------------------------------------------------


def _sign_of(seq: tuple) -> int:
    sign = 1
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


@dataclass
class MultiplicativeCocycle:
    """Values on positively oriented triangles ``i < j < k``."""

    values: dict
    residual: float = 0.0

    def __getitem__(self, s) -> Any:
        """Value on an oriented triangle; odd reorderings give the inverse."""
        s = tuple(s) if not isinstance(s, str) else tuple(int(ch) for ch in s)
        v = self.values[tuple(sorted(s))]
        return v if _sign_of(s) > 0 else 1 / v

    @property
    def vertices(self) -> tuple:
        return tuple(sorted({v for s in self.values for v in s}))

    def inverse(self) -> "MultiplicativeCocycle":
        return MultiplicativeCocycle({s: 1 / v for s, v in self.values.items()}, self.residual)

    def cocycle_defects(self) -> dict:
        """|w_ijk w_ikl / (w_ijl w_jkl) - 1| for each tetrahedron ijkl."""
        out = {}
        for i, j, k, l in combinations(self.vertices, 4):
            ratio = self[(i, j, k)] * self[(i, k, l)] / (self[(i, j, l)] * self[(j, k, l)])
            out[(i, j, k, l)] = abs(to_complex(ratio - 1)) if not isinstance(ratio, complex) else abs(ratio - 1)
        return out

    def is_cocycle(self, tol: float = DEFAULT_TOL) -> bool:
        return all(d <= tol for d in self.cocycle_defects().values())

    def distance(self, other: "MultiplicativeCocycle") -> float:
        return max(abs(to_complex(self.values[s]) - to_complex(other.values[s])) for s in self.values)

    def to_dict(self) -> dict:
        from .scalars import format_scalar
        return {"".join(map(str, s)): format_scalar(v) for s, v in sorted(self.values.items())}


@dataclass
class OneChain:
    """Nonzero values on edges ``i < j``."""

    values: dict

    def __post_init__(self):
        self.values = {tuple(sorted(simplex(e))): v for e, v in self.values.items()}
        for e, v in self.values.items():
            if is_zero(v, 0.0 if not isinstance(v, complex) else None):
                raise PreconditionError(f"one-chain vanishes on edge {e}")

    def __getitem__(self, e) -> Any:
        return self.values[tuple(sorted(simplex(e)))]

    @property
    def vertices(self) -> tuple:
        return tuple(sorted({v for e in self.values for v in e}))

    @classmethod
    def constant(cls, vertices: Iterable[int], value: Any = 1) -> "OneChain":
        return cls({e: exact(value) for e in edges_of(vertices)})

    @classmethod
    def random(cls, vertices: Iterable[int], rng: random.Random, bound: int = 9) -> "OneChain":
        return cls({e: random_nonzero_rational(rng, bound) for e in edges_of(vertices)})

    def inverse(self) -> "OneChain":
        return OneChain({e: 1 / v for e, v in self.values.items()})

    def coboundary(self) -> MultiplicativeCocycle:
        """omega_ijk = nu_ij nu_jk / nu_ik."""
        return MultiplicativeCocycle({(i, j, k): self[(i, j)] * self[(j, k)] / self[(i, k)]
                                      for i, j, k in triangles_of(self.vertices)})

    def excluded_triangles(self, vertices: Iterable[int] | None = None) -> list[Triangle]:
        """Triangles where the coboundary equals -1."""
        verts = self.vertices if vertices is None else sorted(vertices)
        out = []
        for i, j, k in triangles_of(verts):
            value = self[(i, j)] * self[(j, k)] + self[(i, k)]
            if is_zero(value, None if isinstance(value, complex) else 0.0):
                out.append((i, j, k))
        return out

    def restrict(self, vertices: Iterable[int]) -> "OneChain":
        verts = sorted(vertices)
        return OneChain({e: self[e] for e in edges_of(verts)})

    def to_dict(self) -> dict:
        from .scalars import format_scalar
        return {"".join(map(str, e)): format_scalar(v) for e, v in sorted(self.values.items())}


def random_admissible_chain(vertices: Iterable[int], rng: random.Random, bound: int = 9) -> tuple[OneChain, int]:
    """Random rational chain whose coboundary never equals -1, and the resample count."""
    verts = tuple(vertices)
    resamples = 0
    while True:
        nu = OneChain.random(verts, rng, bound)
        if not nu.excluded_triangles():
            return nu, resamples
        resamples += 1


def standard_nu(omega: MultiplicativeCocycle) -> OneChain:
    """nu_1j = 1 and nu_ij = omega_1ij for 1 < i < j (1 = lowest vertex)."""
    verts = omega.vertices
    first = verts[0]
    values = {}
    for i, j in edges_of(verts):
        if i == first:
            values[(i, j)] = ONE if not isinstance(omega.values[(first, verts[1], verts[2])], complex) else 1 + 0j
        else:
            values[(i, j)] = omega[(first, i, j)]
    return OneChain(values)


# -- components and the delta weight -------------------------------------------


@dataclass
class ComponentTable:
    """Components (xi_b, eta_b) of e_b|_t over a basis (e_xi, e_eta) of that
    two-dimensional span, for the six edges b of t."""

    tetra: tuple
    xi: dict
    eta: dict

    @property
    def edges(self) -> list[Edge]:
        return edges_of(self.tetra)

    def columns(self) -> list[list]:
        return [[self.xi[e], self.eta[e]] for e in self.edges]


def dependency_rows(nu: OneChain, t) -> list[list]:
    """Rows of the vertex relations restricted to t: for each vertex a of t,
    gamma_ab on edges ab (gamma_ab = nu_ab if a < b, else 1)."""
    t = simplex(t)
    edges = edges_of(t)
    exact_mode = not isinstance(next(iter(nu.values.values())), complex)
    one, zero = (ONE, ZERO) if exact_mode else (1 + 0j, 0j)
    rows = []
    for a in t:
        row = []
        for e in edges:
            if a not in e:
                row.append(zero)
            else:
                b = e[1] if e[0] == a else e[0]
                row.append(nu[e] if a < b else one)
        rows.append(row)
    return rows


def component_table(nu: OneChain, t) -> ComponentTable:
    t = simplex(t)
    if len(t) != 4:
        raise StructuralError("component tables are per tetrahedron")
    bad = nu.excluded_triangles(t)
    if bad:
        raise ExcludedCocycleValueError(
            "coboundary equals -1 on " + ", ".join("".join(map(str, s)) for s in bad))
    i, j, k, l = t
    n = lambda a, b: nu[(a, b)]  # noqa: E731
    zero = ZERO if not isinstance(n(i, j), complex) else 0j
    xi = {
        (i, j): zero,
        (i, k): n(i, l) * (n(j, k) * n(k, l) + n(j, l)),
        (i, l): -n(i, k) * (n(j, k) * n(k, l) + n(j, l)),
        (j, k): -n(j, l) * (n(i, k) * n(k, l) + n(i, l)),
        (j, l): n(j, k) * (n(i, k) * n(k, l) + n(i, l)),
        (k, l): n(i, k) * n(j, l) - n(i, l) * n(j, k),
    }
    eta = {
        (i, j): -n(i, k) * (n(j, k) * n(k, l) + n(j, l)),
        (i, k): n(i, j) * (n(j, k) * n(k, l) + n(j, l)),
        (i, l): zero,
        (j, k): n(i, k) * n(k, l) - n(i, j) * n(j, l),
        (j, l): n(i, j) * n(j, k) + n(i, k),
        (k, l): -n(i, j) * n(j, k) - n(i, k),
    }
    return ComponentTable(t, xi, eta)


def delta_matrix(nu: OneChain, u: Pentachoron = STANDARD) -> list[list]:
    """10x10 matrix A with e_b = A (x_t, y_t) in the face order of u; columns of
    faces whose increasing order disagrees with the induced orientation are negated."""
    nu = nu.restrict(u.vertices)
    tables = {t: component_table(nu, t) for t in u.faces}
    zero = ZERO if not isinstance(next(iter(nu.values.values())), complex) else 0j
    rows = []
    for e in u.edges:
        row = []
        for t in u.faces:
            if e[0] in t and e[1] in t:
                s = u.face_sign(t)
                row += [s * tables[t].xi[e], s * tables[t].eta[e]]
            else:
                row += [zero, zero]
        rows.append(row)
    return rows


def minor_formula(nu: OneChain) -> Any:
    n = lambda a, b: nu[(a, b)]  # noqa: E731
    return (n(1, 3) ** 2 * (n(1, 2) * n(2, 3) + n(1, 3)) ** 2 * (n(1, 2) * n(2, 4) + n(1, 4))
            * (n(2, 3) * n(3, 4) + n(2, 4)) * (n(2, 3) * n(3, 5) + n(2, 5)))


def bottom_right_minor(nu: OneChain) -> Any:
    a = delta_matrix(nu, STANDARD)
    return linalg.det([row[5:] for row in a[5:]])


def build_delta_weight(nu: OneChain, u: Pentachoron = STANDARD) -> QuasiGaussianWeight:
    """prod delta(phi_b) over five independent rows of the delta matrix."""
    a = delta_matrix(nu, u)
    keep = linalg.independent_rows(a)
    if len(keep) != 5:
        raise DegenerateWeightError(f"delta matrix has rank {len(keep)}, expected 5")
    return QuasiGaussianWeight(u.spec(2), [a[i] for i in keep])


def multiplication_edge_operators(nu: OneChain, u: Pentachoron = STANDARD) -> dict:
    """The pure multiplication edge operators e_b = phi_b of the delta weight."""
    a = delta_matrix(nu, u)
    spec = u.spec(2)
    return {e: _form_operator(spec, row) for e, row in zip(u.edges, a)}


def _form_operator(spec: SpaceSpec, form) -> FirstOrderOperator:
    zero = ZERO if linalg.is_exact_matrix([form]) else 0j
    coeffs = []
    for c in form:
        coeffs += [zero, c]
    return FirstOrderOperator(spec, tuple(coeffs))


# -- edge spaces, dependencies, holonomies -------------------------------------


def _as_lagrangian(source, u: Pentachoron) -> OperatorSubspace:
    spec = u.spec(2)
    if isinstance(source, OperatorSubspace):
        if source.spec != spec:
            raise StructuralError("subspace does not live on the two-boson faces of the pentachoron")
        return source
    if isinstance(source, QuasiGaussianWeight):
        return annihilator_subspace(source.reordered(spec) if source.spec != spec else source)
    F = [list(r) for r in source]
    if len(F) != 10 or any(len(r) != 10 for r in F):
        raise StructuralError("F must be 10x10")
    exact_mode = linalg.is_exact_matrix(F)
    for a in range(10):
        for b in range(a):
            d = (exact(F[a][b]) - exact(F[b][a])) if exact_mode else to_complex(F[a][b]) - to_complex(F[b][a])
            if not is_zero(d, 0.0 if exact_mode else None):
                raise StructuralError("F must be symmetric")
    return lagrangian_of(F, spec)


@dataclass
class EdgeBasisPair:
    edge: Edge
    e: FirstOrderOperator
    f: FirstOrderOperator

    @property
    def subspace(self) -> OperatorSubspace:
        return OperatorSubspace(self.e.spec, [self.e, self.f])


@dataclass
class VertexDependency:
    """sum_j A_ij (e_ij, f_ij)^T = 0, normalized so the first matrix is the identity."""

    vertex: int
    matrices: dict

    def __getitem__(self, j: int):
        return self.matrices[j]


def _kernel_in_support(s: OperatorSubspace, faces: Iterable) -> list[FirstOrderOperator]:
    spec = s.spec
    inside = {c for t in faces for c in spec.face_coordinates(t)}
    outside = [c for c in range(spec.dim) if c not in inside]
    basis = s.basis()
    rows = basis.matrix()
    restricted = [[r[c] for c in outside] for r in rows]
    combos = linalg.left_nullspace(restricted) if outside else linalg.identity(len(rows))
    zero = ZERO if basis.exact else 0j
    ops = []
    for c in combos:
        vec = [zero] * spec.dim
        for ci, r in zip(c, rows):
            if not is_zero(ci, 0.0):
                vec = [v + ci * x for v, x in zip(vec, r)]
        ops.append(FirstOrderOperator(spec, tuple(vec)))
    return ops


class EdgeStructure:
    """Edge spaces E_b of a Lagrangian subspace in the two-boson space of u,
    with their vertex dependencies and holonomies (all exact on exact input)."""

    def __init__(self, source, u: Pentachoron = STANDARD):
        self.u = u
        self.lagrangian = _as_lagrangian(source, u)
        self.exact = self.lagrangian.exact
        self.spec = self.lagrangian.spec

    @cached_property
    def pairs(self) -> dict:
        out = {}
        for e in self.u.edges:
            faces = [t for t in self.u.faces if e[0] in t and e[1] in t]
            ops = _kernel_in_support(self.lagrangian, faces)
            if len(ops) != 2:
                raise NonGenericError(f"non-generic F: edge space of {e[0]}{e[1]} has dimension {len(ops)}")
            out[e] = EdgeBasisPair(e, ops[0], ops[1])
        return out

    def pair(self, i: int, j: int) -> EdgeBasisPair:
        return self.pairs[tuple(sorted((i, j)))]

    def _matrix(self, rows):
        return rows if self.exact else np.array([[to_complex(c) for c in r] for r in rows], dtype=complex)

    def _inv(self, m):
        if self.exact:
            try:
                return linalg.inverse(m)
            except ZeroDivisionError:
                raise NonGenericError("degenerate vertex dependency matrix") from None
        return np.linalg.inv(np.asarray(m, dtype=complex))

    def _mul(self, *ms):
        out = ms[0]
        for m in ms[1:]:
            out = linalg.matmul(out, m) if self.exact else np.asarray(out) @ np.asarray(m)
        return out

    def dependency(self, i: int) -> VertexDependency:
        return self._dependencies[i]

    @cached_property
    def _dependencies(self) -> dict:
        return {i: self._dependency(i) for i in self.u.vertices}

    def _dependency(self, i: int) -> VertexDependency:
        others = [j for j in self.u.vertices if j != i]
        stack = []
        for j in others:
            p = self.pair(i, j)
            stack += [list(p.e.coeffs), list(p.f.coeffs)]
        if not self.exact:
            stack = [[to_complex(c) for c in r] for r in stack]
        null = linalg.left_nullspace(stack)
        if len(null) != 2:
            raise NonGenericError(f"vertex {i}: {len(null)} dependencies instead of 2")
        mats = {j: [[null[0][2 * n], null[0][2 * n + 1]], [null[1][2 * n], null[1][2 * n + 1]]]
                for n, j in enumerate(others)}
        norm = self._inv(mats[others[0]])
        out = {}
        for j in others:
            m = self._mul(norm, mats[j])
            d = linalg.det(m) if self.exact else np.linalg.det(m)
            if is_zero(d, 0.0 if self.exact else DEFAULT_TOL):
                raise NonGenericError(f"A_{i}{j} is degenerate")
            out[j] = m
        return VertexDependency(i, out)

    def A(self, i: int, j: int):
        return self.dependency(i)[j]

    def step(self, x: int, y: int, z: int):
        """Coefficient map E_xy -> E_xz at vertex x: c -> c A_xy^-1 A_xz."""
        return self._mul(self._inv(self.A(x, y)), self.A(x, z))

    def holonomy(self, tri) -> Any:
        """A_ji^-1 A_jk A_kj^-1 A_ki A_ik^-1 A_ij on E_ij, for tri = (i, j, k)."""
        i, j, k = tri
        return self._mul(self.step(j, i, k), self.step(k, j, i), self.step(i, k, j))

    def transport(self, i: int, j: int):
        """Coefficient map E_12 -> E_ij (first two vertices of u): through vertex 1, then vertex j."""
        v1, v2 = self.u.vertices[:2]
        i, j = sorted((i, j))
        ident = linalg.identity(2) if self.exact else np.eye(2, dtype=complex)
        if (i, j) == (v1, v2):
            return ident
        if i == v1:
            return self.step(v1, v2, j)
        return self._mul(self.step(v1, v2, j), self.step(j, v1, i))


def edge_subspaces(F, u: Pentachoron = STANDARD) -> dict:
    return {e: p.subspace for e, p in EdgeStructure(F, u).pairs.items()}


def vertex_dependencies(F, i: int, u: Pentachoron = STANDARD) -> VertexDependency:
    return EdgeStructure(F, u).dependency(i)


def holonomy(F, tri, u: Pentachoron = STANDARD):
    return EdgeStructure(F, u).holonomy(tuple(tri))


def tetra_dependency(structure: EdgeStructure, i: int, t) -> dict:
    """A_ij for the three edges ij of t, from the t-components alone,
    normalized so the first is the identity."""
    t = simplex(t)
    others = [j for j in t if j != i]
    stack = []
    for j in others:
        p = structure.pair(i, j)
        stack += [list(p.e.component(t)), list(p.f.component(t))]
    null = linalg.left_nullspace(stack)
    if len(null) != 2:
        raise NonGenericError(f"face {''.join(map(str, t))}: {len(null)} dependencies at vertex {i}")
    mats = {j: [[null[0][2 * n], null[0][2 * n + 1]], [null[1][2 * n], null[1][2 * n + 1]]]
            for n, j in enumerate(others)}
    norm = structure._inv(mats[others[0]])
    return {j: structure._mul(norm, mats[j]) for j in others}


# -- cocycle extraction ----------------------------------------------------------


def _np(m) -> np.ndarray:
    return np.array([[to_complex(c) for c in r] for r in m], dtype=complex) if not isinstance(m, np.ndarray) else m


def _order_key(lam: complex, tol: float) -> tuple:
    return (round(abs(lam) / tol) * tol, round(np.angle(lam) / tol) * tol)


@dataclass
class Eigenlines:
    """Two common left eigenvectors of all holonomies, carried to E_12, and
    the holonomies themselves in E_12 coordinates."""

    first: np.ndarray
    second: np.ndarray
    residual: float
    conjugated: dict = field(default_factory=dict)
    spectra: dict = field(default_factory=dict)


def _conjugated_holonomies(structure: EdgeStructure) -> dict:
    """T H T^-1 with T the transport E_ij -> E_12; exact when the data is."""
    out = {}
    for tri in structure.u.triangles:
        i, j, _ = tri
        t, h = structure.transport(i, j), structure.holonomy(tri)
        if linalg.is_exact_matrix(t) and linalg.is_exact_matrix(h):
            out[tri] = linalg.matmul(linalg.matmul(t, h), linalg.inverse(t))
        else:
            t = _np(t)
            out[tri] = t @ _np(h) @ np.linalg.inv(t)
    return out


def _spectrum_2x2(h) -> tuple[complex, complex, complex]:
    """Eigenvalues (l1, l2) and sqrt of the discriminant.  The discriminant
    is formed before rounding so large entries do not cancel."""
    (a, b), (c, d) = h
    disc = to_complex((a - d) * (a - d) + 4 * b * c)
    tr, dt = to_complex(a + d), to_complex(a * d - b * c)
    root = cmath.sqrt(disc)
    big = (tr + root) / 2 if abs(tr + root) >= abs(tr - root) else (tr - root) / 2
    small = dt / big if big else 0j
    l1, l2 = (big, small) if abs(tr + root) >= abs(tr - root) else (small, big)
    return l1, l2, root


def _left_eigenvector_2x2(h, lam: complex) -> np.ndarray:
    (a, b), (c, d) = _np(h)
    u = np.array([c, lam - a], dtype=complex)
    v = np.array([d - lam, -b], dtype=complex)
    w = u if np.linalg.norm(u) >= np.linalg.norm(v) else v
    return w / np.linalg.norm(w)


def common_eigenlines(structure: EdgeStructure, tol: float = DEFAULT_TOL) -> Eigenlines:
    conj = _conjugated_holonomies(structure)
    spectra = {tri: _spectrum_2x2(h) for tri, h in conj.items()}
    scale = {tri: max(1.0, abs(l1), abs(l2)) for tri, (l1, l2, _) in spectra.items()}
    gaps = {tri: abs(root) / scale[tri] for tri, (_, _, root) in spectra.items()}
    ref = max(gaps, key=lambda s: gaps[s])
    floats = {tri: _np(h) for tri, h in conj.items()}
    if gaps[ref] <= 1e-6:
        # every holonomy has a double eigenvalue: it must be scalar
        for tri, h in floats.items():
            lam = np.trace(h) / 2
            if np.max(np.abs(h - lam * np.eye(2))) > 1e-8 * max(1.0, abs(lam)):
                raise DefectiveHolonomyError(f"holonomy of triangle {''.join(map(str, tri))} is not diagonalizable")
        lines = [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)]
    else:
        l1, l2, _ = spectra[ref]
        lines = [_left_eigenvector_2x2(conj[ref], l1), _left_eigenvector_2x2(conj[ref], l2)]
    residual = 0.0
    values = {}
    for tri, h in floats.items():
        vals = []
        for c in lines:
            lam = _rayleigh(c, h)
            residual = max(residual, float(np.linalg.norm(c @ h - lam * c)) / max(1.0, abs(lam), np.linalg.norm(h)))
            vals.append(lam)
        values[tri] = vals
    if residual > 1e-8:
        raise DefectiveHolonomyError(f"holonomies are not simultaneously diagonal (residual {residual:.2e})")
    # deterministic choice: the line with the larger eigenvalue on the first
    # triangle (in order) where the two eigenvalues differ
    order = 0
    for tri in structure.u.triangles:
        a, b = values[tri]
        if abs(a - b) > 1e-6 * max(1.0, abs(a)):
            order = 0 if _order_key(a, 1e-9) >= _order_key(b, 1e-9) else 1
            break
    first, second = (lines[0], lines[1]) if order == 0 else (lines[1], lines[0])
    return Eigenlines(first / _pivot(first), second / _pivot(second), residual, floats,
                      {tri: sp[:2] for tri, sp in spectra.items()})


def _pivot(c: np.ndarray) -> complex:
    return c[int(np.argmax(np.abs(c)))]


def _rayleigh(c: np.ndarray, h: np.ndarray) -> complex:
    w = c @ h
    k = int(np.argmax(np.abs(c)))
    return complex(w[k] / c[k])


def _mp(value) -> mpmath.mpc:
    q = exact(value)
    re, im = gmpy2.mpq(q.x), gmpy2.mpq(q.y)
    return mpmath.mpc(mpmath.mpf(int(re.numerator)) / int(re.denominator),
                      mpmath.mpf(int(im.numerator)) / int(im.denominator))


def verify_holonomies(source, u: Pentachoron = STANDARD, tol: float = DEFAULT_TOL) -> Verification:
    """Determinants, commutation and eigenvalue pairing of the ten holonomies,
    and the cocycle law for the extracted eigenvalues."""
    structure = source if isinstance(source, EdgeStructure) else EdgeStructure(source, u)
    u = structure.u
    report = Verification()
    hol = {tri: structure.holonomy(tri) for tri in u.triangles}
    exact_mode = all(linalg.is_exact_matrix(h) for h in hol.values())
    dets = {tri: linalg.det(h) for tri, h in hol.items()}
    if exact_mode:
        bad = [tri for tri, d in dets.items() if d != ONE]
        report.add(Check.of("holonomy_determinant", not bad,
                            witness={simplex_label(t): str(dets[t]) for t in bad} or None))
    else:
        dev = max(abs(complex(d) - 1) for d in dets.values())
        report.add(Check.of("holonomy_determinant", dev < tol, residual=dev))

    # holonomies around triangles sharing the first edge act on the same space
    conj = _conjugated_holonomies(structure)
    comm = 0.0
    for a, b in combinations(u.triangles, 2):
        ha, hb = conj[a], conj[b]
        if exact_mode:
            d = linalg.matmul(ha, hb)
            e = linalg.matmul(hb, ha)
            if d != e:
                comm = max(comm, float(np.max(np.abs(_np(d) - _np(e)))))
        else:
            comm = max(comm, float(np.max(np.abs(ha @ hb - hb @ ha))))
    report.add(Check.of("holonomies_commute", comm < tol, residual=comm))

    # eigenvalues from the characteristic polynomial in 50-digit arithmetic
    pairing = 0.0
    with mpmath.workdps(50):
        for tri, h in hol.items():
            (a, b), (c, d) = [[_mp(x) if exact_mode else mpmath.mpc(x) for x in r] for r in h]
            root = mpmath.sqrt((a - d) ** 2 + 4 * b * c)
            lam, mu = (a + d + root) / 2, (a + d - root) / 2
            pairing = max(pairing, float(abs(lam * mu - 1)))
    report.add(Check.of("eigenvalues_inverse", pairing < tol, residual=pairing))

    omega = extract_cocycle(structure, u, 0, tol)
    defect = max(omega.cocycle_defects().values())
    report.add(Check.of("cocycle_law", defect < tol, residual=defect, witness=omega.to_dict() if defect >= tol else None))
    report.data["omega"] = omega
    return report


def extract_cocycle(source, u: Pentachoron = STANDARD, choice: int = 0, tol: float = DEFAULT_TOL
                    ) -> MultiplicativeCocycle:
    """omega_s = eigenvalue of the holonomy of s on the chosen common eigenline.
    ``choice=1`` takes the other line, which yields the inverse cocycle."""
    structure = source if isinstance(source, EdgeStructure) else EdgeStructure(source, u)
    lines = common_eigenlines(structure, tol)
    line = lines.first if choice == 0 else lines.second
    values = {}
    residual = lines.residual
    for tri, h in lines.conjugated.items():
        lam = _rayleigh(line, h)
        residual = max(residual, float(np.linalg.norm(line @ h - lam * line)) / max(1.0, abs(lam), np.linalg.norm(h)))
        # the closed-form root is more accurate than the Rayleigh quotient
        values[tri] = min(lines.spectra[tri], key=lambda r: abs(r - lam))
    return MultiplicativeCocycle(values, residual)


# -- standard bases and gauge maps ---------------------------------------------


def _commutator_matrix(a: np.ndarray, b: np.ndarray) -> complex:
    """[a, b] for coefficient vectors in (d/dx, x, d/dy, y, ...) order."""
    return complex(np.sum(a[0::2] * b[1::2] - a[1::2] * b[0::2]))


@dataclass
class StandardData:
    nu: OneChain
    omega: MultiplicativeCocycle
    e: dict
    f: dict
    dependencies: dict
    bases: dict
    residuals: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


def _vec(op: FirstOrderOperator) -> np.ndarray:
    return np.array([to_complex(c) for c in op.coeffs], dtype=complex)


def standardize_bases(source, u: Pentachoron = STANDARD, choice: int = 0, tol: float = DEFAULT_TOL) -> StandardData:
    """Edge operators with diagonal dependencies of the form diag(gamma, 1/gamma)
    with gamma_ij = nu_ij (i < j) or 1 (i > j), nu the standard chain of the
    extracted cocycle, and per-face standard bases (e_xi, e_eta, f_xi, f_eta)."""
    structure = source if isinstance(source, EdgeStructure) else EdgeStructure(source, u)
    u = structure.u
    lines = common_eigenlines(structure, tol)
    omega = extract_cocycle(structure, u, choice, tol)
    nu_c = standard_nu(omega)
    bad = [s for s in nu_c.excluded_triangles() if True]
    if bad:
        raise ExcludedCocycleValueError("coboundary equals -1 on " + ", ".join("".join(map(str, s)) for s in bad))
    ce, cf = (lines.first, lines.second) if choice == 0 else (lines.second, lines.first)
    residuals = {"eigenlines": omega.residual}

    # operators on the eigenlines
    e, f, p = {}, {}, {}
    for edge in u.edges:
        t = _np(structure.transport(*edge))
        pair = structure.pairs[edge]
        basis = np.vstack([_vec(pair.e), _vec(pair.f)])
        rows = np.vstack([ce @ t, cf @ t])
        p[edge] = rows
        e[edge], f[edge] = rows @ basis

    # dependencies in the new basis, made diagonal
    diag = {}
    off = 0.0
    for x in u.vertices:
        dep = structure.dependency(x)
        mats = {z: _np(dep[z]) @ np.linalg.inv(p[tuple(sorted((x, z)))]) for z in dep.matrices}
        first = next(iter(mats))
        norm = np.linalg.inv(mats[first])
        for z, m in mats.items():
            m = norm @ m
            off = max(off, abs(m[0, 1]), abs(m[1, 0]))
            diag[(x, z)] = (m[0, 0], m[1, 1])
    residuals["diagonal"] = off

    def gamma(a, b):
        return to_complex(nu_c[(a, b)]) if a < b else 1 + 0j

    v0 = u.vertices[0]
    consistency = 0.0
    for slot, store, power in ((0, e, 1), (1, f, -1)):
        kappa = {v0: 1 + 0j}
        for z in u.vertices[1:]:
            kappa[z] = (diag[(z, v0)][slot] * gamma(v0, z) ** power) / (diag[(v0, z)][slot] * gamma(z, v0) ** power)
        for a, b in u.edges:
            la = diag[(a, b)][slot] / (kappa[a] * gamma(a, b) ** power)
            lb = diag[(b, a)][slot] / (kappa[b] * gamma(b, a) ** power)
            consistency = max(consistency, abs(la - lb) / max(abs(la), abs(lb)))
            store[(a, b)] = store[(a, b)] * la
    residuals["scaling"] = consistency

    # per-face bases from the component tables
    spec = structure.spec
    bases, fit = {}, 0.0
    nu_inv = nu_c.inverse()
    for t in u.faces:
        cols = spec.face_coordinates(t)
        rows = []
        for ops, chain in ((e, nu_c), (f, nu_inv)):
            table = component_table(chain, t)
            x = np.array([[to_complex(c) for c in r] for r in table.columns()], dtype=complex)
            target = np.array([ops[b][cols] for b in table.edges])
            y, *_ = np.linalg.lstsq(x, target, rcond=None)
            fit = max(fit, float(np.max(np.abs(x @ y - target))) / max(1.0, float(np.max(np.abs(target)))))
            rows += [y[0], y[1]]
        bases[t] = np.vstack(rows)
    residuals["components"] = fit

    # fix the product of the two overall factors
    scale = 0
    peak = max(abs(_commutator_matrix(b[a], b[c])) for b in bases.values() for a in (0, 1) for c in (2, 3))
    for t in u.faces:
        for a in (0, 1):
            for c in (2, 3):
                value = _commutator_matrix(bases[t][a], bases[t][c])
                if not scale and abs(value) > 1e-8 * peak:
                    scale = value
    for t in u.faces:
        bases[t][2:] /= scale
    for edge in f:
        f[edge] = f[edge] / scale

    def rel(a, b):
        return abs(_commutator_matrix(a, b)) / max(1.0, float(np.linalg.norm(a) * np.linalg.norm(b)))

    ee = max(rel(b[0], b[1]) for b in bases.values())
    ff = max(rel(b[2], b[3]) for b in bases.values())
    residuals["isotropy"] = max(ee, ff)
    deps = {}
    for x in u.vertices:
        deps[x] = VertexDependency(x, {z: np.diag([gamma(x, z), 1 / gamma(x, z)]) for z in u.vertices if z != x})
    return StandardData(nu_c, omega, e, f, deps, bases, residuals)


def gauge_between(F1, F2, u: Pentachoron = STANDARD, tol: float = 1e-7) -> BlockGaugeTransform:
    """Per-face Sp(4) blocks carrying the Lagrangian of F1 onto that of F2,
    assuming both have the same cocycle (possibly after inverting one)."""
    s1 = EdgeStructure(F1, u)
    s2 = EdgeStructure(F2, u)
    w1 = extract_cocycle(s1, u, 0)
    choice2 = None
    for c in (0, 1):
        w2 = extract_cocycle(s2, u, c)
        if w1.distance(w2) <= tol * max(1.0, max(abs(to_complex(v)) for v in w1.values.values())):
            choice2 = c
            break
    if choice2 is None:
        w2 = extract_cocycle(s2, u, 0)
        diff = [s for s in w1.values if abs(to_complex(w1.values[s]) - to_complex(w2.values[s])) > tol]
        raise PreconditionError("cocycles differ on " + ", ".join("".join(map(str, s)) for s in diff))
    d1 = standardize_bases(s1, u, 0)
    d2 = standardize_bases(s2, u, choice2)
    blocks = {t: d2.bases[t].T @ np.linalg.inv(d1.bases[t].T) for t in u.faces}
    return BlockGaugeTransform(blocks, tol)


def gauge_residual(F1, F2, u: Pentachoron = STANDARD, tol: float = 1e-7) -> float:
    g = gauge_between(F1, F2, u, tol)
    source = _as_lagrangian(F1, u)
    moved = apply_gauge(g, source.to_complex())
    # gauge maps are invertible, so the dimension is that of the source
    return subspace_distance(moved, _as_lagrangian(F2, u).to_complex(), tol, dim=source.rank)


def stabilizer_dimension(source, u: Pentachoron = STANDARD) -> int:
    """Dimension of the Lie algebra of per-face sp(4) elements preserving the Lagrangian."""
    lag = _as_lagrangian(source, u).basis()
    spec = lag.spec
    rows = lag.matrix()
    exact_mode = lag.exact
    zero, one = (ZERO, ONE) if exact_mode else (0j, 1 + 0j)
    j4 = symplectic_form(4, exact_mode)
    # parameters: symmetric S_t (10 per face); X_t = J S_t
    params = []
    for t in u.faces:
        for a in range(4):
            for b in range(a, 4):
                params.append((t, a, b))
    equations = []
    for v in rows:
        for w in rows:
            eq = []
            for t, a, b in params:
                cols = spec.face_coordinates(t)
                sv = [zero] * 4
                sv[a] = v[cols[b]]
                if a != b:
                    sv[b] = v[cols[a]]
                xv = linalg.matvec(j4, sv) if exact_mode else list(np.asarray(j4) @ np.array(sv))
                wt = [w[c] for c in cols]
                # <X v, w> restricted to face t
                eq.append(xv[0] * wt[1] - xv[1] * wt[0] + xv[2] * wt[3] - xv[3] * wt[2])
            equations.append(eq)
    return len(params) - linalg.rank(equations)


# -- the 3-3 move ---------------------------------------------------------------


def move_pentachora(side: str) -> tuple[Pentachoron, ...]:
    return MoveComplex33(side, tildes=False).pentachora


def integrate_side(nu: OneChain, side: str) -> QuasiGaussianWeight:
    m = MoveComplex33(side, tildes=False)
    w = None
    for u in m.pentachora:
        pw = build_delta_weight(nu, u)
        w = pw if w is None else multiply(w, pw)
    for t in m.inner_tetra:
        for slot in (0, 1):
            try:
                w = integrate(w, (t, slot))
            except Exception as exc:
                raise type(exc)(f"side {side}, variable {'xy'[slot]}{''.join(map(str, t))}: {exc}") from exc
    return w


def cluster_multiplication_operator(nu: OneChain, m: MoveComplex33, b) -> FirstOrderOperator:
    """Boundary components of the multiplication edge operators phi_b.

    Signs follow the orientation each pentachoron inherits inside the move
    (``m`` should carry the reversed pentachora), so that on inner faces the
    contributions of the two neighbours cancel.  The weights themselves do not
    depend on that orientation: reversing it negates every form, and
    delta(-phi) is delta(phi) up to a constant.
    """
    i, j = simplex(b)
    spec = m.boundary_spec(2)
    zero = ZERO if not isinstance(next(iter(nu.values.values())), complex) else 0j
    coeffs = [zero] * spec.dim
    for t in m.boundary_tetra:
        if i in t and j in t:
            u = m.owner(t)
            table = component_table(nu, t)
            s = u.induced_sign(t)
            kx, ky = spec.index(t, 0), spec.index(t, 1)
            coeffs[2 * kx + 1] = s * table.xi[(i, j)]
            coeffs[2 * ky + 1] = s * table.eta[(i, j)]
    return FirstOrderOperator(spec, tuple(coeffs))


def verify_33_two_boson(nu: OneChain) -> Verification:
    verts = tuple(range(1, 7))
    if set(nu.vertices) != set(verts):
        raise StructuralError("the 3-3 move needs a chain on vertices 1..6")
    bad = nu.excluded_triangles()
    if bad:
        raise ExcludedCocycleValueError("coboundary equals -1 on " + ", ".join("".join(map(str, s)) for s in bad))
    report = Verification()
    wl, wr = integrate_side(nu, "L"), integrate_side(nu, "R")
    report.data.update(left=wl, right=wr)
    zero_quad = all(is_zero(h, 0.0) for w in (wl, wr) for r in w.hessian for h in r)
    report.add(Check.of("nine_deltas", wl.n_deltas == 9 and wr.n_deltas == 9 and zero_quad,
                        witness={"L": wl.n_deltas, "R": wr.n_deltas, "quadratic_part_zero": zero_quad}))
    report.add(Check.of("delta_spans_equal", equal_up_to_constant(wl, wr)))
    L, R = MoveComplex33("L"), MoveComplex33("R")
    ops_l = [cluster_multiplication_operator(nu, L, b) for b in L.edges]
    ops_r = [cluster_multiplication_operator(nu, R, b) for b in R.edges]
    diff = ["".join(map(str, b)) for b, a, c in zip(L.edges, ops_l, ops_r) if a.coeffs != c.coeffs]
    report.add(Check.of("cluster_operators_match", not diff, witness=diff))
    span_l = OperatorSubspace(L.boundary_spec(2), ops_l)
    span_r = OperatorSubspace(R.boundary_spec(2), ops_r)
    report.add(Check.of("cluster_rank", span_l.rank == 9 and span_r.rank == 9 and subspaces_equal(span_l, span_r),
                        witness={"L": span_l.rank, "R": span_r.rank}))
    ann_l, ann_r = annihilator_subspace(wl), annihilator_subspace(wr)
    missing = [f"{s}:{''.join(map(str, b))}" for s, ann, ops in (("L", ann_l, ops_l), ("R", ann_r, ops_r))
               for b, d in zip(L.edges, ops) if not ann.contains(d)]
    report.add(Check.of("annihilation", not missing, witness=missing))
    report.data["cluster_span"] = span_l
    return report
