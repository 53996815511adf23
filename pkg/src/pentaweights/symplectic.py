"""First-order operators on face variables and their symplectic geometry.

An operator ``d = sum (beta_v d/dx_v + gamma_v x_v)`` is stored as a flat
coefficient tuple over the variables of a :class:`SpaceSpec`, in the order
``(beta_0, gamma_0, beta_1, gamma_1, ...)``.  With two bosons per face the
per-face block is therefore ``(d/dx, x, d/dy, y)`` and the symplectic form is
block diagonal in ``[[0, 1], [-1, 0]]``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import linalg
from .errors import PreconditionError, StructuralError
from .scalars import (
    DEFAULT_TOL,
    ONE,
    ZERO,
    GaussianRational,
    exact,
    format_scalar,
    is_zero,
    random_nonzero_rational,
    random_rational,
    to_complex,
)

Tetra = tuple

DERIVATIVE = "derivative"
MULTIPLICATION = "multiplication"


def simplex(label: Any) -> tuple[int, ...]:
    """``"1234"`` or ``(1, 2, 3, 4)`` -> sorted tuple of vertex labels."""
    if isinstance(label, str):
        verts = tuple(int(ch) for ch in label)
    else:
        verts = tuple(int(v) for v in label)
    if list(verts) != sorted(set(verts)):
        verts = tuple(sorted(verts))
        if len(set(verts)) != len(verts):
            raise StructuralError(f"repeated vertex in {label!r}")
    return verts


def simplex_label(s: Iterable[int]) -> str:
    return "".join(str(v) for v in s)


@dataclass(frozen=True)
class FaceVariable:
    tetra: tuple[int, ...]
    slot: int = 0
    kind: str = MULTIPLICATION

    def __post_init__(self):
        object.__setattr__(self, "tetra", simplex(self.tetra))
        if self.kind not in (DERIVATIVE, MULTIPLICATION):
            raise StructuralError(f"unknown kind {self.kind!r}")

    @property
    def name(self) -> str:
        letter = "xy"[self.slot] if self.slot < 2 else f"z{self.slot}"
        base = f"{letter}{simplex_label(self.tetra)}"
        return f"d/d{base}" if self.kind == DERIVATIVE else base


@dataclass(frozen=True)
class SpaceSpec:
    """Ordered list of commuting variables ``(tetra, slot)``.

    Usually built with :meth:`of_faces`; weights that have been partially
    integrated may carry a ragged list of variables.
    """

    variables: tuple[tuple[tuple[int, ...], int], ...]
    _index: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        variables = tuple((simplex(t), int(s)) for t, s in self.variables)
        object.__setattr__(self, "variables", variables)
        index = {v: i for i, v in enumerate(variables)}
        if len(index) != len(variables):
            raise StructuralError("repeated variable in space")
        object.__setattr__(self, "_index", index)

    @classmethod
    def of_faces(cls, faces: Iterable[Any], bosons_per_face: int = 1) -> "SpaceSpec":
        if bosons_per_face not in (1, 2):
            raise StructuralError("bosons_per_face must be 1 or 2")
        faces = [simplex(t) for t in faces]
        return cls(tuple((t, s) for t in faces for s in range(bosons_per_face)))

    @property
    def faces(self) -> tuple[tuple[int, ...], ...]:
        seen: dict = {}
        for t, _ in self.variables:
            seen.setdefault(t, None)
        return tuple(seen)

    @property
    def bosons_per_face(self) -> int | None:
        counts = {}
        for t, _ in self.variables:
            counts[t] = counts.get(t, 0) + 1
        values = set(counts.values())
        return values.pop() if len(values) == 1 else None

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def dim(self) -> int:
        """Symplectic dimension."""
        return 2 * len(self.variables)

    def index(self, tetra: Any, slot: int = 0) -> int:
        key = (simplex(tetra), slot)
        try:
            return self._index[key]
        except KeyError:
            raise StructuralError(f"variable {key} not in space") from None

    def has(self, tetra: Any, slot: int = 0) -> bool:
        return (simplex(tetra), slot) in self._index

    def coordinate(self, var: FaceVariable) -> int:
        return 2 * self.index(var.tetra, var.slot) + (var.kind == MULTIPLICATION)

    def face_variables(self, tetra: Any) -> list[int]:
        t = simplex(tetra)
        idx = [i for i, (u, _) in enumerate(self.variables) if u == t]
        if not idx:
            raise StructuralError(f"face {simplex_label(t)} not in space")
        return idx

    def face_coordinates(self, tetra: Any) -> list[int]:
        return [c for i in self.face_variables(tetra) for c in (2 * i, 2 * i + 1)]

    def sorted(self) -> "SpaceSpec":
        return SpaceSpec(tuple(sorted(self.variables)))

    def union(self, *others: "SpaceSpec") -> "SpaceSpec":
        seen = set(self.variables)
        for o in others:
            seen.update(o.variables)
        return SpaceSpec(tuple(sorted(seen)))

    def without(self, tetra: Any, slot: int = 0) -> "SpaceSpec":
        key = (simplex(tetra), slot)
        self.index(*key)
        return SpaceSpec(tuple(v for v in self.variables if v != key))

    def variable_names(self) -> list[str]:
        return [FaceVariable(t, s).name for t, s in self.variables]


def _scalar(value, exact_mode: bool):
    return exact(value) if exact_mode else complex(value)


@dataclass(frozen=True)
class FirstOrderOperator:
    spec: SpaceSpec
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.spec.dim:
            raise StructuralError("coefficient vector does not match the space")

    @classmethod
    def zero(cls, spec: SpaceSpec) -> "FirstOrderOperator":
        return cls(spec, (ZERO,) * spec.dim)

    @classmethod
    def from_terms(cls, spec: SpaceSpec, terms: Mapping[FaceVariable, Any]) -> "FirstOrderOperator":
        values = list(terms.values())
        exact_mode = not any(isinstance(v, (float, complex)) for v in values)
        coeffs = [ZERO if exact_mode else 0j] * spec.dim
        for var, value in terms.items():
            coeffs[spec.coordinate(var)] += _scalar(value, exact_mode)
        return cls(spec, tuple(coeffs))

    @classmethod
    def d(cls, spec: SpaceSpec, tetra: Any, slot: int = 0, coeff: Any = 1) -> "FirstOrderOperator":
        return cls.from_terms(spec, {FaceVariable(tetra, slot, DERIVATIVE): coeff})

    @classmethod
    def x(cls, spec: SpaceSpec, tetra: Any, slot: int = 0, coeff: Any = 1) -> "FirstOrderOperator":
        return cls.from_terms(spec, {FaceVariable(tetra, slot, MULTIPLICATION): coeff})

    @property
    def exact(self) -> bool:
        return linalg.is_exact_matrix([self.coeffs])

    def __getitem__(self, var: FaceVariable):
        return self.coeffs[self.spec.coordinate(var)]

    @property
    def beta(self) -> tuple:
        return self.coeffs[0::2]

    @property
    def gamma(self) -> tuple:
        return self.coeffs[1::2]

    def component(self, tetra: Any) -> tuple:
        return tuple(self.coeffs[c] for c in self.spec.face_coordinates(tetra))

    def only(self, tetra: Any) -> "FirstOrderOperator":
        """The t-component as an operator on the whole space."""
        keep = set(self.spec.face_coordinates(tetra))
        z = ZERO if self.exact else 0j
        return FirstOrderOperator(self.spec, tuple(c if i in keep else z for i, c in enumerate(self.coeffs)))

    def support(self, tol: float | None = None) -> tuple:
        faces = []
        for t in self.spec.faces:
            if not linalg.is_zero_vector(self.component(t), tol):
                faces.append(t)
        return tuple(faces)

    def is_zero(self, tol: float | None = None) -> bool:
        return linalg.is_zero_vector(self.coeffs, tol)

    def is_pure_multiplication(self, tol: float | None = None) -> bool:
        return linalg.is_zero_vector(self.beta, tol)

    def _check(self, other: "FirstOrderOperator"):
        if self.spec != other.spec:
            raise StructuralError("operators live on different spaces")

    def __add__(self, other: "FirstOrderOperator") -> "FirstOrderOperator":
        self._check(other)
        return FirstOrderOperator(self.spec, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "FirstOrderOperator") -> "FirstOrderOperator":
        self._check(other)
        return FirstOrderOperator(self.spec, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "FirstOrderOperator":
        return FirstOrderOperator(self.spec, tuple(-a for a in self.coeffs))

    def __mul__(self, scalar) -> "FirstOrderOperator":
        if self.exact and not isinstance(scalar, (float, complex)):
            scalar = exact(scalar)
            return FirstOrderOperator(self.spec, tuple(a * scalar for a in self.coeffs))
        scalar = to_complex(scalar)
        return FirstOrderOperator(self.spec, tuple(to_complex(a) * scalar for a in self.coeffs))

    __rmul__ = __mul__

    def to_complex(self) -> "FirstOrderOperator":
        return FirstOrderOperator(self.spec, tuple(to_complex(a) for a in self.coeffs))

    def embed(self, spec: SpaceSpec, tol: float | None = None) -> "FirstOrderOperator":
        """Re-express on another space; dropped variables must carry zero coefficients."""
        z = ZERO if self.exact else 0j
        coeffs = [z] * spec.dim
        for i, var in enumerate(self.spec.variables):
            b, g = self.coeffs[2 * i], self.coeffs[2 * i + 1]
            if spec.has(*var):
                j = spec.index(*var)
                coeffs[2 * j], coeffs[2 * j + 1] = b, g
            elif not (is_zero(b, tol) and is_zero(g, tol)):
                raise StructuralError(f"operator has support on {var}, absent from target space")
        return FirstOrderOperator(spec, tuple(coeffs))

    def terms(self) -> dict[str, Any]:
        out = {}
        for i, (t, s) in enumerate(self.spec.variables):
            for kind, c in ((DERIVATIVE, self.coeffs[2 * i]), (MULTIPLICATION, self.coeffs[2 * i + 1])):
                if not is_zero(c, 0.0):
                    out[FaceVariable(t, s, kind).name] = format_scalar(c)
        return out

    def __repr__(self) -> str:
        parts = [f"{v}*{k}" for k, v in self.terms().items()]
        return "FirstOrderOperator(" + (" + ".join(parts) or "0") + ")"


def commutator(d: FirstOrderOperator, d2: FirstOrderOperator):
    """Full commutator [d, d2] = sum over variables of beta*gamma' - gamma*beta'."""
    d._check(d2)
    s = ZERO if (d.exact and d2.exact) else 0j
    c1, c2 = d.coeffs, d2.coeffs
    for k in range(0, len(c1), 2):
        s += c1[k] * c2[k + 1] - c1[k + 1] * c2[k]
    return s


def partial_commutator(d: FirstOrderOperator, d2: FirstOrderOperator, tetra: Any):
    d._check(d2)
    s = ZERO if (d.exact and d2.exact) else 0j
    for i in d.spec.face_variables(tetra):
        k = 2 * i
        s += d.coeffs[k] * d2.coeffs[k + 1] - d.coeffs[k + 1] * d2.coeffs[k]
    return s


class OperatorSubspace:
    """Span of a finite list of operators on one space."""

    def __init__(self, spec: SpaceSpec, operators: Iterable[FirstOrderOperator], tol: float | None = None):
        self.spec = spec
        self.operators = tuple(operators)
        for op in self.operators:
            if op.spec != spec:
                raise StructuralError("operator does not belong to the subspace's space")
        self.tol = tol
        self._rank = None

    @property
    def exact(self) -> bool:
        return all(op.exact for op in self.operators)

    def matrix(self) -> list[list]:
        if self.exact:
            return [list(op.coeffs) for op in self.operators]
        return [[to_complex(c) for c in op.coeffs] for op in self.operators]

    @property
    def rank(self) -> int:
        if self._rank is None:
            self._rank = linalg.rank(self.matrix(), self.tol) if self.operators else 0
        return self._rank

    def __len__(self) -> int:
        return len(self.operators)

    def basis(self) -> "OperatorSubspace":
        keep = linalg.independent_rows(self.matrix(), self.tol)
        return OperatorSubspace(self.spec, [self.operators[i] for i in keep], self.tol)

    def is_isotropic(self, tol: float | None = None) -> bool:
        ops = self.operators
        tol = self.tol if tol is None else tol
        for a in range(len(ops)):
            for b in range(a + 1, len(ops)):
                if not is_zero(commutator(ops[a], ops[b]), tol):
                    return False
        return True

    def contains(self, op: FirstOrderOperator, tol: float | None = None) -> bool:
        if op.spec != self.spec:
            raise StructuralError("operator does not belong to the subspace's space")
        tol = self.tol if tol is None else tol
        rows = self.matrix()
        vec = list(op.coeffs) if (self.exact and op.exact) else [to_complex(c) for c in op.coeffs]
        if not (self.exact and op.exact):
            rows = [[to_complex(c) for c in r] for r in rows]
        return linalg.row_space_contains(rows, vec, tol)

    def pure_multiplication(self) -> "OperatorSubspace":
        """Elements of the span with no derivative part."""
        rows = self.matrix()
        if not rows:
            return OperatorSubspace(self.spec, [], self.tol)
        betas = [r[0::2] for r in rows]
        combos = linalg.left_nullspace(betas, self.tol)
        ops = []
        for c in combos:
            vec = [sum((ci * r[k] for ci, r in zip(c, rows) if not is_zero(ci, 0.0)), ZERO if self.exact else 0j)
                   for k in range(self.spec.dim)]
            op = FirstOrderOperator(self.spec, tuple(vec))
            if not op.is_zero(self.tol):
                ops.append(op)
        return OperatorSubspace(self.spec, ops, self.tol).basis()

    def to_complex(self) -> "OperatorSubspace":
        return OperatorSubspace(self.spec, [op.to_complex() for op in self.operators], self.tol)

    def embed(self, spec: SpaceSpec) -> "OperatorSubspace":
        return OperatorSubspace(spec, [op.embed(spec, self.tol) for op in self.operators], self.tol)

    def __repr__(self) -> str:
        return f"OperatorSubspace(n_ops={len(self.operators)}, rank={self.rank}, dim={self.spec.dim})"


def subspace_rank(s: OperatorSubspace) -> int:
    return s.rank


def is_lagrangian(s: OperatorSubspace, spec: SpaceSpec | None = None, tol: float | None = None) -> bool:
    spec = s.spec if spec is None else spec
    if spec != s.spec:
        raise StructuralError("subspace lives on a different space")
    return s.rank * 2 == spec.dim and s.is_isotropic(tol)


def subspaces_equal(a: OperatorSubspace, b: OperatorSubspace, tol: float = DEFAULT_TOL) -> bool:
    if a.spec != b.spec:
        raise StructuralError("subspaces live on different spaces")
    if a.exact and b.exact:
        ra, rb = a.rank, b.rank
        return ra == rb and linalg.rank(a.matrix() + b.matrix()) == ra
    return subspace_distance(a, b, tol) < tol


def subspace_distance(a: OperatorSubspace, b: OperatorSubspace, tol: float = DEFAULT_TOL,
                      dim: int | None = None) -> float:
    """Largest singular value of the residual of projecting each basis onto the other.

    Returns ``inf`` when the (numerical) dimensions differ.  Pass ``dim`` when
    the common dimension is known (e.g. from an exact rank), so badly scaled
    bases are not truncated by the rank threshold.
    """
    qa, qb = (_row_basis(s, tol, dim) for s in (a, b))
    if qa.shape[0] != qb.shape[0]:
        return float("inf")
    if qa.shape[0] == 0:
        return 0.0
    res_b = qb - (qb @ qa.conj().T) @ qa
    res_a = qa - (qa @ qb.conj().T) @ qb
    return float(max(np.linalg.norm(res_b, 2), np.linalg.norm(res_a, 2)))


def _row_basis(s: OperatorSubspace, tol: float, dim: int | None) -> np.ndarray:
    m = linalg.as_numpy(s.matrix(), s.spec.dim)
    if m.size:
        norms = np.linalg.norm(m, axis=1)
        m = m[norms > 0] / norms[norms > 0, None]
    if dim is None:
        return linalg.orthonormal_row_basis(m, tol)
    if m.shape[0] < dim:
        return m[:0]
    return np.linalg.svd(m, full_matrices=False)[2][:dim]


def symplectic_form(size: int, exact_mode: bool = True):
    """Block diagonal J with blocks [[0, 1], [-1, 0]]."""
    if size % 2:
        raise StructuralError("symplectic blocks have even size")
    if exact_mode:
        j = linalg.zeros(size, size)
        for k in range(0, size, 2):
            j[k][k + 1] = ONE
            j[k + 1][k] = -ONE
        return j
    j = np.zeros((size, size), dtype=complex)
    for k in range(0, size, 2):
        j[k, k + 1] = 1
        j[k + 1, k] = -1
    return j


def symplectic_defect(block, tol: float | None = None) -> float:
    """max |M^T J M - J| (0 for an exact symplectic block)."""
    if isinstance(block, np.ndarray) or not linalg.is_exact_matrix(block):
        m = np.asarray(linalg.as_numpy(block) if not isinstance(block, np.ndarray) else block, dtype=complex)
        j = symplectic_form(m.shape[0], False)
        return float(np.max(np.abs(m.T @ j @ m - j)))
    j = symplectic_form(len(block))
    prod = linalg.matmul(linalg.matmul(linalg.transpose(block), j), block)
    return 0.0 if prod == j else float(max(abs(to_complex(a - b)) for ra, rb in zip(prod, j) for a, b in zip(ra, rb)))


def is_symplectic(block, tol: float = DEFAULT_TOL) -> bool:
    """Exact blocks must satisfy M^T J M = J exactly; float blocks up to a
    defect relative to |M|^2, since rounding in M^T J M scales that way."""
    if isinstance(block, np.ndarray) or not linalg.is_exact_matrix(block):
        m = np.asarray(linalg.as_numpy(block) if not isinstance(block, np.ndarray) else block, dtype=complex)
        return symplectic_defect(m) < tol * max(1.0, float(np.max(np.abs(m))) ** 2)
    return symplectic_defect(block) == 0.0


class BlockGaugeTransform:
    """One symplectic block per face, acting on the per-face coefficient vector."""

    def __init__(self, blocks: Mapping[Any, Any], tol: float = DEFAULT_TOL, check: bool = True):
        self.blocks = {}
        for t, m in blocks.items():
            if isinstance(m, np.ndarray):
                m = np.asarray(m, dtype=complex)
            elif linalg.is_exact_matrix(m):
                m = linalg.as_exact(m)
            else:
                m = np.asarray(linalg.as_numpy(m), dtype=complex)
            if check and not is_symplectic(m, tol):
                raise PreconditionError(f"block for face {simplex_label(simplex(t))} is not symplectic")
            self.blocks[simplex(t)] = m
        self.tol = tol

    @property
    def exact(self) -> bool:
        return not any(isinstance(m, np.ndarray) for m in self.blocks.values())

    @classmethod
    def identity(cls, spec: SpaceSpec) -> "BlockGaugeTransform":
        return cls({t: linalg.identity(len(spec.face_coordinates(t))) for t in spec.faces})

    def apply(self, op: FirstOrderOperator) -> FirstOrderOperator:
        exact_mode = self.exact and op.exact
        coeffs = list(op.coeffs) if exact_mode else [to_complex(c) for c in op.coeffs]
        for t in op.spec.faces:
            if t not in self.blocks:
                raise PreconditionError(f"no gauge block for face {simplex_label(t)}")
            idx = op.spec.face_coordinates(t)
            block = self.blocks[t]
            if len(block) != len(idx):
                raise StructuralError(f"block size mismatch on face {simplex_label(t)}")
            vec = [coeffs[i] for i in idx]
            if exact_mode:
                new = linalg.matvec(block, vec)
            else:
                new = list(np.asarray(linalg.as_numpy(block) if not isinstance(block, np.ndarray) else block) @ np.array(vec))
            for i, v in zip(idx, new):
                coeffs[i] = v if exact_mode else complex(v)
        return FirstOrderOperator(op.spec, tuple(coeffs))

    def compose(self, other: "BlockGaugeTransform") -> "BlockGaugeTransform":
        """self after other."""
        blocks = {}
        for t, m in self.blocks.items():
            o = other.blocks[t]
            if self.exact and other.exact:
                blocks[t] = linalg.matmul(m, o)
            else:
                a = m if isinstance(m, np.ndarray) else linalg.as_numpy(m)
                b = o if isinstance(o, np.ndarray) else linalg.as_numpy(o)
                blocks[t] = a @ b
        return BlockGaugeTransform(blocks, self.tol, check=False)


def apply_gauge(g: BlockGaugeTransform, s: OperatorSubspace) -> OperatorSubspace:
    return OperatorSubspace(s.spec, [g.apply(op) for op in s.operators], s.tol)


def random_symplectic_block(size: int, rng: random.Random, steps: int = 4) -> list[list[GaussianRational]]:
    """Exact random symplectic matrix: a product of rational transvections
    w -> w + c <w, v> v."""
    j = symplectic_form(size)
    m = linalg.identity(size)
    for _ in range(steps):
        v = [random_rational(rng, 5) for _ in range(size)]
        c = random_nonzero_rational(rng, 5)
        jv = linalg.matvec(j, v)
        t = [[(ONE if a == b else ZERO) + c * v[a] * jv[b] for b in range(size)] for a in range(size)]
        m = linalg.matmul(t, m)
    return m


def random_gauge(spec: SpaceSpec, rng: random.Random, steps: int = 4) -> BlockGaugeTransform:
    return BlockGaugeTransform(
        {t: random_symplectic_block(len(spec.face_coordinates(t)), rng, steps) for t in spec.faces}
    )


def random_operator(spec: SpaceSpec, rng: random.Random, support: Sequence[Any] | None = None) -> FirstOrderOperator:
    faces = spec.faces if support is None else [simplex(t) for t in support]
    keep = {c for t in faces for c in spec.face_coordinates(t)}
    return FirstOrderOperator(spec, tuple(random_rational(rng) if i in keep else ZERO for i in range(spec.dim)))
