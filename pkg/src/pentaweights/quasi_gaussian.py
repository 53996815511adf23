"""Quasi-Gaussian weights ``const * prod delta(l_i(x)) * exp(A(x))`` and their
formal integrals.

The exponent is stored through its Hessian ``H`` (``A(x) = x^T H x / 2``), so
the Gaussian ``exp(-x^T F x / 2)`` has ``H = -F``.  On construction ``H`` is
reduced modulo the delta forms: the forms are brought to reduced row echelon
form in variable order, the pivot variables are eliminated on the delta
locus, and ``H`` is replaced by the pulled-back form on the free variables.
After that reduction two weights agree up to a constant iff their echelon
forms and Hessians coincide.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from . import linalg
from .errors import (
    DependentDeltasError,
    DivergentIntegralError,
    NonRepresentableError,
    PreconditionError,
    StructuralError,
)
from .scalars import (
    DEFAULT_TOL,
    I_UNIT,
    ONE,
    ZERO,
    exact,
    format_scalar,
    is_zero,
    random_rational,
    to_complex,
)
from .symplectic import (
    FaceVariable,
    FirstOrderOperator,
    OperatorSubspace,
    SpaceSpec,
    is_lagrangian,
    simplex,
)


@dataclass(frozen=True)
class WeightConstant:
    """Overall factor of a weight.  When ``sign_defined`` is False the value
    is only meaningful up to a sign (a square root or a delta elimination
    has been taken)."""

    value: complex = 1 + 0j
    sign_defined: bool = True

    def times(self, factor: complex, sign_defined: bool = True) -> "WeightConstant":
        return WeightConstant(self.value * complex(factor), self.sign_defined and sign_defined)

    def __mul__(self, other: "WeightConstant") -> "WeightConstant":
        return WeightConstant(self.value * other.value, self.sign_defined and other.sign_defined)

    def compare(self, other: "WeightConstant", tol: float = DEFAULT_TOL) -> str | None:
        """``"exact"`` if equal, ``"sign"`` if equal up to sign, else None."""
        a, b = complex(self.value), complex(other.value)
        scale = max(1.0, abs(a), abs(b))
        if abs(a - b) <= tol * scale:
            return "exact"
        if abs(a + b) <= tol * scale:
            return "sign"
        return None


@dataclass(frozen=True)
class LinearForm:
    spec: SpaceSpec
    coeffs: tuple

    def as_operator(self) -> FirstOrderOperator:
        zero = ZERO if linalg.is_exact_matrix([self.coeffs]) else 0j
        vec = []
        for c in self.coeffs:
            vec += [zero, c]
        return FirstOrderOperator(self.spec, tuple(vec))

    def __repr__(self) -> str:
        terms = [f"{format_scalar(c)}*{name}" for c, name in zip(self.coeffs, self.spec.variable_names())
                 if not is_zero(c, 0.0)]
        return "LinearForm(" + " + ".join(terms) + ")"


@dataclass(frozen=True)
class QuadraticForm:
    """``A(x) = x^T H x / 2`` with symmetric ``H``."""

    spec: SpaceSpec
    hessian: tuple

    def coefficient(self, u: int, v: int):
        """Coefficient of the monomial x_u x_v (u may equal v)."""
        h = self.hessian[u][v]
        return h / 2 if u == v else h

    def __call__(self, point: Sequence) -> Any:
        return linalg.dot(point, linalg.matvec([list(r) for r in self.hessian], point)) / 2


def _exact_mode(*mats) -> bool:
    return all(linalg.is_exact_matrix(m) for m in mats)


def _freeze(m) -> tuple:
    return tuple(tuple(r) for r in m)


def _delta_parameterization(forms: list[list], n: int, tol: float | None, exact_mode: bool | None = None):
    """Echelon form of the delta forms and the matrix P (n x free) with x = P y
    parameterizing their common zero set by the free variables y."""
    if exact_mode is None:
        exact_mode = _exact_mode(forms)
    zero, one = (ZERO, ONE) if exact_mode else (0j, 1 + 0j)
    red, pivots = linalg.rref(forms, n, tol) if forms else ([], [])
    free = [c for c in range(n) if c not in pivots]
    p = [[zero] * len(free) for _ in range(n)]
    for k, f in enumerate(free):
        p[f][k] = one
        for i, piv in enumerate(pivots):
            p[piv][k] = -red[i][f]
    return red, pivots, free, p


class QuasiGaussianWeight:
    """``constant * prod delta(forms) * exp(x^T H x / 2)`` over ``spec.variables``."""

    def __init__(self, spec: SpaceSpec, deltas: Iterable[Sequence] = (), hessian: Sequence[Sequence] | None = None,
                 constant: WeightConstant = WeightConstant(), tol: float | None = None):
        n = spec.n
        deltas = [list(d.coeffs if isinstance(d, LinearForm) else d) for d in deltas]
        for d in deltas:
            if len(d) != n:
                raise StructuralError("delta form does not match the space")
        if hessian is None:
            hessian = linalg.zeros(n, n)
        hessian = [list(r) for r in hessian]
        if len(hessian) != n or any(len(r) != n for r in hessian):
            raise StructuralError("Hessian does not match the space")
        exact_mode = _exact_mode(deltas, hessian)
        if exact_mode:
            deltas = [[exact(c) for c in d] for d in deltas]
            hessian = linalg.as_exact(hessian)
        else:
            deltas = [[to_complex(c) for c in d] for d in deltas]
            hessian = [[to_complex(c) for c in r] for r in hessian]
        for i in range(n):
            for j in range(i):
                if not is_zero(hessian[i][j] - hessian[j][i], 0.0 if exact_mode else tol):
                    raise PreconditionError("Hessian is not symmetric")
        self.spec = spec
        self.tol = tol
        self.constant = constant
        self.exact = exact_mode
        red, pivots, free, p = _delta_parameterization(deltas, n, tol, exact_mode)
        if len(pivots) != len(deltas):
            raise DependentDeltasError("product of delta functions of linearly dependent arguments")
        self.deltas = _freeze(deltas)
        self._echelon = _freeze(red)
        self._pivots = tuple(pivots)
        self._free = tuple(free)
        reduced = linalg.matmul(linalg.matmul(linalg.transpose(p), hessian), p) if free else []
        zero = ZERO if exact_mode else 0j
        full = [[zero] * n for _ in range(n)]
        for a, fa in enumerate(free):
            for b, fb in enumerate(free):
                full[fa][fb] = reduced[a][b]
        if not exact_mode:
            full = [[0j if abs(c) <= (DEFAULT_TOL if tol is None else tol) * 1e-3 else c for c in r] for r in full]
        self.hessian = _freeze(full)

    # -- views ---------------------------------------------------------------

    @property
    def delta_forms(self) -> list[LinearForm]:
        return [LinearForm(self.spec, d) for d in self.deltas]

    @property
    def quad(self) -> QuadraticForm:
        return QuadraticForm(self.spec, self.hessian)

    @property
    def n_deltas(self) -> int:
        return len(self.deltas)

    def echelon_deltas(self) -> tuple:
        return self._echelon

    def variable_index(self, v: Any) -> int:
        if isinstance(v, FaceVariable):
            if v.kind != "multiplication":
                raise StructuralError("integration variables are multiplication slots")
            return self.spec.index(v.tetra, v.slot)
        if isinstance(v, tuple) and len(v) == 2 and not isinstance(v[0], int):
            return self.spec.index(*v)
        return self.spec.index(v, 0)

    def mentions(self, k: int) -> bool:
        tol = None if self.exact else self.tol
        return (any(not is_zero(d[k], tol) for d in self.deltas)
                or any(not is_zero(h, tol) for h in self.hessian[k]))

    def with_constant(self, constant: WeightConstant) -> "QuasiGaussianWeight":
        return QuasiGaussianWeight(self.spec, self.deltas, self.hessian, constant, self.tol)

    def scaled(self, factor: complex) -> "QuasiGaussianWeight":
        return self.with_constant(self.constant.times(factor))

    def reordered(self, spec: SpaceSpec) -> "QuasiGaussianWeight":
        """Same weight over a permutation of its variables."""
        if set(spec.variables) != set(self.spec.variables):
            raise StructuralError("reordering must keep the same variables")
        perm = [self.spec.index(*v) for v in spec.variables]
        deltas = [[d[i] for i in perm] for d in self.deltas]
        hess = [[self.hessian[i][j] for j in perm] for i in perm]
        return QuasiGaussianWeight(spec, deltas, hess, self.constant, self.tol)

    def embed(self, spec: SpaceSpec) -> "QuasiGaussianWeight":
        """Regard the weight as a function on a larger set of variables."""
        missing = set(self.spec.variables) - set(spec.variables)
        if missing:
            raise StructuralError(f"target space lacks variables {sorted(missing)}")
        zero = ZERO if self.exact else 0j
        pos = [self.spec._index.get(v) for v in spec.variables]
        deltas = [[zero if i is None else d[i] for i in pos] for d in self.deltas]
        hess = [[zero if (i is None or j is None) else self.hessian[i][j] for j in pos] for i in pos]
        return QuasiGaussianWeight(spec, deltas, hess, self.constant, self.tol)

    def to_complex(self) -> "QuasiGaussianWeight":
        return QuasiGaussianWeight(self.spec, [[to_complex(c) for c in d] for d in self.deltas],
                                   [[to_complex(c) for c in r] for r in self.hessian], self.constant,
                                   self.tol or DEFAULT_TOL)

    def to_dict(self) -> dict:
        names = self.spec.variable_names()
        quad = {}
        for i in range(self.spec.n):
            for j in range(i, self.spec.n):
                c = self.quad.coefficient(i, j)
                if not is_zero(c, 0.0):
                    quad[f"{names[i]}*{names[j]}"] = format_scalar(c)
        return {
            "variables": names,
            "deltas": [{names[k]: format_scalar(c) for k, c in enumerate(row) if not is_zero(c, 0.0)}
                       for row in self._echelon],
            "exponent": quad,
            "constant": format_scalar(self.constant.value),
            "constant_sign_defined": self.constant.sign_defined,
        }

    def __repr__(self) -> str:
        return (f"QuasiGaussianWeight(n_vars={self.spec.n}, n_deltas={self.n_deltas}, "
                f"constant={self.constant.value:.6g})")


def gaussian_from_matrix(F: Sequence[Sequence], spec: SpaceSpec) -> QuasiGaussianWeight:
    """``exp(-x^T F x / 2)``; rows of F follow ``spec.variables``."""
    n = spec.n
    if len(F) != n or any(len(r) != n for r in F):
        raise StructuralError(f"matrix must be {n}x{n} for this space")
    exact_mode = linalg.is_exact_matrix(F)
    F = linalg.as_exact(F) if exact_mode else [[to_complex(c) for c in r] for r in F]
    for i in range(n):
        for j in range(i):
            if not is_zero(F[i][j] - F[j][i], 0.0 if exact_mode else None):
                raise PreconditionError("F is not symmetric")
    return QuasiGaussianWeight(spec, [], [[-c for c in r] for r in F])


def lagrangian_of(F: Sequence[Sequence], spec: SpaceSpec) -> OperatorSubspace:
    """Span of d/dx_t + sum_t' F_tt' x_t', the annihilator of exp(-x^T F x / 2)."""
    exact_mode = linalg.is_exact_matrix(F)
    F = linalg.as_exact(F) if exact_mode else [[to_complex(c) for c in r] for r in F]
    zero, one = (ZERO, ONE) if exact_mode else (0j, 1 + 0j)
    ops = []
    for t in range(spec.n):
        vec = []
        for j in range(spec.n):
            vec += [one if j == t else zero, F[t][j]]
        ops.append(FirstOrderOperator(spec, tuple(vec)))
    return OperatorSubspace(spec, ops)


def delta_weight(spec: SpaceSpec, forms: Iterable[Sequence]) -> QuasiGaussianWeight:
    return QuasiGaussianWeight(spec, forms)


def multiply(w1: QuasiGaussianWeight, w2: QuasiGaussianWeight) -> QuasiGaussianWeight:
    """Product of weights; the variables are the sorted union of both."""
    if w1.spec == w2.spec:
        spec = w1.spec
    else:
        spec = w1.spec.union(w2.spec)
        w1, w2 = w1.embed(spec), w2.embed(spec)
    deltas = list(w1.deltas) + list(w2.deltas)
    hess = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(w1.hessian, w2.hessian)]
    return QuasiGaussianWeight(spec, deltas, hess, w1.constant * w2.constant, w1.tol or w2.tol)


def integrate(w: QuasiGaussianWeight, v: Any) -> QuasiGaussianWeight:
    """Formal integral over one variable.

    Rules, in order: eliminate through a delta containing ``v`` (factor
    1/a for leading coefficient a), complete the square when the exponent
    has a v^2 term (factor sqrt(pi/a) for exp(-a v^2), principal branch),
    otherwise turn exp(v * l(rest)) into 2 pi delta(i l(rest)).
    """
    k = w.variable_index(v)
    n = w.spec.n
    tol = None if w.exact else (w.tol or DEFAULT_TOL)
    zero = ZERO if w.exact else 0j
    rest = [i for i in range(n) if i != k]
    new_spec = w.spec.without(*w.spec.variables[k])
    holders = [i for i, d in enumerate(w.deltas) if not is_zero(d[k], tol)]

    if holders:
        if w.exact:
            j = holders[0]
        else:
            j = max(holders, key=lambda i: abs(w.deltas[i][k]))
        lead = w.deltas[j]
        a = lead[k]
        # x_v = -(1/a) * sum_{r != v} lead[r] x_r ; T maps remaining vars to all vars
        t = [[zero] * (n - 1) for _ in range(n)]
        for col, r in enumerate(rest):
            t[r][col] = ONE if w.exact else 1 + 0j
            t[k][col] = -lead[r] / a
        deltas = [[linalg.dot(d, [t[i][col] for i in range(n)]) for col in range(n - 1)]
                  for i_d, d in enumerate(w.deltas) if i_d != j]
        hess = linalg.matmul(linalg.matmul(linalg.transpose(t), [list(r) for r in w.hessian]), t)
        const = w.constant.times(1 / to_complex(a), sign_defined=False)
        return QuasiGaussianWeight(new_spec, deltas, hess, const, w.tol)

    h = w.hessian[k][k]
    deltas = [[d[i] for i in rest] for d in w.deltas]
    if not is_zero(h, tol):
        hess = [[w.hessian[r][c] - w.hessian[r][k] * w.hessian[k][c] / h for c in rest] for r in rest]
        # exp(h v^2 / 2) = exp(-a v^2) with a = -h/2
        a = -to_complex(h) / 2
        const = w.constant.times(cmath.sqrt(math.pi / a), sign_defined=False)
        return QuasiGaussianWeight(new_spec, deltas, hess, const, w.tol)

    g = [w.hessian[k][r] for r in rest]
    if linalg.is_zero_vector(g, tol):
        raise DivergentIntegralError(
            f"integral of the form int const d{FaceVariable(*w.spec.variables[k]).name}")
    i_unit = I_UNIT if w.exact else 1j
    deltas.append([i_unit * c for c in g])
    hess = [[w.hessian[r][c] for c in rest] for r in rest]
    const = w.constant.times(2 * math.pi)
    return QuasiGaussianWeight(new_spec, deltas, hess, const, w.tol)


def integrate_all(w: QuasiGaussianWeight, variables: Iterable[Any]) -> QuasiGaussianWeight:
    for v in variables:
        w = integrate(w, v)
    return w


def annihilator_subspace(w: QuasiGaussianWeight) -> OperatorSubspace:
    """The Lagrangian subspace of first-order operators annihilating ``w``:
    each delta form as a multiplication operator, plus ``D_k - (D_k A)(x)``
    for every direction k along the delta locus."""
    n = w.spec.n
    tol = None if w.exact else (w.tol or DEFAULT_TOL)
    zero = ZERO if w.exact else 0j
    ops = [LinearForm(w.spec, d).as_operator() for d in w.deltas]
    rows = [list(d) for d in w.deltas]
    if rows:
        kernel = linalg.nullspace(rows, n, tol)
    else:
        kernel = linalg.identity(n) if w.exact else [list(r) for r in np.eye(n, dtype=complex)]
    hess = [list(r) for r in w.hessian]
    for kvec in kernel:
        kvec = list(kvec)
        hk = linalg.matvec(hess, kvec)
        vec = []
        for j in range(n):
            vec += [kvec[j], -hk[j] if not is_zero(hk[j], 0.0) else zero]
        ops.append(FirstOrderOperator(w.spec, tuple(vec)))
    return OperatorSubspace(w.spec, ops, w.tol)


def weight_from_lagrangian(s: OperatorSubspace, tol: float | None = None) -> QuasiGaussianWeight:
    """Weight (constant 1, sign undefined) annihilated exactly by ``s``."""
    tol = tol if tol is not None else s.tol
    if not is_lagrangian(s, tol=tol):
        raise PreconditionError("subspace is not Lagrangian")
    spec = s.spec
    n = spec.n
    basis = s.basis()
    rows = basis.matrix()
    exact_mode = basis.exact
    betas = [r[0::2] for r in rows]
    gammas = [r[1::2] for r in rows]
    combos = linalg.left_nullspace(betas, tol)
    zero = ZERO if exact_mode else 0j
    deltas = []
    for c in combos:
        form = [zero] * n
        for ci, g in zip(c, gammas):
            if not is_zero(ci, 0.0):
                form = [f + ci * x for f, x in zip(form, g)]
        deltas.append(form)
    _, pivots, free, p = _delta_parameterization(deltas, n, tol, exact_mode)
    if len(pivots) != len(deltas):
        raise NonRepresentableError("multiplication part is degenerate")
    chosen = linalg.independent_rows(betas, tol)
    if len(chosen) != len(free):
        raise NonRepresentableError("derivative part does not match the delta locus")
    # beta_j = P c_j with c_j = beta_j restricted to the free variables
    c_mat = [[betas[j][f] for j in chosen] for f in free]
    pt_gamma = [[linalg.dot([p[i][a] for i in range(n)], gammas[j]) for j in chosen] for a in range(len(free))]
    try:
        if exact_mode:
            c_inv = linalg.inverse(c_mat)
            reduced = [[-x for x in r] for r in linalg.matmul(pt_gamma, c_inv)]
        else:
            reduced = (-(linalg.as_numpy(pt_gamma) @ np.linalg.inv(linalg.as_numpy(c_mat)))).tolist()
    except (ZeroDivisionError, np.linalg.LinAlgError):
        raise NonRepresentableError("derivative part cannot be triangularized") from None
    hess = [[zero] * n for _ in range(n)]
    for a, fa in enumerate(free):
        for b, fb in enumerate(free):
            hess[fa][fb] = reduced[a][b]
    if not exact_mode:
        hess = [[(x + y) / 2 for x, y in zip(r, c)] for r, c in zip(hess, zip(*hess))]
    return QuasiGaussianWeight(spec, deltas, hess, WeightConstant(1 + 0j, sign_defined=False), tol)


def equal_up_to_constant(w1: QuasiGaussianWeight, w2: QuasiGaussianWeight, tol: float = DEFAULT_TOL) -> bool:
    """Same delta span and same reduced exponent; compared in sorted variable order."""
    if set(w1.spec.variables) != set(w2.spec.variables):
        return False
    spec = w1.spec.sorted()
    a, b = w1.reordered(spec), w2.reordered(spec)
    exact_mode = a.exact and b.exact
    if not exact_mode:
        a, b = a.to_complex(), b.to_complex()
    if len(a.deltas) != len(b.deltas):
        return False
    if exact_mode:
        return a.echelon_deltas() == b.echelon_deltas() and a.hessian == b.hessian
    ea, eb = np.array(a.echelon_deltas(), dtype=complex), np.array(b.echelon_deltas(), dtype=complex)
    ha, hb = np.array(a.hessian, dtype=complex), np.array(b.hessian, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(ha), initial=0.0)), float(np.max(np.abs(hb), initial=0.0)))
    return (ea.shape == eb.shape and (ea.size == 0 or np.max(np.abs(ea - eb)) < tol)
            and np.max(np.abs(ha - hb), initial=0.0) < tol * scale)


def weight_from_forms(spec: SpaceSpec, deltas: Iterable[dict], exponent_factors: tuple[dict, dict] | None = None,
                      ) -> QuasiGaussianWeight:
    """Build ``prod delta(l_i) * exp(-p(x) q(x))`` from forms given as
    ``{tetra_label: coefficient}`` dicts on single-boson variables."""
    def vec(d: dict) -> list:
        out = [ZERO] * spec.n
        for t, c in d.items():
            out[spec.index(simplex(t), 0)] += exact(c)
        return out

    forms = [vec(d) for d in deltas]
    hess = linalg.zeros(spec.n, spec.n)
    if exponent_factors is not None:
        p, q = (vec(d) for d in exponent_factors)
        for i in range(spec.n):
            for j in range(spec.n):
                hess[i][j] = -(p[i] * q[j] + q[i] * p[j])
    return QuasiGaussianWeight(spec, forms, hess)


def random_weight(spec: SpaceSpec, rng: random.Random, n_deltas: int = 0, bound: int = 9) -> QuasiGaussianWeight:
    """Exact weight with ``n_deltas`` random independent deltas and a random
    symmetric exponent; dependent delta draws are redrawn."""
    n = spec.n
    if n_deltas > n:
        raise PreconditionError("more deltas than variables")
    while True:
        forms = [[random_rational(rng, bound) for _ in range(n)] for _ in range(n_deltas)]
        if linalg.rank(forms) == n_deltas:
            break
    hess = linalg.zeros(n, n)
    for i in range(n):
        for j in range(i, n):
            hess[i][j] = hess[j][i] = random_rational(rng, bound)
    return QuasiGaussianWeight(spec, forms, hess)
