import random
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pentaweights import one_boson as ob
from pentaweights import two_boson as tb
from pentaweights.complexes import STANDARD
from pentaweights.errors import ExcludedCocycleValueError, NonGenericError, PreconditionError
from pentaweights.linalg import det, nullspace, rank
from pentaweights.quasi_gaussian import annihilator_subspace
from pentaweights.scalars import ONE, ZERO, exact, random_nonzero_rational, to_complex
from pentaweights.symplectic import FirstOrderOperator, apply_gauge, partial_commutator, random_gauge

V5 = range(1, 6)


def chain(values: dict) -> tb.OneChain:
    return tb.OneChain({tuple(int(c) for c in k): exact(v) for k, v in values.items()})


def unit_chain(vertices=V5) -> tb.OneChain:
    return tb.OneChain.constant(vertices)


def random_chain(seed, vertices=V5) -> tb.OneChain:
    return tb.random_admissible_chain(vertices, random.Random(seed))[0]


def random_F(seed):
    return ob.random_symmetric_matrix(random.Random(seed), 10)


@pytest.fixture(scope="module")
def structure():
    return tb.EdgeStructure(random_F(11))


# -- cochains ------------------------------------------------------------------


def test_coboundary_of_constant_chain():
    omega = unit_chain().coboundary()
    assert all(v == ONE for v in omega.values.values())


def test_odd_orientation_inverts_cocycle():
    omega = random_chain(3).coboundary()
    assert omega[(2, 1, 3)] == ONE / omega[(1, 2, 3)]


def test_standard_chain_of_trivial_cocycle():
    nu = tb.standard_nu(unit_chain().coboundary())
    assert all(v == ONE for v in nu.values.values())


def test_standard_chain_reads_first_vertex_triangles():
    omega = random_chain(5).coboundary()
    assert tb.standard_nu(omega)[(2, 3)] == omega[(1, 2, 3)]


@given(st.integers(0, 2**32))
def test_standard_chain_is_a_primitive(seed):
    omega = random_chain(seed).coboundary()
    nu = tb.standard_nu(omega)
    for s, value in nu.coboundary().values.items():
        assert value == omega[s]


def test_excluded_value_detected():
    # nu_23 nu_34 + nu_24 = 0 means the coboundary on 234 is -1
    nu = chain({"12": 1, "13": 2, "14": 3, "15": 5, "23": 1, "24": -1, "25": 7, "34": 1, "35": 2, "45": 3})
    assert (2, 3, 4) in nu.excluded_triangles()
    with pytest.raises(ExcludedCocycleValueError):
        tb.component_table(nu, (1, 2, 3, 4))


# -- delta weights -------------------------------------------------------------


def test_xi_column_for_unit_chain():
    table = tb.component_table(unit_chain(), (1, 2, 3, 4))
    assert [table.xi[e] for e in table.edges] == [exact(c) for c in (0, 2, -2, -2, 2, 0)]


@given(st.integers(0, 2**32))
def test_components_satisfy_vertex_relations(seed):
    nu = random_chain(seed)
    for t in STANDARD.faces:
        table = tb.component_table(nu, t)
        for row in tb.dependency_rows(nu, t):
            for col in (table.xi, table.eta):
                assert sum((r * col[e] for r, e in zip(row, table.edges)), ZERO) == ZERO


def product_minor(nu):
    n = lambda a, b: nu[(a, b)]  # noqa: E731
    return (n(1, 3) ** 2 * (n(1, 2) * n(2, 3) + n(1, 3)) ** 2 * (n(1, 2) * n(2, 4) + n(1, 4))
            * (n(2, 3) * n(3, 4) + n(2, 4)) * (n(2, 3) * n(3, 5) + n(2, 5)))


def test_unit_chain_minor():
    assert tb.bottom_right_minor(unit_chain()) == exact(32)


@given(st.integers(0, 2**32))
def test_minor_matches_product_formula(seed):
    nu = random_chain(seed)
    assert rank(tb.delta_matrix(nu)) == 5
    assert tb.bottom_right_minor(nu) == product_minor(nu)


def test_derivatives_along_delta_locus_annihilate():
    nu = random_chain(8)
    w = tb.build_delta_weight(nu)
    ann = annihilator_subspace(w)
    spec = w.spec
    for c in nullspace(tb.delta_matrix(nu), spec.n):
        op = FirstOrderOperator.zero(spec)
        for k, coeff in enumerate(c):
            op = op + FirstOrderOperator.d(spec, *spec.variables[k], coeff=coeff)
        assert ann.contains(op)


# -- edge spaces, dependencies, holonomies -------------------------------------


def test_edge_spaces_have_rank_two(structure):
    for edge, pair in structure.pairs.items():
        assert pair.subspace.rank == 2


def test_edge_space_support(structure):
    assert set(structure.pair(1, 2).subspace.operators[0].support()) <= {(1, 2, 3, 4), (1, 2, 3, 5), (1, 2, 4, 5)}
    for op in structure.pair(1, 2).subspace.operators:
        assert set(op.support()) <= {(1, 2, 3, 4), (1, 2, 3, 5), (1, 2, 4, 5)}


def test_uncoupled_faces_are_not_generic():
    F = [[exact(0)] * 10 for _ in range(10)]
    for a in range(5):
        for b in range(2):
            for c in range(2):
                F[2 * a + b][2 * a + c] = exact(1 + b + c + a)
    with pytest.raises(NonGenericError):
        tb.EdgeStructure(F).pairs


def test_first_dependency_is_identity(structure):
    dep = structure.dependency(1)
    assert dep[2] == [[ONE, ZERO], [ZERO, ONE]]


def test_edges_at_a_vertex_span_six(structure):
    ops = []
    for j in (2, 3, 4, 5):
        p = structure.pair(1, j)
        ops += [list(p.e.coeffs), list(p.f.coeffs)]
    assert rank(ops) == 6


def test_dependency_seen_from_two_tetrahedra(structure):
    a = tb.tetra_dependency(structure, 1, (1, 2, 3, 4))[3]
    b = tb.tetra_dependency(structure, 1, (1, 2, 3, 5))[3]
    assert a == b == structure.step(1, 2, 3)


@given(st.integers(0, 2**32))
@settings(max_examples=15)
def test_nonintersecting_edges_commute_on_face(seed):
    s = tb.EdgeStructure(random_F(seed))
    for t in STANDARD.faces:
        for b1, b2 in combinations(combinations(t, 2), 2):
            if set(b1) & set(b2):
                continue
            for d1 in (s.pair(*b1).e, s.pair(*b1).f):
                for d2 in (s.pair(*b2).e, s.pair(*b2).f):
                    assert partial_commutator(d1, d2, t) == ZERO


@given(st.integers(0, 2**32))
@settings(max_examples=15)
def test_adjacent_edges_cancel_between_faces(seed):
    s = tb.EdgeStructure(random_F(seed))
    for i, j, k in STANDARD.triangles:
        shared = [t for t in STANDARD.faces if {i, j, k} <= set(t)]
        assert len(shared) == 2
        for b1, b2 in (((i, j), (i, k)), ((i, j), (j, k)), ((i, k), (j, k))):
            for d1 in (s.pair(*b1).e, s.pair(*b1).f):
                for d2 in (s.pair(*b2).e, s.pair(*b2).f):
                    assert partial_commutator(d1, d2, shared[0]) + partial_commutator(d1, d2, shared[1]) == ZERO


@given(st.integers(0, 2**32))
@settings(max_examples=10)
def test_holonomy_properties(seed):
    report = tb.verify_holonomies(random_F(seed))
    assert report.passed, report.failures()


def test_holonomy_determinant_is_one(structure):
    for tri in STANDARD.triangles:
        assert det(structure.holonomy(tri)) == ONE


# -- cocycle extraction and standard bases --------------------------------------


def test_unit_chain_gives_trivial_cocycle():
    omega = tb.extract_cocycle(tb.build_delta_weight(unit_chain()))
    assert omega.distance(unit_chain().coboundary()) < 1e-9


@given(st.integers(0, 2**32))
@settings(max_examples=15)
def test_round_trip(seed):
    nu = random_chain(seed)
    target = nu.coboundary()
    w = tb.build_delta_weight(nu)
    first, second = tb.extract_cocycle(w, choice=0), tb.extract_cocycle(w, choice=1)
    # the two eigenlines give a cocycle and its inverse
    assert min(first.distance(target), first.distance(target.inverse())) < 1e-9
    assert min(second.distance(target), second.distance(target.inverse())) < 1e-9
    assert first.distance(second.inverse()) < 1e-9


def test_extracted_cocycle_law(structure):
    omega = tb.extract_cocycle(structure)
    assert omega.is_cocycle(1e-9)


def test_standardization(structure):
    data = tb.standardize_bases(structure)
    assert data.residual < 1e-7, data.residuals
    for x in STANDARD.vertices:
        for m in data.dependencies[x].matrices.values():
            assert abs(m[0, 1]) < 1e-9 and abs(m[1, 0]) < 1e-9


def test_commutator_vector_is_determined_by_chain(structure):
    data = tb.standardize_bases(structure)
    n = lambda a, b: to_complex(data.nu[(a, b)])  # noqa: E731
    expected = np.array([
        n(1, 4) * n(2, 3) - n(1, 3) * n(2, 4),
        n(1, 2) * n(2, 4) + n(1, 4),
        -n(1, 2) * n(2, 3) - n(1, 3),
        -n(1, 2) * n(2, 4) - n(1, 4),
        n(1, 2) * n(2, 3) + n(1, 3),
    ])
    cols = structure.spec.face_coordinates((1, 2, 3, 4))
    f12 = data.f[(1, 2)][cols]
    got = np.array([tb._commutator_matrix(data.e[b][cols], f12) for b in ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4))])
    assert np.linalg.matrix_rank(np.vstack([got / np.linalg.norm(got), expected / np.linalg.norm(expected)]),
                                 tol=1e-8) == 1


def test_stabilizer_has_one_parameter(structure):
    assert tb.stabilizer_dimension(structure.lagrangian) == 1


def test_gauge_between_same_weight(structure):
    g = tb.gauge_between(structure.lagrangian, structure.lagrangian)
    assert tb.gauge_residual(structure.lagrangian, structure.lagrangian) < 1e-9
    assert set(g.blocks) == set(structure.spec.faces)


@given(st.integers(0, 2**32))
@settings(max_examples=8)
def test_gauge_between_perturbed_copies(seed):
    r = random.Random(seed)
    nu = tb.random_admissible_chain(V5, r)[0]
    lag = annihilator_subspace(tb.build_delta_weight(nu))
    spec = lag.spec
    l1, l2 = (apply_gauge(random_gauge(spec, r, steps=2), lag) for _ in range(2))
    assert tb.gauge_residual(l1, l2) < 1e-7


def test_gauge_between_different_cocycles():
    w1 = annihilator_subspace(tb.build_delta_weight(unit_chain()))
    r = random.Random(4)
    nu = tb.OneChain({e: random_nonzero_rational(r) for e in combinations(V5, 2)})
    while nu.excluded_triangles():
        nu = tb.OneChain({e: random_nonzero_rational(r) for e in combinations(V5, 2)})
    w2 = annihilator_subspace(tb.build_delta_weight(nu))
    with pytest.raises(PreconditionError):
        tb.gauge_between(w1, w2)


# -- the 3-3 move ---------------------------------------------------------------


def test_move_for_unit_chain():
    report = tb.verify_33_two_boson(unit_chain(range(1, 7)))
    assert report.passed, report.failures()


@given(st.integers(0, 2**32))
@settings(max_examples=5)
def test_move_for_random_chain(seed):
    report = tb.verify_33_two_boson(random_chain(seed, range(1, 7)))
    assert report.passed, report.failures()


def test_move_rejects_excluded_chain():
    nu = unit_chain(range(1, 7))
    values = dict(nu.values)
    values[(2, 4)] = -ONE  # coboundary -1 on 234
    with pytest.raises(ExcludedCocycleValueError):
        tb.verify_33_two_boson(tb.OneChain(values))
