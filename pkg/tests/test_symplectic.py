import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pentaweights import one_boson as ob
from pentaweights.errors import PreconditionError
from pentaweights.linalg import rank
from pentaweights.quasi_gaussian import lagrangian_of
from pentaweights.scalars import ONE, ZERO, exact, to_complex
from pentaweights.symplectic import (
    BlockGaugeTransform,
    FirstOrderOperator,
    OperatorSubspace,
    SpaceSpec,
    apply_gauge,
    commutator,
    is_lagrangian,
    is_symplectic,
    partial_commutator,
    random_gauge,
    random_operator,
    random_symplectic_block,
    subspace_distance,
    subspaces_equal,
)

from conftest import faces

T1, T2 = (1, 2, 3, 4), (1, 2, 3, 5)


def test_canonical_pair(spec4):
    d = FirstOrderOperator.d(spec4, T1)
    x = FirstOrderOperator.x(spec4, T1)
    assert commutator(d, x) == ONE
    assert commutator(x, d) == -ONE


def test_disjoint_multiplications_commute(spec4):
    assert commutator(FirstOrderOperator.x(spec4, T1), FirstOrderOperator.x(spec4, T2)) == ZERO


def test_partial_commutator_canonical_pair(spec4):
    assert partial_commutator(FirstOrderOperator.d(spec4, T1), FirstOrderOperator.x(spec4, T1), T1) == ONE


def test_canonical_edge_operators_commute():
    table = ob.edge_operators(ob.canonical_matrix())
    assert commutator(table[(1, 2)], table[(1, 3)]) == ZERO
    assert partial_commutator(table[(1, 2)], table[(1, 3)], T1) == ONE


def test_spec_dimensions():
    one = SpaceSpec.of_faces(faces(5))
    two = SpaceSpec.of_faces(faces(5), 2)
    assert (one.n, one.dim) == (5, 10)
    assert (two.n, two.dim) == (10, 20)


def test_rank_of_derivatives():
    spec = SpaceSpec.of_faces(faces(5))
    assert OperatorSubspace(spec, [FirstOrderOperator.d(spec, t) for t in spec.faces]).rank == 5


@pytest.mark.parametrize("kind", ["x", "d"])
def test_coordinate_spans_are_lagrangian(kind):
    spec = SpaceSpec.of_faces(faces(5))
    ops = [getattr(FirstOrderOperator, kind)(spec, t) for t in spec.faces]
    assert is_lagrangian(OperatorSubspace(spec, ops))


def test_non_commuting_span_is_not_lagrangian():
    spec = SpaceSpec.of_faces(faces(2))
    ops = [FirstOrderOperator.d(spec, faces(2)[0]), FirstOrderOperator.x(spec, faces(2)[0])]
    assert not is_lagrangian(OperatorSubspace(spec, ops))


def test_identity_gauge_keeps_subspace():
    spec = ob.STANDARD.spec()
    lag = lagrangian_of(ob.canonical_matrix(), spec)
    assert subspaces_equal(apply_gauge(BlockGaugeTransform.identity(spec), lag), lag)


def test_swap_gauge_maps_multiplications_to_derivatives():
    spec = SpaceSpec.of_faces(faces(3))
    # (d, x) -> (x, -d) on every face
    swap = [[ZERO, -ONE], [ONE, ZERO]]
    g = BlockGaugeTransform({t: swap for t in spec.faces})
    xs = OperatorSubspace(spec, [FirstOrderOperator.x(spec, t) for t in spec.faces])
    ds = OperatorSubspace(spec, [FirstOrderOperator.d(spec, t) for t in spec.faces])
    assert subspaces_equal(apply_gauge(g, xs), ds)


def test_scaling_invariance(spec4):
    a = OperatorSubspace(spec4, [FirstOrderOperator.x(spec4, T1)])
    b = OperatorSubspace(spec4, [FirstOrderOperator.x(spec4, T1, coeff=2)])
    assert subspaces_equal(a, b)


def test_generic_lagrangians_differ(rng):
    spec = ob.STANDARD.spec()
    a = lagrangian_of(ob.random_symmetric_matrix(rng), spec)
    b = lagrangian_of(ob.random_symmetric_matrix(rng), spec)
    assert not subspaces_equal(a.to_complex(), b.to_complex())


def test_non_symplectic_block_rejected():
    with pytest.raises(PreconditionError):
        BlockGaugeTransform({T1: [[exact(2), ZERO], [ZERO, exact(2)]]})


def test_distance_with_known_dimension():
    spec = SpaceSpec.of_faces(faces(2))
    big = OperatorSubspace(spec, [FirstOrderOperator.x(spec, faces(2)[0], coeff=10**9),
                                  FirstOrderOperator.x(spec, faces(2)[1])]).to_complex()
    small = OperatorSubspace(spec, [FirstOrderOperator.x(spec, t) for t in faces(2)]).to_complex()
    assert subspace_distance(big, small, 1e-9, dim=2) < 1e-12


@given(st.integers(0, 2**32), st.sampled_from([2, 4]))
def test_random_blocks_are_symplectic(seed, size):
    block = random_symplectic_block(size, random.Random(seed))
    assert is_symplectic(block)
    assert rank(block) == size


@given(st.integers(0, 2**32))
def test_commutator_antisymmetry(seed):
    r = random.Random(seed)
    spec = SpaceSpec.of_faces(faces(4), r.choice([1, 2]))
    d, e = random_operator(spec, r), random_operator(spec, r)
    assert commutator(d, e) == -commutator(e, d)


@given(st.integers(0, 2**32))
def test_commutator_is_sum_of_partials(seed):
    r = random.Random(seed)
    spec = SpaceSpec.of_faces(faces(4), r.choice([1, 2]))
    d, e = random_operator(spec, r), random_operator(spec, r)
    total = ZERO
    for t in spec.faces:
        total += partial_commutator(d, e, t)
    assert total == commutator(d, e)


def test_gauge_preserves_commutators():
    r = random.Random(7)
    for _ in range(100):
        spec = SpaceSpec.of_faces(faces(3), r.choice([1, 2]))
        d, e = random_operator(spec, r), random_operator(spec, r)
        g = random_gauge(spec, r)
        assert commutator(g.apply(d), g.apply(e)) == commutator(d, e)
        # float blocks: a single transvection keeps entries small enough for 1e-9
        mild = random_gauge(spec, r, steps=1)
        gc = BlockGaugeTransform({t: np.vectorize(to_complex)(np.array(b, dtype=object)).astype(complex)
                                  for t, b in mild.blocks.items()})
        approx = commutator(gc.apply(d.to_complex()), gc.apply(e.to_complex()))
        assert abs(approx - to_complex(commutator(d, e))) < 1e-9


@given(st.integers(0, 2**32))
def test_gauge_preserves_lagrangian_property(seed):
    r = random.Random(seed)
    spec = ob.STANDARD.spec()
    lag = lagrangian_of(ob.random_symmetric_matrix(r), spec)
    g = random_gauge(spec, r)
    assert is_lagrangian(apply_gauge(g, lag))
    broken = OperatorSubspace(spec, [FirstOrderOperator.d(spec, t) for t in spec.faces]
                              + [FirstOrderOperator.x(spec, spec.faces[0])])
    assert not is_lagrangian(apply_gauge(g, broken))
