"""Pentachoron weights for free-fermion style 4-manifold invariants.

Exact checks of edge-operator identities, formal Gaussian integration, the
3-3 move for one- and two-boson weights, and a finite-field cross-check.
"""

from .complexes import STANDARD, MoveComplex33, Pentachoron
from .errors import (
    DefectiveHolonomyError,
    DegenerateWeightError,
    DependentDeltasError,
    DivergentIntegralError,
    ExcludedCocycleValueError,
    NonGenericError,
    NonRepresentableError,
    PentaweightsError,
    PreconditionError,
    StructuralError,
)
from .quasi_gaussian import (
    QuasiGaussianWeight,
    annihilator_subspace,
    equal_up_to_constant,
    gaussian_from_matrix,
    integrate,
    lagrangian_of,
    multiply,
    weight_from_lagrangian,
)
from .report import Check, Verification
from .symplectic import (
    BlockGaugeTransform,
    FirstOrderOperator,
    OperatorSubspace,
    SpaceSpec,
    apply_gauge,
    commutator,
    partial_commutator,
    subspaces_equal,
)

__version__ = "0.1.0"
