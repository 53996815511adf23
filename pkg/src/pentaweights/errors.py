"""Exception hierarchy.  Every error is a ``ValueError`` so callers that only
care about bad input can catch that."""


class PentaweightsError(ValueError):
    pass


class StructuralError(PentaweightsError):
    """Mismatched spaces, unknown faces or edges."""


class PreconditionError(PentaweightsError):
    pass


class NonGenericError(PentaweightsError):
    """The input sits on the exceptional locus of a construction."""


class DependentDeltasError(PentaweightsError):
    """A product of delta functions of linearly dependent arguments."""


class DivergentIntegralError(PentaweightsError):
    """An integral of the form  int const dx."""


class NonRepresentableError(PentaweightsError):
    pass


class ExcludedCocycleValueError(PentaweightsError):
    """Some triangle carries omega = -1."""


class DegenerateWeightError(PentaweightsError):
    pass


class DefectiveHolonomyError(PentaweightsError):
    pass
