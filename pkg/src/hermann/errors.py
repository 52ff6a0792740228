"""Exception hierarchy shared by all modules."""


class HermannError(Exception):
    """Base class for every error raised by the engine."""


class ClosureError(HermannError):
    """A matrix does not lie in the real span of the algebra basis."""


class InvariantSubspaceError(HermannError):
    """An operator maps a subspace outside of itself."""


class NonCommutingError(HermannError):
    """Operators that should commute do not."""


class DegenerateCombinationError(HermannError):
    """Random linear combinations failed to separate joint eigenspaces."""


class ClusteringAmbiguityError(HermannError):
    """Two values lie inside the guard band: neither clearly equal nor clearly distinct."""


class InvolutionError(HermannError):
    """A linear map fails to be an involutive automorphism preserving the metric."""


class MaximalAbelianError(HermannError):
    """The supplied abelian subspace is not contained in m ∩ p or is not maximal."""


class RootSystemError(HermannError):
    """Extracted root data violates a structural invariant."""


class PhaseAmbiguityError(ClusteringAmbiguityError):
    """A phase lies too close to a lattice point to classify safely."""
