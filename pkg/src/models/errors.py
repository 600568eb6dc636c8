"""
Exception hierarchy for the tubed extension toolkit.

Every error carries the exit code of its category so the command-line front
end can translate failures without inspecting messages:
1 = malformed or inadmissible input, 2 = divergence, 3 = invariant failure.
"""

INPUT_EXIT_CODE = 1
DIVERGENCE_EXIT_CODE = 2
INVARIANT_EXIT_CODE = 3


class TubedExtensionError(Exception):
    """Base class for all toolkit errors."""
    exit_code = INPUT_EXIT_CODE


class InputError(TubedExtensionError):
    """Input data or configuration cannot be used."""
    exit_code = INPUT_EXIT_CODE


class DivergenceError(TubedExtensionError):
    """A numerical quantity fails to converge under refinement."""
    exit_code = DIVERGENCE_EXIT_CODE


class InvariantError(TubedExtensionError):
    """An asserted invariant of a computed artifact does not hold."""
    exit_code = INVARIANT_EXIT_CODE


# Input errors

class SpecificationError(InputError):
    """A manifold, metric or run specification is malformed."""
    pass


class MapFormatError(InputError):
    """A surface map file cannot be parsed."""
    pass


class OutsideTube(InputError):
    """A point lies at or beyond the reach of the manifold."""
    pass


class NotOnManifold(InputError):
    """A point expected on the manifold fails the membership test."""
    pass


class DegenerateTangent(InputError):
    """A tangent frame is rank-deficient at a sample."""
    pass


class EmptyIntersection(InputError):
    """The manifold misses the requested ambient ball."""
    pass


class TailNotConstant(InputError):
    """A plane-domain map does not declare a constant tail."""
    pass


class SlabTooShallow(InputError):
    """The slab floor is not strictly above the boundary hyperplane."""
    pass


class EmptyRange(InputError):
    """No cube generation fits inside the slab."""
    pass


class MissingBound(InputError):
    """Bounded mode was requested for a map without an L-infinity bound."""
    pass


class PoleOnSupport(InputError):
    """A sphere map is not constant around the inversion pole."""
    pass


class BoundaryTouch(InputError):
    """A region of the Poincare ball reaches the excluded boundary collar."""
    pass


class InsufficientRadii(InputError):
    """Too few radii in the tail of a volume growth sample."""
    pass


# Divergence errors

class NoConvergence(DivergenceError):
    """An iterative refinement failed to stabilize."""
    pass


class NonFiniteEnergy(DivergenceError):
    """The Gagliardo energy of the boundary map diverges under refinement."""
    pass


# Invariant errors

class BoundViolation(InvariantError):
    """A mollifier violates one of its normalization bounds."""
    pass


class CoverageGap(InvariantError):
    """A cube boundary leaves the region where the averaged field exists."""
    pass


class TubeEscape(InvariantError):
    """An interior node of a good cube leaves the half-reach tube."""
    pass


class BoundaryNotOnManifold(InvariantError):
    """A boundary trace handed to the homogeneous extension is off the manifold."""
    pass


class FitInfeasible(InvariantError):
    """No positive constants satisfy the calibration family."""
    pass


class InvariantViolation(InvariantError):
    """A post-condition checked on an assembled artifact failed."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        message = f"Invariant '{invariant}' failed"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
