"""
Exception hierarchy for the orbit-bounds library.

Every error raised on purpose by the library derives from
:class:`OrbitBoundsError` and carries the exit code the command-line front end
uses for it. Callers that only care about the category can catch
:class:`InvalidInputError`, :class:`PrecisionNotStabilized` or
:class:`Unsupported`.
"""


class OrbitBoundsError(Exception):
    """Base class for all domain errors."""

    exit_code = 1


class InvalidInputError(OrbitBoundsError, ValueError):
    """Input violates a documented precondition."""

    exit_code = 2


class DimensionMismatch(InvalidInputError):
    """Vectors, matrices or blocks have inconsistent sizes."""


class NonAlternatingForm(InvalidInputError):
    """The polarization tensor is not alternating."""


class InvalidSubgroup(InvalidInputError):
    """A residue set is not a subgroup of (Z/n)^x."""


class NotFundamental(InvalidInputError):
    """An integer is not a fundamental discriminant of the required sign."""


class SquareInput(InvalidInputError):
    """Pell equation requested for a perfect square."""


class NotSublattice(InvalidInputError):
    """Index requested for a lattice that is not contained in the other."""


class TrivialSubrepresentation(InvalidInputError):
    """An action block carries the trivial character."""


class InstanceError(InvalidInputError):
    """An instance, list or cache file could not be interpreted."""


class PrecisionNotStabilized(OrbitBoundsError, ArithmeticError):
    """A p-adic quantity did not stabilise before the precision cap."""

    exit_code = 3

    def __init__(self, quantity: str, prime: int, precision_max: int):
        self.quantity = quantity
        self.prime = prime
        self.precision_max = precision_max
        super().__init__(
            f"{quantity} at p={prime} did not stabilise up to precision "
            f"{precision_max}"
        )


class Unsupported(OrbitBoundsError, NotImplementedError):
    """The requested computation lies outside the supported families."""

    exit_code = 4


class UnsupportedField(Unsupported):
    """Field or local ring outside the supported abelian families."""


class UnsupportedCharacter(Unsupported):
    """Character not expressible for the given torus factor."""


class UnsupportedClassNumber(Unsupported):
    """No rule or override yields the class number of the torus."""
