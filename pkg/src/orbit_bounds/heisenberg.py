"""
The unipotent group W = U x V with a twisted product.

Elements are pairs ``(u, v)`` of rational vectors. The product is

    (u, v) * (u', v') = (u + u' + psi(v, v'), v + v')

for an alternating bilinear map ``psi: V x V -> U``. Because ``psi`` is
alternating, powers are plain scalings ``(u, v)^n = (n u, n v)`` and the
inverse of ``(u, v)`` is ``(-u, -v)``.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from orbit_bounds.errors import DimensionMismatch, NonAlternatingForm
from orbit_bounds.exactalg import Vector, to_vector


@dataclass(frozen=True)
class PolarizationForm:
    """
    An alternating bilinear map ``psi: Q^dim_v x Q^dim_v -> Q^dim_u``.

    Attributes:
        dim_u: Dimension of U.
        dim_v: Dimension of V.
        tensor: ``tensor[i][j][k]`` is the U_i-component of ``psi(e_j, e_k)``.
            Each slice ``tensor[i]`` must be antisymmetric with zero diagonal.

    Raises:
        DimensionMismatch: If the tensor shape does not match the dimensions.
        NonAlternatingForm: If some slice is not alternating.
    """

    dim_u: int
    dim_v: int
    tensor: tuple[tuple[Vector, ...], ...] = ()

    def __post_init__(self):
        if self.dim_u < 0 or self.dim_v < 0:
            raise DimensionMismatch("dimensions must be nonnegative")
        tensor = self.tensor
        if not tensor:
            tensor = tuple(
                tuple(tuple(Fraction(0) for _ in range(self.dim_v)) for _ in range(self.dim_v))
                for _ in range(self.dim_u)
            )
        tensor = tuple(tuple(to_vector(row) for row in matrix) for matrix in tensor)
        if len(tensor) != self.dim_u or any(
            len(matrix) != self.dim_v or any(len(row) != self.dim_v for row in matrix)
            for matrix in tensor
        ):
            raise DimensionMismatch(
                f"psi tensor must have shape {self.dim_u} x {self.dim_v} x {self.dim_v}"
            )
        for i, matrix in enumerate(tensor):
            for j in range(self.dim_v):
                if matrix[j][j] != 0:
                    raise NonAlternatingForm(f"psi_{i}(e_{j}, e_{j}) != 0")
                for k in range(j + 1, self.dim_v):
                    if matrix[j][k] != -matrix[k][j]:
                        raise NonAlternatingForm(
                            f"psi_{i} is not antisymmetric at ({j}, {k})"
                        )
        object.__setattr__(self, "tensor", tensor)

    @classmethod
    def zero(cls, dim_u: int, dim_v: int) -> "PolarizationForm":
        """The zero form, for which W is an ordinary vector group."""
        return cls(dim_u=dim_u, dim_v=dim_v)

    @property
    def dim(self) -> int:
        return self.dim_u + self.dim_v

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for matrix in self.tensor for row in matrix for x in row)

    def evaluate(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Vector:
        """``psi(x, y)`` as a vector of length ``dim_u``."""
        if len(x) != self.dim_v or len(y) != self.dim_v:
            raise DimensionMismatch("psi arguments must have length dim_v")
        return tuple(
            sum(
                (
                    matrix[j][k] * x[j] * y[k]
                    for j in range(self.dim_v)
                    for k in range(self.dim_v)
                    if matrix[j][k]
                ),
                Fraction(0),
            )
            for matrix in self.tensor
        )


@dataclass(frozen=True)
class HeisenbergElement:
    """An element ``w = (u, v)`` of W(Q)."""

    u: Vector
    v: Vector

    def __post_init__(self):
        object.__setattr__(self, "u", to_vector(self.u))
        object.__setattr__(self, "v", to_vector(self.v))

    @classmethod
    def identity(cls, psi: PolarizationForm) -> "HeisenbergElement":
        return cls(u=(0,) * psi.dim_u, v=(0,) * psi.dim_v)

    @classmethod
    def from_coordinates(
        cls, coordinates: Sequence[Fraction], dim_u: int
    ) -> "HeisenbergElement":
        """Split a coordinate vector (U coordinates first) into ``(u, v)``."""
        coordinates = to_vector(coordinates)
        return cls(u=coordinates[:dim_u], v=coordinates[dim_u:])

    @property
    def coordinates(self) -> Vector:
        """U coordinates followed by V coordinates."""
        return self.u + self.v

    @property
    def is_identity(self) -> bool:
        return all(x == 0 for x in self.coordinates)


def _check(element: HeisenbergElement, psi: PolarizationForm) -> None:
    if len(element.u) != psi.dim_u or len(element.v) != psi.dim_v:
        raise DimensionMismatch(
            f"element of shape ({len(element.u)}, {len(element.v)}) does not "
            f"match psi of shape ({psi.dim_u}, {psi.dim_v})"
        )


def hmul(
    a: HeisenbergElement, b: HeisenbergElement, psi: PolarizationForm
) -> HeisenbergElement:
    """
    Product ``a * b = (a.u + b.u + psi(a.v, b.v), a.v + b.v)``.

    Raises:
        DimensionMismatch: If an element does not match ``psi``.
    """
    _check(a, psi)
    _check(b, psi)
    twist = psi.evaluate(a.v, b.v)
    return HeisenbergElement(
        u=tuple(x + y + t for x, y, t in zip(a.u, b.u, twist, strict=True)),
        v=tuple(x + y for x, y in zip(a.v, b.v, strict=True)),
    )


def hinv(a: HeisenbergElement, psi: PolarizationForm) -> HeisenbergElement:
    """Inverse ``(-u, -v)``."""
    _check(a, psi)
    return HeisenbergElement(u=tuple(-x for x in a.u), v=tuple(-x for x in a.v))


def hpow(a: HeisenbergElement, n: int, psi: PolarizationForm) -> HeisenbergElement:
    """Power ``a^n = (n u, n v)`` for any integer ``n``."""
    _check(a, psi)
    return HeisenbergElement(u=tuple(n * x for x in a.u), v=tuple(n * x for x in a.v))
