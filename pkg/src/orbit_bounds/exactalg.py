"""
Exact integer and rational linear algebra.

Normal forms of integer matrices, full-rank lattices in Q^n given by a rational
basis, lattice indices and p-adic orders of rational vectors relative to a
lattice. Matrix arithmetic runs on sympy's ``DomainMatrix`` over ``ZZ`` and
``QQ``; values cross the module boundary as Python integers and
:class:`fractions.Fraction`. No floating point is involved.

Matrices are passed as sequences of rows unless a function says it works on
columns. Lattice bases are stored as tuples of basis vectors, i.e. as the
columns of the basis matrix.
"""

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import lcm
from numbers import Rational

from sympy import multiplicity, primefactors
from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form, smith_normal_decomp

from orbit_bounds.errors import DimensionMismatch, InvalidInputError, NotSublattice

logger = logging.getLogger(__name__)

Vector = tuple[Fraction, ...]
IntegerMatrix = tuple[tuple[int, ...], ...]


def to_vector(values: Iterable[Rational | int | str]) -> Vector:
    """Convert an iterable of exact scalars (or ``"p/q"`` strings) to a Vector."""
    return tuple(Fraction(value) for value in values)


def common_denominator(values: Iterable[Fraction]) -> int:
    """Least common multiple of the denominators, 1 for an empty input."""
    return reduce(lcm, (Fraction(value).denominator for value in values), 1)


def _shape(matrix: Sequence[Sequence[int]]) -> tuple[int, int]:
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    if any(len(row) != cols for row in matrix):
        raise DimensionMismatch("matrix rows have different lengths")
    return rows, cols


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _freeze(matrix: Iterable[Iterable[int]]) -> IntegerMatrix:
    return tuple(tuple(int(x) for x in row) for row in matrix)


def _zz(matrix: Sequence[Sequence[int]]) -> DomainMatrix:
    rows, cols = _shape(matrix)
    return DomainMatrix([[ZZ(int(x)) for x in row] for row in matrix], (rows, cols), ZZ)


def _qq(matrix: Sequence[Sequence[Fraction]]) -> DomainMatrix:
    rows, cols = _shape(matrix)
    entries = [
        [QQ(x.numerator, x.denominator) for x in map(Fraction, row)] for row in matrix
    ]
    return DomainMatrix(entries, (rows, cols), QQ)


def _fraction(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


# ---------------------------------------------------------------------------
# Rational linear algebra
# ---------------------------------------------------------------------------


def determinant(columns: Sequence[Sequence[Fraction]]) -> Fraction:
    """
    Determinant of a square rational matrix.

    The matrix may be given by rows or by columns; the determinant is the same.

    Raises:
        DimensionMismatch: If the matrix is not square.
    """
    n = len(columns)
    if any(len(column) != n for column in columns):
        raise DimensionMismatch("determinant of a non-square matrix")
    if n == 0:
        return Fraction(1)
    return _fraction(_qq(columns).det())


def transpose(matrix: Sequence[Sequence]) -> tuple[tuple, ...]:
    """Swap rows and columns."""
    return tuple(zip(*matrix, strict=True)) if matrix else ()


def _invertible(columns: Sequence[Sequence[Fraction]]) -> DomainMatrix:
    """The matrix with the given columns, checked to be invertible."""
    if determinant(columns) == 0:
        raise InvalidInputError("singular matrix")
    return _qq(transpose(columns))


def solve(columns: Sequence[Sequence[Fraction]], vector: Sequence[Fraction]) -> Vector:
    """
    Solve ``B x = vector`` where ``B`` has the given columns.

    Args:
        columns: The n columns of an invertible n x n rational matrix.
        vector: Right-hand side of length n.

    Returns:
        Vector: The unique solution x.

    Raises:
        DimensionMismatch: If the sizes disagree.
        InvalidInputError: If the matrix is singular.
    """
    n = len(columns)
    if len(vector) != n or any(len(column) != n for column in columns):
        raise DimensionMismatch(
            f"cannot solve a {n}-column system with a vector of length {len(vector)}"
        )
    if n == 0:
        return ()
    matrix = _invertible(columns)
    solution = matrix.lu_solve(_qq([[x] for x in vector]))
    return tuple(_fraction(x) for x in solution.to_list_flat())


def inverse(columns: Sequence[Sequence[Fraction]]) -> tuple[Vector, ...]:
    """Columns of the inverse of the matrix with the given columns."""
    if not columns:
        return ()
    inverted = _invertible(columns).inv()
    return tuple(
        tuple(_fraction(x) for x in column) for column in inverted.transpose().to_list()
    )


def integer_determinant(matrix: Sequence[Sequence[int]]) -> int:
    """
    Determinant of a square integer matrix, computed fraction-free over ``ZZ``.

    Raises:
        DimensionMismatch: If the matrix is not square.
    """
    rows, cols = _shape(matrix)
    if rows != cols:
        raise DimensionMismatch("determinant of a non-square matrix")
    if rows == 0:
        return 1
    return int(_zz(matrix).det())


# ---------------------------------------------------------------------------
# Integer normal forms
# ---------------------------------------------------------------------------


def hnf(matrix: Sequence[Sequence[int]]) -> IntegerMatrix:
    """
    Column-style Hermite normal form.

    Column operations bring the matrix to lower echelon form: going down the
    rows, each pivot is positive, every entry to the right of a pivot is zero
    and every entry to its left lies in ``[0, pivot)``. Zero columns end up on
    the right. The integer column span is preserved.

    Args:
        matrix: Integer matrix given by rows.

    Returns:
        IntegerMatrix: The Hermite normal form, same shape as the input.

    Example:
        >>> hnf([[4, 2], [2, 2]])
        ((2, 0), (0, 2))
    """
    rows, cols = _shape(matrix)
    if rows == 0 or cols == 0:
        return _freeze(matrix)

    # sympy returns the upper echelon form without zero columns; reversing
    # rows and columns on the way in and out turns it into the lower one.
    # It only reduces min(rows, cols) rows, so tall inputs get zero columns.
    padding = [0] * max(0, rows - cols)
    flipped = [padding + list(reversed(row)) for row in reversed(matrix)]
    upper = hermite_normal_form(_zz(flipped)).to_list()
    rank = len(upper[0]) if upper else 0
    lower = [list(reversed(row)) + [0] * (cols - rank) for row in reversed(upper)]
    return _freeze(lower)


@dataclass(frozen=True)
class SmithForm:
    """Result of :func:`snf`: ``left @ M @ right`` is diagonal."""

    diagonal: tuple[int, ...]
    left: IntegerMatrix
    right: IntegerMatrix


def snf(matrix: Sequence[Sequence[int]]) -> SmithForm:
    """
    Smith normal form with unimodular transforms.

    Args:
        matrix: Integer matrix given by rows (``m x n``).

    Returns:
        SmithForm: Diagonal ``d_1 | d_2 | ...`` (length ``min(m, n)``, all
            ``>= 0``) with ``left`` (``m x m``) and ``right`` (``n x n``)
            unimodular such that ``left @ matrix @ right`` is the diagonal matrix.
    """
    rows, cols = _shape(matrix)
    if rows == 0 or cols == 0:
        return SmithForm(
            diagonal=(), left=_freeze(_identity(rows)), right=_freeze(_identity(cols))
        )

    form, left, right = smith_normal_decomp(_zz(matrix))
    form, left = form.to_list(), [list(map(int, row)) for row in left.to_list()]
    diagonal = []
    for i in range(min(rows, cols)):
        d = int(form[i][i])
        if d < 0:
            left[i] = [-x for x in left[i]]
        diagonal.append(abs(d))
    return SmithForm(
        diagonal=tuple(diagonal), left=_freeze(left), right=_freeze(right.to_list())
    )


# ---------------------------------------------------------------------------
# Lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QLattice:
    """
    A full-rank lattice in Q^n, given by a rational basis.

    Attributes:
        basis: The n basis vectors (columns of the basis matrix).
    """

    basis: tuple[Vector, ...]

    def __post_init__(self):
        basis = tuple(to_vector(vector) for vector in self.basis)
        object.__setattr__(self, "basis", basis)
        if any(len(vector) != len(basis) for vector in basis):
            raise DimensionMismatch("lattice basis must be square")
        if determinant(basis) == 0:
            raise InvalidInputError("lattice basis is singular")

    @classmethod
    def standard(cls, n: int) -> "QLattice":
        """The lattice Z^n."""
        return cls(tuple(tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)))

    @classmethod
    def scaled_standard(cls, n: int, factor: Fraction) -> "QLattice":
        """The lattice factor * Z^n."""
        factor = Fraction(factor)
        return cls(
            tuple(tuple(factor if i == j else Fraction(0) for i in range(n)) for j in range(n))
        )

    @property
    def ambient_dim(self) -> int:
        return len(self.basis)

    @cached_property
    def determinant(self) -> Fraction:
        return determinant(self.basis)

    def coordinates(self, w: Sequence[Fraction]) -> Vector:
        """Coordinates of ``w`` in the lattice basis."""
        return solve(self.basis, to_vector(w))

    def contains(self, w: Sequence[Fraction]) -> bool:
        return all(c.denominator == 1 for c in self.coordinates(w))

    def vector(self, coordinates: Sequence[Fraction]) -> Vector:
        """The vector with the given coordinates in the lattice basis."""
        if len(coordinates) != self.ambient_dim:
            raise DimensionMismatch("coordinate vector has the wrong length")
        n = self.ambient_dim
        return tuple(
            sum(
                (
                    Fraction(c) * b[i]
                    for c, b in zip(coordinates, self.basis, strict=True)
                ),
                Fraction(0),
            )
            for i in range(n)
        )


def lattice_index(big: QLattice, small: QLattice) -> int:
    """
    The index ``[big : small]``.

    Raises:
        DimensionMismatch: If the ambient dimensions differ.
        NotSublattice: If some basis vector of ``small`` is not in ``big``.
    """
    if big.ambient_dim != small.ambient_dim:
        raise DimensionMismatch("lattices live in different dimensions")
    for vector in small.basis:
        if not big.contains(vector):
            raise NotSublattice(f"{vector} is not in the larger lattice")
    ratio = abs(small.determinant / big.determinant)
    return ratio.numerator


def p_order_in_lattice(w: Sequence[Fraction], lattice: QLattice, p: int) -> int:
    """
    The p-order of ``w`` relative to ``lattice``.

    This is the least ``m`` such that ``p^m * w`` lies in the p-adic completion
    of the lattice, i.e. the largest power of ``p`` dividing a denominator of
    the coordinates of ``w`` in the lattice basis.
    """
    if len(w) != lattice.ambient_dim:
        raise DimensionMismatch(
            f"vector of length {len(w)} against a rank {lattice.ambient_dim} lattice"
        )
    return max(
        (int(multiplicity(p, c.denominator)) for c in lattice.coordinates(w)),
        default=0,
    )


def order_in_lattice(
    w: Sequence[Fraction], local_lattices: Mapping[int, QLattice] | None = None
) -> int:
    """
    The least ``n > 0`` with ``n * w`` in every local lattice.

    Args:
        w: Rational vector.
        local_lattices: Lattices for the primes where the level is not Z^n.
            All other primes use Z^n.

    Returns:
        int: ``prod_p p^{ord_p(w)}``.
    """
    local_lattices = local_lattices or {}
    w = to_vector(w)
    standard = QLattice.standard(len(w))
    primes = set(primefactors(common_denominator(w))) | set(local_lattices)
    order = 1
    for p in sorted(primes):
        order *= p ** p_order_in_lattice(w, local_lattices.get(p, standard), p)
    return order


def dual_lattice(lattice: QLattice) -> QLattice:
    """The dual lattice ``{x : x . y in Z for all y in lattice}``."""
    return QLattice(transpose(inverse(lattice.basis)))


def lattice_sum(*lattices: QLattice) -> QLattice:
    """The smallest lattice containing all the given lattices."""
    if not lattices:
        raise InvalidInputError("lattice_sum needs at least one lattice")
    n = lattices[0].ambient_dim
    if any(lattice.ambient_dim != n for lattice in lattices):
        raise DimensionMismatch("lattices live in different dimensions")

    generators = [vector for lattice in lattices for vector in lattice.basis]
    den = common_denominator(x for vector in generators for x in vector)
    rows = [[int(vector[i] * den) for vector in generators] for i in range(n)]
    reduced = hnf(rows)
    return QLattice(
        tuple(tuple(Fraction(reduced[i][j], den) for i in range(n)) for j in range(n))
    )


def lattice_intersection(*lattices: QLattice) -> QLattice:
    """The intersection of full-rank lattices, computed through duality."""
    return dual_lattice(lattice_sum(*(dual_lattice(lattice) for lattice in lattices)))


def global_lattice(dim: int, local_lattices: Mapping[int, QLattice]) -> QLattice:
    """
    Glue local lattices into one lattice of Q^n.

    The result has p-adic completion ``local_lattices[p]`` at every listed
    prime and ``Z_p^n`` at every other prime. Each listed lattice only matters
    through its completion at its own prime.

    Args:
        dim: Ambient dimension n.
        local_lattices: Map from prime to a lattice whose completion at that
            prime is the wanted local lattice.

    Returns:
        QLattice: The glued lattice.
    """
    if not local_lattices:
        return QLattice.standard(dim)

    upper: dict[int, int] = {}
    lower: dict[int, int] = {}
    for p, lattice in local_lattices.items():
        if lattice.ambient_dim != dim:
            raise DimensionMismatch(f"local lattice at p={p} has the wrong rank")
        unit_vectors = QLattice.standard(dim).basis
        # p^lower[p] Z_p^n is inside the local lattice, which is inside p^-upper[p] Z_p^n
        lower[p] = max(p_order_in_lattice(e, lattice, p) for e in unit_vectors)
        upper[p] = max(
            (int(multiplicity(p, x.denominator)) for v in lattice.basis for x in v),
            default=0,
        )

    pieces = []
    for p, lattice in sorted(local_lattices.items()):
        # Large enough at the other listed primes to contain their local lattices
        elsewhere = Fraction(1)
        for q in local_lattices:
            if q != p:
                elsewhere /= q ** upper[q]
        widened = lattice_sum(
            lattice, QLattice.scaled_standard(dim, elsewhere * p ** lower[p])
        )
        pieces.append(
            lattice_intersection(
                widened,
                QLattice.scaled_standard(dim, elsewhere / p ** upper[p]),
            )
        )

    result = lattice_intersection(*pieces)
    logger.debug(
        "Glued lattice from primes %s, determinant %s",
        sorted(local_lattices),
        result.determinant,
    )
    return result


@dataclass(frozen=True)
class AdaptedBasis:
    """
    A basis of Z^n adapted to a subspace.

    Attributes:
        basis: Columns ``u_1..u_n`` of a unimodular matrix; ``u_1..u_rank``
            span the intersection of the subspace with Z^n.
        transform: The inverse matrix (rows); ``transform @ c`` gives the
            coordinates of ``c`` in the adapted basis.
        rank: Dimension of the subspace.
    """

    basis: tuple[tuple[int, ...], ...]
    transform: IntegerMatrix
    rank: int


def adapted_basis(vectors: Sequence[Sequence[Fraction]], dim: int) -> AdaptedBasis:
    """
    A unimodular basis of Z^n whose leading vectors span a saturated sublattice.

    Args:
        vectors: Rational vectors spanning the subspace (may be empty or
            linearly dependent).
        dim: Ambient dimension n.

    Returns:
        AdaptedBasis: See the class docstring.
    """
    if any(len(vector) != dim for vector in vectors):
        raise DimensionMismatch("subspace vector has the wrong length")
    if not vectors:
        identity = _freeze(_identity(dim))
        return AdaptedBasis(basis=identity, transform=identity, rank=0)

    scaled = []
    for vector in vectors:
        vector = to_vector(vector)
        den = common_denominator(vector)
        scaled.append([int(x * den) for x in vector])
    smith = snf([[column[i] for column in scaled] for i in range(dim)])
    rank = sum(1 for d in smith.diagonal if d)

    # left^-1 is unimodular and its first `rank` columns span the saturation
    left_columns = transpose(smith.left)
    basis = tuple(tuple(int(x) for x in column) for column in inverse(left_columns))
    return AdaptedBasis(basis=basis, transform=smith.left, rank=rank)
