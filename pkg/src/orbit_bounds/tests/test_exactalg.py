import random
from fractions import Fraction
from itertools import count, product
from math import prod

import pytest
from sympy import Matrix
from sympy.matrices.normalforms import invariant_factors

from orbit_bounds.errors import DimensionMismatch, InvalidInputError, NotSublattice
from orbit_bounds.exactalg import (
    QLattice,
    adapted_basis,
    common_denominator,
    determinant,
    dual_lattice,
    global_lattice,
    hnf,
    integer_determinant,
    inverse,
    lattice_index,
    lattice_intersection,
    lattice_sum,
    order_in_lattice,
    p_order_in_lattice,
    snf,
    solve,
    to_vector,
)

F = Fraction


def _matmul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
        for i in range(len(a))
    )


class TestRationalAlgebra:
    """Test rational linear algebra over QQ."""

    def test_determinant(self):
        assert determinant([[F(1, 2), 0], [0, F(4)]]) == 2
        assert determinant([[1, 2], [2, 4]]) == 0
        assert determinant([[0, 1], [1, 0]]) == -1

    def test_integer_determinant_matches_rational(self):
        matrix = [[2, -1, 3], [0, 4, 5], [7, 1, -2]]
        assert integer_determinant(matrix) == determinant(matrix)
        assert integer_determinant([[0, 1], [1, 0]]) == -1
        assert integer_determinant([[1, 2], [2, 4]]) == 0

    def test_solve_and_inverse(self):
        columns = [[F(2), F(0)], [F(1), F(3)]]
        x = solve(columns, [F(5), F(6)])
        assert x == (F(3, 2), F(2))
        inv = inverse(columns)
        assert solve(inv, [F(3, 2), F(2)]) == (F(5), F(6))

    def test_singular_solve_rejected(self):
        with pytest.raises(InvalidInputError):
            solve([[1, 2], [2, 4]], [1, 1])

    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatch):
            determinant([[1, 2, 3], [4, 5, 6]])

    def test_common_denominator(self):
        assert common_denominator(to_vector(["1/4", "1/6", 3])) == 12
        assert common_denominator([]) == 1


class TestHermiteForm:
    """Test the column-style Hermite normal form."""

    def test_documented_example(self):
        assert hnf([[4, 2], [2, 2]]) == ((2, 0), (0, 2))

    def test_echelon_shape(self):
        matrix = [[2, 1, 4], [0, 3, 6], [5, -1, 2]]
        reduced = hnf(matrix)
        for i in range(3):
            assert reduced[i][i] > 0
            for j in range(i + 1, 3):
                assert reduced[i][j] == 0
            for j in range(i):
                assert 0 <= reduced[i][j] < reduced[i][i]
        assert abs(integer_determinant(reduced)) == abs(integer_determinant(matrix))

    def test_span_preserved(self):
        matrix = [[2, 1], [0, 3]]
        reduced = hnf(matrix)
        original = QLattice(tuple(zip(*matrix, strict=True)))
        normal = QLattice(tuple(zip(*reduced, strict=True)))
        assert lattice_index(original, normal) == 1
        assert lattice_index(normal, original) == 1

    def test_dependent_columns_leave_zero_column(self):
        reduced = hnf([[2, 4], [1, 2]])
        assert all(row[1] == 0 for row in reduced)


class TestSmithForm:
    """Test the Smith normal form and its transforms."""

    MATRIX = ((2, 4, 4), (-6, 6, 12), (10, -4, -16))

    def test_known_diagonal(self):
        assert snf(self.MATRIX).diagonal == (2, 6, 12)

    def test_transforms(self):
        smith = snf(self.MATRIX)
        product = _matmul(_matmul(smith.left, self.MATRIX), smith.right)
        for i in range(3):
            for j in range(3):
                assert product[i][j] == (smith.diagonal[i] if i == j else 0)
        assert abs(integer_determinant(smith.left)) == 1
        assert abs(integer_determinant(smith.right)) == 1

    @pytest.mark.parametrize(
        "matrix",
        [
            [[6, 4], [4, 10]],
            [[3, 0, 0], [0, 5, 0], [0, 0, 7]],
            [[12, 18, 6], [4, 0, 8], [9, 3, 3]],
        ],
    )
    def test_matches_sympy_invariant_factors(self, matrix):
        expected = tuple(abs(int(x)) for x in invariant_factors(Matrix(matrix)))
        assert snf(matrix).diagonal == expected

    def test_divisibility_chain(self):
        diagonal = snf([[12, 18, 6], [4, 0, 8], [9, 3, 3]]).diagonal
        for a, b in zip(diagonal, diagonal[1:], strict=False):
            assert b % a == 0

    def test_rectangular(self):
        smith = snf([[2, 4, 6]])
        assert smith.diagonal == (2,)
        assert len(smith.right) == 3


class TestLattices:
    """Test lattice arithmetic."""

    def test_index_of_scaled_lattice(self):
        assert lattice_index(QLattice.standard(2), QLattice.scaled_standard(2, 2)) == 4

    def test_not_sublattice(self):
        with pytest.raises(NotSublattice):
            lattice_index(QLattice.standard(2), QLattice.scaled_standard(2, F(1, 2)))

    def test_dual(self):
        dual = dual_lattice(QLattice.scaled_standard(2, 2))
        assert dual.contains((F(1, 2), 0))
        assert not dual.contains((F(1, 4), 0))

    def test_sum_and_intersection(self):
        a = QLattice(((2, 0), (0, 1)))
        b = QLattice(((1, 0), (0, 2)))
        total = lattice_sum(a, b)
        common = lattice_intersection(a, b)
        assert abs(total.determinant) == 1
        assert abs(common.determinant) == 4
        assert common.contains((2, 2))
        assert not common.contains((1, 2))

    def test_p_order(self):
        lattice = QLattice(((F(1, 2), 0), (0, 1)))
        assert p_order_in_lattice((F(1, 4), F(1, 3)), lattice, 2) == 1
        assert p_order_in_lattice((F(1, 4), F(1, 3)), lattice, 3) == 1
        assert p_order_in_lattice((F(1, 2), 0), lattice, 2) == 0

    def test_order_in_lattice(self):
        assert order_in_lattice((F(1, 4), F(1, 6))) == 12
        lattice = QLattice(((F(1, 2), 0), (0, 1)))
        assert order_in_lattice((F(1, 4), F(1, 6)), {2: lattice}) == 6

    def test_global_lattice_without_exceptions(self):
        assert global_lattice(3, {}) == QLattice.standard(3)

    def test_global_lattice_keeps_local_completion(self):
        local = QLattice(((F(1, 2), 0), (0, 1)))
        glued = global_lattice(2, {2: local})
        assert glued.contains((F(1, 2), 0))
        assert not glued.contains((F(1, 4), 0))
        assert not glued.contains((F(1, 3), 0))

    def test_global_lattice_ignores_foreign_primes(self):
        # Only the 3-adic completion of the lattice given at 3 matters
        local = QLattice(((F(1, 2), 0), (0, 3)))
        glued = global_lattice(2, {3: local})
        assert glued.contains((1, 0))
        assert glued.contains((0, 3))
        assert not glued.contains((0, 1))
        assert not glued.contains((F(1, 2), 0))
        assert abs(glued.determinant) == 3

    def test_singular_basis_rejected(self):
        with pytest.raises(InvalidInputError):
            QLattice(((1, 2), (2, 4)))


class TestAdaptedBasis:
    """Test bases adapted to a subspace."""

    def test_saturates_subspace(self):
        adapted = adapted_basis([(F(1, 2), F(1, 2))], 2)
        assert adapted.rank == 1
        assert adapted.basis[0] in ((1, 1), (-1, -1))
        assert abs(integer_determinant(adapted.basis)) == 1

    def test_transform_inverts_basis(self):
        adapted = adapted_basis([(2, 4, 0), (0, 0, 3)], 3)
        assert adapted.rank == 2
        columns = adapted.basis
        product = tuple(
            tuple(sum(row[k] * columns[j][k] for k in range(3)) for j in range(3))
            for row in adapted.transform
        )
        assert product == ((1, 0, 0), (0, 1, 0), (0, 0, 1))

    def test_empty_subspace(self):
        adapted = adapted_basis([], 2)
        assert adapted.rank == 0
        assert adapted.basis == ((1, 0), (0, 1))


def _random_lattice(rng: random.Random, n: int) -> QLattice:
    while True:
        basis = tuple(
            tuple(F(rng.randint(-3, 3), rng.choice((1, 2, 3))) for _ in range(n))
            for _ in range(n)
        )
        if determinant(basis) != 0:
            return QLattice(basis)


def _sublattice(rng: random.Random, lattice: QLattice) -> tuple[QLattice, int]:
    """A random sublattice and its index."""
    n = lattice.ambient_dim
    while True:
        columns = [[rng.randint(-2, 3) for _ in range(n)] for _ in range(n)]
        index = abs(integer_determinant(columns))
        if index:
            return QLattice(tuple(lattice.vector(c) for c in columns)), index


class TestNormalFormProperties:
    """Test normal forms on fixed points and random matrices."""

    def test_fixed_points(self):
        identity = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
        assert hnf(identity) == identity
        assert hnf([[0, 0], [0, 0]]) == ((0, 0), (0, 0))
        assert snf(identity).diagonal == (1, 1, 1)
        assert snf([[0, 0], [0, 0]]).diagonal == (0, 0)

    def test_smith_by_hand(self):
        assert snf([[2, 4], [6, 8]]).diagonal == (2, 4)

    def test_tall_hermite_form(self):
        assert hnf([[0], [-3], [6]]) == ((0,), (3,), (-6,))
        assert hnf([[2], [4], [6]]) == ((2,), (4,), (6,))

    def test_random_spans_agree(self):
        rng = random.Random(7)
        for _ in range(25):
            n = rng.randint(1, 4)
            matrix = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
            if integer_determinant(matrix) == 0:
                continue
            original = QLattice(tuple(zip(*matrix, strict=True)))
            normal = QLattice(tuple(zip(*hnf(matrix), strict=True)))
            assert all(original.contains(v) for v in normal.basis)
            assert all(normal.contains(v) for v in original.basis)

    def test_random_smith_determinant(self):
        rng = random.Random(11)
        for _ in range(25):
            n = rng.randint(1, 4)
            matrix = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
            diagonal = snf(matrix).diagonal
            assert prod(diagonal) == abs(integer_determinant(matrix))
            for a, b in zip(diagonal, diagonal[1:], strict=False):
                assert b % a == 0 if a else b == 0


class TestLatticeProperties:
    """Test indices and orders against direct enumeration."""

    def test_index_by_coset_enumeration(self):
        lattice = QLattice(((2, 0), (1, 3)))
        cosets = {
            tuple(c % 1 for c in lattice.coordinates((x, y)))
            for x, y in product(range(6), repeat=2)
        }
        assert len(cosets) == 6
        assert lattice_index(QLattice.standard(2), lattice) == 6

    def test_index_is_multiplicative(self):
        rng = random.Random(3)
        for _ in range(20):
            top = _random_lattice(rng, rng.randint(1, 3))
            middle, first = _sublattice(rng, top)
            bottom, second = _sublattice(rng, middle)
            assert lattice_index(top, middle) == first
            assert lattice_index(middle, bottom) == second
            assert lattice_index(top, bottom) == first * second

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_p_order_invariant_under_translation(self, p):
        rng = random.Random(p)
        for _ in range(20):
            n = rng.randint(1, 3)
            lattice = _random_lattice(rng, n)
            w = tuple(
                F(rng.randint(-7, 7), rng.choice((1, 2, 3, 4, 5, 9))) for _ in range(n)
            )
            shift = lattice.vector([rng.randint(-4, 4) for _ in range(n)])
            moved = tuple(a + b for a, b in zip(w, shift, strict=True))
            assert p_order_in_lattice(moved, lattice, p) == p_order_in_lattice(
                w, lattice, p
            )

    def test_order_matches_multiple_search(self):
        rng = random.Random(19)
        for _ in range(20):
            n = rng.randint(1, 3)
            local = {2: _random_lattice(rng, n), 3: _random_lattice(rng, n)}
            w = tuple(
                F(rng.randint(-7, 7), rng.choice((1, 2, 3, 4, 5, 6, 10)))
                for _ in range(n)
            )
            coordinates = {p: lattice.coordinates(w) for p, lattice in local.items()}

            def absorbs(m: int) -> bool:
                # Inside each listed completion, integral at every other prime
                for p, coords in coordinates.items():
                    if any((m * c).denominator % p == 0 for c in coords):
                        return False
                rest = common_denominator(m * x for x in w)
                while rest % 2 == 0:
                    rest //= 2
                while rest % 3 == 0:
                    rest //= 3
                return rest == 1

            smallest = next(m for m in count(1) if absorbs(m))
            assert order_in_lattice(w, local) == smallest
