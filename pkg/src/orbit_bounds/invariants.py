"""
Test invariants, defect primes and bound values for special-subvariety data.

A datum consists of a torus ``T``, a decomposition of the coordinates of
``W = U x V`` into blocks on which ``T`` acts through a character, the
polarization ``psi``, a point ``w`` of ``W(Q)`` and optionally a subspace
``W'``. A level is maximal at all but finitely many primes; at the others it
has a local lattice for ``W`` and a congruence depth for ``T``.

At each prime the block depths of ``w`` (p-orders of the block components of
``w`` relative to the local lattice) determine the stabilizer of ``w`` in the
torus, and :mod:`orbit_bounds.localtori` turns this into an index. From these
indices come the defect sets, the test invariant ``tau`` and the bound values.
"""

import logging
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import cached_property
from math import floor, prod
from typing import NamedTuple

from sympy import isprime, multiplicity, primefactors
from sympy.ntheory.modular import crt

from orbit_bounds.errors import (
    DimensionMismatch,
    InvalidInputError,
    TrivialSubrepresentation,
    UnsupportedClassNumber,
)
from orbit_bounds.exactalg import (
    QLattice,
    Vector,
    adapted_basis,
    common_denominator,
    global_lattice,
    hnf,
    order_in_lattice,
    p_order_in_lattice,
    to_vector,
)
from orbit_bounds.field_cache import FieldCache
from orbit_bounds.fields import (
    AbelianFieldSpec,
    abelian_field_discriminant,
    quadratic_class_number,
    real_quadratic_class_number,
)
from orbit_bounds.heisenberg import HeisenbergElement, PolarizationForm
from orbit_bounds.localtori import level_index, stabilizer_index
from orbit_bounds.tori import (
    CharacterSpec,
    NormOneFactor,
    SplitFactor,
    TorusFactor,
    TorusSpec,
    WeilRestrictionFactor,
)

__all__ = [
    "ActionBlock",
    "BoundConstants",
    "BoundsReport",
    "CharacterSpec",
    "Classification",
    "ClassKey",
    "CosetMinimum",
    "InvariantReport",
    "LevelException",
    "LevelSpec",
    "LowerBound",
    "NormOneFactor",
    "PrimeDefect",
    "SplitFactor",
    "SubvarietyDatum",
    "TorusFactor",
    "TorusSpec",
    "WeilRestrictionFactor",
    "bounds_report",
    "class_number_T",
    "classify_sequence",
    "decompose_scaling",
    "defect_primes",
    "evaluate_prime",
    "evaluate_primes",
    "intersect_levels",
    "lower_bound",
    "minimize_over_coset",
    "splitting_discriminant",
    "test_invariant",
    "unipotent_index_I",
    "upper_bound",
]

logger = logging.getLogger(__name__)

# Significant digits carried when evaluating logarithms
DECIMAL_PRECISION = 40


# ---------------------------------------------------------------------------
# Data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionBlock:
    """Coordinates of W (U first, then V) on which the torus acts by ``character``."""

    coordinates: tuple[int, ...]
    character: CharacterSpec

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(int(i) for i in self.coordinates))


@dataclass(frozen=True)
class SubvarietyDatum:
    """
    One special-subvariety instance.

    Attributes:
        torus: The torus T.
        action: Blocks partitioning the coordinates of W.
        psi: Polarization defining the group law on W.
        w: The unipotent translate.
        w_prime_space: Basis of the subspace W' (empty when W' = 0).

    Raises:
        DimensionMismatch: If blocks, ``w`` or ``W'`` do not fit ``psi``.
    """

    torus: TorusSpec
    action: tuple[ActionBlock, ...]
    psi: PolarizationForm
    w: HeisenbergElement
    w_prime_space: tuple[Vector, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "action", tuple(self.action))
        object.__setattr__(
            self, "w_prime_space", tuple(to_vector(v) for v in self.w_prime_space)
        )
        if len(self.w.u) != self.psi.dim_u or len(self.w.v) != self.psi.dim_v:
            raise DimensionMismatch("w does not match the dimensions of psi")
        covered = sorted(i for block in self.action for i in block.coordinates)
        if covered != list(range(self.psi.dim)):
            raise DimensionMismatch(
                f"action blocks must partition the coordinates 0..{self.psi.dim - 1}"
            )
        for block in self.action:
            block.character.validate(self.torus)
        if any(len(v) != self.psi.dim for v in self.w_prime_space):
            raise DimensionMismatch("W' basis vectors must have length dim W")

    @property
    def dim(self) -> int:
        return self.psi.dim

    def with_w(self, w: HeisenbergElement) -> "SubvarietyDatum":
        return replace(self, w=w)


@dataclass(frozen=True)
class LevelException:
    """
    Level data at one prime.

    Attributes:
        t_depth: The torus part is ``{t : t = 1 mod p^t_depth}``.
        w_lattice: Lattice whose p-adic completion is the local lattice of W
            (``None`` means ``Z_p^n``).
    """

    t_depth: int = 0
    w_lattice: QLattice | None = None

    def __post_init__(self):
        if self.t_depth < 0:
            raise InvalidInputError("t_depth must be nonnegative")


@dataclass(frozen=True)
class LevelSpec:
    """A level of fine product type: maximal away from finitely many primes."""

    dim: int
    exceptions: Mapping[int, LevelException] = field(default_factory=dict)

    def __post_init__(self):
        exceptions = dict(sorted(self.exceptions.items()))
        for p, exception in exceptions.items():
            if not isprime(p):
                raise InvalidInputError(f"level exception at non-prime {p}")
            if exception.w_lattice is not None and exception.w_lattice.ambient_dim != self.dim:
                raise DimensionMismatch(f"level lattice at p={p} has the wrong rank")
        object.__setattr__(self, "exceptions", exceptions)

    @classmethod
    def maximal(cls, dim: int) -> "LevelSpec":
        return cls(dim=dim)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(self.exceptions)

    def t_depth(self, p: int) -> int:
        exception = self.exceptions.get(p)
        return exception.t_depth if exception else 0

    def local_lattice(self, p: int) -> QLattice:
        exception = self.exceptions.get(p)
        if exception is None or exception.w_lattice is None:
            return QLattice.standard(self.dim)
        return exception.w_lattice

    def local_lattices(self) -> dict[int, QLattice]:
        """Primes whose W-lattice differs from the default, with their lattices."""
        return {
            p: exception.w_lattice
            for p, exception in self.exceptions.items()
            if exception.w_lattice is not None
        }

    @cached_property
    def integral_lattice(self) -> QLattice:
        """``Gamma_W = W(Q) cap K_W``."""
        return global_lattice(self.dim, self.local_lattices())


@dataclass(frozen=True)
class BoundConstants:
    """The constants ``b``, ``c_N``, ``c_0`` and the exponent ``N``."""

    b: Fraction = Fraction(1)
    c_N: Fraction = Fraction(1)
    c_0: Fraction = Fraction(1)
    N: int = 2

    def __post_init__(self):
        for name in ("b", "c_N", "c_0"):
            value = Fraction(getattr(self, name))
            if value <= 0:
                raise InvalidInputError(f"constant {name} must be positive")
            object.__setattr__(self, name, value)
        if int(self.N) != self.N or self.N < 1:
            raise InvalidInputError("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))


@dataclass(frozen=True)
class PrimeDefect:
    """Everything computed at one prime."""

    prime: int
    block_depths: tuple[int, ...]
    level_depth: int
    index: int
    level_index: int
    unipotent_index: Fraction

    @property
    def is_defect(self) -> bool:
        """The prime lies in Delta: the stabilizer in the level is proper."""
        return self.index > 1

    @property
    def is_unipotent_defect(self) -> bool:
        """The prime lies in delta: ``w`` shrinks the stabilizer further."""
        return self.index > self.level_index


@dataclass(frozen=True)
class CosetMinimum:
    """Representative of ``w + W'`` with the least order at every prime."""

    element: HeisenbergElement
    orders: Mapping[int, int]


@dataclass(frozen=True)
class LowerBound:
    value: Decimal
    product: Fraction
    degenerate: bool


@dataclass(frozen=True)
class BoundsReport:
    lower: LowerBound
    upper: Fraction | None
    class_number: int | None
    order: int
    unsupported: str | None = None


@dataclass(frozen=True)
class InvariantReport:
    """
    All quantities attached to a datum and a level.

    ``tau`` and the per-prime data refer to the minimising representative;
    the bounds refer to the given ``w``.
    """

    discriminant: int
    defect_primes: tuple[int, ...]
    unipotent_primes: tuple[int, ...]
    primes: tuple[PrimeDefect, ...]
    tau: Fraction
    bounds: BoundsReport
    minimum: CosetMinimum

    @property
    def lower_bound(self) -> LowerBound:
        return self.bounds.lower

    @property
    def upper_bound(self) -> Fraction | None:
        return self.bounds.upper


class ClassKey(NamedTuple):
    """Torus signature and minimised ``w`` modulo ``Gamma_W`` (lattice coordinates)."""

    signature: tuple[str, ...]
    residue: tuple[Fraction, ...]


@dataclass(frozen=True)
class Classification:
    taus: tuple[Fraction, ...]
    max_tau: Fraction | None
    bounded: bool
    classes: tuple[ClassKey, ...]


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------


def decompose_scaling(action: Iterable[ActionBlock]) -> tuple[ActionBlock, ...]:
    """
    Merge blocks carrying the same character, in order of first appearance.

    Raises:
        TrivialSubrepresentation: If a block carries the trivial character.
    """
    groups: dict[CharacterSpec, list[int]] = {}
    for block in action:
        if block.character.is_trivial:
            raise TrivialSubrepresentation(
                f"block {list(block.coordinates)} carries the trivial character"
            )
        groups.setdefault(block.character, []).extend(block.coordinates)
    return tuple(
        ActionBlock(coordinates=tuple(sorted(coordinates)), character=chi)
        for chi, coordinates in groups.items()
    )


def _project(coordinates: Sequence[Fraction], keep: Iterable[int]) -> Vector:
    keep = set(keep)
    return tuple(x if i in keep else Fraction(0) for i, x in enumerate(coordinates))


def _candidate_primes(w: HeisenbergElement, level: LevelSpec) -> list[int]:
    primes = set(primefactors(common_denominator(w.coordinates))) | set(level.primes)
    return sorted(primes)


def splitting_discriminant(torus: TorusSpec, cache: FieldCache | None = None) -> int:
    """``|disc|`` of the compositum of the splitting fields of the factors."""
    compositum = AbelianFieldSpec.compositum(factor.field for factor in torus.factors)
    return abelian_field_discriminant(compositum, cache=cache)


def class_number_T(torus: TorusSpec, cache: FieldCache | None = None) -> int:
    """
    Class number of the torus with maximal level.

    The user override wins. Otherwise split factors contribute 1 and Weil
    restrictions of quadratic fields contribute the class number of the field
    (real fields only up to the enumeration limit).

    Raises:
        UnsupportedClassNumber: For norm-one factors, fields of degree > 2 and
            large real quadratic fields without an override.
    """
    if torus.class_number_override is not None:
        return torus.class_number_override

    h = 1
    for factor in torus.factors:
        if isinstance(factor, SplitFactor):
            continue
        if isinstance(factor, NormOneFactor):
            raise UnsupportedClassNumber(
                f"{factor.signature}: norm-one tori need a class number override"
            )
        field_spec = factor.field
        if field_spec.degree == 1:
            continue
        if field_spec.degree != 2:
            raise UnsupportedClassNumber(
                f"{factor.signature}: class numbers of degree {field_spec.degree} "
                "fields are not computed"
            )
        d = field_spec.quadratic_discriminant(cache=cache)
        if d < 0:
            h *= quadratic_class_number(d, cache=cache)
        else:
            h *= real_quadratic_class_number(d, cache=cache)
    return h


def evaluate_prime(
    datum: SubvarietyDatum,
    level: LevelSpec,
    p: int,
    constants: BoundConstants | None = None,
    precision_max: int | None = None,
) -> PrimeDefect:
    """
    Block depths, stabilizer index and level index at one prime.

    Args:
        datum: The datum (its ``w`` is used as given).
        level: The level.
        p: Prime.
        constants: Supplies ``b`` for the unipotent index.
        precision_max: Cap on the p-adic precision.

    Returns:
        PrimeDefect: The per-prime data.
    """
    constants = constants or BoundConstants()
    blocks = decompose_scaling(datum.action)
    lattice = level.local_lattice(p)
    coordinates = datum.w.coordinates
    depths = tuple(
        p_order_in_lattice(_project(coordinates, block.coordinates), lattice, p)
        for block in blocks
    )
    t_depth = level.t_depth(p)
    index = stabilizer_index(
        datum.torus,
        [(block.character, depth) for block, depth in zip(blocks, depths, strict=True)],
        p,
        level_depth=t_depth,
        precision_max=precision_max,
    )
    level_only = (
        level_index(datum.torus, p, t_depth, precision_max=precision_max) if t_depth else 1
    )
    logger.debug(
        "p=%d: block depths %s, level depth %d, index %d, level index %d",
        p,
        depths,
        t_depth,
        index,
        level_only,
    )
    return PrimeDefect(
        prime=p,
        block_depths=depths,
        level_depth=t_depth,
        index=index,
        level_index=level_only,
        unipotent_index=constants.b * index,
    )


def evaluate_primes(
    datum: SubvarietyDatum,
    level: LevelSpec,
    constants: BoundConstants | None = None,
    precision_max: int | None = None,
) -> tuple[PrimeDefect, ...]:
    """Per-prime data, ascending, at the primes of ``w`` and of the level."""
    constants = constants or BoundConstants()
    return tuple(
        evaluate_prime(datum, level, p, constants, precision_max)
        for p in _candidate_primes(datum.w, level)
    )


def defect_primes(
    datum: SubvarietyDatum, level: LevelSpec, precision_max: int | None = None
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """
    The defect sets ``(Delta, delta)`` for the given ``w``.

    Only primes dividing a denominator of ``w`` or carrying a level exception
    can be defects; both sets come back in ascending order.
    """
    defects = evaluate_primes(datum, level, BoundConstants(), precision_max)
    return (
        tuple(d.prime for d in defects if d.is_defect),
        tuple(d.prime for d in defects if d.is_unipotent_defect),
    )


def unipotent_index_I(
    datum: SubvarietyDatum,
    level: LevelSpec,
    p: int,
    constants: BoundConstants | None = None,
    precision_max: int | None = None,
) -> Fraction:
    """``I_p = b * [K^max : K_T(w)_p]``."""
    return evaluate_prime(datum, level, p, constants, precision_max).unipotent_index


def _residue(x: Fraction, p: int, m: int) -> int:
    """``p^m * x`` as an integer mod ``p^m``; ``x`` has p-order at most ``m``."""
    modulus = p**m
    scaled = x * modulus
    return scaled.numerator * pow(scaled.denominator, -1, modulus) % modulus


def _valuation(value: int, p: int, m: int) -> int:
    value %= p**m
    return m if value == 0 else int(multiplicity(p, value))


def _reduce_mod(vector: Sequence, generators: Sequence[Sequence[int]]) -> list:
    """Canonical representative of ``vector`` modulo the span of ``generators``."""
    vector = list(vector)
    if not generators:
        return vector
    n = len(vector)
    reduced = hnf([[g[i] for g in generators] for i in range(n)])
    for col in range(len(generators)):
        row = next((i for i in range(n) if reduced[i][col]), None)
        if row is None:
            break
        q = floor(Fraction(vector[row]) / reduced[row][col])
        if q:
            vector = [x - q * reduced[i][col] for i, x in enumerate(vector)]
    return vector


def _local_shift(
    offset: Sequence[Fraction], directions: Sequence[Sequence[int]], p: int, m: int
) -> list[int]:
    """
    Multipliers ``t`` mod ``p^m`` for ``offset + sum(t_i * directions[i]) / p^m``.

    Going through the coordinates in order, each one is made p-integral when
    some ``t`` in the current solution set allows it; the set then shrinks to
    the ``t`` that keep it so. The surviving coset is reduced to a canonical
    representative.
    """
    modulus = p**m
    r = len(directions)
    shift = [0] * r
    steps = [[int(i == j) for j in range(r)] for i in range(r)]
    for j, coordinate in enumerate(offset):
        moved = sum(d[j] * s for d, s in zip(directions, shift, strict=True))
        c = (_residue(coordinate, p, m) + moved) % modulus
        h = [
            sum(d[j] * x for d, x in zip(directions, step, strict=True)) % modulus
            for step in steps
        ]
        least = min(_valuation(x, p, m) for x in h)
        if least == m or _valuation(c, p, m) < least:
            continue
        pick = next(i for i, x in enumerate(h) if _valuation(x, p, m) == least)
        rest = p ** (m - least)
        unit_inverse = pow(h[pick] // p**least, -1, rest)
        k = -(c // p**least) * unit_inverse % rest
        shift = [s + k * x for s, x in zip(shift, steps[pick], strict=True)]

        # Basis of {x : h . x = 0 mod p^m} in terms of the current steps
        kernel = []
        for i in range(r):
            x = [0] * r
            if i == pick:
                x[pick] = rest
            else:
                x[i] = 1
                x[pick] = -(h[i] // p**least) * unit_inverse % rest
            kernel.append(x)
        steps = [
            [sum(x[i] * steps[i][a] for i in range(r)) for a in range(r)] for x in kernel
        ]
    return [s % modulus for s in _reduce_mod(shift, steps)]


def minimize_over_coset(
    w: HeisenbergElement,
    w_prime_space: Sequence[Sequence[Fraction]],
    level: LevelSpec,
) -> CosetMinimum:
    """
    A representative of ``w + W'`` of least order at every prime at once.

    In coordinates relative to ``Gamma_W``, a unimodular basis adapted to
    ``W'`` splits the coordinates of ``w`` into a ``W'`` part and a quotient
    part, whose denominators are exactly the orders ``m_p`` of the class of
    ``w`` in ``W / W'``. The order-minimal representatives are the quotient
    part plus ``W'`` parts in ``(1/N) Z``, ``N = prod p^m_p``.

    Among those, the representative is chosen prime by prime: the ``W'`` part
    modulo ``p^m_p`` makes the ``Gamma_W`` coordinates p-integral in
    lexicographic order as far as possible, so the tuple of coordinate
    denominators is lexicographically least. The local choices are glued by
    the Chinese remainder theorem and the result is reduced modulo
    ``Gamma_W cap W'``.

    Args:
        w: The translate.
        w_prime_space: Basis of ``W'`` (possibly empty or spanning W).
        level: Supplies ``Gamma_W``.

    Returns:
        CosetMinimum: The representative and its positive per-prime orders.
    """
    coordinates = w.coordinates
    dim = len(coordinates)
    if dim != level.dim:
        raise DimensionMismatch("w and the level live in different dimensions")

    gamma = level.integral_lattice
    c = gamma.coordinates(coordinates)
    subspace = [gamma.coordinates(v) for v in w_prime_space]
    adapted = adapted_basis(subspace, dim)
    y = [
        sum((row[j] * c[j] for j in range(dim)), Fraction(0))
        for row in adapted.transform
    ]
    quotient = y[adapted.rank :]
    directions = adapted.basis[: adapted.rank]

    offset = [Fraction(0)] * dim
    for coefficient, column in zip(
        quotient, adapted.basis[adapted.rank :], strict=True
    ):
        if coefficient:
            for i, x in enumerate(column):
                offset[i] += coefficient * x

    orders = {
        p: max(int(multiplicity(p, q.denominator)) for q in quotient)
        for p in primefactors(common_denominator(quotient))
    }
    if directions and orders:
        modulus = prod(p**m for p, m in orders.items())
        local = {p: _local_shift(offset, directions, p, m) for p, m in orders.items()}
        moduli = [p ** orders[p] for p in local]
        for i, direction in enumerate(directions):
            residues = [t[i] * (modulus // p ** orders[p]) for p, t in local.items()]
            x, _ = crt(moduli, residues)
            s = Fraction(int(x), modulus)
            offset = [a + s * d for a, d in zip(offset, direction, strict=True)]
    reduced = _reduce_mod(offset, directions)

    element = HeisenbergElement.from_coordinates(gamma.vector(reduced), len(w.u))
    return CosetMinimum(element=element, orders=orders)


def _decimal(value: Fraction) -> Decimal:
    return Decimal(value.numerator) / Decimal(value.denominator)


def _lower_from(
    discriminant: int, defects: Iterable[PrimeDefect], constants: BoundConstants
) -> LowerBound:
    product = Fraction(1)
    for defect in defects:
        if defect.is_defect:
            product *= max(Fraction(1), defect.unipotent_index)
    if discriminant == 1:
        return LowerBound(value=Decimal(0), product=product, degenerate=True)
    with localcontext() as context:
        context.prec = DECIMAL_PRECISION
        value = (
            _decimal(constants.c_N)
            * Decimal(discriminant).ln() ** constants.N
            * _decimal(product)
        )
    return LowerBound(value=value, product=product, degenerate=False)


def lower_bound(
    datum: SubvarietyDatum,
    level: LevelSpec,
    constants: BoundConstants | None = None,
    cache: FieldCache | None = None,
    precision_max: int | None = None,
) -> LowerBound:
    """
    ``c_N (log D)^N prod_{p in Delta} max(1, I_p)`` at the given ``w``.

    The logarithm is natural. When ``D = 1`` the value is 0 and the result is
    flagged degenerate.
    """
    constants = constants or BoundConstants()
    discriminant = splitting_discriminant(datum.torus, cache=cache)
    defects = evaluate_primes(datum, level, constants, precision_max)
    return _lower_from(discriminant, defects, constants)


def upper_bound(
    datum: SubvarietyDatum,
    level: LevelSpec,
    constants: BoundConstants | None = None,
    cache: FieldCache | None = None,
) -> Fraction:
    """
    ``c_0 C(T) ord(w)^((dim W)^2)``, exactly.

    Raises:
        UnsupportedClassNumber: If the class number of the torus is unknown.
    """
    constants = constants or BoundConstants()
    order = order_in_lattice(datum.w.coordinates, level.local_lattices())
    return constants.c_0 * class_number_T(datum.torus, cache=cache) * order ** (datum.dim**2)


def bounds_report(
    datum: SubvarietyDatum,
    level: LevelSpec,
    constants: BoundConstants | None = None,
    require_upper: bool = False,
    cache: FieldCache | None = None,
    precision_max: int | None = None,
) -> BoundsReport:
    """
    Lower and upper bound together.

    Without ``require_upper`` a missing class number leaves the upper bound
    empty and records the reason instead of raising.
    """
    constants = constants or BoundConstants()
    discriminant = splitting_discriminant(datum.torus, cache=cache)
    defects = evaluate_primes(datum, level, constants, precision_max)
    return _bounds_from(datum, level, constants, discriminant, defects, require_upper, cache)


def _bounds_from(
    datum: SubvarietyDatum,
    level: LevelSpec,
    constants: BoundConstants,
    discriminant: int,
    defects: Iterable[PrimeDefect],
    require_upper: bool,
    cache: FieldCache | None,
) -> BoundsReport:
    lower = _lower_from(discriminant, defects, constants)
    order = order_in_lattice(datum.w.coordinates, level.local_lattices())
    try:
        class_number = class_number_T(datum.torus, cache=cache)
    except UnsupportedClassNumber as e:
        if require_upper:
            raise
        logger.info("Upper bound unavailable: %s", e)
        return BoundsReport(
            lower=lower, upper=None, class_number=None, order=order, unsupported=str(e)
        )
    upper = constants.c_0 * class_number * order ** (datum.dim**2)
    return BoundsReport(lower=lower, upper=upper, class_number=class_number, order=order)


def test_invariant(
    datum: SubvarietyDatum,
    level: LevelSpec,
    constants: BoundConstants | None = None,
    *,
    require_upper: bool = False,
    cache: FieldCache | None = None,
    precision_max: int | None = None,
) -> InvariantReport:
    """
    The test invariant and everything it is built from.

    ``tau = D(T) * prod_{p in Delta} max(1, I_p)``, evaluated at the
    representative of ``w + W'`` returned by :func:`minimize_over_coset`.

    Args:
        datum: The datum.
        level: The level.
        constants: Bound constants (defaults: all 1, ``N = 2``).
        require_upper: Raise instead of leaving the upper bound empty when the
            class number is unsupported.
        cache: Optional field cache.
        precision_max: Cap on the p-adic precision.

    Returns:
        InvariantReport: tau, defect sets, per-prime data and bounds.
    """
    constants = constants or BoundConstants()
    minimum = minimize_over_coset(datum.w, datum.w_prime_space, level)
    minimized = datum.with_w(minimum.element)
    discriminant = splitting_discriminant(datum.torus, cache=cache)

    defects = evaluate_primes(minimized, level, constants, precision_max)
    tau = Fraction(discriminant)
    for defect in defects:
        if defect.is_defect:
            tau *= max(Fraction(1), defect.unipotent_index)

    if minimum.element == datum.w:
        given_defects = defects
    else:
        given_defects = evaluate_primes(datum, level, constants, precision_max)
    bounds = _bounds_from(
        datum, level, constants, discriminant, given_defects, require_upper, cache
    )

    return InvariantReport(
        discriminant=discriminant,
        defect_primes=tuple(d.prime for d in defects if d.is_defect),
        unipotent_primes=tuple(d.prime for d in defects if d.is_unipotent_defect),
        primes=defects,
        tau=tau,
        bounds=bounds,
        minimum=minimum,
    )


test_invariant.__test__ = False


def intersect_levels(
    level: LevelSpec,
    w_list: Iterable[HeisenbergElement | Sequence[Fraction]],
    action: Iterable[ActionBlock],
) -> LevelSpec:
    """
    Shrink the torus part of a level until it fixes every ``w`` in the list.

    The new depth at each prime is the largest of the old depth and the
    p-orders of each ``w`` and of its projections onto the character blocks of
    ``action``. With a non-diagonal local lattice a projection can have a
    larger p-order than the whole vector. Lattices and all other primes are
    left alone.

    Args:
        level: The starting level.
        w_list: Translates (elements or coordinate vectors).
        action: Action blocks of the datum the translates belong to.

    Returns:
        LevelSpec: The intersected level; no translate in ``w_list`` has a
            unipotent defect against it.
    """
    vectors = [
        w.coordinates if isinstance(w, HeisenbergElement) else to_vector(w) for w in w_list
    ]
    blocks = [block.coordinates for block in decompose_scaling(action)]
    if any(i >= level.dim for block in blocks for i in block):
        raise DimensionMismatch("action blocks and the level live in different dimensions")
    primes = set(level.primes)
    for vector in vectors:
        if len(vector) != level.dim:
            raise DimensionMismatch("w and the level live in different dimensions")
        primes |= set(primefactors(common_denominator(vector)))

    exceptions = dict(level.exceptions)
    for p in sorted(primes):
        lattice = level.local_lattice(p)
        depth = level.t_depth(p)
        for vector in vectors:
            depth = max(
                depth,
                p_order_in_lattice(vector, lattice, p),
                *(p_order_in_lattice(_project(vector, block), lattice, p) for block in blocks),
            )
        if depth != level.t_depth(p):
            previous = exceptions.get(p, LevelException())
            exceptions[p] = replace(previous, t_depth=depth)
            logger.debug("Level depth at p=%d raised to %d", p, depth)
    return LevelSpec(dim=level.dim, exceptions=exceptions)


def class_key(
    datum: SubvarietyDatum, level: LevelSpec, minimized: HeisenbergElement
) -> ClassKey:
    """Torus signature plus the lattice coordinates of ``w'`` reduced mod 1."""
    coordinates = level.integral_lattice.coordinates(minimized.coordinates)
    residue = tuple(x - floor(x) for x in coordinates)
    return ClassKey(signature=datum.torus.signature(), residue=residue)


def classify_sequence(
    items: Sequence[tuple],
    threshold: Fraction,
    constants: BoundConstants | None = None,
    *,
    max_workers: int = 4,
    cache: FieldCache | None = None,
    precision_max: int | None = None,
) -> Classification:
    """
    Test invariants of a finite sequence and its bounding classes.

    Args:
        items: ``(datum, level)`` pairs, optionally with per-item constants
            as a third entry.
        threshold: Bound C for the bounded verdict ``max tau <= C``.
        constants: Constants for items that carry none.
        max_workers: Thread pool size.
        cache: Optional field cache shared by all items.
        precision_max: Cap on the p-adic precision.

    Returns:
        Classification: Per-item tau in input order, the maximum, the verdict
            and the sorted distinct classes.
    """
    default_constants = constants or BoundConstants()
    threshold = Fraction(threshold)

    def evaluate(item: tuple) -> tuple[Fraction, ClassKey]:
        datum, level, *rest = item
        report = test_invariant(
            datum,
            level,
            rest[0] if rest else default_constants,
            cache=cache,
            precision_max=precision_max,
        )
        return report.tau, class_key(datum, level, report.minimum.element)

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        results = list(pool.map(evaluate, items))

    taus = tuple(tau for tau, _ in results)
    max_tau = max(taus, default=None)
    classes = tuple(sorted({key for _, key in results}))
    bounded = max_tau is None or max_tau <= threshold
    logger.info(
        "Classified %d items: max tau %s, %d classes, %s",
        len(taus),
        max_tau,
        len(classes),
        "bounded" if bounded else "unbounded",
    )
    return Classification(taus=taus, max_tau=max_tau, bounded=bounded, classes=classes)
