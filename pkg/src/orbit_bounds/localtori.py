"""
p-adic points of supported tori at finite precision.

The maximal compact subgroup of a factor at ``p`` is ``(O_F (x) Z_p)^x``
(``Z_p^x`` for split factors). It is handled through its finite quotients
modulo ``p^k``: a generating set is built for each quotient, and every index
is the size of an orbit of the identity under generator images, found by
breadth-first search.

Precision policy: orbit computations start at ``k = max depth + 2`` and double
until two consecutive precisions agree, capped at ``max depth + 8`` (or an
explicit ``precision_max``). Anything that does not settle raises
:class:`~orbit_bounds.errors.PrecisionNotStabilized`.
"""

import dataclasses
import logging
from collections.abc import Callable, Hashable, Iterator, Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from sympy import Poly, Symbol, cyclotomic_poly, isprime, primitive_root, totient

from orbit_bounds.errors import (
    InvalidInputError,
    PrecisionNotStabilized,
    Unsupported,
    UnsupportedCharacter,
    UnsupportedField,
)
from orbit_bounds.exactalg import integer_determinant
from orbit_bounds.fields import (
    AbelianFieldSpec,
    LocalSplitting,
    generated_subgroup,
    local_splitting,
)
from orbit_bounds.tori import (
    CharacterSpec,
    NormOneFactor,
    SplitFactor,
    TorusSpec,
    WeilRestrictionFactor,
)

logger = logging.getLogger(__name__)

# Largest residue ring O/p^j enumerated element by element
RESIDUE_LIMIT = 200_000
# Largest orbit explored by breadth-first search
ORBIT_LIMIT = 1_000_000
# Default cap on precision above the largest depth
PRECISION_SLACK = 8

Element = tuple[int, ...]


@lru_cache(maxsize=128)
def _integral_polynomial(field: AbelianFieldSpec) -> tuple[int, ...]:
    """Monic polynomial (constant term first) whose root generates O_F."""
    if field.degree == 1:
        return (0, 1)
    if field.degree == 2:
        d = field.quadratic_discriminant()
        if d % 4 == 1:
            return (-(d - 1) // 4, -1, 1)
        return (-d // 4, 0, 1)
    if field.is_cyclotomic:
        x = Symbol("x")
        coefficients = Poly(cyclotomic_poly(field.modulus, x), x).all_coeffs()
        return tuple(int(c) for c in reversed(coefficients))
    raise UnsupportedField(
        f"field {field.cache_key} of degree {field.degree} has no supported "
        "integral basis (only Q, quadratic and cyclotomic fields)"
    )


class LocalRing:
    """
    The ring ``(O_F (x) Z_p) / p^k`` on the power basis of an integral generator.

    Elements are tuples of residues modulo ``p^k``. For Q the generator is
    ``x``; for quadratic fields it is a root of ``x^2 - x - (d-1)/4`` or
    ``x^2 - d/4``; for cyclotomic fields a root of ``Phi_n``.
    """

    def __init__(self, field: AbelianFieldSpec, p: int, k: int):
        if k < 0:
            raise InvalidInputError(f"precision must be nonnegative, got {k}")
        self.field = field
        self.p = p
        self.k = k
        self.modulus = p**k
        polynomial = _integral_polynomial(field)
        self.degree = len(polynomial) - 1

        # Reductions of x^j, j < 2 * degree - 1, as integer vectors
        powers = [tuple(int(i == j) for i in range(self.degree)) for j in range(self.degree)]
        current = powers[-1]
        for _ in range(self.degree - 1):
            shifted = (0,) + current
            top = shifted[-1]
            current = tuple(
                shifted[i] - top * polynomial[i] for i in range(self.degree)
            )
            powers.append(current)
        self._powers = tuple(powers)

    def __repr__(self) -> str:
        return f"LocalRing({self.field.cache_key}, p={self.p}, k={self.k})"

    @property
    def one(self) -> Element:
        return self.reduce((1,) + (0,) * (self.degree - 1))

    def basis_element(self, i: int) -> Element:
        return self.reduce(tuple(int(i == j) for j in range(self.degree)))

    def reduce(self, a: Sequence[int], precision: int | None = None) -> Element:
        modulus = self.modulus if precision is None else self.p**precision
        return tuple(int(x) % modulus for x in a)

    def mul(self, a: Element, b: Element) -> Element:
        product_coefficients = [0] * (2 * self.degree - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    product_coefficients[i + j] += x * y
        result = [0] * self.degree
        for coefficient, power in zip(product_coefficients, self._powers, strict=True):
            if coefficient:
                for i, c in enumerate(power):
                    result[i] += coefficient * c
        return tuple(x % self.modulus for x in result)

    def norm(self, a: Element) -> int:
        """Norm to Z_p modulo p^k: determinant of multiplication by ``a``."""
        images = [self.mul(a, self.basis_element(j)) for j in range(self.degree)]
        return integer_determinant(images) % self.modulus

    def is_unit(self, a: Element) -> bool:
        return self.norm(a) % self.p != 0

    def elements(self, precision: int | None = None) -> Iterator[Element]:
        """All residues modulo ``p^precision`` (default: the ring precision)."""
        size = self.modulus if precision is None else self.p**precision
        return product(range(size), repeat=self.degree)


@dataclass(frozen=True)
class LocalUnitGroup:
    """
    Generators of ``(O_F (x) Z_p)^x`` modulo ``p^k``.

    Attributes:
        field: The field F.
        prime: The prime p.
        precision: The exponent k.
        splitting: Decomposition of p in F (one block per prime above p).
        generators: Residues generating the unit quotient.
        ring: The residue ring the generators live in.
    """

    field: AbelianFieldSpec
    prime: int
    precision: int
    splitting: LocalSplitting
    generators: tuple[Element, ...]
    ring: LocalRing = dataclasses.field(compare=False, repr=False)


def _check_prime(p: int) -> None:
    if not isprime(p):
        raise InvalidInputError(f"{p} is not prime")


def congruence_generators(ring: LocalRing, depth: int) -> tuple[Element, ...]:
    """
    Generators of the units ``= 1 mod p^depth`` in ``ring``.

    Uses every residue ``1 + p^depth y`` modulo ``p^top`` (units only when
    ``depth = 0``), where ``top = max(depth, 1)`` for odd p and
    ``max(depth, 2)`` for p = 2, together with ``1 + p^top b`` for each basis
    element ``b``. The second family generates ``1 + p^top O`` at every
    precision because p-th powers move ``1 + p^i O`` onto ``1 + p^(i+1) O``
    once ``i >= top``.

    Raises:
        UnsupportedField: If the residue enumeration is too large.
    """
    p = ring.p
    top = max(depth, 1 if p % 2 else 2)
    spread = p ** (ring.degree * (top - depth))
    if spread > RESIDUE_LIMIT:
        raise UnsupportedField(
            f"{ring!r}: {spread} residues exceed the enumeration limit {RESIDUE_LIMIT}"
        )

    one = ring.one
    step = p**depth
    generators = []
    for offset in product(range(p ** (top - depth)), repeat=ring.degree):
        element = ring.reduce(
            tuple(int(i == 0) + step * o for i, o in enumerate(offset))
        )
        if element == one or (depth == 0 and not ring.is_unit(element)):
            continue
        generators.append(element)
    if top < ring.k:
        for i in range(ring.degree):
            element = ring.reduce(
                tuple(int(j == 0) + p**top * int(j == i) for j in range(ring.degree))
            )
            generators.append(element)
    return tuple(dict.fromkeys(generators))


@lru_cache(maxsize=256)
def _unit_generators(field: AbelianFieldSpec, p: int, k: int) -> LocalUnitGroup:
    ring = LocalRing(field, p, k)
    if ring.degree == 1:
        modulus = p**k
        if p == 2:
            candidates = [-1, 5]
        else:
            candidates = [int(primitive_root(p)), 1 + p]
        generators = tuple(
            dict.fromkeys((c % modulus,) for c in candidates if c % modulus != 1 % modulus)
        )
    else:
        generators = congruence_generators(ring, 0)
    return LocalUnitGroup(
        field=field,
        prime=p,
        precision=k,
        splitting=local_splitting(field, p),
        generators=generators,
        ring=ring,
    )


def unit_group_generators(field: AbelianFieldSpec, p: int, k: int) -> LocalUnitGroup:
    """
    Generators of the unit group of ``O_F (x) Z_p`` modulo ``p^k``.

    For Q these are a lift of a primitive root and ``1 + p`` (``-1`` and ``5``
    for p = 2); otherwise see :func:`congruence_generators`.

    Raises:
        InvalidInputError: If ``k < 1`` or ``p`` is not prime.
        UnsupportedField: For fields without a supported integral basis or
            with too many residues.
    """
    _check_prime(p)
    if k < 1:
        raise InvalidInputError(f"precision must be at least 1, got {k}")
    return _unit_generators(field, p, k)


def expected_unit_group_order(field: AbelianFieldSpec, p: int, k: int) -> int:
    """``|(O_F / p^k)^x| = (p^f - 1)^g * p^(f g (e k - 1))``."""
    splitting = local_splitting(field, p)
    e, f, g = splitting.e, splitting.f, splitting.g
    return (p**f - 1) ** g * p ** (f * g * (e * k - 1))


def unit_group_closure(group: LocalUnitGroup) -> frozenset[Element]:
    """All products of the generators (exhaustive; for small groups only)."""
    ring = group.ring
    return frozenset(
        _orbit(ring.one, group.generators, (ring.mul,), componentwise=False)
    )


def _orbit(
    identity: Hashable,
    generators: Sequence,
    multipliers: Sequence[Callable],
    componentwise: bool = True,
) -> set:
    """
    Breadth-first closure of ``identity`` under products with the generators.

    With ``componentwise`` the elements are tuples multiplied slot by slot,
    one multiplier per slot, even when there is a single slot.
    """
    if not componentwise:
        (mul,) = multipliers

        def step(x, g):
            return mul(x, g)
    else:

        def step(x, g):
            return tuple(m(a, b) for m, a, b in zip(multipliers, x, g, strict=True))

    seen = {identity}
    frontier = [identity]
    while frontier:
        element = frontier.pop()
        for g in generators:
            image = step(element, g)
            if image not in seen:
                seen.add(image)
                frontier.append(image)
                if len(seen) > ORBIT_LIMIT:
                    raise Unsupported(f"orbit exceeds {ORBIT_LIMIT} elements")
    return seen


def subgroup_index(generators: Sequence[int], p: int, k: int) -> int:
    """Index in ``(Z/p^k)^x`` of the subgroup generated by ``generators``."""
    modulus = p**k
    return int(totient(modulus)) // len(generated_subgroup(generators, modulus))


def _stabilized(
    quantity: str,
    p: int,
    compute: Callable[[int], int],
    start: int,
    precision_max: int,
    advance: Callable[[int], int],
) -> int:
    if start >= precision_max:
        raise PrecisionNotStabilized(quantity, p, precision_max)
    k = start
    previous = compute(k)
    while k < precision_max:
        k = min(advance(k), precision_max)
        current = compute(k)
        logger.debug("%s at p=%d, k=%d: %d (previous %d)", quantity, p, k, current, previous)
        if current == previous:
            return current
        previous = current
    raise PrecisionNotStabilized(quantity, p, precision_max)


def norm_image_index(
    field: AbelianFieldSpec,
    p: int,
    k: int | None = None,
    precision_max: int | None = None,
) -> int:
    """
    Index of the norms of local units in ``(Z/p^k)^x``.

    With ``k`` given the index is computed at that precision only. Otherwise
    it is recomputed at consecutive precisions (from 2, or 3 for p = 2) and
    returned once two agree.

    Raises:
        PrecisionNotStabilized: If no two consecutive precisions agree below
            the cap.
    """
    _check_prime(p)

    def at(precision: int) -> int:
        group = unit_group_generators(field, p, precision)
        norms = [group.ring.norm(g) for g in group.generators]
        return subgroup_index(norms, p, precision)

    if k is not None:
        return at(k)
    start = 3 if p == 2 else 2
    cap = precision_max if precision_max is not None else start + PRECISION_SLACK
    return _stabilized("norm image index", p, at, start, cap, lambda j: j + 1)


def scaling_index_closed_form(p: int, m: int) -> int:
    """Index of ``{t = 1 mod p^m}`` in ``Z_p^x``: ``(p - 1) p^(m - 1)``, or 1."""
    if m < 0:
        raise InvalidInputError(f"depth must be nonnegative, got {m}")
    return 1 if m == 0 else (p - 1) * p ** (m - 1)


def character_image(
    factor: SplitFactor | WeilRestrictionFactor | NormOneFactor,
    exponents: Sequence[int],
    p: int,
    k: int,
) -> tuple[int, ...]:
    """
    Generators of the image of the maximal compact subgroup under a character.

    Args:
        factor: A single torus factor.
        exponents: Its part of the character (``rank`` exponents for a split
            factor, one norm power otherwise).
        p: Prime.
        k: Precision; the image lives in ``(Z/p^k)^x``.

    Raises:
        UnsupportedCharacter: For a nonzero character on a norm-one factor.
    """
    modulus = p**k
    exponents = tuple(exponents)
    if isinstance(factor, SplitFactor):
        base = unit_group_generators(AbelianFieldSpec.rational(), p, k).generators
        images = [pow(g[0], e, modulus) for e in exponents for g in base]
    elif isinstance(factor, WeilRestrictionFactor):
        group = unit_group_generators(factor.field, p, k)
        (e,) = exponents
        images = [pow(group.ring.norm(g), e, modulus) for g in group.generators]
    else:
        if any(exponents):
            raise UnsupportedCharacter(
                f"{factor.signature}: only the trivial character is supported"
            )
        images = []
    return tuple(sorted({x for x in images if x != 1 % modulus}))


def _orbit_size(
    torus: TorusSpec,
    action: Sequence[tuple[CharacterSpec, int]],
    p: int,
    k: int,
    level_depth: int,
) -> int:
    """
    ``[K : K(level) cap Stab]`` for the non norm-one part of the torus.

    The homomorphism ``t -> (t mod p^level_depth, chi_b(t) mod p^m_b)`` is
    evaluated on generators; the orbit of the identity is its image.
    """
    level_modulus = p**level_depth
    multipliers: list[Callable] = []
    identity: list = []
    factor_slots: dict[int, int] = {}

    # Level components, one per non norm-one factor
    level_rings: dict[int, LocalRing] = {}
    if level_depth > 0:
        for i, factor in enumerate(torus.factors):
            if isinstance(factor, NormOneFactor):
                continue
            factor_slots[i] = len(identity)
            if isinstance(factor, SplitFactor):
                rank = factor.rank

                def split_mul(a, b, modulus=level_modulus):
                    return tuple(x * y % modulus for x, y in zip(a, b, strict=True))

                multipliers.append(split_mul)
                identity.append((1 % level_modulus,) * rank)
            else:
                ring = LocalRing(factor.field, p, level_depth)
                level_rings[i] = ring
                multipliers.append(ring.mul)
                identity.append(ring.one)

    # Character components, one per block with positive depth
    blocks = [(chi, m) for chi, m in action if m > 0]
    char_slot = len(identity)
    for _, m in blocks:
        modulus = p**m

        def char_mul(a, b, modulus=modulus):
            return a * b % modulus

        multipliers.append(char_mul)
        identity.append(1 % modulus)

    if not multipliers:
        return 1

    images = set()
    for i, factor in enumerate(torus.factors):
        if isinstance(factor, NormOneFactor):
            continue
        if isinstance(factor, SplitFactor):
            base = unit_group_generators(AbelianFieldSpec.rational(), p, k).generators
            for slot in range(factor.rank):
                for (g,) in base:
                    image = list(identity)
                    if i in factor_slots:
                        level = list(identity[factor_slots[i]])
                        level[slot] = g % level_modulus
                        image[factor_slots[i]] = tuple(level)
                    for b, (chi, m) in enumerate(blocks):
                        image[char_slot + b] = pow(g, chi.exponents[i][slot], p**m)
                    images.add(tuple(image))
        else:
            group = unit_group_generators(factor.field, p, k)
            for g in group.generators:
                image = list(identity)
                if i in factor_slots:
                    image[factor_slots[i]] = level_rings[i].reduce(g)
                norm = group.ring.norm(g)
                for b, (chi, m) in enumerate(blocks):
                    image[char_slot + b] = pow(norm, chi.exponents[i][0], p**m)
                images.add(tuple(image))

    identity_tuple = tuple(identity)
    images.discard(identity_tuple)
    return len(_orbit(identity_tuple, sorted(images), multipliers))


def _norm_one_level_index(
    field: AbelianFieldSpec, p: int, depth: int, precision_max: int | None
) -> int:
    """
    ``[T1(Z_p) : T1(Z_p) cap (1 + p^depth O)]`` for a norm-one torus.

    A unit ``x`` of ``O / p^depth`` lifts to a norm-one unit exactly when
    ``Nm(x)^-1`` is a norm from ``1 + p^depth O``; that norm group is open, so
    the test is decided at a stabilised precision.
    """
    if depth == 0:
        return 1
    residue_ring = LocalRing(field, p, depth)
    size = p ** (residue_ring.degree * depth)
    if size > RESIDUE_LIMIT:
        raise UnsupportedField(
            f"{residue_ring!r}: {size} residues exceed the enumeration limit"
        )
    residues = [x for x in residue_ring.elements() if residue_ring.is_unit(x)]

    def at(precision: int) -> int:
        ring = LocalRing(field, p, precision)
        norms = [ring.norm(g) for g in congruence_generators(ring, depth)]
        norm_group = generated_subgroup(norms, ring.modulus)
        return sum(
            1
            for x in residues
            if pow(ring.norm(x), -1, ring.modulus) in norm_group
        )

    start = depth + 2
    cap = precision_max if precision_max is not None else depth + PRECISION_SLACK
    return _stabilized("norm-one level index", p, at, start, cap, lambda j: j + 1)


def stabilizer_index(
    torus: TorusSpec,
    action: Sequence[tuple[CharacterSpec, int]],
    p: int,
    k: int | None = None,
    level_depth: int = 0,
    precision_max: int | None = None,
) -> int:
    """
    Index of ``{t : t = 1 mod p^level_depth, chi_b(t) = 1 mod p^m_b}`` in K^max.

    Args:
        torus: The torus.
        action: Pairs ``(character, depth m_b)``, one per action block.
        p: Prime.
        k: Fixed precision. When omitted the precision policy applies.
        level_depth: Congruence depth of the level at ``p`` (0 = maximal).
        precision_max: Cap on the precision (default ``max depth + 8``).

    Returns:
        int: The index, computed as an orbit size.

    Raises:
        UnsupportedCharacter: For a nonzero character on a norm-one factor.
        PrecisionNotStabilized: If two precisions never agree below the cap.

    Example:
        >>> stabilizer_index(TorusSpec.split(), [(CharacterSpec.scaling(), 2)], 3)
        6
    """
    _check_prime(p)
    action = tuple(action)
    for chi, depth in action:
        chi.validate(torus)
        if depth < 0:
            raise InvalidInputError(f"depth must be nonnegative, got {depth}")
        for part, factor in zip(chi.exponents, torus.factors, strict=True):
            if isinstance(factor, NormOneFactor) and any(part):
                raise UnsupportedCharacter(
                    f"{factor.signature}: only the trivial character is supported"
                )
    if level_depth < 0:
        raise InvalidInputError(f"level depth must be nonnegative, got {level_depth}")

    depths = [level_depth, *(depth for _, depth in action)]
    if max(depths) == 0:
        return 1

    norm_one = 1
    for factor in torus.factors:
        if isinstance(factor, NormOneFactor):
            norm_one *= _norm_one_level_index(factor.field, p, level_depth, precision_max)

    def at(precision: int) -> int:
        return _orbit_size(torus, action, p, precision, level_depth)

    if k is not None:
        if k < max(depths):
            raise InvalidInputError(f"precision {k} is below the depth {max(depths)}")
        index = at(k)
    else:
        start = max(depths) + 2
        cap = precision_max if precision_max is not None else max(depths) + PRECISION_SLACK
        index = _stabilized("stabilizer index", p, at, start, cap, lambda j: 2 * j)

    logger.debug(
        "Stabilizer index at p=%d (level depth %d, block depths %s): %d",
        p,
        level_depth,
        [depth for _, depth in action],
        index * norm_one,
    )
    return index * norm_one


def level_index(
    torus: TorusSpec, p: int, depth: int, precision_max: int | None = None
) -> int:
    """``[K^max : {t = 1 mod p^depth}]`` for the whole torus."""
    return stabilizer_index(torus, (), p, level_depth=depth, precision_max=precision_max)
