"""
Abelian number fields, quadratic class numbers and Pell equations.

An abelian field is described by a modulus ``n`` and a subgroup ``H`` of
``(Z/n)^x``; the field is the fixed field of ``H`` inside the n-th cyclotomic
field. Discriminants come from the conductor-discriminant formula, local
splitting from the images of inertia and Frobenius in ``(Z/n)^x / H``.

Class numbers of quadratic fields are counted with reduced binary quadratic
forms: definite forms for imaginary fields, cycles of reduced indefinite forms
for real fields of small discriminant.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from math import gcd, isqrt, lcm
from typing import TYPE_CHECKING

from sympy import (
    Poly,
    Symbol,
    cyclotomic_poly,
    divisors,
    factorint,
    isprime,
    jacobi_symbol,
    multiplicity,
    totient,
)
from sympy.ntheory.modular import crt
from sympy.solvers.diophantine.diophantine import diop_DN

from orbit_bounds.errors import (
    InvalidInputError,
    InvalidSubgroup,
    NotFundamental,
    SquareInput,
    UnsupportedClassNumber,
    UnsupportedField,
)

if TYPE_CHECKING:
    from orbit_bounds.field_cache import FieldCache

logger = logging.getLogger(__name__)

# Real quadratic class numbers are only computed up to this discriminant
REAL_CLASS_NUMBER_LIMIT = 200


def units_mod(n: int) -> tuple[int, ...]:
    """Residues of ``(Z/n)^x`` in ascending order (``(0,)`` for n = 1)."""
    return tuple(a for a in range(n) if gcd(a, n) == 1)


def generated_subgroup(generators: Iterable[int], n: int) -> frozenset[int]:
    """Subgroup of ``(Z/n)^x`` generated by the given residues."""
    generators = {g % n for g in generators}
    group = {1 % n}
    frontier = [1 % n]
    while frontier:
        element = frontier.pop()
        for g in generators:
            product = element * g % n
            if product not in group:
                group.add(product)
                frontier.append(product)
    return frozenset(group)


def _product_set(a: Iterable[int], b: Iterable[int], n: int) -> frozenset[int]:
    b = tuple(b)
    return frozenset(x * y % n for x in a for y in b)


def _kronecker(d: int, a: int) -> int:
    """Kronecker character of the fundamental discriminant ``d`` at ``a > 0``."""
    modulus = abs(d)
    if a % 2 == 0:
        # d is odd here, so a + |d| is an odd representative of the same class
        a += modulus
    if a == 1:
        return 1
    return int(jacobi_symbol(d % a, a))


def is_fundamental_discriminant(d: int) -> bool:
    """True when ``d`` is the discriminant of a quadratic field."""
    if d in (0, 1):
        return False

    def squarefree(m: int) -> bool:
        return all(e == 1 for e in factorint(abs(m)).values())

    if d % 4 == 1:
        return squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and squarefree(m)
    return False


@dataclass(frozen=True)
class AbelianFieldSpec:
    """
    The fixed field of ``subgroup`` inside the ``modulus``-th cyclotomic field.

    Attributes:
        modulus: Positive integer n.
        subgroup: Residues mod n forming a subgroup H of ``(Z/n)^x``.

    Raises:
        InvalidSubgroup: If the residues are not a subgroup.
    """

    modulus: int
    subgroup: frozenset[int]

    def __post_init__(self):
        n = self.modulus
        if not isinstance(n, int) or n < 1:
            raise InvalidSubgroup(f"modulus must be a positive integer, got {n!r}")
        subgroup = frozenset(int(a) % n for a in self.subgroup)
        if 1 % n not in subgroup:
            raise InvalidSubgroup(f"subgroup mod {n} must contain 1")
        if any(gcd(a, n) != 1 for a in subgroup):
            raise InvalidSubgroup(f"subgroup mod {n} contains non-units")
        if any(a * b % n not in subgroup for a in subgroup for b in subgroup):
            raise InvalidSubgroup(f"residues {sorted(subgroup)} are not closed mod {n}")
        object.__setattr__(self, "subgroup", subgroup)

    @classmethod
    def rational(cls) -> AbelianFieldSpec:
        """The field Q."""
        return cls(modulus=1, subgroup=frozenset({0}))

    @classmethod
    def cyclotomic(cls, n: int) -> AbelianFieldSpec:
        """The n-th cyclotomic field."""
        return cls(modulus=n, subgroup=frozenset({1 % n}))

    @classmethod
    def quadratic(cls, d: int) -> AbelianFieldSpec:
        """
        The quadratic field of fundamental discriminant ``d``.

        Raises:
            NotFundamental: If ``d`` is not a fundamental discriminant.
        """
        if not is_fundamental_discriminant(d):
            raise NotFundamental(f"{d} is not a fundamental discriminant")
        n = abs(d)
        kernel = frozenset(a for a in units_mod(n) if _kronecker(d, a) == 1)
        return cls(modulus=n, subgroup=kernel)

    @classmethod
    def compositum(cls, fields: Iterable[AbelianFieldSpec]) -> AbelianFieldSpec:
        """The smallest field containing all the given fields."""
        fields = tuple(fields)
        n = lcm(*(field.modulus for field in fields)) if fields else 1
        subgroup = frozenset(
            a
            for a in units_mod(n)
            if all(a % field.modulus in field.subgroup for field in fields)
        )
        return cls(modulus=n, subgroup=subgroup)

    @property
    def group(self) -> tuple[int, ...]:
        return units_mod(self.modulus)

    @property
    def degree(self) -> int:
        return int(totient(self.modulus)) // len(self.subgroup)

    @property
    def is_real(self) -> bool:
        """True when complex conjugation (-1 mod n) fixes the field."""
        return (-1) % self.modulus in self.subgroup

    @property
    def is_cyclotomic(self) -> bool:
        return len(self.subgroup) == 1

    @property
    def cache_key(self) -> str:
        return f"{self.modulus}:{','.join(map(str, sorted(self.subgroup)))}"

    def quadratic_discriminant(self, cache: FieldCache | None = None) -> int:
        """
        Signed fundamental discriminant of a quadratic field.

        Raises:
            UnsupportedField: If the field is not quadratic.
        """
        if self.degree != 2:
            raise UnsupportedField(f"field {self.cache_key} has degree {self.degree}")
        disc = abelian_field_discriminant(self, cache=cache)
        return disc if self.is_real else -disc


@dataclass(frozen=True)
class LocalSplitting:
    """Decomposition of a prime in an abelian field (``e * f * g = degree``)."""

    prime: int
    e: int
    f: int
    g: int

    @property
    def local_degree(self) -> int:
        return self.e * self.f


def abelian_field_discriminant(
    field: AbelianFieldSpec, cache: FieldCache | None = None
) -> int:
    """
    Absolute discriminant via the conductor-discriminant formula.

    For each divisor ``d`` of the modulus, the characters of ``(Z/n)^x / H``
    whose conductor divides ``d`` are those trivial on ``{a = 1 mod d}``; their
    number is ``[(Z/n)^x : H * {a = 1 mod d}]``. Inclusion-exclusion over the
    divisors gives the number of characters of conductor exactly ``d``.

    Args:
        field: The abelian field.
        cache: Optional shared memo.

    Returns:
        int: ``|disc(field)|``.
    """
    if cache is not None:
        cached = cache.get_discriminant(field)
        if cached is not None:
            return cached

    n = field.modulus
    group = field.group
    exact_conductor: dict[int, int] = {}
    disc = 1
    for d in divisors(n):
        congruent = frozenset(a for a in group if a % d == 1 % d)
        dividing = len(group) // len(_product_set(field.subgroup, congruent, n))
        exact = dividing - sum(
            count for e, count in exact_conductor.items() if d % e == 0
        )
        exact_conductor[d] = exact
        disc *= d**exact

    logger.debug("Discriminant of field %s is %d", field.cache_key, disc)
    if cache is not None:
        cache.put_discriminant(field, disc)
    return disc


def cyclotomic_poly_disc_oracle(n: int) -> int:
    """``|disc(Phi_n)|`` as the resultant of ``Phi_n`` and its derivative."""
    x = Symbol("x")
    phi = Poly(cyclotomic_poly(n, x), x)
    return abs(int(phi.resultant(phi.diff(x))))


def local_splitting(field: AbelianFieldSpec, p: int) -> LocalSplitting:
    """
    Ramification index, residue degree and number of primes above ``p``.

    Write ``n = p^a n'``. Inertia maps onto ``{x = 1 mod n'}`` and Frobenius to
    the residue that is ``p`` mod ``n'`` and 1 mod ``p^a``; both are read
    modulo ``H``.
    """
    if not isprime(p):
        raise InvalidInputError(f"{p} is not prime")

    n = field.modulus
    a = int(multiplicity(p, n))
    n_prime = n // p**a
    inertia = frozenset(x for x in field.group if x % n_prime == 1 % n_prime)
    if a == 0:
        frobenius = p % n
    elif n_prime == 1:
        frobenius = 1 % n
    else:
        frobenius = int(crt([n_prime, p**a], [p % n_prime, 1])[0]) % n

    inertia_h = _product_set(field.subgroup, inertia, n)
    decomposition_h = _product_set(
        field.subgroup, generated_subgroup(inertia | {frobenius}, n), n
    )
    e = len(inertia_h) // len(field.subgroup)
    f = len(decomposition_h) // len(inertia_h)
    g = field.degree // (e * f)
    return LocalSplitting(prime=p, e=e, f=f, g=g)


def quadratic_class_number(d: int, cache: FieldCache | None = None) -> int:
    """
    Class number of the imaginary quadratic field of discriminant ``d``.

    Counts primitive reduced forms ``(a, b, c)`` with ``b^2 - 4ac = d``,
    ``|b| <= a <= c`` and ``b >= 0`` whenever ``|b| = a`` or ``a = c``.

    Raises:
        NotFundamental: If ``d`` is not a negative fundamental discriminant.
    """
    if d >= 0 or not is_fundamental_discriminant(d):
        raise NotFundamental(f"{d} is not a negative fundamental discriminant")
    if cache is not None:
        cached = cache.get_class_number(d)
        if cached is not None:
            return cached

    count = 0
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            numerator = b * b - d
            if numerator % (4 * a):
                continue
            c = numerator // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, b), c) == 1:
                count += 1
        a += 1

    if cache is not None:
        cache.put_class_number(d, count)
    return count


def pell_fundamental(d: int) -> tuple[int, int]:
    """
    Least positive solution of ``x^2 - d y^2 = 1``.

    Raises:
        SquareInput: If ``d`` is a perfect square.
        InvalidInputError: If ``d`` is not positive.
    """
    if d <= 0:
        raise InvalidInputError(f"Pell equation needs d > 0, got {d}")
    if isqrt(d) ** 2 == d:
        raise SquareInput(f"{d} is a perfect square")
    x, y = diop_DN(d, 1)[0]
    return int(x), int(y)


def _reduced_indefinite_forms(disc: int) -> list[tuple[int, int, int]]:
    root = isqrt(disc)
    forms = []
    for b in range(1, root + 1):
        if (b - disc) % 2:
            continue
        minus_ac = (disc - b * b) // 4
        for a_abs in divisors(minus_ac):
            # sqrt(D) - b < 2|a| < sqrt(D) + b, with sqrt(D) irrational
            if not (root < 2 * a_abs + b and 2 * a_abs - b <= root):
                continue
            for a in (a_abs, -a_abs):
                c = (b * b - disc) // (4 * a)
                if gcd(gcd(a, b), c) == 1:
                    forms.append((a, b, c))
    return forms


def _rho(form: tuple[int, int, int], disc: int, root: int) -> tuple[int, int, int]:
    _, b, c = form
    modulus = 2 * abs(c)
    r = root - (root + b) % modulus
    return c, r, (r * r - disc) // (4 * c)


def narrow_class_number(d: int) -> int:
    """
    Narrow class number of the quadratic field of discriminant ``d``.

    For ``d > 0`` this is the number of cycles of reduced indefinite forms
    under the reduction operator; for ``d < 0`` it is the class number.
    """
    if d < 0:
        return quadratic_class_number(d)
    if not is_fundamental_discriminant(d):
        raise NotFundamental(f"{d} is not a fundamental discriminant")

    root = isqrt(d)
    remaining = set(_reduced_indefinite_forms(d))
    cycles = 0
    while remaining:
        start = min(remaining)
        cycles += 1
        form = start
        while True:
            remaining.discard(form)
            form = _rho(form, d, root)
            if form == start:
                break
            if form not in remaining:
                raise ArithmeticError(f"reduction cycle through {start} is not closed")
    return cycles


def real_quadratic_class_number(d: int, cache: FieldCache | None = None) -> int:
    """
    Class number of the real quadratic field of discriminant ``0 < d <= 200``.

    The narrow class number is halved unless the fundamental unit has norm -1,
    which happens exactly when ``t^2 - d u^2 = -4`` is solvable.

    Raises:
        NotFundamental: If ``d`` is not a positive fundamental discriminant.
        UnsupportedClassNumber: If ``d`` exceeds the enumeration limit.
    """
    if d <= 0 or not is_fundamental_discriminant(d):
        raise NotFundamental(f"{d} is not a positive fundamental discriminant")
    if d > REAL_CLASS_NUMBER_LIMIT:
        raise UnsupportedClassNumber(
            f"real quadratic class numbers are only computed for d <= "
            f"{REAL_CLASS_NUMBER_LIMIT}; supply an override for d = {d}"
        )
    if cache is not None:
        cached = cache.get_class_number(d)
        if cached is not None:
            return cached

    narrow = narrow_class_number(d)
    negative_norm_unit = bool(diop_DN(d, -4))
    h = narrow if negative_norm_unit else narrow // 2
    logger.debug("h+(%d) = %d, h(%d) = %d", d, narrow, d, h)

    if cache is not None:
        cache.put_class_number(d, h)
    return h
