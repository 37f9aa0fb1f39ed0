"""Brute-force cross-checks behind the ``oracle`` command."""

import logging
from collections.abc import Callable, Iterator
from fractions import Fraction

from common.schemas.report_schemas import OracleCheck
from sympy import factorint, integer_nthroot, legendre_symbol

from orbit_bounds.fields import (
    AbelianFieldSpec,
    abelian_field_discriminant,
    cyclotomic_poly_disc_oracle,
    narrow_class_number,
    pell_fundamental,
    quadratic_class_number,
    real_quadratic_class_number,
)
from orbit_bounds.localtori import (
    expected_unit_group_order,
    scaling_index_closed_form,
    stabilizer_index,
    unit_group_closure,
    unit_group_generators,
)
from orbit_bounds.tori import CharacterSpec, TorusSpec

logger = logging.getLogger(__name__)

CLASS_NUMBER_DISCRIMINANTS = (-3, -4, -7, -23, -47, -84)
PELL_VALUES = (2, 3, 5, 7, 13)
REAL_DISCRIMINANTS = (5, 8, 12, 13, 40, 60, 65, 136, 145)
CYCLOTOMIC_MODULI = (3, 4, 5, 7, 8, 9, 11, 12)
UNIT_GROUP_CASES = (
    (AbelianFieldSpec.rational(), 2, 4),
    (AbelianFieldSpec.quadratic(-4), 2, 3),
    (AbelianFieldSpec.quadratic(-4), 5, 2),
    (AbelianFieldSpec.quadratic(-3), 3, 2),
    (AbelianFieldSpec.cyclotomic(5), 5, 1),
)
STABILIZER_PRIMES = (2, 3, 5, 7)
STABILIZER_DEPTHS = range(4)


def _character(d: int, a: int) -> int:
    """The quadratic character of discriminant ``d`` at ``a > 0``, prime by prime."""
    value = 1
    for q, e in factorint(a).items():
        if q == 2:
            local = 0 if d % 2 == 0 else (1 if d % 8 == 1 else -1)
        else:
            local = int(legendre_symbol(d % q, q)) if d % q else 0
        value *= local**e
    return value


def analytic_class_number(d: int) -> int:
    """
    Imaginary quadratic class number from the class number formula.

    ``h(d) = -(w / 2|d|) * sum(a * chi_d(a) for 0 < a < |d|)`` with ``w`` the
    number of roots of unity (6 for ``d = -3``, 4 for ``d = -4``, else 2).
    """
    w = {-3: 6, -4: 4}.get(d, 2)
    total = sum(a * _character(d, a) for a in range(1, -d))
    h = Fraction(-w * total, 2 * -d)
    if h.denominator != 1:
        raise ArithmeticError(f"class number formula gave {h} for d = {d}")
    return int(h)


def brute_force_pell(d: int, limit: int = 10**6) -> tuple[int, int] | None:
    """Least ``(x, y)`` with ``y >= 1`` and ``x^2 - d y^2 = 1``, searching ``y < limit``."""
    for y in range(1, limit):
        x, exact = integer_nthroot(d * y * y + 1, 2)
        if exact:
            return int(x), y
    return None


def fundamental_unit_norm(d: int, limit: int = 10**6) -> int | None:
    """
    Norm of the fundamental unit ``(t + u sqrt(d)) / 2`` of discriminant ``d``.

    The unit has the least ``u >= 1`` solving ``t^2 - d u^2 = -4`` or ``4``,
    with the smaller ``t`` first.
    """
    for u in range(1, limit):
        for norm in (-1, 1):
            square = d * u * u + 4 * norm
            if square >= 0 and integer_nthroot(square, 2)[1]:
                return norm
    return None


def class_number_from_unit(d: int) -> int:
    """``h(d)`` from the narrow class number and the norm of the fundamental unit."""
    narrow = narrow_class_number(d)
    return narrow if fundamental_unit_norm(d) == -1 else narrow // 2


def _check(name: str, detail: str, expected, compute: Callable[[], object]) -> OracleCheck:
    try:
        actual = compute()
    except Exception as e:
        logger.warning("Oracle check %s (%s) raised %r", name, detail, e)
        return OracleCheck(name=name, detail=f"{detail}: {e}", passed=False)
    passed = actual == expected
    if not passed:
        logger.warning("Oracle check %s (%s): %r != %r", name, detail, actual, expected)
    return OracleCheck(name=name, detail=f"{detail} = {actual}", passed=passed)


def _checks() -> Iterator[OracleCheck]:
    for d in CLASS_NUMBER_DISCRIMINANTS:
        yield _check(
            "class number",
            f"h({d})",
            analytic_class_number(d),
            lambda d=d: quadratic_class_number(d),
        )
    for d in PELL_VALUES:
        yield _check(
            "pell", f"d={d}", brute_force_pell(d), lambda d=d: pell_fundamental(d)
        )
    for d in REAL_DISCRIMINANTS:
        yield _check(
            "real class number",
            f"h({d})",
            class_number_from_unit(d),
            lambda d=d: real_quadratic_class_number(d),
        )
    for n in CYCLOTOMIC_MODULI:
        yield _check(
            "discriminant",
            f"Q(zeta_{n})",
            cyclotomic_poly_disc_oracle(n),
            lambda n=n: abelian_field_discriminant(AbelianFieldSpec.cyclotomic(n)),
        )
    for field, p, k in UNIT_GROUP_CASES:
        yield _check(
            "unit group",
            f"{field.cache_key} p={p} k={k}",
            expected_unit_group_order(field, p, k),
            lambda field=field, p=p, k=k: len(
                unit_group_closure(unit_group_generators(field, p, k))
            ),
        )
    for p in STABILIZER_PRIMES:
        for m in STABILIZER_DEPTHS:
            yield _check(
                "stabilizer",
                f"G_m p={p} m={m}",
                scaling_index_closed_form(p, m),
                lambda p=p, m=m: stabilizer_index(
                    TorusSpec.split(), [(CharacterSpec.scaling(), m)], p, k=m + 2
                ),
            )


def run_oracle_checks() -> list[OracleCheck]:
    """Every cross-check, in a fixed order."""
    return list(_checks())
