import random
from fractions import Fraction

import pytest

from orbit_bounds.exactalg import QLattice, integer_determinant
from orbit_bounds.fields import AbelianFieldSpec
from orbit_bounds.heisenberg import HeisenbergElement, PolarizationForm
from orbit_bounds.invariants import (
    ActionBlock,
    LevelException,
    LevelSpec,
    SubvarietyDatum,
)
from orbit_bounds.tori import SplitFactor, TorusSpec, WeilRestrictionFactor, character

SMALL_PRIMES = (2, 3, 5, 7, 11, 13)
WEIL_FIELDS = (
    AbelianFieldSpec.quadratic(-4),
    AbelianFieldSpec.quadratic(-3),
    AbelianFieldSpec.quadratic(5),
)


def _random_torus(rng: random.Random) -> tuple[TorusSpec, list]:
    """A supported torus with a pool of nontrivial characters."""
    kind = rng.choice(("split", "split2", "weil"))
    if kind == "split":
        torus = TorusSpec.split()
        pool = [character((e,)) for e in (1, 2, 3, -1)]
    elif kind == "split2":
        torus = TorusSpec(factors=(SplitFactor(2),))
        pool = [character((1, 0)), character((0, 1)), character((1, 1))]
    else:
        torus = TorusSpec.weil(rng.choice(WEIL_FIELDS))
        pool = [character((1,)), character((2,))]
    return torus, pool


def _random_rational(rng: random.Random) -> Fraction:
    denominator = 1
    for p in rng.sample(SMALL_PRIMES, rng.randint(0, 2)):
        # Square denominators only below 11 keep the level rings small
        denominator *= p ** rng.randint(1, 2 if p < 11 else 1)
    return Fraction(rng.randint(-5, 5), denominator)


def _random_local_lattice(rng: random.Random, dim: int, p: int) -> QLattice:
    """A lattice whose p-adic completion is generally not diagonal."""
    while True:
        columns = [[rng.randint(-1, 2) for _ in range(dim)] for _ in range(dim)]
        if abs(integer_determinant(columns)) in (1, p):
            break
    scale = Fraction(1, p ** rng.randint(0, 1))
    return QLattice(tuple(tuple(scale * x for x in column) for column in columns))


def make_instance(
    rng: random.Random, lattices: bool = False
) -> tuple[SubvarietyDatum, LevelSpec]:
    """
    A random datum with ``psi = 0`` and a level with small congruence depths.

    Without ``lattices`` the level keeps Z^n as lattice everywhere, so
    translating ``w`` by an integral vector never changes a block depth. With
    ``lattices`` the primes 2 and 3 may carry non-diagonal local lattices.
    """
    torus, pool = _random_torus(rng)
    dim = rng.randint(1, 3)
    dim_u = rng.randint(0, dim)

    coordinates = list(range(dim))
    rng.shuffle(coordinates)
    cut = rng.randint(1, dim)
    groups = [coordinates[:cut], coordinates[cut:]]
    action = tuple(
        ActionBlock(coordinates=tuple(sorted(group)), character=rng.choice(pool))
        for group in groups
        if group
    )

    w = HeisenbergElement.from_coordinates(
        [_random_rational(rng) for _ in range(dim)], dim_u
    )
    w_prime_space = ()
    if dim > 1 and rng.random() < 0.3:
        w_prime_space = (tuple(rng.randint(-2, 2) for _ in range(dim - 1)) + (1,),)

    exceptions = {
        p: LevelException(t_depth=1) for p in rng.sample((2, 3, 5), rng.randint(0, 1))
    }
    if lattices:
        for p in rng.sample((2, 3), rng.randint(1, 2)):
            previous = exceptions.get(p, LevelException())
            exceptions[p] = LevelException(
                t_depth=previous.t_depth, w_lattice=_random_local_lattice(rng, dim, p)
            )
    datum = SubvarietyDatum(
        torus=torus,
        action=action,
        psi=PolarizationForm.zero(dim_u, dim - dim_u),
        w=w,
        w_prime_space=w_prime_space,
    )
    return datum, LevelSpec(dim=dim, exceptions=exceptions)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240517)


@pytest.fixture
def random_instances(rng) -> list[tuple[SubvarietyDatum, LevelSpec]]:
    return [make_instance(rng) for _ in range(100)]


@pytest.fixture
def lattice_instances(rng) -> list[tuple[SubvarietyDatum, LevelSpec]]:
    return [make_instance(rng, lattices=True) for _ in range(60)]
