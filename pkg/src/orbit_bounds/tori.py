"""
Supported Q-tori and their characters.

A torus is an ordered product of factors:

- ``SplitFactor(rank)``: ``G_m^rank``;
- ``WeilRestrictionFactor(F)``: ``Res_{F/Q} G_m``;
- ``NormOneFactor(F)``: the kernel of the norm ``Res_{F/Q} G_m -> G_m``.

A character is given by one exponent tuple per factor: ``rank`` exponents for
a split factor, one power of the norm for a Weil restriction, and a single
exponent for a norm-one factor (only 0 is supported there).
"""

from collections.abc import Sequence
from dataclasses import dataclass

from orbit_bounds.errors import DimensionMismatch, InvalidInputError
from orbit_bounds.fields import AbelianFieldSpec


@dataclass(frozen=True)
class SplitFactor:
    rank: int = 1

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidInputError("split factor rank must be positive")

    @property
    def field(self) -> AbelianFieldSpec:
        return AbelianFieldSpec.rational()

    @property
    def character_length(self) -> int:
        return self.rank

    @property
    def signature(self) -> str:
        return f"split:{self.rank}"


@dataclass(frozen=True)
class WeilRestrictionFactor:
    field: AbelianFieldSpec

    @property
    def character_length(self) -> int:
        return 1

    @property
    def signature(self) -> str:
        return f"weil:{self.field.cache_key}"


@dataclass(frozen=True)
class NormOneFactor:
    field: AbelianFieldSpec

    @property
    def character_length(self) -> int:
        return 1

    @property
    def signature(self) -> str:
        return f"norm_one:{self.field.cache_key}"


TorusFactor = SplitFactor | WeilRestrictionFactor | NormOneFactor


@dataclass(frozen=True)
class TorusSpec:
    """
    A Q-torus as a product of supported factors.

    Attributes:
        factors: Factors in declaration order.
        class_number_override: Positive class number supplied by the user,
            used instead of any computed value.
    """

    factors: tuple[TorusFactor, ...]
    class_number_override: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise InvalidInputError("a torus needs at least one factor")
        if self.class_number_override is not None and self.class_number_override < 1:
            raise InvalidInputError("class number override must be positive")

    @classmethod
    def split(cls, rank: int = 1) -> "TorusSpec":
        return cls(factors=(SplitFactor(rank),))

    @classmethod
    def weil(cls, field: AbelianFieldSpec) -> "TorusSpec":
        return cls(factors=(WeilRestrictionFactor(field),))

    def signature(self) -> tuple[str, ...]:
        """Factor kinds and fields in declaration order."""
        return tuple(factor.signature for factor in self.factors)


@dataclass(frozen=True)
class CharacterSpec:
    """One exponent tuple per torus factor."""

    exponents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "exponents",
            tuple(tuple(int(e) for e in part) for part in self.exponents),
        )

    @classmethod
    def scaling(cls, power: int = 1) -> "CharacterSpec":
        """``t -> t^power`` on a rank one split torus."""
        return cls(exponents=((power,),))

    @property
    def is_trivial(self) -> bool:
        return all(e == 0 for part in self.exponents for e in part)

    def validate(self, torus: TorusSpec) -> None:
        """
        Check the exponent shape against the torus.

        Raises:
            DimensionMismatch: If the number or length of exponent tuples is
                wrong for the torus factors.
        """
        if len(self.exponents) != len(torus.factors):
            raise DimensionMismatch(
                f"character has {len(self.exponents)} parts for "
                f"{len(torus.factors)} torus factors"
            )
        for part, factor in zip(self.exponents, torus.factors, strict=True):
            if len(part) != factor.character_length:
                raise DimensionMismatch(
                    f"{factor.signature} needs {factor.character_length} "
                    f"exponents, got {len(part)}"
                )


def character(*parts: Sequence[int]) -> CharacterSpec:
    """Shorthand: ``character((1,), (2,))``."""
    return CharacterSpec(exponents=tuple(tuple(part) for part in parts))
