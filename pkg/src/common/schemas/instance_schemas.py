"""
Pydantic models for instance documents.

An instance document describes one torus, one polarization form, the action
blocks, the translate ``w``, the optional subspace ``W'``, the level and the
bound constants. Unknown keys are rejected everywhere. See
``docs/instance_format.md`` for the grammar.
"""

from fractions import Fraction
from typing import Annotated, Literal

from common.utils import format_rational, parse_rational
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    model_validator,
)

Rational = Annotated[
    Fraction,
    PlainValidator(parse_rational),
    PlainSerializer(format_rational),
]


class StrictModel(BaseModel):
    """Base for all instance models: unknown keys are errors."""

    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)


class FieldModel(StrictModel):
    """
    An abelian number field, in exactly one of three spellings.

    ``quadratic: d`` (fundamental discriminant), ``cyclotomic: n``, or
    ``modulus: n`` together with ``subgroup: [residues]``.
    """

    quadratic: int | None = None
    cyclotomic: int | None = None
    modulus: int | None = None
    subgroup: list[int] | None = None

    @model_validator(mode="after")
    def _one_spelling(self):
        spellings = [
            self.quadratic is not None,
            self.cyclotomic is not None,
            self.modulus is not None,
        ]
        if sum(spellings) != 1:
            raise ValueError("give exactly one of quadratic, cyclotomic or modulus")
        if (self.modulus is None) != (self.subgroup is None):
            raise ValueError("modulus and subgroup go together")
        return self


class TorusFactorModel(StrictModel):
    kind: Literal["split", "weil", "norm_one"]
    rank: int | None = None
    field: FieldModel | None = None

    @model_validator(mode="after")
    def _kind_fields(self):
        if self.kind == "split":
            if self.field is not None:
                raise ValueError("split factors take no field")
        else:
            if self.field is None:
                raise ValueError(f"{self.kind} factors need a field")
            if self.rank is not None:
                raise ValueError(f"{self.kind} factors take no rank")
        return self


class TorusModel(StrictModel):
    factors: list[TorusFactorModel] = Field(min_length=1)
    class_number: int | None = None


class PsiModel(StrictModel):
    """``tensor[i][j][k]``: the U_i component of ``psi(e_j, e_k)``; omit for zero."""

    dim_u: int = Field(ge=0)
    dim_v: int = Field(ge=0)
    tensor: list[list[list[Rational]]] | None = None


class BlockModel(StrictModel):
    coordinates: list[int] = Field(min_length=1)
    character: list[list[int]]


class LevelExceptionModel(StrictModel):
    """One prime where the level differs from the maximal one."""

    prime: int = Field(ge=2)
    t_depth: int = Field(default=0, ge=0)
    w_lattice: list[list[Rational]] | None = None


class LevelModel(StrictModel):
    exceptions: list[LevelExceptionModel] = Field(default_factory=list)


class ConstantsModel(StrictModel):
    b: Rational = Fraction(1)
    c_N: Rational = Fraction(1)
    c_0: Rational = Fraction(1)
    N: int = 2


class InstanceModel(StrictModel):
    """A complete instance document."""

    torus: TorusModel
    psi: PsiModel
    action: list[BlockModel] = Field(min_length=1)
    w: list[Rational]
    w_prime: list[list[Rational]] = Field(default_factory=list)
    level: LevelModel = Field(default_factory=LevelModel)
    constants: ConstantsModel = Field(default_factory=ConstantsModel)
