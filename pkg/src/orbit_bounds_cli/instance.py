"""
Instance and list files.

Instance files are YAML documents validated by
:class:`common.schemas.instance_schemas.InstanceModel` and turned into the
library's domain objects. List files name one instance file per line,
relative to the list file itself.
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path

import yaml
from common.schemas.instance_schemas import (
    BlockModel,
    ConstantsModel,
    FieldModel,
    InstanceModel,
    LevelExceptionModel,
    LevelModel,
    PsiModel,
    TorusFactorModel,
    TorusModel,
)
from pydantic import ValidationError

from orbit_bounds.errors import InstanceError
from orbit_bounds.exactalg import QLattice
from orbit_bounds.fields import AbelianFieldSpec
from orbit_bounds.heisenberg import HeisenbergElement, PolarizationForm
from orbit_bounds.invariants import (
    ActionBlock,
    BoundConstants,
    LevelException,
    LevelSpec,
    SubvarietyDatum,
)
from orbit_bounds.tori import (
    CharacterSpec,
    NormOneFactor,
    SplitFactor,
    TorusFactor,
    TorusSpec,
    WeilRestrictionFactor,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Instance:
    """A parsed instance file."""

    datum: SubvarietyDatum
    level: LevelSpec
    constants: BoundConstants
    source: str = "<document>"

    def document(self) -> dict:
        """The normalised instance as plain JSON-compatible data."""
        return to_model(self.datum, self.level, self.constants).model_dump(
            mode="json", exclude_none=True
        )


def _field(model: FieldModel) -> AbelianFieldSpec:
    if model.quadratic is not None:
        return AbelianFieldSpec.quadratic(model.quadratic)
    if model.cyclotomic is not None:
        return AbelianFieldSpec.cyclotomic(model.cyclotomic)
    return AbelianFieldSpec(modulus=model.modulus, subgroup=frozenset(model.subgroup))


def _factor(model: TorusFactorModel) -> TorusFactor:
    if model.kind == "split":
        return SplitFactor(model.rank if model.rank is not None else 1)
    if model.kind == "weil":
        return WeilRestrictionFactor(_field(model.field))
    return NormOneFactor(_field(model.field))


def level_from_model(model: LevelModel, dim: int) -> LevelSpec:
    exceptions = {}
    for exception in model.exceptions:
        if exception.prime in exceptions:
            raise InstanceError(f"level lists p={exception.prime} twice")
        lattice = QLattice(tuple(exception.w_lattice)) if exception.w_lattice else None
        exceptions[exception.prime] = LevelException(
            t_depth=exception.t_depth, w_lattice=lattice
        )
    return LevelSpec(dim=dim, exceptions=exceptions)


def constants_from_model(model: ConstantsModel) -> BoundConstants:
    return BoundConstants(b=model.b, c_N=model.c_N, c_0=model.c_0, N=model.N)


def from_model(model: InstanceModel, source: str = "<document>") -> Instance:
    """
    Build domain objects from a validated document.

    Raises:
        InvalidInputError: If the document is well-formed but inconsistent
            (dimensions, characters, subgroups, lattices).
    """
    torus = TorusSpec(
        factors=tuple(_factor(factor) for factor in model.torus.factors),
        class_number_override=model.torus.class_number,
    )
    psi = PolarizationForm(
        dim_u=model.psi.dim_u,
        dim_v=model.psi.dim_v,
        tensor=tuple(
            tuple(tuple(row) for row in matrix) for matrix in (model.psi.tensor or ())
        ),
    )
    action = tuple(
        ActionBlock(
            coordinates=tuple(block.coordinates),
            character=CharacterSpec(
                exponents=tuple(tuple(part) for part in block.character)
            ),
        )
        for block in model.action
    )
    datum = SubvarietyDatum(
        torus=torus,
        action=action,
        psi=psi,
        w=HeisenbergElement.from_coordinates(model.w, psi.dim_u),
        w_prime_space=tuple(tuple(v) for v in model.w_prime),
    )
    return Instance(
        datum=datum,
        level=level_from_model(model.level, psi.dim),
        constants=constants_from_model(model.constants),
        source=source,
    )


def parse_document(document: object, source: str = "<document>") -> Instance:
    """Validate already-loaded YAML or JSON data and build the instance."""
    try:
        model = InstanceModel.model_validate(document)
    except ValidationError as e:
        raise InstanceError(f"{source}: {e}") from e
    return from_model(model, source)


def load_instance(path: str | os.PathLike) -> Instance:
    """
    Read one instance file.

    Raises:
        InstanceError: If the file is unreadable, not YAML, or fails
            validation.
    """
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise InstanceError(f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise InstanceError(f"{path}: invalid YAML: {e}") from e
    logger.debug("Loaded instance document %s", path)
    return parse_document(document, str(path))


def load_list(path: str | os.PathLike) -> list[Path]:
    """
    Instance paths named by a list file.

    Blank lines and ``#`` comments are skipped; relative paths resolve against
    the list file's directory.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise InstanceError(f"cannot read {path}: {e}") from e
    entries = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if line:
            entries.append(path.parent / line)
    return entries


def _field_model(field: AbelianFieldSpec) -> FieldModel:
    return FieldModel(modulus=field.modulus, subgroup=sorted(field.subgroup))


def _factor_model(factor: TorusFactor) -> TorusFactorModel:
    if isinstance(factor, SplitFactor):
        return TorusFactorModel(kind="split", rank=factor.rank)
    kind = "weil" if isinstance(factor, WeilRestrictionFactor) else "norm_one"
    return TorusFactorModel(kind=kind, field=_field_model(factor.field))


def level_to_model(level: LevelSpec) -> LevelModel:
    return LevelModel(
        exceptions=[
            LevelExceptionModel(
                prime=p,
                t_depth=exception.t_depth,
                w_lattice=(
                    [list(v) for v in exception.w_lattice.basis]
                    if exception.w_lattice is not None
                    else None
                ),
            )
            for p, exception in level.exceptions.items()
        ]
    )


def to_model(
    datum: SubvarietyDatum, level: LevelSpec, constants: BoundConstants
) -> InstanceModel:
    """The normalised document for domain objects: fields as modulus and subgroup."""
    psi = datum.psi
    return InstanceModel(
        torus=TorusModel(
            factors=[_factor_model(factor) for factor in datum.torus.factors],
            class_number=datum.torus.class_number_override,
        ),
        psi=PsiModel(
            dim_u=psi.dim_u,
            dim_v=psi.dim_v,
            tensor=(
                None
                if psi.is_zero
                else [[list(row) for row in matrix] for matrix in psi.tensor]
            ),
        ),
        action=[
            BlockModel(
                coordinates=list(block.coordinates),
                character=[list(part) for part in block.character.exponents],
            )
            for block in datum.action
        ],
        w=list(datum.w.coordinates),
        w_prime=[list(v) for v in datum.w_prime_space],
        level=level_to_model(level),
        constants=ConstantsModel(
            b=constants.b, c_N=constants.c_N, c_0=constants.c_0, N=constants.N
        ),
    )
