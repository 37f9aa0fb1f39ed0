from typing import Any, Literal

from common.schemas.instance_schemas import LevelModel, Rational
from pydantic import BaseModel, ConfigDict


class ReportModel(BaseModel):
    """Base for report payloads."""

    model_config = ConfigDict(arbitrary_types_allowed=True)


class PrimeReport(ReportModel):
    """Per-prime data of one evaluation."""

    prime: int
    block_depths: list[int]
    level_depth: int
    index: int
    level_index: int
    unipotent_index: Rational
    defect: bool
    unipotent_defect: bool


class BoundsSection(ReportModel):
    """Lower and upper bound, decimal strings with 12 significant digits."""

    lower: str
    lower_product: Rational
    degenerate: bool
    upper: str | None
    upper_exact: Rational | None
    class_number: int | None
    order: int
    unsupported: str | None = None


class TauReport(ReportModel):
    command: Literal["tau"] = "tau"
    instance: dict[str, Any]
    discriminant: int
    defect_primes: list[int]
    unipotent_primes: list[int]
    primes: list[PrimeReport]
    tau: Rational
    w_min: list[Rational]
    bounds: BoundsSection


class BoundsReportOut(ReportModel):
    command: Literal["bounds"] = "bounds"
    instance: dict[str, Any]
    discriminant: int
    bounds: BoundsSection


class DefectsReport(ReportModel):
    command: Literal["defects"] = "defects"
    instance: dict[str, Any]
    defect_primes: list[int]
    unipotent_primes: list[int]
    primes: list[PrimeReport]


class ClassifyItem(ReportModel):
    path: str
    tau: Rational


class ClassEntry(ReportModel):
    signature: list[str]
    residue: list[Rational]


class ClassifyReport(ReportModel):
    command: Literal["classify"] = "classify"
    threshold: Rational
    items: list[ClassifyItem]
    max_tau: Rational | None
    bounded: bool
    classes: list[ClassEntry]


class IntersectReport(ReportModel):
    command: Literal["intersect"] = "intersect"
    level: LevelModel


class OracleCheck(ReportModel):
    name: str
    detail: str
    passed: bool


class OracleReport(ReportModel):
    command: Literal["oracle"] = "oracle"
    checks: list[OracleCheck]
    passed: bool
