"""
Report models and their two renderings.

Every command builds one pydantic report from :mod:`common.schemas.report_schemas`.
``--format json`` prints it as indented JSON; ``--format table`` prints the
same fields as rich tables.
"""

import json
from collections.abc import Sequence
from fractions import Fraction
from typing import TextIO

import yaml
from common.schemas.report_schemas import (
    BoundsReportOut,
    BoundsSection,
    ClassEntry,
    ClassifyItem,
    ClassifyReport,
    DefectsReport,
    IntersectReport,
    OracleCheck,
    OracleReport,
    PrimeReport,
    ReportModel,
    TauReport,
)
from common.utils import format_bound, format_rational
from rich.console import Console
from rich.table import Table

from orbit_bounds.invariants import (
    BoundsReport,
    Classification,
    InvariantReport,
    LevelSpec,
    PrimeDefect,
)
from orbit_bounds_cli.instance import Instance, level_to_model


def prime_report(defect: PrimeDefect) -> PrimeReport:
    return PrimeReport(
        prime=defect.prime,
        block_depths=list(defect.block_depths),
        level_depth=defect.level_depth,
        index=defect.index,
        level_index=defect.level_index,
        unipotent_index=defect.unipotent_index,
        defect=defect.is_defect,
        unipotent_defect=defect.is_unipotent_defect,
    )


def bounds_section(bounds: BoundsReport) -> BoundsSection:
    return BoundsSection(
        lower=format_bound(bounds.lower.value),
        lower_product=bounds.lower.product,
        degenerate=bounds.lower.degenerate,
        upper=format_bound(bounds.upper),
        upper_exact=bounds.upper,
        class_number=bounds.class_number,
        order=bounds.order,
        unsupported=bounds.unsupported,
    )


def tau_report(instance: Instance, report: InvariantReport) -> TauReport:
    return TauReport(
        instance=instance.document(),
        discriminant=report.discriminant,
        defect_primes=list(report.defect_primes),
        unipotent_primes=list(report.unipotent_primes),
        primes=[prime_report(defect) for defect in report.primes],
        tau=report.tau,
        w_min=list(report.minimum.element.coordinates),
        bounds=bounds_section(report.bounds),
    )


def bounds_report_out(
    instance: Instance, discriminant: int, bounds: BoundsReport
) -> BoundsReportOut:
    return BoundsReportOut(
        instance=instance.document(),
        discriminant=discriminant,
        bounds=bounds_section(bounds),
    )


def defects_report(instance: Instance, defects: Sequence[PrimeDefect]) -> DefectsReport:
    return DefectsReport(
        instance=instance.document(),
        defect_primes=[d.prime for d in defects if d.is_defect],
        unipotent_primes=[d.prime for d in defects if d.is_unipotent_defect],
        primes=[prime_report(d) for d in defects],
    )


def classify_report(
    paths: Sequence[str], threshold: Fraction, result: Classification
) -> ClassifyReport:
    return ClassifyReport(
        threshold=threshold,
        items=[
            ClassifyItem(path=path, tau=tau)
            for path, tau in zip(paths, result.taus, strict=True)
        ],
        max_tau=result.max_tau,
        bounded=result.bounded,
        classes=[
            ClassEntry(signature=list(key.signature), residue=list(key.residue))
            for key in result.classes
        ],
    )


def intersect_report(level: LevelSpec) -> IntersectReport:
    return IntersectReport(level=level_to_model(level))


def oracle_report(checks: Sequence[OracleCheck]) -> OracleReport:
    return OracleReport(checks=list(checks), passed=all(c.passed for c in checks))


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def to_json(report: ReportModel) -> str:
    return json.dumps(report.model_dump(mode="json"), indent=2) + "\n"


def _text(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, Fraction):
        return str(format_rational(value))
    if isinstance(value, list | tuple):
        return "{" + ", ".join(_text(v) for v in value) + "}"
    return str(value)


def _summary(title: str, rows: Sequence[tuple[str, object]]) -> Table:
    table = Table(title=title, show_header=False)
    table.add_column("field", style="bold")
    table.add_column("value")
    for name, value in rows:
        table.add_row(name, _text(value))
    return table


def _primes_table(primes: Sequence[PrimeReport]) -> Table:
    table = Table(title="Primes")
    for column in (
        "p",
        "block depths",
        "level depth",
        "index",
        "level index",
        "I_p",
        "in Delta",
        "in delta",
    ):
        table.add_column(column, justify="right")
    for p in primes:
        table.add_row(
            str(p.prime),
            _text(p.block_depths),
            str(p.level_depth),
            str(p.index),
            str(p.level_index),
            _text(p.unipotent_index),
            _text(p.defect),
            _text(p.unipotent_defect),
        )
    return table


def _bounds_table(bounds: BoundsSection) -> Table:
    rows = [
        ("lower", bounds.lower),
        ("lower product", bounds.lower_product),
        ("degenerate", bounds.degenerate),
        ("upper", bounds.upper),
        ("upper exact", bounds.upper_exact),
        ("class number", bounds.class_number),
        ("order", bounds.order),
    ]
    if bounds.unsupported:
        rows.append(("unsupported", bounds.unsupported))
    return _summary("Bounds", rows)


def _tables(report: ReportModel) -> list[Table]:
    match report:
        case TauReport():
            return [
                _summary(
                    "Test invariant",
                    [
                        ("discriminant", report.discriminant),
                        ("Delta", report.defect_primes),
                        ("delta", report.unipotent_primes),
                        ("tau", report.tau),
                        ("w'", report.w_min),
                    ],
                ),
                _primes_table(report.primes),
                _bounds_table(report.bounds),
            ]
        case BoundsReportOut():
            return [
                _summary("Splitting field", [("discriminant", report.discriminant)]),
                _bounds_table(report.bounds),
            ]
        case DefectsReport():
            return [
                _summary(
                    "Defects",
                    [("Delta", report.defect_primes), ("delta", report.unipotent_primes)],
                ),
                _primes_table(report.primes),
            ]
        case ClassifyReport():
            items = Table(title="Items")
            items.add_column("path")
            items.add_column("tau", justify="right")
            for item in report.items:
                items.add_row(item.path, _text(item.tau))
            classes = Table(title="Classes")
            classes.add_column("signature")
            classes.add_column("residue")
            for entry in report.classes:
                classes.add_row(", ".join(entry.signature), _text(entry.residue))
            verdict = "BOUNDED" if report.bounded else "UNBOUNDED"
            summary = _summary(
                "Classification",
                [
                    ("threshold", report.threshold),
                    ("max tau", report.max_tau),
                    ("verdict", verdict),
                    ("classes", len(report.classes)),
                ],
            )
            return [items, summary, classes]
        case OracleReport():
            table = Table(title="Oracle checks")
            table.add_column("check")
            table.add_column("detail")
            table.add_column("result")
            for check in report.checks:
                table.add_row(
                    check.name, check.detail, "PASS" if check.passed else "FAIL"
                )
            return [table]
    raise TypeError(f"no table layout for {type(report).__name__}")


def render(report: ReportModel, fmt: str, stream: TextIO) -> None:
    """
    Write a report to ``stream``.

    The table form of an intersect report is a YAML ``level:`` fragment that
    can be pasted into an instance file.
    """
    if fmt == "json":
        stream.write(to_json(report))
        return
    if isinstance(report, IntersectReport):
        fragment = {"level": report.level.model_dump(mode="json", exclude_none=True)}
        stream.write(yaml.safe_dump(fragment, sort_keys=False))
        return
    console = Console(file=stream, width=120)
    for table in _tables(report):
        console.print(table)
