import argparse
import json
from fractions import Fraction
from pathlib import Path

import pytest
import yaml

from orbit_bounds_cli.main import main, parse_constants
from orbit_bounds_cli.oracle import (
    analytic_class_number,
    class_number_from_unit,
    fundamental_unit_norm,
)

DATA = Path(__file__).parent / "data"

SPLIT = {"factors": [{"kind": "split"}]}
SCALAR_PSI = {"dim_u": 1, "dim_v": 0}
SCALAR_ACTION = [{"coordinates": [0], "character": [[1]]}]


def write_instance(directory: Path, name: str, w, **overrides) -> Path:
    """A one-dimensional instance file, split torus unless overridden."""
    document = {
        "torus": SPLIT,
        "psi": SCALAR_PSI,
        "action": SCALAR_ACTION,
        "w": [w],
    }
    document.update(overrides)
    path = directory / name
    path.write_text(yaml.safe_dump(document, sort_keys=False), encoding="utf-8")
    return path


def write_list(directory: Path, names: list[str]) -> Path:
    path = directory / "family.lst"
    path.write_text(
        "# generated family\n\n" + "\n".join(names) + "\n", encoding="utf-8"
    )
    return path


def run(capsys, *argv: str) -> tuple[int, str]:
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


class TestGoldenReports:
    """Test JSON reports of the worked instances byte for byte."""

    @pytest.mark.parametrize(
        "instance, golden",
        [
            ("split_third.yaml", "tau_split_third.json"),
            ("gaussian_weil.yaml", "tau_gaussian_weil.json"),
            ("weil_minus23.yaml", "tau_weil_minus23.json"),
        ],
    )
    def test_tau_json_matches_golden(self, capsys, instance, golden):
        code, out = run(capsys, "tau", DATA / instance, "--format", "json")
        assert code == 0
        assert out == (DATA / golden).read_text(encoding="utf-8")


class TestRoundTrip:
    """Test that embedded instances re-evaluate to the same report."""

    @pytest.mark.parametrize("command", ["tau", "bounds", "defects"])
    @pytest.mark.parametrize(
        "instance", ["split_third.yaml", "gaussian_weil.yaml", "weil_minus23.yaml"]
    )
    def test_reparse_and_reevaluate(self, capsys, tmp_path, command, instance):
        code, first = run(capsys, command, DATA / instance, "--format", "json")
        assert code == 0
        report = json.loads(first)

        again = tmp_path / "again.yaml"
        again.write_text(yaml.safe_dump(report["instance"]), encoding="utf-8")
        code, second = run(capsys, command, again, "--format", "json")
        assert code == 0
        assert json.loads(second) == report

    def test_constants_override_is_embedded(self, capsys, tmp_path):
        code, out = run(
            capsys,
            "tau",
            DATA / "split_third.yaml",
            "--constants",
            "b=3,c0=1/2",
            "--format",
            "json",
        )
        assert code == 0
        report = json.loads(out)
        assert report["tau"] == 6
        assert report["instance"]["constants"]["b"] == 3
        assert report["instance"]["constants"]["c_0"] == "1/2"
        assert report["bounds"]["upper_exact"] == "3/2"

        again = tmp_path / "again.yaml"
        again.write_text(yaml.safe_dump(report["instance"]), encoding="utf-8")
        code, second = run(capsys, "tau", again, "--format", "json")
        assert json.loads(second) == report


class TestTableOutput:
    """Test that tables carry the same numbers as JSON."""

    def test_tau_table(self, capsys):
        code, out = run(capsys, "tau", DATA / "weil_minus23.yaml")
        assert code == 0
        for text in ("Test invariant", "23", "9.83132397813", "Bounds"):
            assert text in out

    def test_bounds_table(self, capsys):
        code, out = run(capsys, "bounds", DATA / "gaussian_weil.yaml")
        assert code == 0
        assert "1.92181205567" in out
        assert "discriminant" in out

    def test_defects_table(self, capsys):
        code, out = run(capsys, "defects", DATA / "split_third.yaml")
        assert code == 0
        assert "Primes" in out
        assert "yes" in out


class TestExitCodes:
    """Test the mapping of failures to exit codes."""

    def test_missing_file(self, capsys, tmp_path):
        code, _ = run(capsys, "tau", tmp_path / "missing.yaml")
        assert code == 2

    def test_invalid_yaml(self, capsys, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("torus: [unclosed\n", encoding="utf-8")
        code, _ = run(capsys, "tau", path)
        assert code == 2

    def test_unknown_key(self, capsys, tmp_path):
        path = write_instance(tmp_path, "extra.yaml", "1/3", colour="blue")
        code, _ = run(capsys, "tau", path)
        assert code == 2

    def test_malformed_rational(self, capsys, tmp_path):
        path = write_instance(tmp_path, "float.yaml", 0.5)
        code, _ = run(capsys, "tau", path)
        assert code == 2

    def test_dimension_mismatch(self, capsys, tmp_path):
        path = write_instance(
            tmp_path, "dims.yaml", "1/3", psi={"dim_u": 2, "dim_v": 0}
        )
        code, _ = run(capsys, "tau", path)
        assert code == 2

    def test_bad_constants_flag(self, capsys):
        code, _ = run(capsys, "tau", DATA / "split_third.yaml", "--constants", "x=1")
        assert code == 2

    def test_nonpositive_constant(self, capsys):
        code, _ = run(capsys, "tau", DATA / "split_third.yaml", "--constants", "b=0")
        assert code == 2

    def test_unknown_command(self, capsys):
        code, _ = run(capsys, "orbit")
        assert code == 2

    def test_precision_cap(self, capsys, tmp_path):
        path = write_instance(tmp_path, "ninth.yaml", "1/9")
        code, _ = run(capsys, "tau", path, "--precision-max", "3")
        assert code == 3

    def test_unsupported_class_number(self, capsys, tmp_path):
        path = write_instance(
            tmp_path,
            "norm_one.yaml",
            0,
            torus={
                "factors": [
                    {"kind": "split"},
                    {"kind": "norm_one", "field": {"quadratic": -4}},
                ]
            },
            action=[{"coordinates": [0], "character": [[1], [0]]}],
        )
        code, out = run(capsys, "bounds", path, "--format", "json")
        assert code == 0
        report = json.loads(out)
        assert report["bounds"]["upper"] is None
        assert report["bounds"]["unsupported"]

        code, _ = run(capsys, "bounds", path, "--require-upper")
        assert code == 4

    def test_class_number_override(self, capsys, tmp_path):
        path = write_instance(
            tmp_path,
            "override.yaml",
            0,
            torus={
                "factors": [
                    {"kind": "split"},
                    {"kind": "norm_one", "field": {"quadratic": -4}},
                ],
                "class_number": 5,
            },
            action=[{"coordinates": [0], "character": [[1], [0]]}],
        )
        code, out = run(capsys, "bounds", path, "--require-upper", "--format", "json")
        assert code == 0
        assert json.loads(out)["bounds"]["upper_exact"] == 5


class TestClassify:
    """Test the boundedness verdict over list files."""

    def test_reciprocal_primes(self, capsys, tmp_path):
        names = []
        for p in (2, 3, 5, 7):
            write_instance(tmp_path, f"p{p}.yaml", f"1/{p}")
            names.append(f"p{p}.yaml")
        family = write_list(tmp_path, names)

        code, out = run(
            capsys, "classify", family, "--threshold", "3", "--format", "json"
        )
        assert code == 0
        report = json.loads(out)
        assert [item["tau"] for item in report["items"]] == [1, 2, 4, 6]
        assert report["max_tau"] == 6
        assert report["bounded"] is False
        assert len(report["classes"]) == 4

        code, out = run(capsys, "classify", family, "--threshold", "10")
        assert code == 0
        assert "BOUNDED" in out
        assert "UNBOUNDED" not in out

    def test_threshold_is_required(self, capsys, tmp_path):
        family = write_list(tmp_path, [])
        code, _ = run(capsys, "classify", family)
        assert code == 2

    def test_missing_member(self, capsys, tmp_path):
        family = write_list(tmp_path, ["absent.yaml"])
        code, _ = run(capsys, "classify", family, "--threshold", "1")
        assert code == 2


class TestIntersect:
    """Test the level fragment emitted by intersect."""

    def test_fragment(self, capsys, tmp_path):
        write_instance(tmp_path, "third.yaml", "1/3")
        write_instance(tmp_path, "ninth.yaml", "2/9")
        write_instance(tmp_path, "half.yaml", "1/2")
        family = write_list(tmp_path, ["third.yaml", "ninth.yaml", "half.yaml"])

        code, out = run(capsys, "intersect", family)
        assert code == 0
        assert yaml.safe_load(out) == {
            "level": {
                "exceptions": [
                    {"prime": 2, "t_depth": 1},
                    {"prime": 3, "t_depth": 2},
                ]
            }
        }

    def test_fragment_absorbs_defects(self, capsys, tmp_path):
        path = write_instance(tmp_path, "ninth.yaml", "2/9")
        family = write_list(tmp_path, ["ninth.yaml"])
        _, out = run(capsys, "intersect", family)

        document = yaml.safe_load(path.read_text(encoding="utf-8"))
        document.update(yaml.safe_load(out))
        path.write_text(yaml.safe_dump(document), encoding="utf-8")
        code, out = run(capsys, "defects", path, "--format", "json")
        assert code == 0
        assert json.loads(out)["unipotent_primes"] == []

    def test_empty_list(self, capsys, tmp_path):
        code, _ = run(capsys, "intersect", write_list(tmp_path, []))
        assert code == 2


class TestOracle:
    """Test the brute-force cross-check command."""

    def test_all_checks_pass(self, capsys):
        code, out = run(capsys, "oracle", "--format", "json")
        assert code == 0
        report = json.loads(out)
        assert report["passed"] is True
        assert {check["name"] for check in report["checks"]} == {
            "class number",
            "pell",
            "real class number",
            "discriminant",
            "unit group",
            "stabilizer",
        }

    @pytest.mark.parametrize(
        "d, h", [(-3, 1), (-4, 1), (-7, 1), (-23, 3), (-47, 5), (-84, 4)]
    )
    def test_class_number_formula(self, d, h):
        assert analytic_class_number(d) == h

    @pytest.mark.parametrize(
        "d, norm, h", [(5, -1, 1), (12, 1, 1), (40, -1, 2), (60, 1, 2), (136, 1, 2)]
    )
    def test_class_number_from_unit(self, d, norm, h):
        assert fundamental_unit_norm(d) == norm
        assert class_number_from_unit(d) == h


class TestParseConstants:
    """Test the --constants flag syntax."""

    def test_aliases(self):
        assert parse_constants("b=1/2,cN=3,c0=2,N=4") == {
            "b": Fraction(1, 2),
            "c_N": 3,
            "c_0": 2,
            "N": 4,
        }

    def test_rejects_fractional_exponent(self):
        with pytest.raises(argparse.ArgumentTypeError, match="N must be an integer"):
            parse_constants("N=1/2")
