"""Test the blochobs command line."""

import math
from pathlib import Path
from typing import Any, List

import numpy as np
import pytest

from python_blochobs import const
from python_blochobs.cli import (
    EXIT_DISAGREEMENT,
    EXIT_FAILURE,
    EXIT_OK,
    agreement_checks,
    main,
    parse_params,
    parse_sweep_axis,
    parse_value,
)
from python_blochobs.exceptions import ParseError
from python_blochobs.invariants import METHODS, InvariantResult, chern_obstruction
from python_blochobs.linalg import det_phase_winding
from python_blochobs.models import haldane, kane_mele
from python_blochobs.serialization import decode_matrix, load_frames, model_document
from tests.const import (
    DIRAC_POINT,
    HALDANE_CRITICAL_MASS,
    HALDANE_TOPOLOGICAL,
    KANE_MELE_QSH,
)
from tests.utils import load_json, write_json

CHERN_RUN = [
    "--model",
    "haldane",
    "--invariant",
    "chern",
    "--methods",
    "obstruction,plaquette",
    "--grid",
    "16",
]

CSV_HEADER = "M,phi,t1,t2,method,raw,value,snap_residual,grid_N"


def _lines(text: str) -> List[str]:
    return [line for line in text.splitlines() if line]


def test_parse_value() -> Any:
    """Test booleans, angle literals and numbers."""
    assert parse_value("true") is True
    assert parse_value("False") is False
    assert parse_value("pi/2") == pytest.approx(math.pi / 2)
    assert parse_value("-pi/4") == pytest.approx(-math.pi / 4)
    assert parse_value("pi") == pytest.approx(math.pi)
    assert parse_value("3") == 3
    assert isinstance(parse_value("3"), int)
    assert parse_value("2.0") == 2.0
    assert isinstance(parse_value("2.0"), float)
    assert parse_value("1e-3") == pytest.approx(0.001)

    with pytest.raises(ParseError, match="cannot parse"):
        parse_value("tau")


def test_parse_params() -> Any:
    """Test k=v lists."""
    assert parse_params(None) == {}
    assert parse_params("M=0.5, phi=-pi/2") == {"M": 0.5, "phi": -math.pi / 2}

    with pytest.raises(ParseError, match="name=value"):
        parse_params("M")
    with pytest.raises(ParseError, match="name=value"):
        parse_params("=1")


def test_parse_sweep_axis() -> Any:
    """Test NAME:START:STOP:STEPS axes."""
    axis = parse_sweep_axis("phi:-pi/2:pi/2:5")

    assert axis["name"] == "phi"
    assert axis["start"] == pytest.approx(-math.pi / 2)
    assert axis["stop"] == pytest.approx(math.pi / 2)
    assert axis["steps"] == 5

    with pytest.raises(ParseError, match="NAME:START:STOP:STEPS"):
        parse_sweep_axis("M:0:1")


def test_agreement_checks() -> Any:
    """Test that only invariants with several methods are compared."""
    results = [
        InvariantResult("obstruction", 1.0, 1, 0.0, 16),
        InvariantResult("plaquette", 1.0, 1, 0.0, 16),
        InvariantResult("fkm_lattice", 1.0, 1, 0.0, 16),
    ]
    checks = agreement_checks(results)

    assert checks == [
        {
            "name": "chern_agreement",
            "passed": True,
            "values": {"obstruction": 1, "plaquette": 1},
        }
    ]


def test_usage_errors(capsys: Any) -> Any:
    """Test that usage errors exit 1."""
    assert main([]) == EXIT_FAILURE
    assert main(["compute"]) == EXIT_FAILURE
    assert main(["compute", "--model", "haldane", "--grid", "ten"]) == EXIT_FAILURE
    assert main(["compute", "--model", "haldane", "--grid", "15"]) == EXIT_FAILURE
    assert main(["compute", "--model", "graphene"]) == EXIT_FAILURE
    assert main(["sweep", "--model", "haldane"]) == EXIT_FAILURE
    assert main(["export-frames", "--model", "haldane"]) == EXIT_FAILURE

    assert "blochobs:" in capsys.readouterr().err


def test_compute(tmp_path: Path) -> Any:
    """Test the JSON report of compute."""
    out = tmp_path / "report.json"
    assert main(["compute", *CHERN_RUN, "--out", str(out)]) == EXIT_OK

    report = load_json(out)
    assert set(report) == {"config", "results", "checks"}
    assert report["config"]["methods"] == ["obstruction", "plaquette"]
    assert [result["method"] for result in report["results"]] == [
        "obstruction",
        "plaquette",
    ]
    for result in report["results"]:
        assert set(result) == {
            "method",
            "raw",
            "value",
            "snap_residual",
            "grid_N",
            "refinements",
            "wall_ms",
        }
        assert abs(result["value"]) == 1
    assert report["checks"][0]["name"] == "chern_agreement"
    assert report["checks"][0]["passed"]


def test_compute_is_deterministic(tmp_path: Path) -> Any:
    """Test that identical runs give identical reports apart from wall time."""
    reports = []
    for name in ("first.json", "second.json"):
        out = tmp_path / name
        assert main(["compute", *CHERN_RUN, "--out", str(out)]) == EXIT_OK
        report = load_json(out)
        for result in report["results"]:
            del result["wall_ms"]
        reports.append(report)

    assert reports[0] == reports[1]


def test_compute_csv(capsys: Any) -> Any:
    """Test the CSV output of compute on stdout."""
    assert main(["compute", *CHERN_RUN, "--format", "csv"]) == EXIT_OK

    lines = _lines(capsys.readouterr().out)
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert lines[1].split(",")[4] == "obstruction"


def test_compute_skips_z2_without_trs(tmp_path: Path) -> Any:
    """Test that --invariant all only runs the Chern methods on haldane."""
    out = tmp_path / "report.json"
    args = ["compute", "--model", "haldane", "--grid", "32", "--out", str(out)]
    assert main(args) == EXIT_OK

    report = load_json(out)
    assert report["config"]["methods"] == list(const.ALL_METHODS)
    assert [result["method"] for result in report["results"]] == list(
        const.CHERN_METHODS
    )
    assert report["checks"][0]["passed"]


def test_compute_disagreement(monkeypatch: Any, tmp_path: Path) -> Any:
    """Test that disagreeing methods exit 2."""

    def wrong(model: Any, grid_n: int, tolerances: Any) -> InvariantResult:
        return InvariantResult("plaquette", 7.0, 7, 0.0, grid_n)

    monkeypatch.setitem(METHODS, "plaquette", wrong)
    out = tmp_path / "report.json"
    assert main(["compute", *CHERN_RUN, "--out", str(out)]) == EXIT_DISAGREEMENT

    report = load_json(out)
    assert not report["checks"][0]["passed"]
    assert report["checks"][0]["values"]["plaquette"] == 7


def test_compute_gapless(tmp_path: Path) -> Any:
    """Test that a gap closing exits 1 and reports the momentum."""
    out = tmp_path / "report.json"
    args = [
        "compute",
        "--model",
        "haldane",
        "--params",
        f"M={HALDANE_CRITICAL_MASS!r}",
        "--methods",
        "plaquette",
        "--grid",
        "24",
        "--out",
        str(out),
    ]
    assert main(args) == EXIT_FAILURE

    error = load_json(out)["error"]
    assert error["type"] == "GapClosed"
    assert error["momentum"] == pytest.approx(DIRAC_POINT, abs=1e-9)
    assert error["gap"] < 1e-8


def test_compute_model_file(tmp_path: Path) -> Any:
    """Test compute on a hopping file."""
    model_file = write_json(
        tmp_path / "kane_mele.json", model_document(kane_mele(**KANE_MELE_QSH))
    )
    out = tmp_path / "report.json"
    args = ["compute", "--model-file", model_file, "--invariant", "z2"]
    args += ["--methods", "fkm_obstruction,fkm_lattice", "--grid", "32"]
    assert main([*args, "--out", str(out)]) == EXIT_OK

    values = [result["value"] for result in load_json(out)["results"]]
    assert values == [1, 1]


def test_sweep_csv(tmp_path: Path) -> Any:
    """Test a mass sweep written as CSV."""
    out = tmp_path / "sweep.csv"
    args = ["sweep", "--model", "haldane", "--invariant", "chern"]
    args += ["--methods", "plaquette", "--grid", "16", "--sweep", "M:0:1.2:4"]
    assert main([*args, "--format", "csv", "--out", str(out)]) == EXIT_OK

    lines = _lines(out.read_text(encoding="utf-8"))
    assert lines[0] == CSV_HEADER
    masses = [float(line.split(",")[0]) for line in lines[1:]]
    assert masses == pytest.approx([0.0, 0.4, 0.8, 1.2])
    assert [abs(int(line.split(",")[6])) for line in lines[1:]] == [1, 1, 0, 0]


def test_sweep_gapless_line(tmp_path: Path) -> Any:
    """Test that gapless sweep points are marked and the sweep exits 0."""
    out = tmp_path / "sweep.json"
    args = ["sweep", "--model", "haldane", "--params", "t2=0", "--invariant", "chern"]
    args += ["--methods", "plaquette", "--grid", "24", "--sweep", "M:0:0.5:2"]
    assert main([*args, "--out", str(out)]) == EXIT_OK

    report = load_json(out)
    assert [record["value"] for record in report["results"]] == [const.GAPLESS, 0]
    assert report["checks"][0]["status"] == const.GAPLESS
    assert report["checks"][0]["params"]["M"] == 0.0


def test_verify(tmp_path: Path) -> Any:
    """Test that verify passes on a healthy model."""
    out = tmp_path / "verify.json"
    args = ["verify", "--model", "haldane", "--grid", "32", "--out", str(out)]
    assert main(args) == EXIT_OK

    report = load_json(out)
    assert all(check["passed"] for check in report["checks"])
    assert "first_failure" not in report
    names = [check["name"] for check in report["checks"]]
    assert "obstruction_compat" in names
    assert "gauge_degree" in names


def test_verify_broken_epsilon(tmp_path: Path) -> Any:
    """Test that a symmetric ε fails the obstruction compatibility check."""
    document = model_document(kane_mele(**KANE_MELE_QSH))
    document["trs"]["epsilon"] = {"re": np.eye(2).tolist()}
    model_file = write_json(tmp_path / "broken.json", document)
    out = tmp_path / "verify.json"

    args = ["verify", "--model-file", model_file, "--grid", "16", "--out", str(out)]
    assert main(args) == EXIT_FAILURE
    assert load_json(out)["first_failure"] == "obstruction_compat"


def test_verify_csv(capsys: Any) -> Any:
    """Test the CSV form of the verify report."""
    args = ["verify", "--model", "atomic", "--grid", "16", "--format", "csv"]
    assert main(args) == EXIT_OK

    lines = _lines(capsys.readouterr().out)
    assert lines[0] == "name,residual,threshold,passed,detail"
    assert lines[1].startswith("translation_e1,")


def test_export_frames(tmp_path: Path) -> Any:
    """Test that the exported Û has the degree of the live run."""
    out = tmp_path / "frames.json"
    args = ["export-frames", "--model", "haldane", "--grid", "32", "--out", str(out)]
    assert main(args) == EXIT_OK

    document = load_json(out)
    gauge = np.array([decode_matrix(item) for item in document["boundary"]["gauge"]])
    live = chern_obstruction(haldane(**HALDANE_TOPOLOGICAL), 32)
    assert live.refinements == 0
    assert det_phase_winding(gauge).degree == -live.value
    assert load_frames(str(out)).grid_n == 32


def test_export_frames_cell(tmp_path: Path) -> Any:
    """Test --target cell on B_eff."""
    out = tmp_path / "frames.json"
    args = ["export-frames", "--model", "kane_mele", "--grid", "16", "--target", "cell"]
    assert main([*args, "--out", str(out)]) == EXIT_OK

    document = load_json(out)
    assert document["cell"] == const.CELL_HALF
    assert "boundary" not in document
    assert "obstructions" not in document
