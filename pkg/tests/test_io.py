import json
import math

import numpy as np
import pytest

from babenko.continuation import Branch, BranchEvent
from babenko.geometry import r_curve, surface_curve
from babenko.io import (
    BranchData,
    read_branch,
    write_branch,
    write_events,
    write_profile,
    write_rcurve,
    write_report,
)

from conftest import H


class TestBranchRoundTrip:
    def test_csv_round_trip(self, c1_coarse, tmp_path):
        paths = write_branch(c1_coarse, tmp_path, H, fmt="csv")
        assert [p.name for p in paths] == ["C1.csv", "C1.solutions.csv"]
        data = read_branch(paths[0])
        assert isinstance(data, BranchData)
        assert data.label == "C1"
        assert data.depth == H  # 17 significant digits round-trip exactly
        assert np.array_equal(data.mus, c1_coarse.mus())
        assert np.array_equal(data.sup_norms, c1_coarse.amplitudes())

    def test_sidecar_restores_solution_points(self, c1_coarse, tmp_path):
        paths = write_branch(c1_coarse, tmp_path, H)
        data = read_branch(paths[0])
        assert len(data.points) == len(c1_coarse.points)
        for got, want in zip(data.points, c1_coarse.points):
            assert got.mu == want.mu
            assert got.r == pytest.approx(want.r, abs=1e-15)
            assert np.array_equal(got.coeffs, want.coeffs)

    def test_json_round_trip(self, c1_coarse, tmp_path):
        paths = write_branch(c1_coarse, tmp_path, H, fmt="json")
        data = read_branch(paths[0])
        assert data.label == "C1"
        assert np.array_equal(data.mus, c1_coarse.mus())
        assert len(data.points) == len(c1_coarse.points)

    def test_output_is_byte_stable(self, c1_coarse, tmp_path):
        p1 = write_branch(c1_coarse, tmp_path / "a", H)
        p2 = write_branch(c1_coarse, tmp_path / "b", H)
        for a, b in zip(p1, p2):
            assert a.read_bytes() == b.read_bytes()

    def test_event_flags_attach_to_nearest_point(self, c1_coarse, tmp_path):
        branch = Branch(label="flagged", mode=1, points=list(c1_coarse.points))
        target = branch.points[3]
        branch.events.append(
            BranchEvent("turning_point", target.mu, target.sup_norm, target.sup_norm)
        )
        path = write_branch(branch, tmp_path, H)[0]
        data = read_branch(path)
        assert data.table[3]["event_flags"] == "turning_point"
        assert all(row["event_flags"] == "" for i, row in enumerate(data.table) if i != 3)

    def test_unknown_format_rejected(self, c1_coarse, tmp_path):
        with pytest.raises(ValueError):
            write_branch(c1_coarse, tmp_path, H, fmt="parquet")


class TestBranchReadErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_branch(tmp_path / "nope.csv")

    def test_foreign_csv_rejected(self, tmp_path):
        bad = tmp_path / "other.csv"
        bad.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_branch(bad)

    def test_foreign_json_rejected(self, tmp_path):
        bad = tmp_path / "other.json"
        bad.write_text(json.dumps({"format": "something-else"}))
        with pytest.raises(ValueError):
            read_branch(bad)

    def test_table_without_sidecar_loads(self, c1_coarse, tmp_path):
        paths = write_branch(c1_coarse, tmp_path, H)
        paths[1].unlink()
        data = read_branch(paths[0])
        assert data.points == []
        assert len(data.table) == len(c1_coarse.points)


class TestEventsFile:
    def test_events_json(self, c1_coarse, tmp_path):
        branch = Branch(label="C1", mode=1, points=list(c1_coarse.points))
        branch.events.append(BranchEvent("extreme_termination", 0.7, 0.35, 0.35))
        path = write_events([branch], tmp_path, H)
        doc = json.loads(path.read_text())
        assert doc["format"] == "babenko-events"
        assert doc["depth"] == pytest.approx(H)
        assert doc["events"] == [
            {"branch": "C1", "kind": "extreme_termination", "mu": 0.7,
             "sup_norm": 0.35, "amplitude": 0.35}
        ]


class TestProfileAndCurves:
    def test_profile_csv(self, c1_coarse, tmp_path):
        pt = c1_coarse.last
        prof = surface_curve(pt.w, pt.mu, H)
        path = write_profile(prof, pt.mu, tmp_path / "prof.csv")
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# babenko-profile")
        meta = json.loads(lines[1].lstrip("# "))
        assert meta["mu"] == pt.mu
        assert meta["n_highest"] == 1
        assert lines[2] == "t,x,y"
        assert len(lines) == 3 + prof.t.size
        t0, x0, y0 = (float(v) for v in lines[3].split(","))
        assert t0 == prof.t[0] and x0 == prof.x[0] and y0 == prof.y[0]

    def test_profile_json(self, c1_coarse, tmp_path):
        pt = c1_coarse.last
        prof = surface_curve(pt.w, pt.mu, H)
        path = write_profile(prof, pt.mu, tmp_path / "prof.json", fmt="json")
        doc = json.loads(path.read_text())
        assert len(doc["samples"]) == prof.t.size
        assert doc["crest_census"][0]["height"] == pytest.approx(prof.crest_census[0][1])

    def test_rcurve_metadata_records_maximum(self, c1_coarse, tmp_path):
        series = r_curve(c1_coarse)
        path = write_rcurve(series, tmp_path / "r.csv")
        lines = path.read_text().splitlines()
        meta = json.loads(lines[1].lstrip("# "))
        imax = int(np.argmax(series[:, 1]))
        assert meta["r_max"] == series[imax, 1]
        assert meta["sup_norm_at_max"] == series[imax, 0]
        assert len(lines) == 3 + len(series)

    def test_rcurve_json(self, c1_coarse, tmp_path):
        series = r_curve(c1_coarse)
        doc = json.loads(
            write_rcurve(series, tmp_path / "r.json", fmt="json").read_text()
        )
        assert len(doc["samples"]) == len(series)

    def test_bad_formats(self, c1_coarse, tmp_path):
        pt = c1_coarse.last
        prof = surface_curve(pt.w, pt.mu, H)
        with pytest.raises(ValueError):
            write_profile(prof, pt.mu, tmp_path / "p.x", fmt="x")
        with pytest.raises(ValueError):
            write_rcurve(np.zeros((2, 2)), tmp_path / "r.x", fmt="x")


class TestReport:
    def test_report_written_with_format_tag(self, tmp_path):
        path = write_report({"passed": True, "checks": {"a": 1.0}}, tmp_path / "v.json")
        doc = json.loads(path.read_text())
        assert doc["format"] == "babenko-verify"
        assert doc["passed"] is True
        assert doc["checks"] == {"a": 1.0}
