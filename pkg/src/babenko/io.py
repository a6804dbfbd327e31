"""Flat-file emission and loading of branch data, profiles and r-curves.

Tabular series go to CSV with a versioned comment header; events,
metadata and verification reports go to JSON.  All floats are written
with 17 significant digits so that files are byte-stable across runs of
the same build and round-trip exactly through float parsing.

Each traced branch produces two files: `<label>.csv` with one summary
row per point, and `<label>.solutions.csv` carrying the full coefficient
vectors, from which profiles can be reconstructed without re-solving.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .continuation import Branch, BranchEvent
from .solver import SolutionPoint
from .spectral import CosineGrid, SpectralField

__all__ = [
    "FORMAT_VERSION",
    "BranchData",
    "write_branch",
    "read_branch",
    "write_events",
    "write_profile",
    "write_rcurve",
    "write_report",
]

FORMAT_VERSION = 1


def _f(x: float) -> str:
    return "%.17g" % float(x)


def _event_flags(branch: Branch) -> list[str]:
    """Per-point event annotations: an event is attached to the nearest point."""
    flags = [""] * len(branch.points)
    if not branch.points:
        return flags
    amps = branch.amplitudes()
    for ev in branch.events:
        i = int(np.argmin(np.abs(amps - ev.amplitude)))
        flags[i] = ev.kind if not flags[i] else flags[i] + ";" + ev.kind
    return flags


def write_branch(branch: Branch, outdir, depth: float, fmt: str = "csv") -> list[Path]:
    """Write the per-point table and the coefficient sidecar for one branch."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    flags = _event_flags(branch)
    written = []

    rows = [
        {
            "index": i,
            "a_target": p.sup_norm,
            "mu": p.mu,
            "sup_norm": p.sup_norm,
            "mean": p.mean,
            "r": p.r,
            "residual": p.residual_norm,
            "event_flags": flags[i],
        }
        for i, p in enumerate(branch.points)
    ]

    if fmt == "json":
        path = outdir / f"{branch.label}.json"
        doc = {
            "format": "babenko-branch",
            "version": FORMAT_VERSION,
            "label": branch.label,
            "mode": branch.mode,
            "parent": branch.parent,
            "depth": float(depth),
            "points": rows,
        }
        path.write_text(json.dumps(doc, indent=1, default=float) + "\n")
        written.append(path)
    elif fmt == "csv":
        path = outdir / f"{branch.label}.csv"
        with path.open("w") as fh:
            fh.write(f"# babenko-branch v{FORMAT_VERSION}\n")
            fh.write(
                f"# label={branch.label} mode={branch.mode} "
                f"parent={branch.parent} depth={_f(depth)}\n"
            )
            fh.write("index,a_target,mu,sup_norm,mean,r,residual,event_flags\n")
            for row in rows:
                fh.write(
                    "%d,%s,%s,%s,%s,%s,%s,%s\n"
                    % (
                        row["index"], _f(row["a_target"]), _f(row["mu"]),
                        _f(row["sup_norm"]), _f(row["mean"]), _f(row["r"]),
                        _f(row["residual"]), row["event_flags"],
                    )
                )
        written.append(path)
    else:
        raise ValueError(f"unknown output format {fmt!r}")

    if branch.points:
        N = branch.points[0].w.grid.N
        spath = outdir / f"{branch.label}.solutions.csv"
        with spath.open("w") as fh:
            fh.write(f"# babenko-solutions v{FORMAT_VERSION}\n")
            fh.write(f"# label={branch.label} depth={_f(depth)} N={N}\n")
            fh.write("index,mu," + ",".join(f"c{k}" for k in range(N)) + "\n")
            for i, p in enumerate(branch.points):
                fh.write(
                    "%d,%s," % (i, _f(p.mu))
                    + ",".join(_f(c) for c in p.coeffs)
                    + "\n"
                )
        written.append(spath)
    return written


@dataclass
class BranchData:
    """Branch data reconstructed from a summary file plus its sidecar."""

    label: str
    depth: float
    table: list  # summary dict per point
    points: list  # SolutionPoint per point, when the sidecar was present

    @property
    def mus(self) -> np.ndarray:
        return np.array([row["mu"] for row in self.table])

    @property
    def sup_norms(self) -> np.ndarray:
        return np.array([row["sup_norm"] for row in self.table])


def _parse_header_meta(line: str) -> dict:
    out = {}
    for chunk in line.lstrip("#").split():
        if "=" in chunk:
            k, _, v = chunk.partition("=")
            out[k] = v
    return out


def read_branch(path) -> BranchData:
    """Load a branch table (CSV or JSON) and, if present, its solution sidecar."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"branch file not found: {path}")
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        if doc.get("format") != "babenko-branch":
            raise ValueError(f"{path} is not a branch file")
        label, depth, table = doc["label"], float(doc["depth"]), doc["points"]
        sidecar = path.parent / f"{label}.solutions.csv"
    else:
        lines = path.read_text().splitlines()
        if not lines or not lines[0].startswith("# babenko-branch"):
            raise ValueError(f"{path} is not a branch file")
        meta = _parse_header_meta(lines[1])
        label, depth = meta["label"], float(meta["depth"])
        cols = lines[2].split(",")
        table = []
        for line in lines[3:]:
            if not line:
                continue
            vals = line.split(",")
            row = dict(zip(cols, vals))
            for key in ("a_target", "mu", "sup_norm", "mean", "r", "residual"):
                row[key] = float(row[key])
            row["index"] = int(row["index"])
            table.append(row)
        sidecar = path.parent / f"{label}.solutions.csv"

    points: list[SolutionPoint] = []
    if sidecar.exists():
        slines = sidecar.read_text().splitlines()
        smeta = _parse_header_meta(slines[1])
        N = int(smeta["N"])
        grid = CosineGrid(N)
        for line in slines[3:]:
            if not line:
                continue
            vals = line.split(",")
            mu = float(vals[1])
            coeffs = np.array([float(v) for v in vals[2 : 2 + N]])
            points.append(
                SolutionPoint.from_solution(
                    SpectralField(grid, coeffs=coeffs), mu, depth,
                    residual_norm=float("nan"), iterations=0,
                )
            )
    return BranchData(label=label, depth=depth, table=table, points=points)


def write_events(branches: list[Branch], outdir, depth: float) -> Path:
    """One JSON file collecting the events of every traced branch."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "events.json"
    doc = {
        "format": "babenko-events",
        "version": FORMAT_VERSION,
        "depth": float(depth),
        "events": [
            {
                "branch": b.label,
                "kind": ev.kind,
                "mu": ev.mu,
                "sup_norm": ev.sup_norm,
                "amplitude": ev.amplitude,
            }
            for b in branches
            for ev in b.events
        ],
    }
    path.write_text(json.dumps(doc, indent=1, default=float) + "\n")
    return path


def write_profile(profile, mu: float, path, fmt: str = "csv") -> Path:
    """Write surface samples (t, x, y) with crest census and metadata."""
    path = Path(path)
    meta = {
        "format": "babenko-profile",
        "version": FORMAT_VERSION,
        "mu": float(mu),
        "sup_norm": float(np.max(np.abs(profile.y))),
        "r": profile.r,
        "depth": profile.depth,
        "monotone_x": profile.monotone_x,
        "mean_residual": profile.mean_residual,
        "crest_census": [
            {"x": x, "height": h} for x, h in profile.crest_census
        ],
        "n_highest": profile.n_highest(),
    }
    if fmt == "json":
        meta["samples"] = [
            {"t": float(t), "x": float(x), "y": float(y)}
            for t, x, y in zip(profile.t, profile.x, profile.y)
        ]
        path.write_text(json.dumps(meta, indent=1, default=float) + "\n")
    elif fmt == "csv":
        with path.open("w") as fh:
            fh.write(f"# babenko-profile v{FORMAT_VERSION}\n")
            fh.write("# " + json.dumps(meta, default=float) + "\n")
            fh.write("t,x,y\n")
            for t, x, y in zip(profile.t, profile.x, profile.y):
                fh.write(f"{_f(t)},{_f(x)},{_f(y)}\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return path


def write_rcurve(series: np.ndarray, path, fmt: str = "csv") -> Path:
    """Write an (sup_norm, r) series; metadata records the maximum location."""
    path = Path(path)
    series = np.asarray(series, dtype=float)
    if series.size:
        imax = int(np.argmax(series[:, 1]))
        meta = {
            "format": "babenko-rcurve",
            "version": FORMAT_VERSION,
            "r_max": series[imax, 1],
            "sup_norm_at_max": series[imax, 0],
        }
    else:
        meta = {"format": "babenko-rcurve", "version": FORMAT_VERSION}
    if fmt == "json":
        meta["samples"] = [{"sup_norm": a, "r": r} for a, r in series]
        path.write_text(json.dumps(meta, indent=1, default=float) + "\n")
    elif fmt == "csv":
        with path.open("w") as fh:
            fh.write(f"# babenko-rcurve v{FORMAT_VERSION}\n")
            fh.write("# " + json.dumps(meta, default=float) + "\n")
            fh.write("sup_norm,r\n")
            for a, r in series:
                fh.write(f"{_f(a)},{_f(r)}\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
    return path


def write_report(report: dict, path) -> Path:
    path = Path(path)
    doc = {"format": "babenko-verify", "version": FORMAT_VERSION}
    doc.update(report)
    path.write_text(json.dumps(doc, indent=1, default=float) + "\n")
    return path
