"""Command-line front end.

Subcommands::

    sweep        geometric phase over delta_phi in [0, 2 pi] (CSV/JSON)
    fringes      synthesize one interference scan, optionally with counting noise
    fit          fit a scan CSV (columns eta_rad, intensity)
    solid-angle  signed solid angle and phase of one Bloch loop
    compare      interferometric vs solid-angle phase over a grid
    path-export  Bloch loop samples (theta, azimuth, x, y, z)

Exit status is 0 on success, 1 when a computation fails and 2 on bad usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import blochgeo, fringes, pancharatnam
from .errors import GeoPhaseError, InternalError
from .qstate import InterferometerConfig

COMMANDS = ("sweep", "fringes", "fit", "solid-angle", "compare", "path-export")
SWEEP_COLUMNS = ("dphi_rad", "phi_total_rad", "phi_dyn_rad", "phi_geo_rad")
COMPARE_COLUMNS = ("dphi_rad", "interferometric_rad", "geometric_rad", "abs_deviation_rad")


# -- serialization ---------------------------------------------------------

def _check_finite(value):
    if isinstance(value, float) and not math.isfinite(value):
        raise InternalError(f"non-finite value {value!r} reached the output writer")
    return value


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(_check_finite(float(value)) + 0.0, ".17g")  # no "-0"
    return str(value)


def emit_csv(header, rows) -> bytes:
    """Header plus rows; floats with 17 significant digits, ``\\n`` line ends."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise InternalError("row length does not match header")
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue().encode("ascii")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return _check_finite(float(obj)) + 0.0
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def emit_json(record) -> bytes:
    try:
        text = json.dumps(_plain(record), indent=2, allow_nan=False)
    except ValueError as exc:
        raise InternalError(str(exc)) from exc
    return (text + "\n").encode("ascii")


# -- run configuration -----------------------------------------------------

@dataclass
class RunConfig:
    command: str
    T: float = 0.125
    dphi: float | None = None
    points: int = 64
    phi1: float | None = None
    phi2: float | None = None
    eta_points: int = fringes.DEFAULT_ETA_POINTS
    samples_per_segment: int = blochgeo.DEFAULT_SAMPLES
    contrast: tuple[float, float, float] = (1.0, 1.0, 1.0)
    seed: int | None = None
    peak_counts: float | None = None
    input: str | None = None
    output: str = "-"
    format: str = "csv"
    degrees: bool = False

    def validate(self):
        """Return an error message for out-of-range settings, or ``None``."""
        if self.command not in COMMANDS:
            return f"unknown command {self.command!r}"
        if not 0.0 <= self.T <= 1.0:
            return "--T must lie in [0, 1]"
        if self.points < 2:
            return "--points must be >= 2"
        if self.eta_points < 5:
            return "--eta-points must be >= 5"
        if self.samples_per_segment < 2:
            return "--samples-per-segment must be >= 2"
        if any(not 0.0 <= c <= 1.0 for c in self.contrast):
            return "contrast factors must lie in [0, 1]"
        if (self.phi1 is None) != (self.phi2 is None):
            return "--phi1 and --phi2 must be given together"
        if self.peak_counts is not None and not self.peak_counts > 0:
            return "--peak-counts must be positive"
        if self.command == "fit" and self.input is None:
            return "fit needs --input"
        if self.command in ("sweep", "compare") and self.T == 0.0:
            return f"{self.command} needs T > 0"
        for name in ("T", "dphi", "phi1", "phi2"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                return f"--{name} must be finite"
        return None

    def grid(self) -> np.ndarray:
        if self.dphi is not None:
            return np.array([self.dphi])
        return pancharatnam.phase_grid(self.points)

    def interferometer(self) -> InterferometerConfig:
        if self.phi1 is not None:
            phi1, phi2 = self.phi1, self.phi2
        else:
            phi1, phi2 = pancharatnam.zero_dynamical_split(self.dphi or 0.0, self.T)
        c_up, c_down, v = self.contrast
        return InterferometerConfig(self.T, phi1, phi2, c_up=c_up, c_down=c_down, visibility=v)


# -- reports ---------------------------------------------------------------

@dataclass
class CompareReport:
    T: float
    samples_per_segment: int
    grid: list[float] = field(default_factory=list)
    interferometric: list[float] = field(default_factory=list)
    geometric: list[float] = field(default_factory=list)
    abs_deviation: list[float] = field(default_factory=list)
    skipped_points: list[dict] = field(default_factory=list)

    @property
    def max_abs_deviation(self) -> float | None:
        return max(self.abs_deviation) if self.abs_deviation else None

    def as_record(self) -> dict:
        return {
            "command": "compare",
            "angle_unit": "rad",
            "T": self.T,
            "samples_per_segment": self.samples_per_segment,
            "grid": self.grid,
            "interferometric": self.interferometric,
            "geometric": self.geometric,
            "abs_deviation": self.abs_deviation,
            "max_abs_deviation": self.max_abs_deviation,
            "skipped_points": self.skipped_points,
        }


def compare(T: float, grid, samples_per_segment: int = blochgeo.DEFAULT_SAMPLES) -> CompareReport:
    """Evaluate both phase routes on ``grid``; failing points are skipped with reasons."""
    report = CompareReport(T, samples_per_segment)
    for i, dphi in enumerate(np.asarray(grid, dtype=float)):
        reasons = []
        try:
            interf = pancharatnam.geometric_phase_interferometric(T, dphi)
        except GeoPhaseError as exc:
            reasons.append(exc.reason)
        try:
            geo = blochgeo.geometric_phase_geometric(T, dphi, samples_per_segment)
        except GeoPhaseError as exc:
            reasons.append(exc.reason)
        if reasons:
            report.skipped_points.append({"index": i, "dphi_rad": float(dphi), "reasons": reasons})
            continue
        report.grid.append(float(dphi))
        report.interferometric.append(interf)
        report.geometric.append(geo)
        report.abs_deviation.append(abs(interf - geo))
    return report


def _skipped_records(skipped):
    return [{"index": s.index, "dphi_rad": s.delta_phi, "reasons": list(s.reasons)} for s in skipped]


def _to_degrees(header, rows):
    idx = [i for i, h in enumerate(header) if h.endswith("_rad")]
    header = [h[:-4] + "_deg" if i in idx else h for i, h in enumerate(header)]
    rows = [[math.degrees(v) if i in idx else v for i, v in enumerate(r)] for r in rows]
    return header, rows


# compare-report fields that hold angles without a unit suffix
_ANGLE_KEYS = {"grid", "interferometric", "geometric", "abs_deviation", "max_abs_deviation"}


def _record_to_degrees(obj):
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            if k == "angle_unit":
                out[k] = "deg"
            elif k in _ANGLE_KEYS:
                out[k] = _record_to_degrees_values(v)
            elif k.endswith("_rad"):
                out[k[:-4] + "_deg"] = _record_to_degrees_values(v)
            else:
                out[k] = _record_to_degrees(v)
        return out
    if isinstance(obj, list):
        return [_record_to_degrees(v) for v in obj]
    return obj


def _record_to_degrees_values(v):
    if isinstance(v, list):
        return [_record_to_degrees_values(x) for x in v]
    if isinstance(v, float):
        return math.degrees(v)
    return v


# -- commands --------------------------------------------------------------

def _cmd_sweep(cfg: RunConfig):
    c_up, c_down, v = cfg.contrast
    if (c_up, c_down, v) == (1.0, 1.0, 1.0):
        result = pancharatnam.sweep(cfg.T, cfg.points)
        method = "closed-form"
    else:
        result = fringes.flattening_curve(cfg.T, c_up, c_down, v, cfg.points, cfg.eta_points)
        method = "fringe-fit"
    valid = result.valid
    rows = [
        [result.delta_phi[i], result.total[i], result.dynamical[i], result.geometric[i]]
        for i in range(len(result.delta_phi)) if valid[i]
    ]
    record = {
        "command": "sweep",
        "T": cfg.T,
        "method": method,
        "contrast": {"c_up": c_up, "c_down": c_down, "visibility": v},
        "rows": [dict(zip(SWEEP_COLUMNS, r)) for r in rows],
        "skipped_points": _skipped_records(result.skipped),
    }
    return list(SWEEP_COLUMNS), rows, record


def _cmd_fringes(cfg: RunConfig):
    icfg = cfg.interferometer()
    scan = fringes.synthesize(icfg, fringes.eta_grid(cfg.eta_points))
    if cfg.peak_counts is not None:
        scan = fringes.poisson_sample(scan, cfg.peak_counts, cfg.seed)
    fit = fringes.fit_sinusoid(scan)
    rows = [[e, i] for e, i in zip(scan.eta, scan.intensity)]
    record = {
        "command": "fringes",
        "config": {
            "T": icfg.T, "phi1_rad": icfg.phi1, "phi2_rad": icfg.phi2,
            "c_up": icfg.c_up, "c_down": icfg.c_down, "visibility": icfg.visibility,
        },
        "counts": scan.counts,
        "seed": cfg.seed,
        "mean_counts_at_peak": cfg.peak_counts,
        "scan": {"eta_rad": scan.eta, "intensity": scan.intensity},
        "fit": fit.as_record(),
    }
    return ["eta_rad", "intensity"], rows, record


def read_scan_csv(path) -> fringes.FringeScan:
    text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"eta_rad", "intensity"} <= set(reader.fieldnames):
        raise ValueError("scan CSV needs columns eta_rad, intensity")
    eta, intensity = [], []
    for row in reader:
        eta.append(float(row["eta_rad"]))
        intensity.append(float(row["intensity"]))
    return fringes.FringeScan(np.array(eta), np.array(intensity))


def _cmd_fit(cfg: RunConfig):
    fit = fringes.fit_sinusoid(read_scan_csv(cfg.input))
    rec = fit.as_record()
    header = ["offset", "amplitude", "phase_rad", "residual_rms", "visibility", "warnings"]
    row = [rec[k] for k in header[:-1]] + [";".join(fit.warnings)]
    return header, [row], {"command": "fit", "fit": rec}


def _cmd_solid_angle(cfg: RunConfig):
    dphi = cfg.dphi if cfg.dphi is not None else 2 * math.pi
    path = blochgeo.build_path(cfg.T, dphi, cfg.samples_per_segment)
    omega = blochgeo.signed_solid_angle(path)
    header = ["T", "dphi_rad", "solid_angle_sr", "phi_geo_rad"]
    row = [cfg.T, dphi, omega, -0.5 * omega]
    return header, [row], dict(zip(header, row), command="solid-angle")


def _cmd_compare(cfg: RunConfig):
    report = compare(cfg.T, cfg.grid(), cfg.samples_per_segment)
    rows = [list(r) for r in zip(report.grid, report.interferometric, report.geometric,
                                 report.abs_deviation)]
    return list(COMPARE_COLUMNS), rows, report.as_record()


def _cmd_path_export(cfg: RunConfig):
    dphi = cfg.dphi if cfg.dphi is not None else 2 * math.pi
    path = blochgeo.build_path(cfg.T, dphi, cfg.samples_per_segment)
    header = ["theta_rad", "azimuth_rad", "x", "y", "z"]
    rows = [list(s[1:]) for s in path.samples()]
    record = {
        "command": "path-export",
        "T": cfg.T,
        "dphi_rad": dphi,
        "segments": [
            {"kind": seg.kind.value, "theta_rad": seg.theta,
             "azimuth_rad": np.mod(seg.azimuth, 2 * math.pi)}
            for seg in path.segments
        ],
    }
    return header, rows, record


_HANDLERS = {
    "sweep": _cmd_sweep,
    "fringes": _cmd_fringes,
    "fit": _cmd_fit,
    "solid-angle": _cmd_solid_angle,
    "compare": _cmd_compare,
    "path-export": _cmd_path_export,
}


def render(cfg: RunConfig) -> bytes:
    """Output bytes for a validated configuration."""
    header, rows, record = _HANDLERS[cfg.command](cfg)
    if cfg.format == "json":
        return emit_json(_record_to_degrees(record) if cfg.degrees else record)
    if cfg.degrees:
        header, rows = _to_degrees(header, rows)
    return emit_csv(header, rows)


def _origin(exc: BaseException) -> str:
    """Name of the module whose frame raised ``exc``."""
    frames = traceback.extract_tb(exc.__traceback__)
    return Path(frames[-1].filename).stem if frames else "geophase"


def run(cfg: RunConfig) -> int:
    problem = cfg.validate()
    if problem:
        print(f"usage error: {problem}", file=sys.stderr)
        return 2
    try:
        data = render(cfg)
    except GeoPhaseError as exc:
        print(f"error: {_origin(exc)}: {exc.reason}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg.output == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(cfg.output).write_bytes(data)
    return 0


_HELP = {
    "sweep": "geometric phase over delta_phi in [0, 2 pi]",
    "fringes": "synthesize one interference scan and fit it",
    "fit": "fit a scan CSV with columns eta_rad, intensity",
    "solid-angle": "signed solid angle and phase of one Bloch loop",
    "compare": "interferometric vs solid-angle phase over a grid",
    "path-export": "Bloch loop samples as theta, azimuth, x, y, z",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geophase",
        description="Geometric phase of a two-loop interferometer from fringes and from "
        "Bloch-sphere solid angles.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--T", type=float, default=0.125, help="absorber transmission in [0, 1]")
    common.add_argument("--dphi", type=float, default=None,
                        help="single relative phase (rad) instead of a grid")
    common.add_argument("--points", type=int, default=64, help="grid points over [0, 2 pi]")
    common.add_argument("--phi1", type=float, default=None, help="upper-path shift (rad)")
    common.add_argument("--phi2", type=float, default=None, help="lower-path shift (rad)")
    common.add_argument("--eta-points", type=int, default=fringes.DEFAULT_ETA_POINTS)
    common.add_argument("--samples-per-segment", type=int, default=blochgeo.DEFAULT_SAMPLES)
    common.add_argument("--c-up", type=float, default=1.0)
    common.add_argument("--c-down", type=float, default=1.0)
    common.add_argument("--visibility", type=float, default=1.0)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--peak-counts", type=float, default=None,
                        help="Poisson-sample the scan with this mean count at its maximum")
    common.add_argument("--input", default=None, help="scan CSV for 'fit' ('-' for stdin)")
    common.add_argument("-o", "--output", default="-", help="output file ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--degrees", action="store_true",
                        help="report angles in degrees (display only)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, text in _HELP.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        T=ns.T,
        dphi=ns.dphi,
        points=ns.points,
        phi1=ns.phi1,
        phi2=ns.phi2,
        eta_points=ns.eta_points,
        samples_per_segment=ns.samples_per_segment,
        contrast=(ns.c_up, ns.c_down, ns.visibility),
        seed=ns.seed,
        peak_counts=ns.peak_counts,
        input=ns.input,
        output=ns.output,
        format=ns.format,
        degrees=ns.degrees,
    )


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = config_from_args(ns)
    problem = cfg.validate()
    if problem:
        parser.error(problem)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
