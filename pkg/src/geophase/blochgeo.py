"""Bloch-sphere paths and their signed solid angles.

This is the geometric route to the phase.  The interferometer settings are
turned into a closed loop on the unit sphere (meridian down from the
equatorial q-point, latitude arc from the phase shifter, geodesic closure
back to q), and the phase is ``-Omega/2`` with ``Omega`` the oriented
solid angle of that loop.  ``Omega`` is the line integral
``sum (1 - cos theta) d azimuth``, evaluated with the trapezoidal rule on the
sampled segments, so figure-eight loops get their lobes with opposite signs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousGeodesic, GeoPhaseError, InvalidState, OpenPath, Undersampled
from .pancharatnam import SkippedPoint, SweepResult
from .qstate import TwoLevelState, check_transmission

DEFAULT_SAMPLES = 2048
#: geodesic endpoints closer than this to antipodal are rejected
ANTIPODAL_TOL = 1e-9
CLOSURE_TOL = 1e-12


@dataclass(frozen=True)
class BlochPoint:
    """Point on the unit sphere; ``theta = 0`` is ``|p><p|``."""

    theta: float
    azimuth: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.theta <= math.pi + 1e-12:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        object.__setattr__(self, "theta", min(max(float(self.theta), 0.0), math.pi))
        object.__setattr__(self, "azimuth", float(self.azimuth) % (2 * math.pi))

    @classmethod
    def from_vector(cls, v) -> BlochPoint:
        x, y, z = np.asarray(v, dtype=float) / np.linalg.norm(v)
        return cls(math.atan2(math.hypot(x, y), z), math.atan2(y, x))

    @property
    def vector(self) -> np.ndarray:
        return _unit_vectors(np.array([self.theta]), np.array([self.azimuth]))[0]

    def distance(self, other: BlochPoint) -> float:
        """Great-circle distance in radians."""
        a, b = self.vector, other.vector
        return math.atan2(np.linalg.norm(np.cross(a, b)), float(a @ b))


class SegmentKind(str, enum.Enum):
    MERIDIAN = "meridian-geodesic"
    LATITUDE = "latitude-arc"
    GEODESIC = "great-circle-geodesic"
    SAMPLED = "sampled-curve"


def _unit_vectors(theta, azimuth):
    s = np.sin(theta)
    return np.column_stack([s * np.cos(azimuth), s * np.sin(azimuth), np.cos(theta)])


@dataclass(frozen=True, eq=False)
class PathSegment:
    """Sampled piece of a Bloch path.

    ``azimuth`` is a continuous lift (not reduced mod ``2 pi``), so a latitude
    arc can turn through any angle.  Samples at a pole carry the azimuth of
    their neighbour.
    """

    kind: SegmentKind
    theta: np.ndarray
    azimuth: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        azimuth = np.asarray(self.azimuth, dtype=float)
        if theta.ndim != 1 or theta.shape != azimuth.shape or theta.size < 2:
            raise ValueError("a segment needs matching theta/azimuth arrays of >= 2 samples")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "azimuth", azimuth)

    @classmethod
    def from_vectors(cls, points, kind: SegmentKind = SegmentKind.SAMPLED) -> PathSegment:
        points = np.asarray(points, dtype=float)
        points = points / np.linalg.norm(points, axis=1, keepdims=True)
        rho = np.hypot(points[:, 0], points[:, 1])
        theta = np.arctan2(rho, points[:, 2])
        azimuth = np.arctan2(points[:, 1], points[:, 0])
        at_pole = rho < 1e-15
        if at_pole.all():
            azimuth[:] = 0.0
        elif at_pole.any():
            idx = np.where(~at_pole, np.arange(len(rho)), 0)
            np.maximum.accumulate(idx, out=idx)
            first = np.argmax(~at_pole)
            idx[:first] = first
            azimuth = azimuth[idx]
        return cls(kind, theta, np.unwrap(azimuth))

    @property
    def start(self) -> BlochPoint:
        return BlochPoint(self.theta[0], self.azimuth[0])

    @property
    def end(self) -> BlochPoint:
        return BlochPoint(self.theta[-1], self.azimuth[-1])

    @property
    def samples(self) -> list[BlochPoint]:
        return [BlochPoint(t, a) for t, a in zip(self.theta, self.azimuth)]

    @property
    def points(self) -> np.ndarray:
        return _unit_vectors(self.theta, self.azimuth)

    def __len__(self):
        return self.theta.size

    def reversed(self) -> PathSegment:
        return PathSegment(self.kind, self.theta[::-1], self.azimuth[::-1])


@dataclass(frozen=True)
class BlochPath:
    segments: tuple[PathSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("a path needs at least one segment")

    def gaps(self) -> list[float]:
        """Endpoint mismatches between consecutive segments, closure last."""
        segs = self.segments
        out = []
        for a, b in zip(segs, segs[1:] + segs[:1]):
            out.append(float(np.linalg.norm(a.points[-1] - b.points[0])))
        return out

    @property
    def is_closed(self) -> bool:
        return max(self.gaps()) <= CLOSURE_TOL

    def reversed(self) -> BlochPath:
        return BlochPath(tuple(s.reversed() for s in reversed(self.segments)))

    def samples(self):
        """Iterate ``(segment_index, theta, azimuth, x, y, z)`` over all samples."""
        for k, seg in enumerate(self.segments):
            for t, a, (x, y, z) in zip(seg.theta, seg.azimuth, seg.points):
                yield k, float(t), float(a) % (2 * math.pi), float(x), float(y), float(z)


def state_to_bloch(state: TwoLevelState) -> BlochPoint:
    """Ray of ``state`` as a Bloch point; blind to global phase and scale."""
    if state.norm == 0.0:
        raise InvalidState("zero-norm state has no Bloch point")
    theta = 2.0 * math.atan2(abs(state.c_perp), abs(state.c_p))
    rel = state.c_perp * state.c_p.conjugate()
    return BlochPoint(theta, math.atan2(rel.imag, rel.real))


def absorber_polar_angle(T: float) -> float:
    """Polar angle ``theta`` with ``T = tan^2(theta/2)``."""
    check_transmission(T)
    return 2.0 * math.atan(math.sqrt(T))


def latitude_arc(theta: float, azimuth_start: float, azimuth_end: float,
                 n_samples: int = DEFAULT_SAMPLES) -> PathSegment:
    """Circle of latitude traversed by increasing (or decreasing) azimuth."""
    return PathSegment(
        SegmentKind.LATITUDE,
        np.full(n_samples, float(theta)),
        np.linspace(azimuth_start, azimuth_end, n_samples),
    )


def meridian_arc(theta_start: float, theta_end: float, azimuth: float,
                 n_samples: int = DEFAULT_SAMPLES) -> PathSegment:
    return PathSegment(
        SegmentKind.MERIDIAN,
        np.linspace(theta_start, theta_end, n_samples),
        np.full(n_samples, float(azimuth)),
    )


def geodesic_arc(a: BlochPoint, b: BlochPoint, n_samples: int = DEFAULT_SAMPLES,
                 kind: SegmentKind = SegmentKind.GEODESIC) -> PathSegment:
    """Minor great-circle arc from ``a`` to ``b``, uniform in arc length.

    Raises
    ------
    AmbiguousGeodesic
        If ``a`` and ``b`` are antipodal (separation ``>= pi - 1e-9``).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    va, vb = a.vector, b.vector
    omega = a.distance(b)
    if omega >= math.pi - ANTIPODAL_TOL:
        raise AmbiguousGeodesic("antipodal endpoints: closing geodesic is not unique")
    s = np.linspace(0.0, 1.0, n_samples)
    if omega < 1e-15:
        points = np.tile(va, (n_samples, 1))
    else:
        points = (np.sin((1 - s) * omega)[:, None] * va + np.sin(s * omega)[:, None] * vb)
        points /= math.sin(omega)
    seg = PathSegment.from_vectors(points, kind)
    # pin the lift to the caller's azimuth and the exact endpoints
    shift = a.azimuth - seg.azimuth[0]
    shift = 2 * math.pi * round(shift / (2 * math.pi))
    theta, azimuth = seg.theta.copy(), seg.azimuth + shift
    theta[0], theta[-1] = a.theta, b.theta
    return PathSegment(kind, theta, azimuth)


def build_path(T: float, delta_phi: float, n_samples: int = DEFAULT_SAMPLES,
               literal: bool = False) -> BlochPath:
    """Closed Bloch loop for transmission ``T`` and relative phase ``delta_phi``.

    The loop starts at the q-point ``(pi/2, 0)``, runs up the meridian to
    ``theta_T``, along the latitude ``theta_T`` to azimuth ``delta_phi`` and
    back to q on the minor great circle.  With ``literal=True`` the
    north-pole excursion before the first beamsplitter and after detection is
    included too; it retraces itself and leaves the solid angle unchanged.
    """
    theta_t = absorber_polar_angle(T)
    q = BlochPoint(math.pi / 2, 0.0)
    segments = [
        meridian_arc(math.pi / 2, theta_t, 0.0, n_samples),
        latitude_arc(theta_t, 0.0, delta_phi, n_samples),
        geodesic_arc(BlochPoint(theta_t, delta_phi), q, n_samples),
    ]
    if literal:
        segments.insert(0, meridian_arc(0.0, math.pi / 2, 0.0, n_samples))
        segments.append(meridian_arc(math.pi / 2, 0.0, 0.0, n_samples))
    return BlochPath(tuple(segments))


def _segment_integral(seg: PathSegment) -> float:
    points = seg.points
    if np.any(np.einsum("ij,ij->i", points[1:], points[:-1]) <= 0.0):
        raise Undersampled(f"{seg.kind.value}: adjacent samples are >= pi/2 apart")
    height = 2.0 * np.sin(0.5 * seg.theta) ** 2  # 1 - cos(theta)
    return float(np.sum(0.5 * (height[1:] + height[:-1]) * np.diff(seg.azimuth)))


def signed_solid_angle(path: BlochPath) -> float:
    """Oriented solid angle ``sum (1 - cos theta) d azimuth`` of a closed path.

    Counter-clockwise loops around the north pole count positive.  The value
    is not reduced modulo ``4 pi``.
    """
    gaps = path.gaps()
    if max(gaps) > CLOSURE_TOL:
        raise OpenPath(f"path is not closed (largest endpoint gap {max(gaps):.3g})")
    return sum(_segment_integral(seg) for seg in path.segments)


def geometric_phase_geometric(T: float, delta_phi: float,
                              n_samples: int = DEFAULT_SAMPLES) -> float:
    """Geometric phase ``-Omega/2`` of the loop from :func:`build_path`."""
    return -0.5 * signed_solid_angle(build_path(T, delta_phi, n_samples))


def cyclic_closed_form(theta: float) -> float:
    """Phase ``pi (cos theta - 1)`` of a full latitude loop at ``theta``."""
    return math.pi * (math.cos(theta) - 1.0)


def attach_oracle(result: SweepResult, T: float,
                  n_samples: int = DEFAULT_SAMPLES) -> SweepResult:
    """Fill ``geometric_oracle`` and ``max_deviation`` of a sweep in place.

    Points where the geodesic closure is ambiguous are added to
    ``result.skipped`` (merged with any existing record for that index).
    """
    oracle = np.full(result.delta_phi.shape, np.nan)
    reasons = {s.index: list(s.reasons) for s in result.skipped}
    for i, dphi in enumerate(result.delta_phi):
        try:
            oracle[i] = geometric_phase_geometric(T, float(dphi), n_samples)
        except GeoPhaseError as exc:
            reasons.setdefault(i, []).append(exc.reason)
    result.skipped = [
        SkippedPoint(i, float(result.delta_phi[i]), tuple(r)) for i, r in sorted(reasons.items())
    ]
    result.geometric_oracle = oracle
    valid = result.valid
    dev = np.abs(result.geometric[valid] - oracle[valid])
    result.max_deviation = float(dev.max()) if dev.size else None
    return result
