"""Phase extraction from state overlaps and its closed form.

The interference fringes are shifted by ``arg <psi_ref'|psi_f'>``.  That
total phase splits into a dynamical part, the transmission-weighted mean of
the two phase shifts, and the geometric remainder.  Choosing the phase
shifts so that the dynamical part vanishes leaves the geometric phase alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeoPhaseError, InvalidConfig, UndefinedPhase
from .qstate import TwoLevelState, check_transmission, inner

#: relative orthogonality tolerance; scaled by the norms of both states
ORTHO_RTOL = 1e-12


def wrap_phase(phase):
    """Map angles to ``(-pi, pi]``."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(phase, dtype=float), 2 * np.pi)
    return float(wrapped) if wrapped.ndim == 0 else wrapped


def pancharatnam_phase(a: TwoLevelState, b: TwoLevelState) -> float:
    """Relative phase ``arg <a|b>`` in ``(-pi, pi]``.

    Raises
    ------
    UndefinedPhase
        If ``|<a|b>| <= ORTHO_RTOL * |a| |b|``.
    """
    overlap = inner(a, b)
    if abs(overlap) <= ORTHO_RTOL * a.norm * b.norm:
        raise UndefinedPhase("states are orthogonal; the Pancharatnam phase is undefined")
    return wrap_phase(math.atan2(overlap.imag, overlap.real))


def _continued_arctan(half_dphi, ratio):
    # arctan(ratio * tan(u)) continued across u = pi/2 + m*pi: add pi per crossing
    m = np.rint(half_dphi / np.pi)
    r = half_dphi - m * np.pi
    return m * np.pi + np.arctan2(ratio * np.sin(r), np.cos(r))


def total_phase_closed_form(T, phi1, phi2):
    """Closed-form total phase on the branch continuous in ``phi2 - phi1``.

    Evaluates ``(phi1 + phi2)/2 - arctan[tan(dphi/2) (1 - sqrt T)/(1 + sqrt T)]``
    where the arctan is continued so the result has no jumps as ``dphi``
    passes odd multiples of ``pi``.  Modulo ``2 pi`` it equals
    ``arg(e^{i phi1} + sqrt(T) e^{i phi2})``.  Accepts scalars or arrays.

    Raises
    ------
    UndefinedPhase
        At ``T = 1`` with ``dphi = pi (mod 2 pi)``, where the overlap vanishes.
    """
    T = np.asarray(T, dtype=float)
    if np.any((T < 0.0) | (T > 1.0)):
        raise InvalidConfig("transmission T must lie in [0, 1]")
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    root = np.sqrt(T)
    half = 0.5 * (phi2 - phi1)
    magnitude = np.hypot((1 + root) * np.cos(half), (1 - root) * np.sin(half))
    if np.any(magnitude <= ORTHO_RTOL * (1 + root)):
        raise UndefinedPhase("T = 1 and dphi = pi: the recombined beams are orthogonal")
    total = 0.5 * (phi1 + phi2) - _continued_arctan(half, (1 - root) / (1 + root))
    return float(total) if total.ndim == 0 else total


def total_phase_principal(T, phi1, phi2):
    """:func:`total_phase_closed_form` reduced to ``(-pi, pi]``."""
    return wrap_phase(total_phase_closed_form(T, phi1, phi2))


def dynamical_phase(T, phi1, phi2):
    """Transmission-weighted mean ``(phi1 + T phi2) / (1 + T)``."""
    T = np.asarray(T, dtype=float)
    if np.any((T < 0.0) | (T > 1.0)):
        raise InvalidConfig("transmission T must lie in [0, 1]")
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    # equal shifts must give their common value exactly, so the geometric part is 0
    result = np.where(phi1 == phi2, phi1, (phi1 + T * phi2) / (1 + T))
    return float(result) if result.ndim == 0 else result


def zero_dynamical_split(delta_phi, T):
    """Phase shifts with difference ``delta_phi`` and no dynamical phase."""
    T = np.asarray(T, dtype=float)
    if np.any((T < 0.0) | (T > 1.0)):
        raise InvalidConfig("transmission T must lie in [0, 1]")
    delta_phi = np.asarray(delta_phi, dtype=float)
    phi2 = delta_phi / (1 + T)
    phi1 = -T * phi2
    if phi1.ndim == 0:
        return float(phi1), float(phi2)
    return phi1, phi2


def geometric_phase_interferometric(T, delta_phi):
    """Geometric phase read off the fringes at zero dynamical phase.

    The result is continuous in ``delta_phi`` and vanishes at
    ``delta_phi = 0``.  For ``T = 0`` the lower path is fully absorbed and the
    phase is identically zero.
    """
    phi1, phi2 = zero_dynamical_split(delta_phi, T)
    return total_phase_closed_form(T, phi1, phi2)


@dataclass(frozen=True)
class PhaseDecomposition:
    total: float
    dynamical: float
    geometric: float


def decompose(T: float, phi1: float, phi2: float) -> PhaseDecomposition:
    total = total_phase_closed_form(T, phi1, phi2)
    dynamical = dynamical_phase(T, phi1, phi2)
    return PhaseDecomposition(total, dynamical, total - dynamical)


@dataclass(frozen=True)
class SkippedPoint:
    """Grid point without data, with the reason codes of the failing routes."""

    index: int
    delta_phi: float
    reasons: tuple[str, ...]


@dataclass
class SweepResult:
    """Phase series over a ``delta_phi`` grid.

    Arrays hold ``nan`` at skipped points; :attr:`skipped` says why.
    ``geometric_oracle`` and ``max_deviation`` are filled in by
    :func:`geophase.blochgeo.attach_oracle`.
    """

    delta_phi: np.ndarray
    total: np.ndarray
    dynamical: np.ndarray
    geometric: np.ndarray
    skipped: list[SkippedPoint] = field(default_factory=list)
    geometric_oracle: np.ndarray | None = None
    max_deviation: float | None = None

    @property
    def valid(self) -> np.ndarray:
        mask = np.ones(self.delta_phi.shape, dtype=bool)
        mask[[s.index for s in self.skipped]] = False
        return mask

    @property
    def decompositions(self) -> list[PhaseDecomposition | None]:
        valid = self.valid
        return [
            PhaseDecomposition(float(t), float(d), float(g)) if ok else None
            for t, d, g, ok in zip(self.total, self.dynamical, self.geometric, valid)
        ]


def phase_grid(n_points: int) -> np.ndarray:
    """Uniform grid over ``[0, 2 pi]`` including both ends."""
    if n_points < 2:
        raise InvalidConfig("a sweep needs at least 2 points")
    return np.linspace(0.0, 2 * np.pi, n_points)


def sweep(T: float, n_points: int = 64) -> SweepResult:
    """Zero-dynamical geometric phase over ``delta_phi`` in ``[0, 2 pi]``."""
    check_transmission(T)
    if T == 0.0:
        raise InvalidConfig("a sweep needs T > 0")
    grid = phase_grid(n_points)
    total = np.full(grid.shape, np.nan)
    dynamical = np.full(grid.shape, np.nan)
    skipped = []
    for i, dphi in enumerate(grid):
        phi1, phi2 = zero_dynamical_split(dphi, T)
        try:
            d = decompose(T, phi1, phi2)
        except GeoPhaseError as exc:
            skipped.append(SkippedPoint(i, float(dphi), (exc.reason,)))
            continue
        total[i], dynamical[i] = d.total, d.dynamical
    return SweepResult(grid, total, dynamical, total - dynamical, skipped)
