"""Interference scans over the reference phase and sinusoid fitting.

A scan records the forward-detector intensity while the reference phase
shifter steps ``eta``.  Its shift is the phase of ``<psi_ref'|psi_f'>``,
recovered by a linear least-squares fit of ``A + C cos(eta) + S sin(eta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FitFailure, GeoPhaseError, InvalidConfig
from .pancharatnam import (
    ORTHO_RTOL,
    SkippedPoint,
    SweepResult,
    phase_grid,
    wrap_phase,
    zero_dynamical_split,
)
from .qstate import (
    InterferometerConfig,
    TwoLevelState,
    damp_paths,
    evolve_second_loop,
    inner,
    project_q,
)

DEFAULT_ETA_POINTS = 32
VISIBILITY_FLOOR = 1e-6
LOW_VISIBILITY = "LowVisibility"


def eta_grid(n_points: int = DEFAULT_ETA_POINTS) -> np.ndarray:
    """``n_points`` reference phases covering one period, endpoint excluded."""
    if n_points < 5:
        raise InvalidConfig("a fringe scan needs at least 5 points")
    return np.linspace(0.0, 2 * np.pi, n_points, endpoint=False)


@dataclass(frozen=True)
class FringeScan:
    eta: np.ndarray
    intensity: np.ndarray
    meta: dict = field(default_factory=dict)
    counts: bool = False

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        intensity = np.asarray(self.intensity, dtype=np.int64 if self.counts else float)
        if eta.ndim != 1 or eta.shape != intensity.shape:
            raise ValueError("eta and intensity must be 1-d arrays of equal length")
        if np.any(np.diff(eta) <= 0):
            raise ValueError("eta must be strictly increasing")
        if np.any(intensity < 0):
            raise ValueError("intensities must be nonnegative")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "intensity", intensity)


@dataclass(frozen=True)
class FringeFit:
    offset: float
    amplitude: float
    phase: float
    residual_rms: float
    visibility: float
    warnings: tuple[str, ...] = ()

    @property
    def low_visibility(self) -> bool:
        return LOW_VISIBILITY in self.warnings

    def as_record(self) -> dict:
        return {
            "offset": self.offset,
            "amplitude": self.amplitude,
            "phase_rad": self.phase,
            "residual_rms": self.residual_rms,
            "visibility": self.visibility,
            "warnings": list(self.warnings),
        }


def recombined_states(cfg: InterferometerConfig) -> tuple[TwoLevelState, TwoLevelState]:
    """Projected reference and second-loop states ``(psi_ref', psi_f')``.

    Contrast factors damp the second-loop path amplitudes before
    recombination; the visibility enters only in :func:`synthesize`.
    """
    final = damp_paths(evolve_second_loop(cfg), cfg.c_up, cfg.c_down)
    reference = TwoLevelState.upper().scaled(cfg.ref_amplitude)
    _, ref_proj = project_q(reference, cfg.delta)
    _, f_proj = project_q(final, cfg.delta)
    return ref_proj, f_proj


def synthesize(cfg: InterferometerConfig, eta=None) -> FringeScan:
    """Noiseless intensity ``|r|^2 + |f|^2 + 2 v |<r|f>| cos(eta - arg<r|f>)``."""
    eta = eta_grid() if eta is None else np.asarray(eta, dtype=float)
    if eta.size < 5:
        raise InvalidConfig("a fringe scan needs at least 5 points")
    ref, final = recombined_states(cfg)
    overlap = inner(ref, final)
    background = ref.norm_sq + final.norm_sq
    if abs(overlap) <= ORTHO_RTOL * ref.norm * final.norm:
        intensity = np.full(eta.shape, background)
    else:
        fringe = 2.0 * cfg.visibility * abs(overlap)
        intensity = background + fringe * np.cos(eta - math.atan2(overlap.imag, overlap.real))
    # |r|^2 + |f|^2 >= 2|<r|f>| by Cauchy-Schwarz; clip rounding below zero
    return FringeScan(eta, np.maximum(intensity, 0.0), meta={"config": cfg})


def poisson_sample(scan: FringeScan, mean_counts_at_peak: float, seed=None) -> FringeScan:
    """Replace intensities by Poisson counts, scan maximum -> ``mean_counts_at_peak``."""
    if not mean_counts_at_peak > 0:
        raise InvalidConfig("mean_counts_at_peak must be positive")
    peak = float(np.max(scan.intensity))
    scale = mean_counts_at_peak / peak if peak > 0 else 0.0
    rng = np.random.default_rng(seed)
    counts = rng.poisson(scan.intensity * scale)
    meta = dict(scan.meta, mean_counts_at_peak=mean_counts_at_peak, seed=seed)
    return FringeScan(scan.eta, counts, meta=meta, counts=True)


def fit_sinusoid(scan: FringeScan, visibility_floor: float = VISIBILITY_FLOOR) -> FringeFit:
    """Least-squares fit of ``A + B cos(eta - phase)``.

    The model is linear in ``(A, C, S)`` with ``B = hypot(C, S)`` and
    ``phase = atan2(S, C)``.  A fit with ``B/A`` below ``visibility_floor``
    carries a ``LowVisibility`` warning; a numerically flat scan reports
    phase 0.
    """
    eta = scan.eta
    y = np.asarray(scan.intensity, dtype=float)
    if eta.size < 3:
        raise FitFailure("need at least 3 samples to fit offset, cosine and sine")
    design = np.column_stack([np.ones_like(eta), np.cos(eta), np.sin(eta)])
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < 3:
        raise FitFailure("design matrix is rank deficient (eta samples degenerate)")
    offset, c, s = (float(v) for v in coef)
    amplitude = math.hypot(c, s)
    residual = y - design @ coef
    scale = max(abs(offset), float(np.max(np.abs(y))), 1e-300)
    if amplitude <= 1e-12 * scale:
        phase = 0.0
    else:
        phase = wrap_phase(math.atan2(s, c))
    visibility = amplitude / offset if offset > 0 else 0.0
    warnings = (LOW_VISIBILITY,) if visibility < visibility_floor else ()
    return FringeFit(
        offset=offset,
        amplitude=amplitude,
        phase=phase,
        residual_rms=float(np.sqrt(np.mean(residual**2))),
        visibility=visibility,
        warnings=warnings,
    )


def effective_dynamical_phase(cfg: InterferometerConfig) -> float:
    """Intensity-weighted mean of the phase shifts as seen after damping.

    The weights are ``c_up^2`` and ``c_down^2 T``; with unit contrast this is
    the usual ``(phi1 + T phi2)/(1 + T)``.
    """
    w_up = cfg.c_up**2
    w_down = cfg.c_down**2 * cfg.T
    if w_up + w_down == 0.0:
        return 0.0
    return (w_up * cfg.phi1 + w_down * cfg.phi2) / (w_up + w_down)


def fitted_phase(T: float, delta_phi: float, c_up: float = 1.0, c_down: float = 1.0,
                 visibility: float = 1.0, eta=None) -> tuple[float, FringeFit]:
    """Fit the scan at the zero-dynamical split of ``delta_phi``.

    Returns the fitted fringe phase and the fit.  The phase shifts are set by
    the nominal ``T``; damping then shifts the weights, and the caller removes
    :func:`effective_dynamical_phase`.
    """
    phi1, phi2 = zero_dynamical_split(delta_phi, T)
    cfg = InterferometerConfig(T, phi1, phi2, c_up=c_up, c_down=c_down, visibility=visibility)
    fit = fit_sinusoid(synthesize(cfg, eta))
    return fit.phase, fit


def flattening_curve(T: float, c_up: float = 1.0, c_down: float = 1.0, visibility: float = 1.0,
                     n_points: int = 64, eta_points: int = DEFAULT_ETA_POINTS) -> SweepResult:
    """Sweep of the fitted geometric phase under reduced contrast.

    Each grid point is a synthesized, fitted scan.  The fitted phases are
    unwrapped into a continuous series anchored at ``delta_phi = 0``, then
    the effective dynamical phase is subtracted.  Scans whose visibility
    falls below the floor are skipped as ``LowVisibility``.
    """
    if not T > 0:
        raise InvalidConfig("a sweep needs T > 0")
    grid = phase_grid(n_points)
    etas = eta_grid(eta_points)
    total = np.full(grid.shape, np.nan)
    dynamical = np.full(grid.shape, np.nan)
    skipped = []
    for i, dphi in enumerate(grid):
        phi1, phi2 = zero_dynamical_split(dphi, T)
        cfg = InterferometerConfig(T, phi1, phi2, c_up=c_up, c_down=c_down, visibility=visibility)
        try:
            fit = fit_sinusoid(synthesize(cfg, etas))
        except GeoPhaseError as exc:
            skipped.append(SkippedPoint(i, float(dphi), (exc.reason,)))
            continue
        if fit.low_visibility:
            skipped.append(SkippedPoint(i, float(dphi), (LOW_VISIBILITY,)))
            continue
        total[i] = fit.phase
        dynamical[i] = effective_dynamical_phase(cfg)
    ok = ~np.isnan(total)
    total[ok] = np.unwrap(total[ok])
    # anchor the branch: the first valid point must match its dynamical phase mod 2 pi
    if ok.any():
        first = np.argmax(ok)
        offset = total[first] - dynamical[first]
        total[ok] -= 2 * np.pi * np.round(offset / (2 * np.pi))
    return SweepResult(grid, total, dynamical, total - dynamical, skipped)

