"""Two-level states over the which-way basis and the second-loop elements.

The basis is ``{|p>, |p_perp>}``: the neutron is in ``|p>`` when found on the
upper beam path and in ``|p_perp>`` on the lower one.  States are stored
unnormalized, since the absorber removes amplitude and the interference
formula works with the resulting overlaps directly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, InvalidState

SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class TwoLevelState:
    """Amplitude pair ``c_p |p> + c_perp |p_perp>``."""

    c_p: complex
    c_perp: complex

    def __post_init__(self):
        object.__setattr__(self, "c_p", complex(self.c_p))
        object.__setattr__(self, "c_perp", complex(self.c_perp))

    @classmethod
    def upper(cls) -> TwoLevelState:
        """The localized upper-path state ``|p>``."""
        return cls(1.0, 0.0)

    @classmethod
    def lower(cls) -> TwoLevelState:
        return cls(0.0, 1.0)

    @classmethod
    def from_array(cls, amplitudes) -> TwoLevelState:
        c_p, c_perp = np.asarray(amplitudes, dtype=complex)
        return cls(c_p, c_perp)

    def as_array(self) -> np.ndarray:
        return np.array([self.c_p, self.c_perp], dtype=complex)

    @property
    def norm_sq(self) -> float:
        return abs(self.c_p) ** 2 + abs(self.c_perp) ** 2

    @property
    def norm(self) -> float:
        return math.hypot(abs(self.c_p), abs(self.c_perp))

    def scaled(self, factor: complex) -> TwoLevelState:
        return TwoLevelState(factor * self.c_p, factor * self.c_perp)

    def normalized(self) -> TwoLevelState:
        """Return the unit-norm state with the same ray and phase."""
        return self.scaled(1.0 / _require_nonzero(self))

    def allclose(self, other: TwoLevelState, atol: float = 1e-12) -> bool:
        return abs(self.c_p - other.c_p) <= atol and abs(self.c_perp - other.c_perp) <= atol


@dataclass(frozen=True)
class InterferometerConfig:
    """Settings of the second interferometer loop and the recombination.

    Parameters
    ----------
    T : float
        Absorber transmission on the lower path, in ``[0, 1]``.
    phi1, phi2 : float
        Phase shifts on the upper and lower paths (radians).
    delta : float
        Beamsplitter convention phase (radians).
    c_up, c_down : float
        Real amplitude factors of the upper/lower path, in ``[0, 1]``.
        They model partial coherence between the beams.
    visibility : float
        Overall scaling of the interference term, in ``[0, 1]``.
    ref_amplitude : float
        Amplitude of the reference beam ``|psi_ref> = ref_amplitude |p>``.
    """

    T: float
    phi1: float = 0.0
    phi2: float = 0.0
    delta: float = 0.0
    c_up: float = 1.0
    c_down: float = 1.0
    visibility: float = 1.0
    ref_amplitude: float = 1.0

    def __post_init__(self):
        check_transmission(self.T)
        for name in ("c_up", "c_down", "visibility"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {value!r}")
        if not self.ref_amplitude > 0.0:
            raise InvalidConfig(f"ref_amplitude must be positive, got {self.ref_amplitude!r}")
        for name in ("phi1", "phi2", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfig(f"{name} must be finite")

    @property
    def delta_phi(self) -> float:
        return self.phi2 - self.phi1

    @property
    def unit_contrast(self) -> bool:
        return self.c_up == 1.0 and self.c_down == 1.0 and self.visibility == 1.0


def check_transmission(T: float) -> float:
    if not 0.0 <= T <= 1.0:
        raise InvalidConfig(f"transmission T must lie in [0, 1], got {T!r}")
    return T


def _require_nonzero(state: TwoLevelState) -> float:
    norm = state.norm
    if norm == 0.0 or not math.isfinite(norm):
        raise InvalidState("state has zero (or non-finite) norm")
    return norm


def beamsplitter_matrix(delta: float = 0.0) -> np.ndarray:
    """``diag(1, e^{i delta}) @ H`` with ``H`` the Hadamard matrix."""
    hadamard = SQRT_HALF * np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex)
    return np.diag([1.0, cmath.exp(1j * delta)]) @ hadamard


def split(state: TwoLevelState, delta: float = 0.0) -> TwoLevelState:
    """Beamsplitter: ``|p> -> (|p> + e^{i delta}|p_perp>)/sqrt(2)``.

    Only the ``|p>`` column is fixed physically; the ``|p_perp>`` column
    completes it to the unitary returned by :func:`beamsplitter_matrix`.
    """
    _require_nonzero(state)
    e = cmath.exp(1j * delta)
    a, b = state.c_p, state.c_perp
    return TwoLevelState(SQRT_HALF * (a + b), SQRT_HALF * e * (a - b))


def unsplit(state: TwoLevelState, delta: float = 0.0) -> TwoLevelState:
    """Inverse of :func:`split`."""
    a = state.c_p
    b = cmath.exp(-1j * delta) * state.c_perp
    return TwoLevelState(SQRT_HALF * (a + b), SQRT_HALF * (a - b))


def absorb(state: TwoLevelState, T: float) -> TwoLevelState:
    """Damp the lower-path amplitude by ``sqrt(T)``."""
    check_transmission(T)
    return TwoLevelState(state.c_p, math.sqrt(T) * state.c_perp)


def damp_paths(state: TwoLevelState, c_up: float = 1.0, c_down: float = 1.0) -> TwoLevelState:
    """Multiply the path amplitudes by real contrast factors."""
    if not (0.0 <= c_up <= 1.0 and 0.0 <= c_down <= 1.0):
        raise InvalidConfig("contrast factors must lie in [0, 1]")
    return TwoLevelState(c_up * state.c_p, c_down * state.c_perp)


def phase_shift(state: TwoLevelState, phi1: float, phi2: float) -> TwoLevelState:
    return TwoLevelState(
        cmath.exp(1j * phi1) * state.c_p, cmath.exp(1j * phi2) * state.c_perp
    )


def evolve_second_loop(cfg: InterferometerConfig) -> TwoLevelState:
    """Final state ``U|p>`` after beamsplitter, absorber and phase shifter.

    With ``delta = 0`` this is ``(e^{i phi1}|p> + sqrt(T) e^{i phi2}|p_perp>)/sqrt(2)``.
    Contrast factors are not applied here; see :func:`damp_paths`.
    """
    state = split(TwoLevelState.upper(), cfg.delta)
    state = absorb(state, cfg.T)
    return phase_shift(state, cfg.phi1, cfg.phi2)


def q_state(delta: float = 0.0) -> TwoLevelState:
    return TwoLevelState(SQRT_HALF, SQRT_HALF * cmath.exp(1j * delta))


def project_q(state: TwoLevelState, delta: float = 0.0) -> tuple[complex, TwoLevelState]:
    """Apply ``|q><q|`` (recombination at the second beamsplitter).

    Returns the amplitude ``<q|state>`` and the projected state
    ``<q|state> |q>``.  A zero amplitude is returned as is.
    """
    q = q_state(delta)
    amplitude = inner(q, state)
    return amplitude, q.scaled(amplitude)


def inner(a: TwoLevelState, b: TwoLevelState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    return a.c_p.conjugate() * b.c_p + a.c_perp.conjugate() * b.c_perp
