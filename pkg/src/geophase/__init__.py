"""Spatial geometric phase of a two-loop interferometer.

The phase is computed two independent ways: from the overlap of the
recombined beams (closed form, or a fit to synthesized fringes) and from the
signed solid angle of the state's loop on the Bloch sphere.
"""

from .blochgeo import (
    BlochPath,
    BlochPoint,
    PathSegment,
    absorber_polar_angle,
    build_path,
    cyclic_closed_form,
    geodesic_arc,
    geometric_phase_geometric,
    signed_solid_angle,
    state_to_bloch,
)
from .errors import (
    AmbiguousGeodesic,
    FitFailure,
    GeoPhaseError,
    InternalError,
    InvalidConfig,
    InvalidState,
    OpenPath,
    UndefinedPhase,
    Undersampled,
)
from .fringes import FringeFit, FringeScan, fit_sinusoid, flattening_curve, poisson_sample, synthesize
from .pancharatnam import (
    PhaseDecomposition,
    SweepResult,
    decompose,
    dynamical_phase,
    geometric_phase_interferometric,
    pancharatnam_phase,
    sweep,
    total_phase_closed_form,
    zero_dynamical_split,
)
from .qstate import InterferometerConfig, TwoLevelState, evolve_second_loop

__version__ = "0.1.0"
