"""Numerical holonomy and monodromy of flat connections on the punctured
plane: geometric phase factors, spin transport, and vacuum classification."""

from .connection import (
    SIGMA,
    TAU,
    AharonovCasher,
    ConnectionSpec,
    ConstantField,
    CustomSampler,
    FuchsianLog,
    GridRegion,
    LieBasis,
    MultiSolenoid,
    curvature_fd,
    evaluate_generator,
    verify_lie_basis,
    ym_energy,
)
from .geometry import (
    Circle,
    Concat,
    PathSpec,
    PlanePoint,
    Polyline,
    PunctureSet,
    concat,
    min_distance,
    reverse,
    sample_path,
    winding_number,
)
from .monodromy import (
    LoopWord,
    Representation,
    ab_phase_predict,
    abelian_oracle,
    evaluate_word,
    generator_loops,
    monodromy_representation,
    winding_vector,
)
from .oracle import OracleReport, conjugation_oracle, fine_step_transport, run_verification_suite
from .transport import (
    HolonomyResult,
    TransportTrajectory,
    compose_transport,
    parallel_transport,
    transport_trajectory,
)
from .vacua import (
    VacuumClassCyclic,
    VacuumClassZ2,
    canonical_vacuum_cyclic,
    classify_z2,
    enumerate_vacua_z2,
    equivalent_reps_cyclic,
    random_unitary,
    vacuum_from_connection,
)
from .wong import (
    AdRhoReport,
    SpinState,
    WongResult,
    isospectrality_report,
    verify_ad_rho,
    wong_transport,
    wong_transport_components,
)

__version__ = "0.1.0"
