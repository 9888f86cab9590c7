"""Spin-lace lattices with strictly local dynamical symmetries.

Subpackages: exact Pauli-string algebra (``paulis``), spin-lace model
construction (``lattice``), eigenoperator verification and search
(``symmetries``), exact time evolution and thermal correlators
(``dynamics``), frequency analysis (``spectral``), and the experiment
command line (``cli``).
"""

from .paulis import (
    CapacityError,
    DimensionError,
    PauliString,
    PauliSum,
    commutator,
    hs_inner,
    matvec,
    to_matrix,
)
from .lattice import (
    Defect,
    SiteMap,
    SpinLaceSpec,
    TermRegistry,
    build,
    dynamical_symmetry_op,
    local_hamiltonian,
    singlet_projector,
    symmetry_charge,
    total_spin,
)
from .symmetries import (
    CommutantConstraint,
    EigenoperatorResult,
    check_delta_structure,
    eigenoperator_search,
    overlap_report,
    verify_conserved,
    verify_eigenoperator,
)
from .dynamics import (
    EvolutionPlan,
    ThermalSpec,
    TimeSeries,
    connected_correlator,
    correlation,
    evolve_state,
    kicked_evolution,
)
from .spectral import (
    PeakReport,
    Spectrum,
    default_omega_grid,
    finite_time_ft,
    linear_response,
    peak_report,
)

__version__ = "0.1.0"
