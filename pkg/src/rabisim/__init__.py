"""Dissipative quantum Rabi model simulator.

Solves and compares three master equations for a two-level system
ultrastrongly coupled to one cavity mode — the standard quantum-optical
(GKSL) master equation and the dressed-picture master equation in both
the dressed and bare bases — and computes the full observable suite
(qubit excitation, photon statistics, negativity, purities, post-selected
metrology) as figure-ready time series.
"""

__version__ = "0.1.0"

from .dressed import (
    DressedBasis,
    RateTable,
    SpectralDensity,
    WTensors,
    bare_to_dressed,
    build_dressed_basis,
    compute_rates,
    compute_w_tensors,
    diagonalize,
    dme_rhs_dressed,
    dressed_matrix_elements,
    dressed_to_bare,
    evolve_dme_bare,
    evolve_dme_dressed,
)
from .gksl import (
    BareCoefficients,
    CoefficientTrajectory,
    GKSLSystem,
    RateParams,
    evolve_gksl,
    gksl_rhs,
)
from .hilbert import (
    ModelParams,
    ModulationParams,
    OperatorSet,
    TruncationScheme,
    build_hamiltonian,
    build_operators,
    parity_operator,
    qubit_frequency,
)
from .observables import (
    MetrologyReport,
    ObservableRecord,
    fisher_displacement,
    metrology_report,
    negativity,
    observe,
    photon_distribution,
    postselect_ground,
    qfi_phase,
    reduced_states,
    scalar_observables,
)
from .packing import BarePacking, HermitianPacking
from .rk import IntegratorConfig, TimeGrid, integrate
from .scenario import (
    PRESETS,
    ScenarioConfig,
    Trajectory,
    parse_config,
    preset_config,
    run_scenario,
    write_outputs,
)
from .states import (
    FieldState,
    FieldStateSpec,
    auto_truncation,
    coherent_amplitudes,
    generate_field_state,
    odd_cat_amplitudes,
    project_to_dressed,
    squeezed_coherent_amplitudes,
    squeezed_vacuum_amplitudes,
    thermal_populations,
)
