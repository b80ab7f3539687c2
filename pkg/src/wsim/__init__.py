"""Dissipative preparation of tripartite W states in a qubit/two-resonator
system coupled through a common reservoir: model construction, dark-state
spectral analysis, master-equation dynamics, and figure reproduction."""

from .linalg import ModeLayout, dagger, eig_nonhermitian, embed, kron, matrix_exponential
from .model import (
    Channel,
    PulseSpec,
    SystemConfig,
    build_channels,
    build_dephasing_jump,
    build_hamiltonian,
    build_jump_operator,
    build_mode_operators,
    effective_hamiltonian,
    liouvillian_apply,
    number_operator,
    validate_config,
)
from .spectral import (
    SpectralDecomposition,
    catalog_w_states,
    dark_bright_states,
    decompose,
    single_excitation_basis,
    target_dark_state,
)
from .dynamics import (
    DensityMatrix,
    Trajectory,
    check_state,
    evolve,
    fidelity,
    liouvillian_supermatrix,
    oracle_propagate,
)
from .experiments import (
    OptimizationResult,
    PeakResult,
    find_first_peak,
    hybrid_config,
    ideal_config,
    optimize_drive,
    reproduce,
    run_fidelity_trace,
    run_stability,
    sweep_deviation,
    sweep_drive,
    sweep_tau,
)
from .config import load_run, parse_config, render_config

__version__ = "0.1.0"
