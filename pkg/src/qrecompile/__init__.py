"""Recompile quantum circuits into user templates by imaginary-time energy dissipation."""

from .circuits import (
    Circuit,
    Gate,
    GateCounts,
    apply_circuit,
    bind_params,
    concat,
    count_gates,
    gate_distance_to_identity,
    inverse,
    parse_circuit,
    parse_params,
    scale_fixed_angles,
    serialize_circuit,
    serialize_params,
    state_derivative,
)
from .dynamics import (
    SpinSystem,
    TrotterSpec,
    append_trotter_cycles,
    build_trotter_circuit,
    exact_evolve,
    li_realtime,
    sum_params_by_term,
    trotter_fidelity,
)
from .mclachlan import (
    EvolutionConfig,
    EvolutionTrace,
    LinearSystem,
    SolverConfig,
    build_system,
    evolve,
    solve,
    step,
)
from .paulis import (
    ParseError,
    PauliString,
    PauliSum,
    StateVector,
    apply_pauli_string,
    expectation,
    fidelity,
    init_basis_state,
    parse_pauli_sum,
    serialize_pauli_sum,
)
from .recompile import (
    EliminationConfig,
    EliminationResult,
    LureConfig,
    RecompileJob,
    RecompileResult,
    build_ansatz,
    eliminate_gates,
    fidelity_bound,
    local_field_hamiltonian,
    lure_recompile,
    projector_hamiltonian,
    recompile,
)

__version__ = "0.1.0"
