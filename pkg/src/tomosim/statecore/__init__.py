"""Numerical substrate: states, density matrices, bases, circuits, evolution."""

from .basis import (
    CoherenceVector,
    OperatorBasis,
    bloch_decompose,
    format_labels,
    gellmann_basis,
    generalized_paulis,
    label_matrix,
    parse_labels,
)
from .circuits import (
    NAMED_GATES,
    Circuit,
    Gate,
    apply_circuit,
    circuit_unitary,
    named_gate,
    random_circuit,
    run_circuit,
)
from .hamiltonian import (
    PauliStringHamiltonian,
    exact_propagator,
    heisenberg_hamiltonian,
    trotterize,
)
from .states import (
    DensityMatrix,
    PureState,
    RegisterShape,
    as_shape,
    basis_state,
    embed_operator,
    partial_trace,
    purity,
    random_density_matrix,
    random_state,
    to_density,
    trace_distance,
    von_neumann_entropy,
)

__all__ = [
    "CoherenceVector", "OperatorBasis", "bloch_decompose", "format_labels", "gellmann_basis",
    "generalized_paulis", "label_matrix", "parse_labels", "NAMED_GATES", "Circuit", "Gate",
    "apply_circuit", "circuit_unitary", "named_gate", "random_circuit", "run_circuit",
    "PauliStringHamiltonian", "exact_propagator", "heisenberg_hamiltonian", "trotterize",
    "DensityMatrix", "PureState", "RegisterShape", "as_shape", "basis_state", "embed_operator",
    "partial_trace", "purity", "random_density_matrix", "random_state", "to_density",
    "trace_distance", "von_neumann_entropy",
]
