"""Exact stabilizer ground states of Pauli Hamiltonians."""

from .pauli import (
    PauliError,
    PauliOp,
    PauliParseError,
    PauliSet,
    commutes,
    format_pauli,
    multiply,
    parse_pauli,
    truncate,
)
from .stabgroup import (
    AnticommutingGeneratorsError,
    CircuitDescription,
    GuardExceededError,
    MinusIdentityError,
    NotFullRankError,
    StabGroup,
    StabGroupError,
    conjugate_through_circuit,
)
from .hamiltonian import (
    Hamiltonian,
    HamiltonianError,
    HamiltonianParseError,
    PeriodicHamiltonian1D,
    SupercellHamiltonian,
    format_hamiltonian,
    gen_stochastic_heisenberg,
    load,
    make_cluster_chain,
    make_toric,
    rotate_y,
)
from .solver_general import SolveResult, e_stab, enumerate_restricted_subsets, solve_general
from .solver_local1d import LocalState, frontier_stats, solve_local1d, transition
from .solver_periodic import (
    NoCycleFoundError,
    PeriodicResult,
    evaluate_branch,
    extended_scan,
    solve_periodic_1d,
    solve_supercell_c1,
)
from .annealer import CliffordAnsatz, Schedule, anneal, evaluate

__version__ = "0.1.0"
