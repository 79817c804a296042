"""shadowkit: randomized-measurement simulation and classical-shadow estimation."""

from .pauli import PauliString, WeightedPauliSum, match_factor, pauli_sum_avg_variance, support
from .tableau import (
    CliffordTableau,
    StabilizerState,
    apply_clifford,
    basis_state,
    from_stabilizers,
    ghz_state,
    measure_all_z,
    random_clifford,
    stabilizer_overlap_sq,
    toric_code_state,
)

__version__ = "0.1.0"
