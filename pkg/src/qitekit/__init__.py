"""Classical simulation of (variational) quantum imaginary time evolution."""
from .model import (
    GroundTruth,
    TfimParams,
    TrotterPiece,
    build_tfim,
    exact_ground,
    exact_ite_evolve,
    trotterize,
    trotterize_tfim,
)
from .pauli import PauliString, PauliSum, enumerate_strings, pauli_mul, pauli_to_matrix
from .qite import QiteConfig, qite_step, run_qite
from .statevec import StateVector, fidelity, init_basis_state
from .varqite import Ansatz, VarQiteConfig, prepare_state, run_varqite, varqite_step

__version__ = "0.1.0"
