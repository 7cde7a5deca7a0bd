from ..fitting import DecayFit, fit_decay
from .rb import (BlindRBResult, RBConfig, RBResult, run_blind_rb_1q, run_irb, run_rb)
from .tomography import ProcessMatrix, extract_process_matrix, ideal_ptm, pauli_labels

__all__ = [
    "BlindRBResult", "DecayFit", "ProcessMatrix", "RBConfig", "RBResult", "extract_process_matrix",
    "fit_decay", "ideal_ptm", "pauli_labels", "run_blind_rb_1q", "run_irb", "run_rb",
]
