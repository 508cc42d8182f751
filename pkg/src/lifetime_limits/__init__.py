"""Classical and quantum information limits for fluorescence lifetime metrology."""
from .channels import (
    IcModel,
    IsModel,
    WeakPathTask,
    direct_channel,
    ic_channel,
    is_channel,
    wl_binary_channel,
    wl_channel,
    wl_mismatched_channel,
)
from .chernoff import ChernoffResult, classical_chernoff, quantum_chernoff_pure, weak_path_chernoff
from .decay import DecayMixture, DomainError, ThetaParams
from .fisher import SweepTable, cfi_eps, cfi_matrix_continuous, cfi_scalar_discrete, sweep
from .quantum import InfoMatrix, build_sld_basis, qcrb, qfi_matrix_analytic, qfi_matrix_sld
from .simulation import SimConfig, rmse_study

__all__ = [
    "ChernoffResult", "DecayMixture", "DomainError", "IcModel", "InfoMatrix", "IsModel",
    "SimConfig", "SweepTable", "ThetaParams", "WeakPathTask", "build_sld_basis", "cfi_eps",
    "cfi_matrix_continuous", "cfi_scalar_discrete", "classical_chernoff", "direct_channel",
    "ic_channel", "is_channel", "qcrb", "qfi_matrix_analytic", "qfi_matrix_sld",
    "quantum_chernoff_pure", "rmse_study", "sweep", "weak_path_chernoff", "wl_binary_channel",
    "wl_channel", "wl_mismatched_channel",
]
