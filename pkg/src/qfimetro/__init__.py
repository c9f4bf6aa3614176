"""Quantum Fisher information, QFI-based correlation measures and metrological bounds."""
from .correlations import (
    classicality_check,
    correlation_report,
    hellinger_discord,
    hs_discord,
    operator_schmidt,
    p_measure,
    q_measure,
    w_matrix,
)
from .metrology import (
    PrecisionInterval,
    mc_estimate,
    nparty_bound,
    precision_interval_global,
    precision_interval_local,
    qcr_bound,
)
from .qfi import (
    bures_distance,
    fidelity,
    gqfi_collective,
    interference_term,
    qfi_spectral,
    qfi_via_sld,
    sld,
    speed_consistency,
)
from .qstate import DensityMatrix, make_pure, make_werner, random_cq_state, random_density

__version__ = "0.1.0"
