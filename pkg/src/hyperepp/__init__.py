"""Amplitude-level simulator and analytics for two-step hyperentanglement
purification of two-photon six-qubit systems assisted by NV-center cavities."""

from .cavity import (
    CavityParams,
    InteractionMode,
    ReflectionPair,
    barclay_preset,
    reflection_coupled,
    reflection_empty,
    reflection_from_cooperativity,
    reflection_pair,
    resonant_reflection,
    scatter,
)
from .errors import ArgumentError, DomainError
from .hilbert import (
    BellLabel,
    HyperBellSpec,
    MixedEnsemble,
    PHI_MINUS,
    PHI_PLUS,
    PSI_MINUS,
    PSI_PLUS,
    QubitLabel,
    StateVector,
    canonical_ensemble,
    fidelity,
    make_bell,
    make_hyper_bell,
    measure,
    nv_qubit,
    photon_qubit,
    product_state,
    serialize_amplitudes,
    tensor,
)
from .circuits import (
    QndOutcome,
    SwapOutcome,
    p_qnd,
    pf_swap,
    pp_swap,
    ps_swap,
    pt_swap,
    s_qnd,
)
from .protocol import (
    EppReport,
    Step2Plan,
    classify,
    efficiency_y1,
    efficiency_y2,
    iterate_fidelity,
    run_epp,
    step1,
    step2_execute,
    step2_plan,
)
from .analytics import (
    QndPerformance,
    SwapPerformance,
    cross_validate,
    device_summary,
    figure_data,
    qnd_performance,
    swap_performance,
)

__version__ = "0.1.0"
