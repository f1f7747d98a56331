"""qclock: entanglement-based clock synchronization at desk scale.

Simulates the operation-triggered protocol (collective NOT triggers, phase
imprint of the clock offsets) and the measurement-triggered W-state protocol,
with quantum Fisher information bounds, maximum-likelihood estimation
harnesses, and an independent dense qubit oracle for cross-validation.
"""

from .dynamics import apply_phase_generator, collective_not, free_evolve
from .errors import (
    BoundsError,
    CapacityError,
    ConfigError,
    DegenerateStateError,
    FamilyError,
    InsufficientDataError,
    OracleMismatchError,
    ProtocolError,
    ProtocolPreconditionError,
    QClockError,
    SchedulingError,
    ShapeError,
    UnidentifiableError,
    UnsupportedStateError,
)
from .estimation import (
    MonteCarloResult,
    TwoBranchReadout,
    estimate_theta,
    identifiability_window,
    mle_phase,
    monte_carlo_deviation,
    readout_probabilities,
    sample_readout,
)
from .fock import (
    FockState,
    PhysicalParams,
    fidelity_global_phase,
    inner_product,
    is_energy_eigenstate,
    new_superposition,
    prepare_average_state,
    prepare_noon,
    prepare_w,
)
from .metrology import (
    PhaseFamily,
    PrecisionReport,
    average_family,
    average_qfi,
    crb,
    local_family,
    local_optimal_qfi,
    mt_average_bound,
    noon_family,
    noon_qfi,
    qfi_generator,
    qfi_pure_numeric,
    ren2012_reference,
)
from .oracle import (
    PmMeasurement,
    QubitRegister,
    oracle_apply_not,
    oracle_evolve,
    oracle_fidelity_with_fock,
    oracle_measure_pm,
    oracle_operation_protocol,
    oracle_prepare_w,
    oracle_w_conditional,
)
from .protocols import (
    ClockTopology,
    ProtocolTranscript,
    WProtocolCounts,
    closed_form_final,
    run_operation_triggered,
    run_w_protocol_sampled,
    w_conditional_probability,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
