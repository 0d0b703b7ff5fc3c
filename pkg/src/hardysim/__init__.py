"""hardysim: exact simulation of two bunching-coupled Mach-Zehnder
interferometers, with detection Monte Carlo and local-hidden-variable
analysis."""

from .exceptions import (
    CapacityError,
    ConfigurationError,
    HardySimError,
    NetworkParseError,
    StatisticsError,
    ValidationError,
)
from .fock import (
    ModeRegistry,
    QuantumState,
    add_photon,
    apply_two_mode,
    basis_state,
    combine,
    inner_product,
    pattern_probability,
    vacuum_state,
)
from .network import (
    Element,
    NetworkDescription,
    apply_network,
    parse_network,
    serialize_network,
    tuning_residual,
    with_shutters,
)
from .source import SourceParams, overlap_from_delay, prepare_pair
from .hardy import (
    HardyParams,
    MeasurementSetting,
    analytic_table,
    build_hardy_network,
    build_thought_network,
    postselected_state,
    setting,
    thought_experiment_table,
)
from .detection import (
    CountTable,
    DetectorModel,
    calibration_spread,
    run_all_settings,
    run_counts,
    sample_trial,
)
from .lhv import (
    LhvReport,
    LocalStrategy,
    enumerate_strategies,
    evaluate_violation,
    strategy_probabilities,
    threshold_scan,
    verify_inequality_chain,
)

__version__ = "0.1.0"
