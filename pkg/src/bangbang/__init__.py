"""Bang-bang decoherence control for a single spin-boson qubit."""

from .control import (
    ControlLedger,
    NonConvergence,
    NoRootInInterval,
    NotStabilized,
    PulseRecord,
    PulseSolution,
    RootSelection,
    RunResult,
    RunSetup,
    SolverConfig,
    StabilizationReport,
    detect_stabilization,
    replay_template,
    run,
    solve_pulse,
    step,
)
from .evolution import (
    THERMAL_CONSISTENT,
    THERMAL_FOLDED,
    EvolutionInput,
    component_response,
    evolve,
    evolve_adiabatic,
    evolve_thermal,
    zero_control,
    zero_control_adiabatic,
    zero_control_thermal,
)
from .kernels import (
    ModelParams,
    QuadratureConfig,
    QuadratureError,
    Regime,
    g_adiabatic,
    g_kernel,
    g_thermal,
    spectral_function,
    tabulate_kernel,
)
from .noise import NoiseConfig, PulseNoise
from .runner import (
    PRESETS,
    ConfigError,
    ScenarioConfig,
    ScenarioResult,
    Trajectory,
    TrajectoryRow,
    export_csv,
    load_config,
    run_scenario,
)
from .state import COMPONENT_LABELS, Component, DensityMatrix

__version__ = "0.1.0"
