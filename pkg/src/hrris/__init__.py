"""Link-level simulator and optimizer for semi-passive (hybrid relay-reflecting)
intelligent surfaces, with passive-RIS and full-duplex AF relay baselines."""

__version__ = "0.1.0"

from .channel import (  # noqa: F401
    ChannelPair,
    FadingSpec,
    Geometry,
    PathLossModel,
    gen_channel_pair,
)
from .harness import (  # noqa: F401
    ExperimentSpec,
    SweepResult,
    TrialResult,
    load_experiment_spec,
    run_sweep,
    run_trial,
    write_results,
)
from .metrics import (  # noqa: F401
    NoiseModel,
    PowerModel,
    RateResult,
    energy_efficiency,
    spectral_efficiency,
    total_power_consumption,
    water_filling,
)
from .optimize import (  # noqa: F401
    AOConfig,
    OptResult,
    brute_force_oracle,
    optimize_dynamic_hrris,
    optimize_fixed_hrris,
    optimize_passive,
    select_active_elements,
)
from .relay import RelayConfig, relay_experiment, relay_precoder, relay_rate  # noqa: F401
from .surface import (  # noqa: F401
    CoeffProfile,
    PhaseCodebook,
    SurfaceConfig,
    UnstableLoopError,
    budget_check,
    quantize_phase,
)
