"""Near-field location division multiple access: channels, codebooks,
hybrid precoding, correlation analysis, and scenario simulations."""

from .channel import (
    ChannelRealization,
    PathComponent,
    ScatterRegion,
    channel_from_paths,
    focusing_vector,
    sample_far_channel,
    sample_near_channel,
    steering_vector,
)
from .codebook import (
    BeamAssignment,
    Codebook,
    analog_precoder,
    build_dft_codebook,
    build_polar_codebook,
    load_codebook,
    save_codebook,
    sweep_assign,
)
from .correlation import (
    CorrelationReport,
    FresnelPair,
    dirichlet_sinc,
    focusing_correlation_approx,
    focusing_correlation_exact,
    fresnel,
    fresnel_ratio,
    fresnel_ratio_envelope,
    steering_correlation,
)
from .errors import ConfigError, LdmaError, NumericalRegimeError
from .geometry import SPEED_OF_LIGHT, ArrayConfig, Location, rayleigh_distance
from .harness import RunResult, default_config, load_config, run_scenario
from .performance import (
    BoundReport,
    MinMaxPlacement,
    RateReport,
    ideal_se,
    linear_upper_bound,
    min_max_correlation,
    spectrum_efficiency,
    three_user_upper_bound,
    zf_gram_se,
)
from .precoding import (
    EffectiveChannel,
    PrecoderSet,
    SystemConfig,
    WmmseResult,
    estimate_effective_channel,
    fully_digital_zf,
    wmmse_precoder,
    zf_precoder,
)

__version__ = "0.1.0"
