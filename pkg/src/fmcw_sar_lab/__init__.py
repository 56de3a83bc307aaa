"""Stretch-processing, matched-filter and reconstruction-based FMCW radar receivers with SAR backprojection."""

__version__ = "0.1.0"

from .errors import (
    AliasingError,
    AlignmentError,
    ConfigError,
    FmcwSarError,
    InvalidDelayError,
    InvalidParameterError,
    ScenarioParseError,
    ScenarioValidationError,
    UndefinedSnrError,
)
from .metrics import (
    GainReport,
    GainRow,
    analytic_gain_db,
    compression_gain_table,
    peak_location,
    profile_snr_db,
    snr_out_db,
)
from .receivers import (
    ARCHITECTURES,
    AdcConfig,
    RangeProfile,
    downsample,
    matched_filter_range_profile,
    proposed_range_profile,
    range_profile,
    reconstruct_received,
    stretch_dechirp,
    stretch_range_profile,
    upsample,
)
from .sar import ImageGrid, Trajectory, acquire, circular_trajectory, gbp_image, interpolate_profile
from .scenario import Scenario, loads_scenario, parse_scenario, serialize_scenario
from .signal_core import (
    SPEED_OF_LIGHT,
    ChirpParams,
    PointTarget,
    SampledSignal,
    Scene,
    add_awgn,
    chirp_rate,
    make_chirp,
    point_target_echo,
    scene_echo,
)
