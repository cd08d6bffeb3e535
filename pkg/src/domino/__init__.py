"""Hardware-distortion compensation for WiFi CSI sensing.

Per-packet AGC gain, phase offsets and delay shifts are removed by
estimating the channel impulse response and normalizing it by its
strongest, static path.
"""
from .baselines import RatioSeries, csi_ratio, double_ratio, raw_magnitude
from .channel_model import (
    ChannelSpec,
    DistortionDraw,
    DistortionRanges,
    MotionModel,
    PathComponent,
    default_channel,
    default_layout,
    default_motion,
    frame_times,
    respiration_trace,
    sample_pulse,
    simulate_trace,
    synth_cir,
    synth_csi,
)
from .cir_estimation import LsOperator, build_ls_operator, estimate_cir_idft, estimate_cir_ls
from .compensation import (
    AlignmentResult,
    CompensatedFrame,
    SearchConfig,
    apply_delay_shift,
    compensate_batch,
    compensate_frame,
    dominant_path_normalize,
    estimate_alignment,
)
from .config import RunConfig, load_config, parse_config
from .errors import (
    ConfigError,
    DominantTapTooWeak,
    DominoError,
    EmptySignal,
    IllConditioned,
    LayoutMismatch,
    LengthMismatch,
    NoPeak,
    RefNotActive,
    TooShort,
    TraceFormatError,
)
from .frames import Cir, CsiFrame, SubcarrierLayout, TapSet, Trace
from .pipeline import SCHEMES, PipelineConfig, respire, scheme_series
from .respiration import ErrorStats, RateEstimate, error_stats, estimate_rate, select_signal
from .traceio import read_trace, write_trace

__version__ = "0.1.0"
