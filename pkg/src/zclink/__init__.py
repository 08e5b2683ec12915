"""Link-level simulator for the 1-bit quantized, oversampled MIMO downlink
with zero-crossing precoding."""

from .channel import (
    ChannelParams,
    ChannelRealization,
    NoiseModel,
    SingularChannelError,
    ZfPrecoder,
    draw_channel,
    draw_valid_channel,
    noise_from_snr,
    receive_quantize,
    zf_precoder,
)
from .dims import SystemDims
from .matrices import (
    filter_sample_vector,
    filter_scale,
    filter_toeplitz,
    transmit_energy_operator,
    upsampling_matrix,
    waveform_matrix,
)
from .precoder import (
    PrecodeContext,
    PrecodedBlock,
    build_problem,
    noiseless_receive,
    precode,
    precode_pattern,
    received_margin,
    transmit_energy,
)
from .pulses import (
    RAISED_COSINE,
    ROOT_RAISED_COSINE,
    PulseSpec,
    SampledWaveform,
    combined_pulse,
    default_grid_step,
    rc_pulse,
    rrc_pulse,
    sample_pulse,
)
from .qcqp import (
    EpigraphProblem,
    PrecodeSolution,
    check_feasibility,
    margin_feasible,
    oracle_solve,
    solve,
)
from .zccode import (
    GrayCoder,
    ZcAlphabet,
    ZcCodebook,
    crossing_count,
    detect,
    encode_pattern,
    fm_detect,
    fm_pattern,
    fm_segments,
    hamming_metric,
)

__version__ = "0.1.0"
