"""Parity-check polar codec with SC / SCAN / PC-SCAN / CSR-SCAN decoders."""

__version__ = "0.1.0"

from .channel import (
    LLR_MAX,
    ChannelParams,
    awgn,
    channel_llrs,
    ebn0_to_sigma,
    frame_rng,
    modulate_bpsk,
    sigma_to_ebn0,
)
from .construction import (
    FROZEN,
    INFO,
    PC,
    CodeSpec,
    PcStructure,
    ReliabilitySequence,
    RoleMap,
    build_code,
    build_rolemap,
    coefficient_to_register_length,
    derive_pc_structure,
    pw_reliability,
    row_weight,
)
from .decoders import (
    CsrScanDecoder,
    DampingConfig,
    DecodeResult,
    PcScanDecoder,
    ScanDecoder,
    ScDecoder,
    alpha_step,
    beta_step,
    csr_scan_decode,
    f_op,
    hard_output,
    pc_scan_decode,
    sc_decode,
    scan_decode,
)
from .encoder import (
    csr_precode,
    dense_transform,
    direct_precode,
    encode,
    polar_transform,
)
from .sim import (
    DecoderConfig,
    SimConfig,
    SimResult,
    run_cell,
    sweep,
    wilson_interval,
)
