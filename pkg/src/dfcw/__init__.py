"""Orthogonal discrete-frequency-coded waveform set design for MIMO radar."""

from .metrics import (
    SILENT_DB,
    Aggregation,
    AmbiguitySurface,
    CorrelationReport,
    CorrelationVector,
    MainlobeInterval,
    ambiguity,
    cost_function,
    cross_correlate,
    find_mainlobe,
    full_delay_grid,
    islr,
    pslr_auto,
    pslr_cross,
    total_ambiguity,
)
from .optimizer import (
    OptimizationResult,
    Particle,
    SwarmConfig,
    acc_pso_step,
    decode_position,
    encode_sequences,
    exhaustive_search,
    run_acc_pso,
    run_baseline_ga,
    run_baseline_pso,
)
from .waveform import (
    CodingSequence,
    SampledWaveform,
    WaveformKind,
    WaveformParams,
    derive_params,
    random_coding_set,
    read_sequence_file,
    synthesize,
    write_sequence_file,
)

__version__ = "0.1.0"
