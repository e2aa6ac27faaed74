"""Discrete frequency-coded waveform synthesis for orthogonal MIMO radar sets.

A waveform is N contiguous subpulses and a permutation of {0..N-1} assigns
each subpulse a hop frequency. Three variants are supported: fixed-frequency
subpulses (FH), a linear-FM chirp repeated on every subpulse (LFM), and a
cubic-phase chirp variant (MODIFIED_LFM). Everything is computed in
normalized units: the subpulse duration is the time unit and amplitudes are
unit modulus; downstream metrics are normalized so no physical scale is
needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

__all__ = [
    "WaveformKind",
    "CodingSequence",
    "WaveformParams",
    "SampledWaveform",
    "derive_params",
    "samples_per_subpulse",
    "random_coding_set",
    "synthesize",
    "read_sequence_file",
    "write_sequence_file",
]

# Family ratios tying subpulse duration T, hop step df and chirp bandwidth B
# to the sequence length N: T*df = 3, B*T = (9/4)*N (hence B/df = (3/4)*N).
TIME_FREQ_PRODUCT = 3.0
BANDWIDTH_TIME_FACTOR = 9.0 / 4.0


class WaveformKind(str, Enum):
    """Subpulse modulation variant."""

    FH = "fh"
    LFM = "lfm"
    MODIFIED_LFM = "mlfm"


@dataclass(frozen=True)
class CodingSequence:
    """Hop assignment for one waveform: codes[n] is the frequency index of
    subpulse n, and codes must be a permutation of {0..N-1}."""

    codes: np.ndarray

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        object.__setattr__(self, "codes", codes)
        if codes.ndim != 1 or codes.size < 1:
            raise ValueError("codes must be a non-empty 1-D integer sequence")
        if not np.array_equal(np.sort(codes), np.arange(codes.size)):
            raise ValueError(
                f"codes is not a permutation of 0..{codes.size - 1}: {codes.tolist()}"
            )

    def __len__(self) -> int:
        return int(self.codes.size)

    def key(self) -> bytes:
        """Hashable identity, e.g. for memoizing cost evaluations."""
        return self.codes.tobytes()


@dataclass(frozen=True)
class WaveformParams:
    """Physical-unit-free waveform family parameters.

    subpulse_duration T, freq_step df, lfm_bandwidth B and slope k are in
    reciprocal-consistent normalized units (T is the time unit).
    """

    n_subpulses: int
    n_waveforms: int
    subpulse_duration: float
    freq_step: float
    lfm_bandwidth: float
    slope: float
    kind: WaveformKind
    oversample: float = 2.0

    def __post_init__(self):
        if self.n_subpulses < 1:
            raise ValueError("n_subpulses must be >= 1")
        if not 1 <= self.n_waveforms <= self.n_subpulses:
            raise ValueError("need 1 <= n_waveforms <= n_subpulses")
        if self.subpulse_duration <= 0:
            raise ValueError("subpulse_duration must be positive")
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")

    @property
    def sample_rate(self) -> float:
        return samples_per_subpulse(self) / self.subpulse_duration

    @property
    def total_duration(self) -> float:
        return self.n_subpulses * self.subpulse_duration

    def to_dict(self) -> dict:
        return {
            "n_subpulses": self.n_subpulses,
            "n_waveforms": self.n_waveforms,
            "subpulse_duration": self.subpulse_duration,
            "freq_step": self.freq_step,
            "lfm_bandwidth": self.lfm_bandwidth,
            "slope": self.slope,
            "kind": self.kind.value,
            "oversample": self.oversample,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WaveformParams":
        d = dict(d)
        d["kind"] = WaveformKind(d["kind"])
        return cls(**d)


@dataclass(frozen=True)
class SampledWaveform:
    """Complex baseband samples of one waveform (unit amplitude)."""

    samples: np.ndarray
    sample_rate: float
    params_ref: WaveformParams

    def __len__(self) -> int:
        return int(self.samples.size)


def derive_params(
    n_subpulses: int,
    n_waveforms: int,
    kind: WaveformKind,
    oversample: float = 2.0,
) -> WaveformParams:
    """Derive the family parameters for a sequence length.

    T is normalized to 1, df = 3/T and B = (9/4)*N/T, which reproduces the
    design ratios T*df = 3, B/df = (3/4)*N, B*T = (9/4)*N for every length.
    The chirp slope is k = B/T (unused by the FH variant).
    """
    if n_subpulses < 4:
        raise ValueError("n_subpulses must be >= 4")
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    kind = WaveformKind(kind)
    t_sub = 1.0
    freq_step = TIME_FREQ_PRODUCT / t_sub
    bandwidth = BANDWIDTH_TIME_FACTOR * n_subpulses / t_sub
    return WaveformParams(
        n_subpulses=n_subpulses,
        n_waveforms=n_waveforms,
        subpulse_duration=t_sub,
        freq_step=freq_step,
        lfm_bandwidth=bandwidth,
        slope=bandwidth / t_sub,
        kind=kind,
        oversample=oversample,
    )


def samples_per_subpulse(params: WaveformParams) -> int:
    """Samples per subpulse covering the full occupied band (highest hop
    frequency plus chirp bandwidth) times the oversample factor."""
    occupied = params.n_subpulses * params.freq_step + params.lfm_bandwidth
    return math.ceil(params.oversample * params.subpulse_duration * occupied)


def random_coding_set(
    n_subpulses: int, n_waveforms: int, rng_seed: int
) -> list[CodingSequence]:
    """Draw n_waveforms independent uniform-random permutations of
    {0..N-1}; deterministic for a fixed seed."""
    if not 1 <= n_waveforms <= n_subpulses:
        raise ValueError("need 1 <= n_waveforms <= n_subpulses")
    rng = np.random.default_rng(rng_seed)
    return [
        CodingSequence(rng.permutation(n_subpulses)) for _ in range(n_waveforms)
    ]


def synthesize(
    seq: CodingSequence,
    params: WaveformParams,
    *,
    global_chirp: bool = False,
) -> SampledWaveform:
    """Sample one waveform at subpulse-local midpoints (m + 0.5)/fs.

    FH subpulses carry exp(j*2*pi*f_n*t) with t the global time (phase is
    automatically continuous at boundaries because T*df is an integer).
    LFM subpulses carry the hop term on local time plus a quadratic chirp
    exp(j*pi*k*t_loc^2); MODIFIED_LFM replaces it with the cubic phase
    exp(j*pi*(k/T)*t_loc^3), scaled so the peak phase excursion at
    t_loc = T matches the quadratic case. `global_chirp` switches the chirp
    argument to global time for comparison runs; it has no effect on FH.
    """
    codes = seq.codes
    n = params.n_subpulses
    if codes.size != n:
        raise ValueError(
            f"sequence length {codes.size} does not match n_subpulses {n}"
        )
    t_sub = params.subpulse_duration
    n_per = samples_per_subpulse(params)
    fs = n_per / t_sub
    t_loc = (np.arange(n_per) + 0.5) / fs  # (M,)
    t_global = np.arange(n)[:, None] * t_sub + t_loc[None, :]  # (N, M)
    freqs = codes.astype(np.float64) * params.freq_step  # (N,)

    if params.kind is WaveformKind.FH:
        phase = 2.0 * np.pi * freqs[:, None] * t_global
    else:
        tc = t_global if global_chirp else np.broadcast_to(t_loc, (n, n_per))
        if params.kind is WaveformKind.LFM:
            chirp = params.slope * tc**2
        else:
            chirp = (params.slope / t_sub) * tc**3
        phase = 2.0 * np.pi * freqs[:, None] * t_loc[None, :] + np.pi * chirp

    samples = np.exp(1j * phase).reshape(-1)
    return SampledWaveform(samples=samples, sample_rate=fs, params_ref=params)


def write_sequence_file(
    path: str | Path, seqs: list[CodingSequence], header: str | None = None
) -> None:
    """Write one waveform per line, N space-separated integers; lines
    starting with '#' are comments."""
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    for seq in seqs:
        lines.append(" ".join(str(c) for c in seq.codes.tolist()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_sequence_file(path: str | Path) -> list[CodingSequence]:
    """Parse a sequence file, validating that every line is a permutation of
    {0..N-1} and that all lines share one length."""
    seqs: list[CodingSequence] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            codes = np.array([int(tok) for tok in line.split()], dtype=np.int64)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-integer entry") from exc
        try:
            seqs.append(CodingSequence(codes))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: not a permutation") from exc
    if not seqs:
        raise ValueError(f"{path}: no sequences found")
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1:
        raise ValueError(f"{path}: inconsistent sequence lengths {sorted(lengths)}")
    return seqs
