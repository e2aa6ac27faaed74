"""Correlation-based quality metrics and ambiguity surfaces for waveform sets.

All correlations are aperiodic (linear, zero-padded) and normalized so that a
waveform's autocorrelation peaks at exactly 1; cross-correlations are scaled
by the geometric mean of the two autocorrelation peaks. Peak and integrated
sidelobe ratios are reported in dB, and the combined cost aggregates them
over a set so that lower (more negative) is better.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.fft

from .waveform import SampledWaveform, WaveformParams, samples_per_subpulse

__all__ = [
    "SILENT_DB",
    "Aggregation",
    "CorrelationVector",
    "MainlobeInterval",
    "CorrelationReport",
    "AmbiguitySurface",
    "cross_correlate",
    "find_mainlobe",
    "pslr_auto",
    "pslr_cross",
    "islr",
    "cost_function",
    "ambiguity",
    "total_ambiguity",
    "full_delay_grid",
    "write_report",
    "read_report",
    "report_to_dict",
    "write_correlation_csv",
    "write_ambiguity_csv",
]

# Sentinel for an all-zero sidelobe region (e.g. a single-sample waveform or
# sample-orthogonal pair): the dB ratio is reported as -inf instead of
# raising. JSON output carries it as the -Infinity literal.
SILENT_DB = float("-inf")


class Aggregation(str, Enum):
    """How per-waveform PSLR terms pool into the combined cost: MIN sums each
    waveform's best (most negative dB) terms, MAX its worst offender."""

    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class CorrelationVector:
    """Magnitudes of one full aperiodic correlation, length 2S-1, zero lag at
    index S-1; `normalization` is the linear scale that was divided out."""

    values: np.ndarray
    zero_lag_index: int
    normalization: float

    def lags(self) -> np.ndarray:
        return np.arange(self.values.size) - self.zero_lag_index


@dataclass(frozen=True)
class MainlobeInterval:
    """Inclusive index bounds of the mainlobe region inside a correlation
    vector."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("empty mainlobe interval")

    def width(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class CorrelationReport:
    """Set-level summary: linear ASP (diagonal) / CP (off-diagonal) matrix,
    the matching dB values, per-waveform integrated sidelobe ratios, and the
    combined cost."""

    matrix: np.ndarray
    pslr_db: np.ndarray
    cp_db: np.ndarray
    islr_db: np.ndarray
    cost: float
    lam: float
    aggregation: Aggregation
    params: WaveformParams


@dataclass(frozen=True)
class AmbiguitySurface:
    """Delay/Doppler response magnitudes, scaled by the zero-delay
    zero-Doppler value so the global peak is 1 whenever the grid contains
    it. magnitude[d, t] pairs dopplers[d] with delays[t]."""

    delays: np.ndarray
    dopplers: np.ndarray
    magnitude: np.ndarray


def _nfft(n_samples: int) -> int:
    return scipy.fft.next_fast_len(2 * n_samples - 1, real=False)


def _full_from_circular(circ: np.ndarray, n_samples: int) -> np.ndarray:
    """Rearrange a circular correlation of length nfft >= 2S-1 into the full
    linear lag axis -(S-1)..(S-1)."""
    if n_samples == 1:
        return circ[..., :1]
    return np.concatenate(
        [circ[..., -(n_samples - 1) :], circ[..., :n_samples]], axis=-1
    )


def _complex_xcorr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full complex correlation c[tau] = sum_n a[n+tau]*conj(b[n])."""
    n = a.size
    size = _nfft(n)
    fa = scipy.fft.fft(a, size)
    fb = scipy.fft.fft(b, size)
    return _full_from_circular(scipy.fft.ifft(fa * np.conj(fb)), n)


def _energy(samples: np.ndarray) -> float:
    return float(np.vdot(samples, samples).real)


def cross_correlate(a: SampledWaveform, b: SampledWaveform) -> CorrelationVector:
    """Aperiodic correlation magnitudes of two equal-length waveforms.

    The result is scaled by sqrt(E_a * E_b), E being each input's zero-lag
    autocorrelation energy; when both inputs are the same signal the computed
    zero-lag magnitude itself is used so the normalized autocorrelation peak
    is exactly 1.
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if a.sample_rate != b.sample_rate:
        raise ValueError(
            f"sample rate mismatch: {a.sample_rate} vs {b.sample_rate}"
        )
    mags = np.abs(_complex_xcorr(a.samples, b.samples))
    zero = len(a) - 1
    if a is b or np.array_equal(a.samples, b.samples):
        norm = float(mags[zero])
    else:
        norm = math.sqrt(_energy(a.samples) * _energy(b.samples))
    return CorrelationVector(
        values=mags / norm, zero_lag_index=zero, normalization=norm
    )


def find_mainlobe(
    auto: CorrelationVector, params: WaveformParams
) -> MainlobeInterval:
    """Locate the mainlobe of a normalized autocorrelation.

    Scans outward from zero lag for the first local minimum (the first null);
    the mainlobe is everything strictly inside it, mirrored to both sides
    (autocorrelation magnitudes are symmetric). If no local minimum shows up
    within 2*fs/B samples, falls back to the compressed-pulse resolution
    cell ceil(fs/B) as the half-width.
    """
    values = auto.values
    zero = auto.zero_lag_index
    fs = samples_per_subpulse(params) / params.subpulse_duration
    cell = fs / params.lfm_bandwidth
    limit = min(math.ceil(2 * cell), values.size - 2 - zero)
    half = None
    for off in range(1, limit + 1):
        i = zero + off
        if values[i] <= values[i - 1] and values[i] <= values[i + 1]:
            half = off - 1
            break
    if half is None:
        half = math.ceil(cell)
    return MainlobeInterval(
        lo=max(0, zero - half), hi=min(values.size - 1, zero + half)
    )


def _db(ratio: float) -> float:
    return 20.0 * math.log10(ratio) if ratio > 0 else SILENT_DB


def pslr_auto(auto: CorrelationVector, mainlobe: MainlobeInterval) -> float:
    """Peak sidelobe to mainlobe-peak ratio of an autocorrelation, in dB.

    Returns SILENT_DB when there is no nonzero sidelobe (e.g. S=1).
    """
    values = auto.values
    side = np.concatenate([values[: mainlobe.lo], values[mainlobe.hi + 1 :]])
    if side.size == 0:
        return SILENT_DB
    peak = float(side.max())
    main = float(values[mainlobe.lo : mainlobe.hi + 1].max())
    return _db(peak / main)


def pslr_cross(cross: CorrelationVector) -> float:
    """Peak of a normalized cross-correlation in dB; the whole vector counts
    as sidelobe (a cross-correlation has no mainlobe), so this is
    20*log10(max |C|). Returns SILENT_DB for an all-zero vector."""
    return _db(float(cross.values.max()))


def islr(
    auto: CorrelationVector,
    crosses: list[CorrelationVector],
    mainlobe: MainlobeInterval,
) -> float:
    """Integrated sidelobe ratio in dB: autocorrelation sidelobe magnitudes
    plus all cross-correlation magnitudes of this waveform against the rest
    of the set, over the integrated mainlobe magnitude."""
    values = auto.values
    side = float(
        np.concatenate([values[: mainlobe.lo], values[mainlobe.hi + 1 :]]).sum()
    )
    for cv in crosses:
        side += float(cv.values.sum())
    main = float(values[mainlobe.lo : mainlobe.hi + 1].sum())
    if main == 0:
        raise ValueError("mainlobe integrates to zero")
    return _db(side / main)


def cost_function(
    waveforms: list[SampledWaveform],
    lam: float = 0.1,
    aggregation: Aggregation = Aggregation.MIN,
) -> tuple[float, CorrelationReport]:
    """Combined design cost of a waveform set, plus the full report.

    Per waveform l the cost takes its autocorrelation PSLR and the MIN (or
    MAX, for the worst-case aggregation) of its cross PSLRs against the rest
    of the set, summed over l, plus lam times the summed integrated sidelobe
    ratios. Lower is better. With a single waveform the cross terms are
    omitted.
    """
    n_wave = len(waveforms)
    if n_wave < 1:
        raise ValueError("need at least one waveform")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    aggregation = Aggregation(aggregation)
    params = waveforms[0].params_ref
    n_samp = len(waveforms[0])
    for w in waveforms[1:]:
        if len(w) != n_samp or w.sample_rate != waveforms[0].sample_rate:
            raise ValueError("waveforms must share length and sample rate")

    zero = n_samp - 1
    size = _nfft(n_samp)
    stack = np.stack([w.samples for w in waveforms])
    ffts = scipy.fft.fft(stack, size, axis=-1, workers=-1)
    energies = [_energy(w.samples) for w in waveforms]

    pair_index = [(p, q) for p in range(n_wave) for q in range(p, n_wave)]
    prods = np.empty((len(pair_index), size), dtype=np.complex128)
    for row, (p, q) in enumerate(pair_index):
        np.multiply(ffts[p], np.conj(ffts[q]), out=prods[row])
    full = np.abs(_full_from_circular(scipy.fft.ifft(prods, axis=-1, workers=-1), n_samp))

    autos: list[CorrelationVector] = [None] * n_wave
    crosses: dict[tuple[int, int], CorrelationVector] = {}
    for row, (p, q) in enumerate(pair_index):
        if p == q:
            norm = float(full[row][zero])
        else:
            norm = math.sqrt(energies[p] * energies[q])
        vec = CorrelationVector(full[row] / norm, zero, norm)
        if p == q:
            autos[p] = vec
        else:
            crosses[(p, q)] = vec

    lobes = [find_mainlobe(a, params) for a in autos]
    matrix = np.empty((n_wave, n_wave))
    pslr_db = np.empty(n_wave)
    islr_db = np.empty(n_wave)
    for p in range(n_wave):
        lobe = lobes[p]
        vals = autos[p].values
        side = np.concatenate([vals[: lobe.lo], vals[lobe.hi + 1 :]])
        matrix[p, p] = float(side.max()) if side.size else 0.0
        pslr_db[p] = pslr_auto(autos[p], lobe)
        islr_db[p] = islr(
            autos[p],
            [crosses[(min(p, q), max(p, q))] for q in range(n_wave) if q != p],
            lobe,
        )
    for (p, q), vec in crosses.items():
        peak = float(vec.values.max())
        matrix[p, q] = peak
        matrix[q, p] = peak

    cp_db = np.empty((n_wave, n_wave))
    for p in range(n_wave):
        for q in range(n_wave):
            cp_db[p, q] = _db(matrix[p, q]) if p != q else pslr_db[p]

    pool = max if aggregation is Aggregation.MAX else min
    cost = 0.0
    for p in range(n_wave):
        cost += pslr_db[p]
        cross_terms = [cp_db[p, q] for q in range(n_wave) if q != p]
        if cross_terms:
            cost += pool(cross_terms)
    cost += lam * float(islr_db.sum())

    report = CorrelationReport(
        matrix=matrix,
        pslr_db=pslr_db,
        cp_db=cp_db,
        islr_db=islr_db,
        cost=cost,
        lam=lam,
        aggregation=aggregation,
        params=params,
    )
    return cost, report


def full_delay_grid(w: SampledWaveform) -> np.ndarray:
    """Every representable lag of a waveform, in time units."""
    s = len(w)
    return np.arange(-(s - 1), s) / w.sample_rate


def _doppler_response(
    w: SampledWaveform, dopplers: np.ndarray, lags: np.ndarray
) -> np.ndarray:
    """Complex delay response at the requested sample lags, one row per
    Doppler: chi[d, tau] = sum_m w[m]*conj(w[m+tau])*exp(j*2*pi*fd[d]*m/fs)
    (up to an overall conjugate that cannot change magnitudes or coherent-sum
    magnitudes). Doppler rows are processed in chunks to bound memory."""
    samples = w.samples
    n = samples.size
    size = _nfft(n)
    m_over_fs = np.arange(n) / w.sample_rate
    f_ref = scipy.fft.fft(samples, size)
    inside = np.abs(lags) <= n - 1
    out = np.zeros((dopplers.size, lags.size), dtype=np.complex128)
    chunk = max(1, int(64e6 // (size * 32)))
    for start in range(0, dopplers.size, chunk):
        block = dopplers[start : start + chunk]
        shifted = samples[None, :] * np.exp(
            1j * 2 * np.pi * block[:, None] * m_over_fs[None, :]
        )
        f_shift = scipy.fft.fft(shifted, size, axis=-1, workers=-1)
        circ = scipy.fft.ifft(
            f_ref[None, :] * np.conj(f_shift), axis=-1, workers=-1
        )
        full = _full_from_circular(circ, n)
        out[start : start + chunk, inside] = full[:, lags[inside] + n - 1]
    return out


def _as_lags(delay_grid, sample_rate: float) -> np.ndarray:
    return np.rint(np.asarray(delay_grid, dtype=np.float64) * sample_rate).astype(
        np.int64
    )


def ambiguity(
    w: SampledWaveform, delay_grid, doppler_grid
) -> AmbiguitySurface:
    """Delay/Doppler ambiguity magnitudes of one waveform.

    Delays are given in time units and snap to the nearest sample lag;
    dopplers are in cycles per time unit. Values are scaled by the
    zero-delay zero-Doppler response (the signal energy), which is the
    global peak, so magnitude is 1 exactly there.
    """
    dopplers = np.asarray(doppler_grid, dtype=np.float64)
    if dopplers.size == 0 or np.asarray(delay_grid).size == 0:
        raise ValueError("grids must be non-empty")
    lags = _as_lags(delay_grid, w.sample_rate)
    mag = np.abs(_doppler_response(w, dopplers, lags)) / _energy(w.samples)
    return AmbiguitySurface(
        delays=lags / w.sample_rate, dopplers=dopplers, magnitude=mag
    )


def total_ambiguity(
    waveforms: list[SampledWaveform], delay_grid, doppler_grid
) -> AmbiguitySurface:
    """Single-receiver matched-filter-bank surface: the per-waveform complex
    responses are summed coherently before taking magnitudes, then scaled by
    the summed energies (the zero-delay zero-Doppler peak)."""
    if not waveforms:
        raise ValueError("need at least one waveform")
    n_samp = len(waveforms[0])
    if any(len(w) != n_samp for w in waveforms):
        raise ValueError("waveforms must share length")
    dopplers = np.asarray(doppler_grid, dtype=np.float64)
    if dopplers.size == 0 or np.asarray(delay_grid).size == 0:
        raise ValueError("grids must be non-empty")
    lags = _as_lags(delay_grid, waveforms[0].sample_rate)
    acc = np.zeros((dopplers.size, lags.size), dtype=np.complex128)
    for w in waveforms:
        acc += _doppler_response(w, dopplers, lags)
    total_energy = sum(_energy(w.samples) for w in waveforms)
    mag = np.abs(acc) / total_energy
    return AmbiguitySurface(
        delays=lags / waveforms[0].sample_rate, dopplers=dopplers, magnitude=mag
    )


def report_to_dict(report: CorrelationReport) -> dict:
    return {
        "params": report.params.to_dict(),
        "matrix": report.matrix.tolist(),
        "pslr_db": report.pslr_db.tolist(),
        "cp_db": report.cp_db.tolist(),
        "islr_db": report.islr_db.tolist(),
        "cost": report.cost,
        "lambda": report.lam,
        "aggregation": "worst-case" if report.aggregation is Aggregation.MAX else "paper-min",
    }


def _aggregation_from_name(name: str) -> Aggregation:
    try:
        return {"paper-min": Aggregation.MIN, "worst-case": Aggregation.MAX}[name]
    except KeyError:
        raise ValueError(f"unknown aggregation {name!r}") from None


def write_report(path: str | Path, report: CorrelationReport) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n")


def read_report(path: str | Path) -> CorrelationReport:
    d = json.loads(Path(path).read_text())
    return CorrelationReport(
        matrix=np.asarray(d["matrix"], dtype=np.float64),
        pslr_db=np.asarray(d["pslr_db"], dtype=np.float64),
        cp_db=np.asarray(d["cp_db"], dtype=np.float64),
        islr_db=np.asarray(d["islr_db"], dtype=np.float64),
        cost=float(d["cost"]),
        lam=float(d["lambda"]),
        aggregation=_aggregation_from_name(d["aggregation"]),
        params=WaveformParams.from_dict(d["params"]),
    )


def write_correlation_csv(path: str | Path, corr: CorrelationVector) -> None:
    """Lag-indexed magnitudes, one row per lag, header 'lag,magnitude'."""
    lines = ["lag,magnitude"]
    for lag, mag in zip(corr.lags(), corr.values):
        lines.append(f"{int(lag)},{float(mag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_ambiguity_csv(path: str | Path, surface: AmbiguitySurface) -> None:
    """Long-format grid: header 'doppler,delay,magnitude', one row per
    (doppler, delay) cell."""
    lines = ["doppler,delay,magnitude"]
    for d, doppler in enumerate(surface.dopplers):
        for t, delay in enumerate(surface.delays):
            lines.append(
                f"{float(doppler)!r},{float(delay)!r},"
                f"{float(surface.magnitude[d, t])!r}"
            )
    Path(path).write_text("\n".join(lines) + "\n")
