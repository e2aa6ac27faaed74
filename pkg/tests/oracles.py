"""Independent straight-line reference implementations used only by tests.

Everything here is deliberately naive (per-sample loops, per-lag O(S^2)
summation) and shares no code with the package's fast paths.
"""

import cmath
import math

import numpy as np


def synth_direct(codes, params, global_chirp=False):
    """Per-sample loop evaluation of the three subpulse formulas."""
    from dfcw.waveform import WaveformKind, samples_per_subpulse

    n_per = samples_per_subpulse(params)
    t_sub = params.subpulse_duration
    fs = n_per / t_sub
    out = []
    for n, code in enumerate(codes):
        f_n = code * params.freq_step
        for m in range(n_per):
            t_loc = (m + 0.5) / fs
            t = n * t_sub + t_loc
            if params.kind is WaveformKind.FH:
                out.append(cmath.exp(1j * 2 * math.pi * f_n * t))
            else:
                tc = t if global_chirp else t_loc
                if params.kind is WaveformKind.LFM:
                    chirp = params.slope * tc * tc
                else:
                    chirp = (params.slope / t_sub) * tc * tc * tc
                out.append(
                    cmath.exp(1j * 2 * math.pi * f_n * t_loc)
                    * cmath.exp(1j * math.pi * chirp)
                )
    return np.array(out, dtype=np.complex128)


def xcorr_direct(a, b):
    """Full aperiodic correlation c[tau] = sum_n a[n+tau] * conj(b[n]) by
    per-lag summation; zero lag lands at index len(a) - 1."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    assert a.size == b.size
    s = a.size
    out = np.empty(2 * s - 1, dtype=np.complex128)
    for tau in range(-(s - 1), s):
        acc = 0.0 + 0.0j
        for n in range(s):
            if 0 <= n + tau < s:
                acc += a[n + tau] * np.conj(b[n])
        out[tau + s - 1] = acc
    return out


def xcorr_direct_fast(a, b):
    """Same quantity as xcorr_direct via per-lag vector dots (still O(S^2)
    overall, usable up to a few thousand samples)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    s = a.size
    out = np.empty(2 * s - 1, dtype=np.complex128)
    for tau in range(-(s - 1), s):
        if tau >= 0:
            out[tau + s - 1] = np.sum(a[tau:] * np.conj(b[: s - tau]))
        else:
            out[tau + s - 1] = np.sum(a[: s + tau] * np.conj(b[-tau:]))
    return out


def ambiguity_point_direct(w, lag, doppler, fs):
    """Direct sum of w[m] * conj(w[m+lag]) * exp(j*2*pi*fd*m/fs)."""
    w = np.asarray(w, dtype=np.complex128)
    s = w.size
    acc = 0.0 + 0.0j
    for m in range(s):
        if 0 <= m + lag < s:
            acc += w[m] * np.conj(w[m + lag]) * cmath.exp(
                1j * 2 * math.pi * doppler * m / fs
            )
    return acc


def normalized_auto_direct(w):
    """Normalized autocorrelation magnitudes via the direct path."""
    c = xcorr_direct_fast(w, w)
    return np.abs(c) / np.abs(c[w.size - 1])


def normalized_cross_direct(a, b):
    ca = xcorr_direct_fast(a, a)
    cb = xcorr_direct_fast(b, b)
    c = xcorr_direct_fast(a, b)
    return np.abs(c) / math.sqrt(abs(ca[a.size - 1]) * abs(cb[b.size - 1]))


def mainlobe_direct(values, zero_lag, fs, bandwidth):
    """First-local-minimum mainlobe scan, independently re-stated: walk right
    from zero lag until values stop decreasing; resolution-cell fallback."""
    search = math.ceil(2 * fs / bandwidth)
    width = None
    for off in range(1, min(search, values.size - 1 - zero_lag) + 1):
        i = zero_lag + off
        if i + 1 < values.size and values[i] <= values[i - 1] and values[i] <= values[i + 1]:
            width = off - 1
            break
    if width is None:
        width = math.ceil(fs / bandwidth)
    lo = max(0, zero_lag - width)
    hi = min(values.size - 1, zero_lag + width)
    return lo, hi


def pslr_db_direct(values, lo, hi, zero_lag):
    side = np.concatenate([values[:lo], values[hi + 1 :]])
    main = values[lo : hi + 1].max()
    if side.size == 0 or side.max() == 0:
        return -math.inf
    return 20.0 * math.log10(side.max() / main)


def islr_db_direct(auto_values, cross_values_list, lo, hi):
    side = np.concatenate([auto_values[:lo], auto_values[hi + 1 :]]).sum()
    for cv in cross_values_list:
        side += cv.sum()
    main = auto_values[lo : hi + 1].sum()
    if side == 0:
        return -math.inf
    return 20.0 * math.log10(side / main)


def cost_direct(waveform_samples, fs, bandwidth, lam, worst_case=False):
    """Chain the direct-summation oracles into the combined cost."""
    n_wave = len(waveform_samples)
    autos = [normalized_auto_direct(w) for w in waveform_samples]
    zero_lag = waveform_samples[0].size - 1
    lobes = [mainlobe_direct(a, zero_lag, fs, bandwidth) for a in autos]
    crosses = {}
    for p in range(n_wave):
        for q in range(n_wave):
            if p < q:
                crosses[(p, q)] = normalized_cross_direct(
                    waveform_samples[p], waveform_samples[q]
                )
    pick = max if worst_case else min
    total = 0.0
    for p in range(n_wave):
        lo, hi = lobes[p]
        total += pslr_db_direct(autos[p], lo, hi, zero_lag)
        cross_db = [
            20.0 * math.log10(crosses[(min(p, q), max(p, q))].max())
            for q in range(n_wave)
            if q != p
        ]
        if cross_db:
            total += pick(cross_db)
        cross_vecs = [
            crosses[(min(p, q), max(p, q))] for q in range(n_wave) if q != p
        ]
        total += lam * islr_db_direct(autos[p], cross_vecs, lo, hi)
    return total
