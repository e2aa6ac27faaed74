import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfcw.waveform import (
    CodingSequence,
    WaveformKind,
    WaveformParams,
    derive_params,
    random_coding_set,
    read_sequence_file,
    samples_per_subpulse,
    synthesize,
    write_sequence_file,
)
from oracles import synth_direct


class TestDeriveParams:
    @pytest.mark.parametrize(
        "n,bt,b_over_df",
        [(8, 18, 6), (16, 36, 12), (32, 72, 24), (64, 144, 48), (128, 288, 96)],
    )
    def test_family_table_rows(self, n, bt, b_over_df):
        p = derive_params(n, 3, WaveformKind.LFM, 2.0)
        assert p.lfm_bandwidth * p.subpulse_duration == bt
        assert p.lfm_bandwidth / p.freq_step == b_over_df
        assert p.subpulse_duration * p.freq_step == 3

    def test_extrapolated_small_row(self):
        p = derive_params(4, 2, WaveformKind.LFM, 1.0)
        assert p.lfm_bandwidth * p.subpulse_duration == 9
        assert p.lfm_bandwidth / p.freq_step == 3
        assert p.subpulse_duration * p.freq_step == 3

    @given(
        n=st.integers(min_value=4, max_value=4096),
        oversample=st.floats(min_value=1.0, max_value=8.0),
        kind=st.sampled_from(list(WaveformKind)),
    )
    def test_ratio_invariants(self, n, oversample, kind):
        p = derive_params(n, 1, kind, oversample)
        assert abs(p.subpulse_duration * p.freq_step - 3) < 1e-12
        assert abs(p.lfm_bandwidth * p.subpulse_duration - 2.25 * n) < 1e-12 * n
        assert abs(p.slope * p.subpulse_duration - p.lfm_bandwidth) < 1e-12 * n

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            derive_params(3, 1, WaveformKind.FH)

    def test_rejects_undersampling(self):
        with pytest.raises(ValueError):
            derive_params(8, 1, WaveformKind.FH, oversample=0.5)

    def test_rejects_too_many_waveforms(self):
        with pytest.raises(ValueError):
            derive_params(8, 9, WaveformKind.FH)


class TestCodingSequence:
    def test_rejects_repeats(self):
        with pytest.raises(ValueError, match="not a permutation"):
            CodingSequence(np.array([0, 1, 1, 3]))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="not a permutation"):
            CodingSequence(np.array([1, 2, 3, 4]))

    def test_accepts_any_order(self):
        seq = CodingSequence(np.array([2, 0, 3, 1]))
        assert len(seq) == 4


class TestRandomCodingSet:
    def test_every_member_is_a_permutation(self):
        seqs = random_coding_set(4, 2, rng_seed=7)
        assert len(seqs) == 2
        for seq in seqs:
            assert sorted(seq.codes.tolist()) == [0, 1, 2, 3]

    def test_single_element(self):
        seqs = random_coding_set(1, 1, rng_seed=123)
        assert [s.codes.tolist() for s in seqs] == [[0]]

    def test_deterministic_for_fixed_seed(self):
        a = random_coding_set(16, 3, rng_seed=42)
        b = random_coding_set(16, 3, rng_seed=42)
        for sa, sb in zip(a, b):
            assert np.array_equal(sa.codes, sb.codes)

    def test_rejects_more_waveforms_than_codes(self):
        with pytest.raises(ValueError):
            random_coding_set(2, 3, rng_seed=0)


def _manual_params(n, kind, oversample=2.0):
    # Family ratios applied below the derive_params N >= 4 floor.
    return WaveformParams(
        n_subpulses=n,
        n_waveforms=1,
        subpulse_duration=1.0,
        freq_step=3.0,
        lfm_bandwidth=2.25 * n,
        slope=2.25 * n,
        kind=kind,
        oversample=oversample,
    )


class TestSynthesize:
    def test_single_zero_frequency_subpulse_is_constant_one(self):
        p = _manual_params(1, WaveformKind.FH)
        w = synthesize(CodingSequence(np.array([0])), p)
        assert np.allclose(w.samples, 1.0 + 0.0j, atol=1e-15)

    def test_fh_second_subpulse_uses_global_time(self):
        p = _manual_params(2, WaveformKind.FH)
        w = synthesize(CodingSequence(np.array([0, 1])), p)
        m = samples_per_subpulse(p)
        t = p.subpulse_duration + (np.arange(m) + 0.5) / w.sample_rate
        expected = np.exp(1j * 2 * np.pi * p.freq_step * t)
        np.testing.assert_allclose(w.samples[m:], expected, atol=1e-12)
        assert np.all(np.abs(np.abs(w.samples) - 1) < 1e-12)

    @pytest.mark.parametrize("kind", list(WaveformKind))
    def test_matches_direct_evaluation(self, kind):
        p = derive_params(4, 1, kind, 2.0)
        seq = CodingSequence(np.array([2, 0, 3, 1]))
        w = synthesize(seq, p)
        ref = synth_direct(seq.codes, p)
        assert np.max(np.abs(w.samples - ref)) < 1e-12

    @pytest.mark.parametrize("kind", [WaveformKind.LFM, WaveformKind.MODIFIED_LFM])
    def test_global_chirp_switch_matches_direct_evaluation(self, kind):
        p = derive_params(4, 1, kind, 2.0)
        seq = CodingSequence(np.array([1, 3, 0, 2]))
        w = synthesize(seq, p, global_chirp=True)
        ref = synth_direct(seq.codes, p, global_chirp=True)
        assert np.max(np.abs(w.samples - ref)) < 1e-9
        assert not np.allclose(w.samples, synthesize(seq, p).samples)

    @given(
        n=st.integers(min_value=1, max_value=12),
        kind=st.sampled_from(list(WaveformKind)),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    @settings(max_examples=40, deadline=None)
    def test_unit_modulus(self, n, kind, seed):
        p = _manual_params(n, kind, oversample=1.0)
        seq = CodingSequence(np.random.default_rng(seed).permutation(n))
        w = synthesize(seq, p)
        assert len(w) == samples_per_subpulse(p) * n
        assert np.max(np.abs(np.abs(w.samples) - 1)) < 1e-12

    def test_deterministic(self):
        p = derive_params(8, 1, WaveformKind.MODIFIED_LFM)
        seq = random_coding_set(8, 1, rng_seed=5)[0]
        a = synthesize(seq, p)
        b = synthesize(seq, p)
        assert a.samples.tobytes() == b.samples.tobytes()

    def test_rejects_length_mismatch(self):
        p = derive_params(8, 1, WaveformKind.FH)
        with pytest.raises(ValueError, match="does not match"):
            synthesize(CodingSequence(np.array([0, 1, 2])), p)


class TestSequenceFile:
    def test_round_trip(self, tmp_path):
        seqs = random_coding_set(16, 3, rng_seed=11)
        path = tmp_path / "codes.txt"
        write_sequence_file(path, seqs, header="set of 3\nsecond line")
        back = read_sequence_file(path)
        assert len(back) == 3
        for a, b in zip(seqs, back):
            assert np.array_equal(a.codes, b.codes)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "codes.txt"
        path.write_text("# comment\n\n1 0 2 3\n# another\n3 2 1 0\n")
        back = read_sequence_file(path)
        assert [s.codes.tolist() for s in back] == [[1, 0, 2, 3], [3, 2, 1, 0]]

    def test_rejects_repeated_index(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 1 1 3\n")
        with pytest.raises(ValueError, match="not a permutation"):
            read_sequence_file(path)

    def test_rejects_inconsistent_lengths(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 1 2 3\n0 1 2\n")
        with pytest.raises(ValueError, match="inconsistent"):
            read_sequence_file(path)

    def test_rejects_non_integer(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 1 2 x\n")
        with pytest.raises(ValueError, match="non-integer"):
            read_sequence_file(path)

    def test_rejects_empty(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# nothing here\n")
        with pytest.raises(ValueError, match="no sequences"):
            read_sequence_file(path)
