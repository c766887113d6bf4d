import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from audioscope import audio_io, edits
from audioscope.errors import (EditError, FadeTooLong, InvalidRange,
                               OverlapTooLong, RateMismatch, UnknownEditOp)


def random_clip(n, seed=0, rate=16000):
    rng = np.random.default_rng(seed)
    return audio_io.clip_from_samples(rng.uniform(-1, 1, n), rate)


clips = st.builds(random_clip,
                  st.integers(64, 4000),
                  st.integers(0, 2 ** 31),
                  st.sampled_from([8000, 16000, 22050]))


class TestSlice:
    def test_full_range_identity(self):
        clip = random_clip(1600)
        out = edits.slice_clip(clip, 0.0, clip.duration_ms)
        np.testing.assert_array_equal(out.samples, clip.samples)

    def test_length_arithmetic(self):
        clip = random_clip(16000)
        out = edits.slice_clip(clip, 250.0, 750.0)
        assert len(out) == 8000

    def test_reversed_range_rejected(self):
        with pytest.raises(InvalidRange):
            edits.slice_clip(random_clip(16000), 500.0, 400.0)

    def test_out_of_bounds_rejected(self):
        clip = random_clip(1600)  # 100 ms
        with pytest.raises(InvalidRange):
            edits.slice_clip(clip, 0.0, 150.0)


class TestCrossFade:
    def test_zero_overlap_is_concatenation(self):
        a, b = random_clip(500, 1), random_clip(700, 2)
        out = edits.cross_fade(a, b, 0.0)
        assert len(out) == 1200
        np.testing.assert_array_equal(out.samples[:500], a.samples)
        np.testing.assert_array_equal(out.samples[500:], b.samples)

    def test_constant_signal_stays_flat(self):
        const = audio_io.clip_from_samples(np.full(1600, 0.5), 16000)
        out = edits.cross_fade(const, const, 50.0)
        np.testing.assert_allclose(out.samples, 0.5, atol=1e-6)

    def test_matches_loop_oracle(self):
        a, b = random_clip(3200, 3), random_clip(3200, 4)
        overlap_ms = 100.0
        out = edits.cross_fade(a, b, overlap_ms)
        # sample-by-sample oracle
        ov = round(overlap_ms * 16 )
        expect = np.zeros(len(a) + len(b) - ov)
        expect[:len(a)] = a.samples
        for i in range(ov):
            pos = len(a) - ov + i
            expect[pos] = (a.samples[pos] * (1 - i / ov)
                           + b.samples[i] * (i / ov))
        expect[len(a):] = b.samples[ov:]
        assert len(out) == len(expect)
        np.testing.assert_allclose(out.samples, np.clip(expect, -1, 1),
                                   atol=1e-6)

    def test_rate_mismatch(self):
        with pytest.raises(RateMismatch):
            edits.cross_fade(random_clip(100, rate=8000),
                             random_clip(100, rate=16000), 0.0)

    def test_overlap_too_long(self):
        with pytest.raises(OverlapTooLong):
            edits.cross_fade(random_clip(100), random_clip(100), 100.0)


class TestLoudness:
    def test_zero_gain_identity(self):
        clip = random_clip(999)
        out = edits.change_loudness(clip, 0.0)
        np.testing.assert_allclose(out.samples, clip.samples, atol=1e-7)

    def test_six_db_is_factor_two(self):
        clip = audio_io.clip_from_samples(np.full(1000, 0.25), 16000)
        out = edits.change_loudness(clip, 6.0206)
        np.testing.assert_allclose(out.samples[:500], 0.5, atol=1e-4)
        np.testing.assert_allclose(out.samples[500:], 0.125, atol=1e-4)

    def test_clamps_at_one(self):
        clip = audio_io.clip_from_samples(np.full(1000, 0.8), 16000)
        out = edits.change_loudness(clip, 6.0)
        # oracle: 0.8 * 10^(6/20) = 1.596 -> clamped
        assert np.all(out.samples[:500] == 1.0)
        np.testing.assert_allclose(out.samples[500:],
                                   0.8 / 10 ** (6 / 20), atol=1e-6)

    def test_odd_length_split_point(self):
        clip = audio_io.clip_from_samples(np.full(7, 0.1), 16000)
        out = edits.change_loudness(clip, 20.0)  # x10 / /10
        np.testing.assert_allclose(out.samples[:3], 1.0, atol=1e-6)
        np.testing.assert_allclose(out.samples[3:], 0.01, atol=1e-6)


class TestRepeat:
    def test_identity_at_one(self):
        clip = random_clip(123)
        np.testing.assert_array_equal(edits.repeat(clip, 1).samples,
                                      clip.samples)

    def test_doubles(self):
        clip = random_clip(16000)
        out = edits.repeat(clip, 2)
        assert len(out) == 32000
        np.testing.assert_array_equal(out.samples[16000:], out.samples[:16000])

    def test_composes_multiplicatively(self):
        clip = random_clip(50)
        a = edits.repeat(edits.repeat(clip, 2), 2)
        b = edits.repeat(clip, 4)
        np.testing.assert_array_equal(a.samples, b.samples)

    def test_zero_rejected(self):
        with pytest.raises(EditError):
            edits.repeat(random_clip(10), 0)


class TestInvert:
    def test_reverses(self):
        clip = audio_io.clip_from_samples([0.1, 0.2, 0.3], 16000)
        np.testing.assert_allclose(edits.invert(clip).samples,
                                   [0.3, 0.2, 0.1], atol=1e-7)

    @settings(max_examples=20, deadline=None)
    @given(clips)
    def test_involution(self, clip):
        out = edits.invert(edits.invert(clip))
        np.testing.assert_array_equal(out.samples, clip.samples)

    def test_palindrome_unchanged(self):
        clip = audio_io.clip_from_samples([0.1, 0.5, 0.1], 16000)
        np.testing.assert_array_equal(edits.invert(clip).samples, clip.samples)


class TestFade:
    def test_zero_fade_identity(self):
        clip = random_clip(500)
        assert edits.fade(clip, 0.0) is clip

    def test_gain_profile_matches_loop_oracle(self):
        clip = audio_io.clip_from_samples(np.ones(16), 16000)
        out = edits.fade(clip, 0.25)  # 4 samples at 16 kHz
        expect = [0, .25, .5, .75, 1, 1, 1, 1, 1, 1, 1, 1, 1, .75, .5, .25]
        np.testing.assert_allclose(out.samples, expect, atol=1e-6)

    def test_endpoints_attenuated(self):
        clip = audio_io.clip_from_samples(np.ones(16000), 16000)
        fade_len = 800  # 50 ms
        out = edits.fade(clip, 50.0)
        assert out.samples[0] == 0.0
        assert abs(out.samples[-1]) <= 1.0 / fade_len + 1e-6
        assert abs(out.samples[-1]) < 0.01

    def test_too_long_rejected(self):
        with pytest.raises(FadeTooLong):
            edits.fade(random_clip(100), 10.0)  # 160 > 100/2

    def test_invert_commutes_within_one_ramp_step(self):
        # ramps are endpoint-pinned (first sample 0), so the mirrored
        # profile differs by exactly one ramp step
        clip = random_clip(2000, seed=9)
        fade_ms = 10.0
        fade_len = 160
        a = edits.fade(edits.invert(clip), fade_ms)
        b = edits.invert(edits.fade(clip, fade_ms))
        assert np.max(np.abs(a.samples - b.samples)) <= 1.0 / fade_len + 1e-6


class TestApply:
    def test_empty_is_identity(self):
        clip = random_clip(100)
        out = edits.apply(clip, [])
        np.testing.assert_array_equal(out.samples, clip.samples)

    def test_double_invert_identity(self):
        clip = random_clip(100)
        ops = [edits.EditOp("invert"), edits.EditOp("invert")]
        np.testing.assert_array_equal(edits.apply(clip, ops).samples,
                                      clip.samples)

    def test_repeat_then_slice_is_identity(self):
        clip = random_clip(16000)
        ops = [edits.EditOp("repeat", {"count": 2}),
               edits.EditOp("slice", {"start_ms": 0.0, "end_ms": 1000.0})]
        np.testing.assert_array_equal(edits.apply(clip, ops).samples,
                                      clip.samples)

    def test_failure_carries_op_index(self):
        clip = random_clip(16000)
        ops = [edits.EditOp("invert"),
               edits.EditOp("slice", {"start_ms": 500.0, "end_ms": 400.0})]
        with pytest.raises(InvalidRange) as exc_info:
            edits.apply(clip, ops)
        assert exc_info.value.op_index == 1

    def test_missing_param_carries_op_index(self):
        clip = random_clip(16000)
        with pytest.raises(EditError) as exc_info:
            edits.apply(clip, [edits.EditOp("slice", {})])
        assert exc_info.value.op_index == 0

    def test_single_clip_cross_fade_splits_at_midpoint(self):
        clip = random_clip(2000, seed=11)
        out = edits.apply(clip, [edits.EditOp("cross_fade",
                                              {"overlap_ms": 10.0})])
        half = audio_io.AudioClip(clip.samples[:1000], 16000)
        rest = audio_io.AudioClip(clip.samples[1000:], 16000)
        expect = edits.cross_fade(half, rest, 10.0)
        np.testing.assert_array_equal(out.samples, expect.samples)

    def test_json_round_trip(self):
        op = edits.EditOp("loudness", {"gain_db": 3.5})
        back = edits.EditOp.from_json(op.to_json())
        assert back == op

    def test_unknown_kind_rejected(self):
        with pytest.raises(UnknownEditOp):
            edits.EditOp.from_json({"kind": "pitch", "params": {}})


@settings(max_examples=40, deadline=None)
@given(clips, st.sampled_from(["invert", "repeat", "loudness", "fade"]))
def test_ops_preserve_rate_and_range(clip, kind):
    params = {"repeat": {"count": 2}, "loudness": {"gain_db": 9.0},
              "fade": {"fade_ms": 0.5}, "invert": {}}[kind]
    out = edits.apply(clip, [edits.EditOp(kind, params)])
    assert out.sample_rate == clip.sample_rate
    assert np.all(out.samples <= 1.0) and np.all(out.samples >= -1.0)
