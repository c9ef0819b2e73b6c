"""Frame budget, frame selection, residual correction, resize."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermoseg.dataset import (SamplingConfig, frame_budget, prepare_stack,
                               resize_frame, resize_mask,
                               residual_heat_correct, residual_tail_mean,
                               sample_frames, subtract_tail_mean)
from thermoseg.errors import ConfigurationError, DomainError
from oracles import residual_correct_two_loop, resize_oracle

DEFAULT = SamplingConfig()


def _dyadic(rng, shape, denom=8, span=64):
    """Random floats of the form k / denom: exactly representable, and sums
    of a few hundred of them are exact in float64, so any summation order
    produces bit-identical results."""
    return rng.integers(-span, span + 1, size=shape).astype(np.float64) / denom


# -- frame budget (corpus-level count of retained frames) --------------------

def test_budget_of_the_benchmark_corpus():
    # 218 acquisitions of 180 frames, bands 15/15, stride 5.
    assert frame_budget(218, 180, DEFAULT) == 6540
    assert frame_budget(218, 180, DEFAULT) >= 6000


def test_budget_small_examples():
    assert frame_budget(1, 100, DEFAULT) == 14          # floor(70 / 5)
    assert frame_budget(2, 27, SamplingConfig(3, 4, 5)) == 8
    assert frame_budget(0, 180, DEFAULT) == 0
    assert frame_budget(3, 30, DEFAULT) == 0            # usable band empty
    assert frame_budget(7, 12, SamplingConfig(0, 0, 1)) == 84


def test_budget_rejects_bad_inputs():
    with pytest.raises(DomainError, match="shorter than the skip bands"):
        frame_budget(10, 20, DEFAULT)
    with pytest.raises(DomainError):
        frame_budget(-1, 180, DEFAULT)
    with pytest.raises(ConfigurationError):
        SamplingConfig(stride=0)
    with pytest.raises(ConfigurationError):
        SamplingConfig(skip_head=-1)
    with pytest.raises(ConfigurationError):
        SamplingConfig(resize_to=0)


# -- frame selection ----------------------------------------------------------

def test_selected_indices_for_the_benchmark_length():
    idx = sample_frames(180, DEFAULT)
    assert idx.tolist() == list(range(15, 161, 5))
    assert len(idx) == 30
    assert idx[0] == 15 and idx[-1] == 160
    assert idx[-1] < 180 - DEFAULT.skip_tail


def test_selection_identity_and_boundaries():
    assert sample_frames(6, SamplingConfig(0, 0, 1)).tolist() == [0, 1, 2, 3, 4, 5]
    assert sample_frames(31, DEFAULT).tolist() == []     # usable band of 1 < stride
    assert sample_frames(35, DEFAULT).tolist() == [15]
    assert sample_frames(30, DEFAULT).tolist() == []
    with pytest.raises(DomainError):
        sample_frames(29, DEFAULT)


@given(frames=st.integers(0, 400), head=st.integers(0, 40),
       tail=st.integers(0, 40), stride=st.integers(1, 9),
       n_seq=st.integers(0, 5))
def test_budget_counts_selected_indices(frames, head, tail, stride, n_seq):
    config = SamplingConfig(head, tail, stride)
    if frames - head - tail < 0:
        with pytest.raises(DomainError):
            sample_frames(frames, config)
        return
    idx = sample_frames(frames, config)
    assert frame_budget(n_seq, frames, config) == n_seq * len(idx)
    assert np.all(np.diff(idx) == stride)
    if len(idx):
        assert idx[0] == head
        assert idx[-1] < frames - tail


# -- residual-heat correction -------------------------------------------------

def test_residual_correction_matches_two_loop_oracle_bitwise():
    rng = np.random.default_rng(42)
    frames = _dyadic(rng, (6, 5, 60))
    got = residual_heat_correct(frames, DEFAULT)
    want = residual_correct_two_loop(frames, 15, 15)
    assert got.shape == (6, 5, 30)
    assert np.array_equal(got, want)          # exact: dyadic sums never round


def test_constant_tail_subtracts_exactly_that_constant():
    rng = np.random.default_rng(3)
    frames = _dyadic(rng, (4, 4, 50))
    c = 1.5
    frames[:, :, -15:] = c
    got = residual_heat_correct(frames, DEFAULT)
    want = frames[:, :, 15:35] - c
    assert np.array_equal(got, want)


def test_time_constant_input_corrects_to_zero():
    frames = np.broadcast_to(
        np.arange(12.0).reshape(3, 4)[:, :, None], (3, 4, 40)).copy()
    assert not residual_heat_correct(frames, DEFAULT).any()


def test_correction_is_reversible_on_the_window():
    rng = np.random.default_rng(9)
    frames = _dyadic(rng, (3, 3, 40))
    # Tail of 16 frames: the mean divides an exact sum by a power of two,
    # so correction and un-correction are both exact.
    config = SamplingConfig(skip_head=8, skip_tail=16)
    corrected = residual_heat_correct(frames, config)
    tail = residual_tail_mean(frames, 16)
    assert np.array_equal(corrected + tail[:, :, None], frames[:, :, 8:24])


def test_correction_rejects_degenerate_configs():
    frames = np.zeros((2, 2, 40))
    with pytest.raises(ConfigurationError, match="skip_tail"):
        residual_heat_correct(frames, SamplingConfig(skip_tail=0))
    with pytest.raises(DomainError, match="usable"):
        residual_heat_correct(frames, SamplingConfig(20, 20))
    with pytest.raises(DomainError):
        residual_heat_correct(np.zeros((2, 2)), DEFAULT)
    with pytest.raises(DomainError):
        subtract_tail_mean(frames, 41)
    with pytest.raises(DomainError):
        subtract_tail_mean(frames, 0)


def test_low_level_subtraction_keeps_every_frame():
    rng = np.random.default_rng(1)
    frames = _dyadic(rng, (4, 3, 20))
    out = subtract_tail_mean(frames, 4)
    assert out.shape == frames.shape
    assert np.array_equal(out[:, :, 7], frames[:, :, 7]
                          - frames[:, :, -4:].mean(axis=2))


@settings(max_examples=40)
@given(seed=st.integers(0, 2**31), frames=st.integers(31, 80),
       head=st.integers(0, 15), tail=st.integers(1, 15))
def test_corrected_tail_band_means_to_zero(seed, frames, head, tail):
    if frames <= head + tail:
        return
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(3, 3, frames))
    out = subtract_tail_mean(data, tail)
    np.testing.assert_allclose(out[:, :, -tail:].mean(axis=2), 0.0,
                               atol=1e-12)


# -- spatial resize -----------------------------------------------------------

def test_resize_identity_is_exact():
    rng = np.random.default_rng(5)
    img = rng.normal(size=(9, 7))
    out = resize_frame(img, 9, 7)
    assert np.array_equal(out, img)
    assert out is not img


def test_resize_2x2_to_3x3_frozen():
    img = np.array([[0.0, 1.0], [2.0, 3.0]])
    # Half-pixel centers of a 3-grid over a 2-grid sample at 0, 0.5, 1
    # per axis (edges clamp), and this image is affine: value = 2 r + c.
    want = np.array([[0.0, 0.5, 1.0], [1.0, 1.5, 2.0], [2.0, 2.5, 3.0]])
    assert np.array_equal(resize_frame(img, 3, 3), want)


def test_resize_constant_field_stays_constant():
    img = np.full((5, 8), 2.375)
    out = resize_frame(img, 13, 3)
    np.testing.assert_allclose(out, 2.375, rtol=4 * np.finfo(float).eps)


def test_resize_matches_pointwise_oracle():
    rng = np.random.default_rng(11)
    for rows, cols, out_r, out_c in [(4, 6, 9, 5), (12, 12, 5, 17),
                                     (2, 2, 7, 1), (10, 3, 3, 10)]:
        img = rng.normal(size=(rows, cols))
        got = resize_frame(img, out_r, out_c)
        want = resize_oracle(img, out_r, out_c)
        assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(img))


@settings(max_examples=30)
@given(seed=st.integers(0, 2**31), rows=st.integers(1, 8),
       cols=st.integers(1, 8), out_r=st.integers(1, 12),
       out_c=st.integers(1, 12))
def test_resize_respects_value_bounds(seed, rows, cols, out_r, out_c):
    rng = np.random.default_rng(seed)
    img = rng.normal(size=(rows, cols))
    out = resize_frame(img, out_r, out_c)
    assert out.shape == (out_r, out_c)
    assert out.min() >= img.min() - 1e-12
    assert out.max() <= img.max() + 1e-12


def test_resize_rejects_bad_shapes():
    with pytest.raises(DomainError):
        resize_frame(np.zeros((2, 2, 2)), 4, 4)
    with pytest.raises(DomainError):
        resize_frame(np.zeros((2, 2)), 0, 4)


def test_mask_resize_thresholds_at_half():
    mask = np.zeros((4, 4), dtype=bool)
    mask[1:3, 1:3] = True
    up = resize_mask(mask, 8, 8)
    assert up.dtype == np.bool_
    assert up[3:5, 3:5].all()          # interior of the block survives
    assert not up[0, :].any() and not up[:, 0].any()
    assert resize_mask(np.ones((3, 3), dtype=bool), 5, 7).all()
    assert not resize_mask(np.zeros((3, 3), dtype=bool), 5, 7).any()


# -- end-to-end stack preparation --------------------------------------------

def test_prepare_stack_composes_the_three_stages():
    rng = np.random.default_rng(21)
    frames = rng.normal(size=(6, 6, 60))
    config = SamplingConfig(skip_head=4, skip_tail=6, stride=3, resize_to=9)
    got = prepare_stack(frames, config)
    corrected = subtract_tail_mean(frames, 6)
    idx = sample_frames(60, config)
    want = np.stack([resize_frame(corrected[:, :, k], 9, 9) for k in idx],
                    axis=2)
    assert got.shape == (9, 9, len(idx))
    assert np.array_equal(got, want)


def test_prepare_stack_without_tail_band_skips_correction():
    rng = np.random.default_rng(22)
    frames = rng.normal(size=(4, 4, 12))
    config = SamplingConfig(skip_head=2, skip_tail=0, stride=2)
    got = prepare_stack(frames, config)
    assert np.array_equal(got, frames[:, :, sample_frames(12, config)])
