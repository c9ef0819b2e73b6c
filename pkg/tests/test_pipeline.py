"""Sequence-to-report evaluation pipeline."""

import numpy as np
import pytest

from thermoseg.dataset import SequenceStore, subtract_tail_mean
from thermoseg.enhance import normalize_illumination
from thermoseg.errors import DomainError, StoreError
from thermoseg.pipeline import (PipelineParams, evaluate_sequence,
                                evaluate_store, prepared_frames,
                                segment_prompts_on_sequence,
                                simulate_into_store)
from thermoseg.promptseg import prompts_from_ground_truth
from conftest import demo_scene


def test_prepared_frames_flattens_gain_then_subtracts_tail(demo_pair):
    seq, _ = demo_pair
    params = PipelineParams()
    got = prepared_frames(seq, params)
    want = normalize_illumination(seq.frames.astype(np.float64), 0)
    want = subtract_tail_mean(want, min(15, seq.frames.shape[2] // 4))
    assert np.array_equal(got, want)
    assert got.shape == seq.frames.shape


def test_prepared_frames_respects_flags(demo_pair):
    seq, _ = demo_pair
    raw = prepared_frames(seq, PipelineParams(normalize_gain=False,
                                              corrected=False))
    assert np.array_equal(raw, seq.frames.astype(np.float64))
    only_tail = prepared_frames(seq, PipelineParams(normalize_gain=False))
    assert np.array_equal(
        only_tail, subtract_tail_mean(seq.frames.astype(np.float64), 15))


def test_demo_sequence_scores_well(demo_pair):
    seq, gt = demo_pair
    score = evaluate_sequence(seq, gt)
    assert score.image_id == seq.id
    assert score.recall > 0.8
    assert score.iou > 0.5
    assert score.detection is not None
    assert score.detection.matches and score.detection.missed == []


def test_per_prompt_frames_are_reported(demo_pair):
    seq, gt = demo_pair
    params = PipelineParams()
    frames = prepared_frames(seq, params)
    prompts = prompts_from_ground_truth(gt.instance_masks, params.dilation)
    result, used = segment_prompts_on_sequence(frames, prompts, params)
    assert len(used) == len(prompts) == 1
    assert 0 <= used[0] < seq.frames.shape[2]
    assert result.prompt_ids == ["gt-0"]


def test_empty_ground_truth_is_an_error(demo_pair):
    seq, gt = demo_pair
    broken = type(gt)(sequence_id=gt.sequence_id, instance_masks=[],
                      semantic_mask=np.zeros_like(gt.semantic_mask))
    with pytest.raises(DomainError, match="no defect instances"):
        evaluate_sequence(seq, broken)


def test_store_evaluation_is_thread_count_invariant(demo_store):
    report1 = evaluate_store(demo_store, demo_store.ids(), threads=1)
    report2 = evaluate_store(demo_store, demo_store.ids(), threads=2)
    assert report1.to_csv() == report2.to_csv()
    again = evaluate_store(demo_store, demo_store.ids(), threads=1)
    assert report1.to_csv() == again.to_csv()


def test_store_evaluation_requires_ground_truth(tmp_path, demo_pair):
    seq, _ = demo_pair
    store = SequenceStore(tmp_path / "bare", create=True)
    store.write(seq)   # no ground truth alongside
    with pytest.raises(StoreError, match="no ground truth"):
        evaluate_store(store, [seq.id])


def test_simulation_fans_out_into_the_store(tmp_path):
    store = SequenceStore(tmp_path / "sim", create=True)
    scenes = [demo_scene(seed=3, scene_id="sim-a"),
              demo_scene(seed=4, scene_id="sim-b")]
    ids = simulate_into_store(scenes, store, threads=2)
    assert ids == ["sim-a", "sim-b"]
    assert store.ids() == ["sim-a", "sim-b"]
    assert store.read_ground_truth("sim-a") is not None
    # Same scene, same bytes: the parallel path must not perturb results.
    solo = SequenceStore(tmp_path / "solo", create=True)
    simulate_into_store([demo_scene(seed=3, scene_id="sim-a")], solo)
    a = (store.path("sim-a") / "frames.bin").read_bytes()
    b = (solo.path("sim-a") / "frames.bin").read_bytes()
    assert a == b
