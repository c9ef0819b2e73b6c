"""On-disk store: round trips, formats, ground truth, failure modes."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from thermoseg.dataset import (GroundTruth, SequenceStore, ThermalSequence,
                               read_pgm, write_pgm)
from thermoseg.errors import DomainError, StoreError


def _seq(seq_id="seq-a", rows=5, cols=7, frames=4, seed=0, **kwargs):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(rows, cols, frames)).astype(np.float32)
    return ThermalSequence(id=seq_id, frames=data, frame_rate=12.5, **kwargs)


def test_sequence_validation():
    with pytest.raises(DomainError):
        ThermalSequence(id="x", frames=np.zeros((4, 4)), frame_rate=1.0)
    bad = np.zeros((4, 4, 4)); bad[0, 0, 0] = np.nan
    with pytest.raises(DomainError):
        ThermalSequence(id="x", frames=bad, frame_rate=1.0)
    with pytest.raises(DomainError):
        ThermalSequence(id="bad id", frames=np.zeros((4, 4, 4)), frame_rate=1.0)
    with pytest.raises(DomainError):
        ThermalSequence(id="-leading", frames=np.zeros((4, 4, 4)), frame_rate=1.0)


def test_ground_truth_union_invariant():
    inst = [np.zeros((4, 4), dtype=bool), np.zeros((4, 4), dtype=bool)]
    inst[0][0, 0] = True
    inst[1][3, 3] = True
    sem = inst[0] | inst[1]
    GroundTruth(sequence_id="x", instance_masks=inst, semantic_mask=sem)
    sem_bad = sem.copy(); sem_bad[1, 1] = True
    with pytest.raises(DomainError):
        GroundTruth(sequence_id="x", instance_masks=inst, semantic_mask=sem_bad)
    with pytest.raises(DomainError):
        GroundTruth(sequence_id="x", instance_masks=[inst[0][:2, :2]],
                    semantic_mask=sem)


def test_pgm_round_trip(tmp_path):
    mask = np.zeros((3, 5), dtype=bool)
    mask[1, 2] = mask[0, 4] = True
    p = tmp_path / "m.pgm"
    write_pgm(p, mask)
    assert np.array_equal(read_pgm(p), mask)


def test_pgm_bytes_are_the_documented_format(tmp_path):
    mask = np.array([[0, 1], [1, 0], [1, 1]], dtype=bool)  # 3 rows, 2 cols
    p = tmp_path / "m.pgm"
    write_pgm(p, mask)
    raw = p.read_bytes()
    assert raw == b"P5\n2 3\n255\n" + bytes([0, 255, 255, 0, 255, 255])


def test_pgm_reader_tolerates_comments(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_bytes(b"P5\n# a comment\n2 2\n255\n" + bytes([0, 255, 0, 255]))
    mask = read_pgm(p)
    assert np.array_equal(mask, np.array([[False, True], [False, True]]))


def test_pgm_reader_rejects_other_formats(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
    with pytest.raises(StoreError):
        read_pgm(p)
    p.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
    with pytest.raises(StoreError):
        read_pgm(p)


def test_store_round_trip_is_bit_exact(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    seq = _seq(system_tag="OPT", sample_tag="curved", ambient=300.5)
    store.write(seq)
    back = store.read("seq-a")
    assert np.array_equal(back.frames, seq.frames)
    assert back.frames.dtype == np.float32
    assert (back.id, back.frame_rate, back.source) == ("seq-a", 12.5, "simulated")
    assert (back.system_tag, back.sample_tag, back.ambient) == ("OPT", "curved", 300.5)


@settings(max_examples=20, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(rows=st.integers(1, 6), cols=st.integers(1, 6), frames=st.integers(1, 5),
       seed=st.integers(0, 2**31))
def test_store_round_trip_property(tmp_path, rows, cols, frames, seed):
    store = SequenceStore(tmp_path / f"s{seed}-{rows}-{cols}-{frames}",
                          create=True)
    seq = _seq(rows=rows, cols=cols, frames=frames, seed=seed)
    store.write(seq)
    assert np.array_equal(store.read("seq-a").frames, seq.frames)


def test_frames_bin_layout_is_frame_major_little_endian(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    seq = _seq(rows=2, cols=3, frames=2)
    store.write(seq)
    raw = np.frombuffer((store.path("seq-a") / "frames.bin").read_bytes(),
                        dtype="<f4")
    # First 6 values are frame 0 in row-major order.
    assert np.array_equal(raw[:6], seq.frames[:, :, 0].ravel())
    assert np.array_equal(raw[6:], seq.frames[:, :, 1].ravel())


def test_meta_is_readable_key_value_text(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    store.write(_seq())
    meta = (store.path("seq-a") / "meta").read_text(encoding="utf-8")
    assert "id = seq-a" in meta
    assert "m = 5" in meta and "n = 7" in meta and "f = 4" in meta
    assert "dtype = f32" in meta and "endianness = little" in meta
    parsed = store.read_meta("seq-a")
    assert parsed["frame_rate"] == "12.5"


def test_ground_truth_round_trip(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    seq = _seq()
    inst = [np.zeros((5, 7), dtype=bool), np.zeros((5, 7), dtype=bool)]
    inst[0][1, 1] = True
    inst[1][3, 4] = True
    ann = {"alice": inst[0].copy()}
    gt = GroundTruth(sequence_id="seq-a", instance_masks=inst,
                     semantic_mask=inst[0] | inst[1], annotator_masks=ann)
    store.write(seq, gt)
    back = store.read_ground_truth("seq-a")
    assert back is not None
    assert len(back.instance_masks) == 2
    assert np.array_equal(back.semantic_mask, gt.semantic_mask)
    assert np.array_equal(back.instance_masks[0], inst[0])
    assert set(back.annotator_masks) == {"alice"}
    assert store.read_ground_truth("seq-a").sequence_id == "seq-a"


def test_missing_ground_truth_is_none(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    store.write(_seq())
    assert store.read_ground_truth("seq-a") is None


def test_ids_sorted_and_membership(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    for name in ("zeta", "alpha", "mid"):
        store.write(_seq(seq_id=name))
    assert store.ids() == ["alpha", "mid", "zeta"]
    assert "alpha" in store and "missing" not in store


def test_duplicate_write_needs_overwrite(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    store.write(_seq())
    with pytest.raises(StoreError, match="already exists"):
        store.write(_seq())
    store.write(_seq(seed=1), overwrite=True)
    assert np.array_equal(store.read("seq-a").frames, _seq(seed=1).frames)


def test_read_failures(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    with pytest.raises(StoreError, match="not found"):
        store.read("ghost")
    with pytest.raises(StoreError):
        store.read("../escape")
    store.write(_seq())
    blob = store.path("seq-a") / "frames.bin"
    blob.write_bytes(blob.read_bytes()[:-8])  # truncate
    with pytest.raises(StoreError, match="frames.bin"):
        store.read("seq-a")


def test_missing_root_rejected(tmp_path):
    with pytest.raises(StoreError, match="does not exist"):
        SequenceStore(tmp_path / "nope")


def test_delete_removes_everything(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    gt = GroundTruth(sequence_id="seq-a",
                     instance_masks=[np.ones((5, 7), dtype=bool)],
                     semantic_mask=np.ones((5, 7), dtype=bool))
    store.write(_seq(), gt)
    (store.path("seq-a") / "results" / "r1").mkdir(parents=True)
    (store.path("seq-a") / "results" / "r1" / "x.txt").write_text("x")
    store.delete("seq-a")
    assert store.ids() == []
    store.delete("seq-a")  # idempotent


def test_stack_round_trip(tmp_path):
    store = SequenceStore(tmp_path / "s", create=True)
    images = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
    store.write_stack("seq-a-pca", images, labels=[0, 1, 2, 3], method="pca",
                      extra={"origin": "seq-a"})
    meta = store.read_meta("seq-a-pca")
    assert meta["source"] == "derived"
    assert meta["method"] == "pca"
    assert meta["origin"] == "seq-a"
    assert meta["labels"].split() == ["0.0", "1.0", "2.0", "3.0"]
    back = store.read("seq-a-pca")
    assert np.array_equal(back.frames, images)
