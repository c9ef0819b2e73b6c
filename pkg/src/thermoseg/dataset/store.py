"""On-disk sequence store.

Layout: one directory per sequence under the store root,

    <store>/<id>/meta        UTF-8 `key = value` lines
    <store>/<id>/frames.bin  frame-major, row-major float32 little-endian
    <store>/<id>/gt.pgm      semantic ground-truth mask (binary P5, 255 = defect)
    <store>/<id>/gt.inst<k>.pgm   per-defect instance masks
    <store>/<id>/annotator-<a>.pgm  optional per-annotator masks

Reads are safe from concurrent threads/processes; writes to one store
should come from a single writer (directory creation is the commit point).
"""

from __future__ import annotations

import os
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DomainError, StoreError

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


@dataclass
class ThermalSequence:
    """One volumetric acquisition: rows x cols x frames temperature values.

    Values are kelvin rise above `ambient` for simulated data; imported
    data may carry absolute kelvin (source records which).
    """

    id: str
    frames: np.ndarray
    frame_rate: float
    source: str = "simulated"
    system_tag: str = "other"
    sample_tag: str = "flat"
    ambient: float = 293.15

    def __post_init__(self) -> None:
        f = np.asarray(self.frames)
        if f.ndim != 3 or min(f.shape) < 1:
            raise DomainError("frames must be rows x cols x frames with all dims >= 1")
        if not np.all(np.isfinite(f)):
            raise DomainError("frames contain non-finite values")
        if not _ID_RE.match(self.id):
            raise DomainError(f"invalid sequence id {self.id!r}")
        self.frames = f

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.frames.shape  # type: ignore[return-value]


@dataclass
class GroundTruth:
    """Per-defect instance masks plus their fused semantic mask."""

    sequence_id: str
    instance_masks: list[np.ndarray]
    semantic_mask: np.ndarray
    annotator_masks: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        sem = np.asarray(self.semantic_mask, dtype=bool)
        union = np.zeros_like(sem)
        for m in self.instance_masks:
            if m.shape != sem.shape:
                raise DomainError("instance mask shape differs from semantic mask")
            union |= m.astype(bool)
        if not np.array_equal(union, sem):
            raise DomainError("semantic mask must equal the union of instance masks")
        self.semantic_mask = sem


def write_pgm(path: str | Path, mask: np.ndarray) -> None:
    """Write a binary mask as 8-bit P5 PGM (0 background, 255 defect)."""
    m = np.asarray(mask)
    if m.ndim != 2:
        raise DomainError("mask must be 2-D")
    data = np.where(m.astype(bool), 255, 0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (m.shape[1], m.shape[0]))
        fh.write(data.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    """Read an 8-bit P5 PGM into a boolean mask (nonzero = defect)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise StoreError(f"{path}: not a P5 PGM")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise StoreError(f"{path}: 16-bit PGM not supported")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(raw, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width) > 0


def _write_meta(path: Path, entries: dict[str, object]) -> None:
    lines = [f"{k} = {v}" for k, v in entries.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_meta(path: Path) -> dict[str, str]:
    entries: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise StoreError(f"{path}: malformed meta line {line!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


class SequenceStore:
    """Directory of sequences with ground truth, enhanced stacks, results."""

    def __init__(self, root: str | Path, create: bool = False):
        self.root = Path(root)
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
        if not self.root.is_dir():
            raise StoreError(f"store root {self.root} does not exist")
        self._write_lock = threading.Lock()

    def ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir()
                      if p.is_dir() and (p / "meta").is_file())

    def path(self, seq_id: str) -> Path:
        if not _ID_RE.match(seq_id):
            raise StoreError(f"invalid sequence id {seq_id!r}")
        return self.root / seq_id

    def __contains__(self, seq_id: str) -> bool:
        return (self.root / seq_id / "meta").is_file()

    def write(self, seq: ThermalSequence, gt: GroundTruth | None = None,
              overwrite: bool = False) -> Path:
        with self._write_lock:
            d = self.path(seq.id)
            if d.exists() and not overwrite:
                raise StoreError(f"sequence {seq.id!r} already exists in {self.root}")
            d.mkdir(parents=True, exist_ok=True)
            rows, cols, nframes = seq.frames.shape
            _write_meta(d / "meta", {
                "id": seq.id,
                "m": rows,
                "n": cols,
                "f": nframes,
                "frame_rate": repr(float(seq.frame_rate)),
                "system_tag": seq.system_tag,
                "sample_tag": seq.sample_tag,
                "ambient": repr(float(seq.ambient)),
                "source": seq.source,
                "dtype": "f32",
                "endianness": "little",
            })
            data = np.ascontiguousarray(
                np.moveaxis(seq.frames.astype("<f4"), 2, 0))  # frame-major
            (d / "frames.bin").write_bytes(data.tobytes())
            if gt is not None:
                write_pgm(d / "gt.pgm", gt.semantic_mask)
                for k, mask in enumerate(gt.instance_masks):
                    write_pgm(d / f"gt.inst{k}.pgm", mask)
                for name, mask in gt.annotator_masks.items():
                    write_pgm(d / f"annotator-{name}.pgm", mask)
            return d

    def read(self, seq_id: str) -> ThermalSequence:
        d = self.path(seq_id)
        if not (d / "meta").is_file():
            raise StoreError(f"sequence {seq_id!r} not found in {self.root}")
        meta = _read_meta(d / "meta")
        rows, cols, nframes = int(meta["m"]), int(meta["n"]), int(meta["f"])
        if meta.get("dtype", "f32") != "f32" or meta.get("endianness", "little") != "little":
            raise StoreError(f"{seq_id}: unsupported frame encoding")
        raw = np.fromfile(d / "frames.bin", dtype="<f4")
        if raw.size != rows * cols * nframes:
            raise StoreError(f"{seq_id}: frames.bin holds {raw.size} values, "
                             f"expected {rows * cols * nframes}")
        frames = np.moveaxis(raw.reshape(nframes, rows, cols), 0, 2)
        return ThermalSequence(
            id=meta["id"],
            frames=frames,
            frame_rate=float(meta["frame_rate"]),
            source=meta.get("source", "imported"),
            system_tag=meta.get("system_tag", "other"),
            sample_tag=meta.get("sample_tag", "flat"),
            ambient=float(meta.get("ambient", "293.15")),
        )

    def read_meta(self, seq_id: str) -> dict[str, str]:
        d = self.path(seq_id)
        if not (d / "meta").is_file():
            raise StoreError(f"sequence {seq_id!r} not found in {self.root}")
        return _read_meta(d / "meta")

    def read_ground_truth(self, seq_id: str) -> GroundTruth | None:
        d = self.path(seq_id)
        if not (d / "gt.pgm").is_file():
            return None
        semantic = read_pgm(d / "gt.pgm")
        instances = []
        for k in range(10_000):
            p = d / f"gt.inst{k}.pgm"
            if not p.is_file():
                break
            instances.append(read_pgm(p))
        annot = {}
        for p in sorted(d.glob("annotator-*.pgm")):
            annot[p.stem.removeprefix("annotator-")] = read_pgm(p)
        return GroundTruth(sequence_id=seq_id, instance_masks=instances,
                           semantic_mask=semantic, annotator_masks=annot)

    def write_stack(self, stack_id: str, images: np.ndarray, labels: list,
                    method: str, extra: dict[str, object] | None = None,
                    overwrite: bool = False) -> Path:
        """Persist an enhanced stack in the sequence layout (method in meta)."""
        with self._write_lock:
            d = self.path(stack_id)
            if d.exists() and not overwrite:
                raise StoreError(f"stack {stack_id!r} already exists in {self.root}")
            d.mkdir(parents=True, exist_ok=True)
            rows, cols, n = images.shape
            entries: dict[str, object] = {
                "id": stack_id, "m": rows, "n": cols, "f": n,
                "frame_rate": repr(0.0),
                "system_tag": "other", "sample_tag": "derived",
                "ambient": repr(0.0), "source": "derived",
                "dtype": "f32", "endianness": "little",
                "method": method,
                "labels": " ".join(repr(float(x)) for x in labels),
            }
            entries.update(extra or {})
            _write_meta(d / "meta", entries)
            data = np.ascontiguousarray(np.moveaxis(images.astype("<f4"), 2, 0))
            (d / "frames.bin").write_bytes(data.tobytes())
            return d

    def delete(self, seq_id: str) -> None:
        d = self.path(seq_id)
        if not d.exists():
            return
        for p in sorted(d.rglob("*"), reverse=True):
            p.unlink() if p.is_file() else p.rmdir()
        d.rmdir()
