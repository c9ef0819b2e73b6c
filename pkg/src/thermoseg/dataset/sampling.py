"""Frame selection, residual-heat correction, and spatial resize.

A raw acquisition carries three bands: a leading band recorded before the
flash (`skip_head` frames), the informative decay, and a trailing band
(`skip_tail` frames) recorded after the decay has flattened, whose mean is
the per-pixel residual-heat estimate.  Between the bands the decay is
subsampled every `stride`-th frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DomainError

#: Frame-selection constants used throughout the benchmark datasets.
DEFAULT_SKIP_HEAD = 15
DEFAULT_SKIP_TAIL = 15
DEFAULT_STRIDE = 5
DEFAULT_SEQUENCES = 218
DEFAULT_RESIZE = 1024


@dataclass(frozen=True)
class SamplingConfig:
    """How raw acquisitions are reduced to training-ready stacks."""

    skip_head: int = DEFAULT_SKIP_HEAD
    skip_tail: int = DEFAULT_SKIP_TAIL
    stride: int = DEFAULT_STRIDE
    resize_to: int | None = None

    def __post_init__(self) -> None:
        if self.skip_head < 0 or self.skip_tail < 0:
            raise ConfigurationError("skip_head and skip_tail must be >= 0")
        if self.stride < 1:
            raise ConfigurationError("stride must be >= 1")
        if self.resize_to is not None and self.resize_to < 1:
            raise ConfigurationError("resize_to must be >= 1")


def frame_budget(n_sequences: int, frames_per_sequence: int,
                 config: SamplingConfig = SamplingConfig()) -> int:
    """Total frames selected across a corpus of equally long acquisitions.

    Each acquisition of `f` frames contributes floor((f - skip_head -
    skip_tail) / stride) frames, so the corpus yields that count times
    `n_sequences`.  Raises if the usable band is negative.
    """
    if n_sequences < 0:
        raise DomainError("n_sequences must be >= 0")
    usable = frames_per_sequence - config.skip_head - config.skip_tail
    if usable < 0:
        raise DomainError(
            f"sequence of {frames_per_sequence} frames is shorter than the "
            f"skip bands ({config.skip_head} + {config.skip_tail})")
    return n_sequences * (usable // config.stride)


def sample_frames(frames_per_sequence: int,
                  config: SamplingConfig = SamplingConfig()) -> np.ndarray:
    """0-based frame indices retained from one acquisition.

    The first retained frame is the one right after the head band; every
    `stride`-th frame thereafter is kept while it still clears the tail
    band, yielding exactly floor((f - head - tail) / stride) indices.
    """
    usable = frames_per_sequence - config.skip_head - config.skip_tail
    if usable < 0:
        raise DomainError(
            f"sequence of {frames_per_sequence} frames is shorter than the "
            f"skip bands ({config.skip_head} + {config.skip_tail})")
    count = usable // config.stride
    return config.skip_head + config.stride * np.arange(count)


def residual_tail_mean(frames: np.ndarray, skip_tail: int) -> np.ndarray:
    """Per-pixel mean of the final `skip_tail` frames (the residual field)."""
    f = np.asarray(frames)
    if f.ndim != 3:
        raise DomainError("frames must be rows x cols x frames")
    if not 0 < skip_tail <= f.shape[2]:
        raise DomainError(f"skip_tail {skip_tail} outside 1..{f.shape[2]}")
    return f[:, :, f.shape[2] - skip_tail:].mean(axis=2)


def subtract_tail_mean(frames: np.ndarray, skip_tail: int) -> np.ndarray:
    """Subtract the trailing-band mean from every frame, pixelwise.

    The trailing frames sit long after the decay has flattened, so their
    mean estimates the slowly varying residual (retained heat plus static
    reflections); subtracting it re-references each pixel's decay to its
    own late-time plateau.  Output dtype follows numpy promotion of the
    input dtype (float32 in, float32 out).
    """
    f = np.asarray(frames)
    residual = residual_tail_mean(f, skip_tail)
    return f - residual[:, :, None]


def residual_heat_correct(frames: np.ndarray,
                          config: SamplingConfig = SamplingConfig()
                          ) -> np.ndarray:
    """Re-reference the usable band of an acquisition to its residual field.

    Subtracts the per-pixel mean of the last `skip_tail` frames from every
    frame, then drops the head and tail bands, leaving the
    f - skip_head - skip_tail frames of the usable window (unstrided;
    striding is `sample_frames`'s job).  Requires a non-empty tail band:
    with skip_tail == 0 there is nothing to estimate the residual from.
    """
    f = np.asarray(frames)
    if f.ndim != 3:
        raise DomainError("frames must be rows x cols x frames")
    if config.skip_tail < 1:
        raise ConfigurationError(
            "residual correction needs skip_tail >= 1 trailing frames")
    n = f.shape[2]
    if n <= config.skip_head + config.skip_tail:
        raise DomainError(
            f"sequence of {n} frames has no usable band after skipping "
            f"{config.skip_head} + {config.skip_tail}")
    corrected = subtract_tail_mean(f, config.skip_tail)
    return corrected[:, :, config.skip_head:n - config.skip_tail]


def resize_frame(image: np.ndarray, out_rows: int, out_cols: int) -> np.ndarray:
    """Bilinear resize with half-pixel-center alignment.

    Output pixel (i, j) samples the source at
        r = (i + 0.5) * rows/out_rows - 0.5,
        c = (j + 0.5) * cols/out_cols - 0.5,
    with edge clamping, so averages are preserved under uniform fields and
    the mapping is the common convention of image libraries that treat
    pixels as area samples rather than grid-point samples.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise DomainError("image must be 2-D")
    rows, cols = img.shape
    if out_rows < 1 or out_cols < 1:
        raise DomainError("output dims must be >= 1")
    if (out_rows, out_cols) == (rows, cols):
        return img.copy()

    r = (np.arange(out_rows) + 0.5) * (rows / out_rows) - 0.5
    c = (np.arange(out_cols) + 0.5) * (cols / out_cols) - 0.5
    r = np.clip(r, 0.0, rows - 1.0)
    c = np.clip(c, 0.0, cols - 1.0)
    r0 = np.floor(r).astype(np.intp)
    c0 = np.floor(c).astype(np.intp)
    r1 = np.minimum(r0 + 1, rows - 1)
    c1 = np.minimum(c0 + 1, cols - 1)
    wr = (r - r0)[:, None]
    wc = (c - c0)[None, :]

    top = img[r0][:, c0] * (1.0 - wc) + img[r0][:, c1] * wc
    bot = img[r1][:, c0] * (1.0 - wc) + img[r1][:, c1] * wc
    return top * (1.0 - wr) + bot * wr


def resize_mask(mask: np.ndarray, out_rows: int, out_cols: int) -> np.ndarray:
    """Resize a boolean mask by thresholding its bilinear interpolation at 0.5."""
    return resize_frame(mask.astype(np.float64), out_rows, out_cols) >= 0.5


def prepare_stack(frames: np.ndarray,
                  config: SamplingConfig = SamplingConfig()) -> np.ndarray:
    """Apply residual-heat correction, frame selection, and optional resize.

    Correction uses the trailing band *before* it is discarded.  When the
    tail band is empty (skip_tail == 0) the correction step is skipped.
    """
    f = np.asarray(frames)
    if f.ndim != 3:
        raise DomainError("frames must be rows x cols x frames")
    corrected = subtract_tail_mean(f, config.skip_tail) if config.skip_tail else f
    idx = sample_frames(f.shape[2], config)
    picked = corrected[:, :, idx]
    if config.resize_to is None:
        return picked
    out = np.empty((config.resize_to, config.resize_to, picked.shape[2]),
                   dtype=np.float64)
    for k in range(picked.shape[2]):
        out[:, :, k] = resize_frame(picked[:, :, k], config.resize_to,
                                    config.resize_to)
    return out
