"""Box-prompt-guided defect segmentation on contrast surfaces.

An inspector marks a rectangle around a suspected defect; per prompt the
algorithm (1) expands the box by a margin, (2) finds a threshold inside
the expanded window by Otsu's method, (3) seeds at the hottest pixel of
the original box, (4) grows a 4-connected region above the threshold
inside the window, and (5) cleans the region with a 3x3 morphological
open/close.  Every step is deterministic; thresholding works on values
relative to the window minimum, so adding a constant to the whole
surface changes no mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DomainError

NO_DEFECT_FOUND = "no-defect-found"
OK = "ok"

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_BLOCK = np.ones((3, 3), dtype=bool)


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class BoxPrompt:
    """Inclusive pixel rectangle [row0..row1] x [col0..col1] with an id."""

    id: str
    row0: int
    col0: int
    row1: int
    col1: int

    def __post_init__(self) -> None:
        if not self.id or any(ch.isspace() for ch in self.id):
            raise DomainError(f"prompt id {self.id!r} must be non-empty, no whitespace")
        if self.row0 > self.row1 or self.col0 > self.col1:
            raise DomainError(f"prompt {self.id}: degenerate box")
        if self.row0 < 0 or self.col0 < 0:
            raise DomainError(f"prompt {self.id}: negative coordinates")

    def validate_in(self, shape: tuple[int, int]) -> None:
        rows, cols = shape
        if self.row1 >= rows or self.col1 >= cols:
            raise DomainError(
                f"prompt {self.id}: box ({self.row0},{self.col0},{self.row1},"
                f"{self.col1}) exceeds image {rows}x{cols}")

    @property
    def height(self) -> int:
        return self.row1 - self.row0 + 1

    @property
    def width(self) -> int:
        return self.col1 - self.col0 + 1

    def expanded(self, margin: float, shape: tuple[int, int]) -> "BoxPrompt":
        """Grow by round(margin * side) pixels per side, clamped to shape."""
        dr = _round_half_up(margin * self.height)
        dc = _round_half_up(margin * self.width)
        rows, cols = shape
        return BoxPrompt(
            id=self.id,
            row0=max(0, self.row0 - dr), col0=max(0, self.col0 - dc),
            row1=min(rows - 1, self.row1 + dr), col1=min(cols - 1, self.col1 + dc))


@dataclass(frozen=True)
class SegParams:
    """Tunable knobs of the box-prompt segmenter."""

    expand_margin: float = 0.1
    threshold_override: float | None = None
    bins: int = 256

    def __post_init__(self) -> None:
        if self.expand_margin < 0:
            raise DomainError("expand_margin must be >= 0")
        if self.bins < 2:
            raise DomainError("bins must be >= 2")


@dataclass
class SegmentationResult:
    """Per-prompt masks, statuses, confidences, and the fused mask."""

    prompt_ids: list[str]
    statuses: list[str]
    instance_masks: list[np.ndarray]
    confidences: list[float]
    semantic_mask: np.ndarray
    expanded_boxes: list[BoxPrompt]
    thresholds: list[float | None]
    params: SegParams

    def __post_init__(self) -> None:
        n = len(self.prompt_ids)
        if not (len(self.statuses) == len(self.instance_masks)
                == len(self.confidences) == len(self.expanded_boxes)
                == len(self.thresholds) == n):
            raise DomainError("per-prompt fields must have equal length")
        union = np.zeros_like(self.semantic_mask, dtype=bool)
        for mask, box in zip(self.instance_masks, self.expanded_boxes):
            outside = mask.copy()
            outside[box.row0:box.row1 + 1, box.col0:box.col1 + 1] = False
            if outside.any():
                raise DomainError(f"prompt {box.id}: mask leaks outside its window")
            union |= mask
        if not np.array_equal(union, self.semantic_mask.astype(bool)):
            raise DomainError("semantic mask must equal the union of instances")

    def summary_text(self) -> str:
        """UTF-8 per-prompt summary: `id status confidence` lines."""
        lines = [f"{pid} {status} {conf!r}"
                 for pid, status, conf in zip(self.prompt_ids, self.statuses,
                                              self.confidences)]
        return "\n".join(lines) + "\n"


def otsu_threshold_bin(values: np.ndarray, bins: int = 256) -> int | None:
    """Otsu's bin index on values re-based to their minimum.

    Returns the first bin index t maximizing the between-class variance
    of the split {<= t} / {> t}, or None when the window has zero spread.
    """
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return None
    hist, _ = np.histogram(v - lo, bins=bins, range=(0.0, hi - lo))
    p = hist.astype(np.float64) / v.size
    omega = np.cumsum(p)
    mu = np.cumsum(p * np.arange(bins))
    mu_total = mu[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        sigma_b = (mu_total * omega - mu) ** 2 / (omega * (1.0 - omega))
    sigma_b = np.nan_to_num(sigma_b[:-1], nan=-1.0, posinf=-1.0)
    return int(np.argmax(sigma_b))


def _segment_one(surface: np.ndarray, prompt: BoxPrompt, params: SegParams,
                 ) -> tuple[np.ndarray, str, float, BoxPrompt, float | None]:
    window = prompt.expanded(params.expand_margin, surface.shape)
    cut = surface[window.row0:window.row1 + 1, window.col0:window.col1 + 1]
    lo, hi = float(cut.min()), float(cut.max())
    empty = np.zeros(surface.shape, dtype=bool)

    if params.threshold_override is not None:
        threshold = float(params.threshold_override)
        above = cut > threshold
    else:
        t = otsu_threshold_bin(cut, params.bins)
        if t is None:
            return empty, NO_DEFECT_FOUND, 0.0, window, None
        binned = np.minimum(
            ((cut - lo) * (params.bins / (hi - lo))).astype(np.intp),
            params.bins - 1)
        above = binned > t
        threshold = lo + (t + 1) * (hi - lo) / params.bins

    if not above.any():
        return empty, NO_DEFECT_FOUND, 0.0, window, threshold

    inner = surface[prompt.row0:prompt.row1 + 1, prompt.col0:prompt.col1 + 1]
    sr, sc = np.unravel_index(int(np.argmax(inner)), inner.shape)
    seed = (prompt.row0 - window.row0 + sr, prompt.col0 - window.col0 + sc)
    if not above[seed]:
        return empty, NO_DEFECT_FOUND, 0.0, window, threshold

    labels, _ = ndimage.label(above, structure=_CROSS)
    region = labels == labels[seed]
    region = ndimage.binary_opening(region, structure=_BLOCK)
    region = ndimage.binary_closing(region, structure=_BLOCK)
    if not region.any():
        return empty, NO_DEFECT_FOUND, 0.0, window, threshold

    mask = empty.copy()
    mask[window.row0:window.row1 + 1, window.col0:window.col1 + 1] = region
    spread = float(cut.std())
    level = float(np.median(cut))
    confidence = (float(surface[mask].mean()) - level) / spread if spread > 0 else 0.0
    return mask, OK, confidence, window, threshold


def segment_with_prompts(surface: np.ndarray, prompts: list[BoxPrompt],
                         params: SegParams = SegParams()) -> SegmentationResult:
    """Segment one defect candidate per prompt on a contrast surface.

    Prompts are processed independently (overlapping prompts may yield
    overlapping masks); the semantic mask is their union.  A prompt whose
    window cannot be split (zero spread) or whose grown region vanishes
    reports the explicit `no-defect-found` status instead of silently
    returning an empty mask.
    """
    s = np.asarray(surface, dtype=np.float64)
    if s.ndim != 2:
        raise DomainError("surface must be a 2-D contrast image")
    if not np.all(np.isfinite(s)):
        raise DomainError("surface contains non-finite values")
    for p in prompts:
        p.validate_in(s.shape)

    masks, statuses, confs, windows, thresholds = [], [], [], [], []
    for p in prompts:
        mask, status, conf, window, thr = _segment_one(s, p, params)
        masks.append(mask)
        statuses.append(status)
        confs.append(conf)
        windows.append(window)
        thresholds.append(thr)
    semantic = np.zeros(s.shape, dtype=bool)
    for m in masks:
        semantic |= m
    return SegmentationResult(
        prompt_ids=[p.id for p in prompts], statuses=statuses,
        instance_masks=masks, confidences=confs, semantic_mask=semantic,
        expanded_boxes=windows, thresholds=thresholds, params=params)


def prompts_from_ground_truth(instance_masks: list[np.ndarray],
                              dilation: float = 0.1) -> list[BoxPrompt]:
    """Tight bounding box of each instance mask, dilated per side.

    The dilation is a fraction of the box's own height/width, rounded
    half-up to pixels and clamped to the image; a 10x10 mask at dilation
    0.1 yields a 12x12 box (one pixel per side).
    """
    if dilation < 0:
        raise DomainError("dilation must be >= 0")
    prompts = []
    for k, m in enumerate(instance_masks):
        mask = np.asarray(m, dtype=bool)
        if mask.ndim != 2 or not mask.any():
            raise DomainError(f"instance {k}: empty or non-2-D mask")
        rows = np.flatnonzero(mask.any(axis=1))
        cols = np.flatnonzero(mask.any(axis=0))
        box = BoxPrompt(id=f"gt-{k}", row0=int(rows[0]), col0=int(cols[0]),
                        row1=int(rows[-1]), col1=int(cols[-1]))
        prompts.append(box.expanded(dilation, mask.shape))
    return prompts


def fuse_annotations(masks: list[np.ndarray]) -> np.ndarray:
    """Per-pixel 2-of-3 majority vote over exactly three binary masks."""
    if len(masks) != 3:
        raise DomainError(f"vote fusion takes exactly 3 masks, got {len(masks)}")
    first = np.asarray(masks[0], dtype=bool)
    total = np.zeros(first.shape, dtype=np.int8)
    for m in masks:
        b = np.asarray(m, dtype=bool)
        if b.shape != first.shape:
            raise DomainError("annotation masks differ in shape")
        total += b
    return total >= 2


def format_prompts(prompts: list[BoxPrompt]) -> str:
    """Serialize prompts as UTF-8 lines `id row0 col0 row1 col1`."""
    return "".join(f"{p.id} {p.row0} {p.col0} {p.row1} {p.col1}\n"
                   for p in prompts)


def parse_prompts(text: str) -> list[BoxPrompt]:
    """Inverse of format_prompts; blank lines and `#` comments ignored."""
    prompts = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise DomainError(f"line {ln}: expected `id row0 col0 row1 col1`")
        try:
            coords = [int(x) for x in parts[1:]]
        except ValueError as exc:
            raise DomainError(f"line {ln}: non-integer coordinate") from exc
        prompts.append(BoxPrompt(parts[0], *coords))
    return prompts
