"""Frame rendering: palettes and PNG encoding for the HTTP service.

Normalization is per-frame min/max by default; pass an explicit value
range to keep a scrubbed sequence on one fixed scale.  Palettes are
procedural (no bundled assets) and fixed, so rendered bytes are stable
across runs and platforms.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .errors import DomainError

# Anchor points (position in [0,1] -> RGB) of the classic "iron" thermal
# look: black through purple and red up to near-white yellow.
_IRON_ANCHORS = (
    (0.00, (0, 0, 0)),
    (0.15, (48, 0, 90)),
    (0.35, (150, 12, 120)),
    (0.55, (220, 70, 40)),
    (0.75, (255, 150, 10)),
    (0.90, (255, 220, 60)),
    (1.00, (255, 255, 224)),
)


def _interp_palette(anchors) -> np.ndarray:
    xs = np.array([a[0] for a in anchors])
    table = np.empty((256, 3), dtype=np.uint8)
    t = np.linspace(0.0, 1.0, 256)
    for ch in range(3):
        ys = np.array([a[1][ch] for a in anchors], dtype=np.float64)
        table[:, ch] = np.rint(np.interp(t, xs, ys)).astype(np.uint8)
    return table


_PALETTES: dict[str, np.ndarray] = {
    "gray": np.stack([np.arange(256, dtype=np.uint8)] * 3, axis=1),
    "iron": _interp_palette(_IRON_ANCHORS),
}


def palette(name: str) -> np.ndarray:
    """The fixed 256x3 uint8 lookup table for a colormap name."""
    try:
        return _PALETTES[name]
    except KeyError:
        raise DomainError(
            f"unknown colormap {name!r}; choose from {sorted(_PALETTES)}") from None


def colormap_names() -> list[str]:
    return sorted(_PALETTES)


def render_frame(frame: np.ndarray, colormap: str = "gray",
                 vmin: float | None = None, vmax: float | None = None,
                 ) -> np.ndarray:
    """Map a 2-D field to rows x cols x 3 uint8 via the named palette."""
    f = np.asarray(frame, dtype=np.float64)
    if f.ndim != 2:
        raise DomainError("frame must be 2-D")
    if not np.all(np.isfinite(f)):
        raise DomainError("frame contains non-finite values")
    table = palette(colormap)
    lo = float(f.min()) if vmin is None else float(vmin)
    hi = float(f.max()) if vmax is None else float(vmax)
    if hi <= lo:
        idx = np.zeros(f.shape, dtype=np.uint8)
    else:
        idx = np.clip((f - lo) * (255.0 / (hi - lo)), 0.0, 255.0)
        idx = np.rint(idx).astype(np.uint8)
    return table[idx]


def png_bytes(rgb: np.ndarray) -> bytes:
    """Lossless PNG encoding of a rows x cols x 3 uint8 image."""
    img = Image.fromarray(np.ascontiguousarray(rgb), mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def render_png(frame: np.ndarray, colormap: str = "gray",
               vmin: float | None = None, vmax: float | None = None) -> bytes:
    """render_frame + png_bytes in one call."""
    return png_bytes(render_frame(frame, colormap, vmin, vmax))
