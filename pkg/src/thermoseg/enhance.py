"""Unsupervised contrast enhancement for thermal sequences.

Three classical transforms turn a rows x cols x F sequence into stacks of
feature images: temporal principal components, per-pixel Fourier phase and
amplitude, and per-pixel polynomial fits of ln(T) against ln(t) with their
log-log derivatives.  A plain contrast map (frame minus a robust
background level) rounds out the set as the surface that box-prompt
segmentation operates on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

MethodName = str  # pca | ppt_phase | ppt_amplitude | tsr_coeff | tsr_deriv1 | tsr_deriv2 | raw_contrast


@dataclass
class EnhancedStack:
    """A bundle of derived feature images with per-image labels.

    `labels[k]` identifies image k: component index for pca, frequency
    bin for ppt_*, coefficient order or evaluation time for tsr_*.
    `invalid_mask` marks pixels excluded from a fit; `warning` is set on
    degenerate inputs handled by convention rather than failure.
    """

    source_id: str
    method: MethodName
    images: np.ndarray
    labels: list[float]
    invalid_mask: np.ndarray | None = None
    warning: str | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        img = np.asarray(self.images)
        if img.ndim != 3 or img.shape[2] < 1:
            raise DomainError("images must be rows x cols x K with K >= 1")
        if not np.all(np.isfinite(img)):
            raise DomainError("enhanced images contain non-finite values")
        if len(self.labels) != img.shape[2]:
            raise DomainError("labels length must equal the image count")
        self.images = img
        self.labels = [float(x) for x in self.labels]


def _check_sequence(frames: np.ndarray, min_frames: int = 2) -> np.ndarray:
    f = np.asarray(frames, dtype=np.float64)
    if f.ndim != 3:
        raise DomainError("sequence must be rows x cols x frames")
    if f.shape[2] < min_frames:
        raise DomainError(f"need at least {min_frames} frames, got {f.shape[2]}")
    if not np.all(np.isfinite(f)):
        raise DomainError("sequence contains non-finite values")
    return f


def sequence_pca(frames: np.ndarray, n_components: int,
                 source_id: str = "") -> EnhancedStack:
    """Project each pixel's time curve onto the top temporal eigenvectors.

    Pixels are treated as F-vectors and mean-centered over pixels; the
    F x F temporal covariance (small, since F is far below the pixel
    count) is eigendecomposed and the images are per-pixel projections
    onto the leading eigenvectors, ordered by non-increasing eigenvalue.
    Each eigenvector's sign is fixed so its largest-magnitude entry is
    positive, making the output reproducible across math libraries.
    """
    f = _check_sequence(frames)
    rows, cols, n_frames = f.shape
    if not 1 <= n_components <= n_frames:
        raise DomainError(
            f"n_components {n_components} outside 1..{n_frames}")

    x = f.reshape(-1, n_frames)
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / max(x.shape[0] - 1, 1)
    total_var = float(np.trace(cov))
    scale = float(np.abs(x).max())

    if scale == 0.0 or total_var <= (1e-12 * scale) ** 2 * n_frames:
        basis = np.eye(n_frames)[:, :n_components]
        images = np.zeros((rows, cols, n_components))
        return EnhancedStack(
            source_id=source_id, method="pca", images=images,
            labels=list(range(n_components)), warning="zero-variance input",
            metadata={"mean": mean, "basis": basis,
                      "eigenvalues": np.zeros(n_components)})

    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(-eigvals, kind="stable")[:n_components]
    basis = eigvecs[:, order]
    vals = eigvals[order]
    for k in range(basis.shape[1]):
        if basis[np.argmax(np.abs(basis[:, k])), k] < 0:
            basis[:, k] = -basis[:, k]
    images = (xc @ basis).reshape(rows, cols, n_components)
    return EnhancedStack(
        source_id=source_id, method="pca", images=images,
        labels=list(range(n_components)),
        metadata={"mean": mean, "basis": basis, "eigenvalues": vals})


def pca_reconstruct(stack: EnhancedStack) -> np.ndarray:
    """Invert sequence_pca from its projections, basis, and mean."""
    if stack.method != "pca":
        raise DomainError("pca_reconstruct needs a pca stack")
    rows, cols, k = stack.images.shape
    basis = stack.metadata["basis"]
    mean = stack.metadata["mean"]
    flat = stack.images.reshape(-1, k) @ basis.T + mean
    return flat.reshape(rows, cols, basis.shape[0])


def ppt_transform(frames: np.ndarray, source_id: str = "",
                  ) -> tuple[EnhancedStack, EnhancedStack]:
    """Per-pixel temporal DFT: (phase, amplitude) stacks for bins 0..F//2.

    Phase is atan2(imag, real) of the one-sided spectrum; amplitude is
    its magnitude.  No window is applied: the caller is expected to pass
    the retained, residual-corrected frame range.
    """
    f = _check_sequence(frames)
    spectrum = np.fft.rfft(f, axis=2)
    labels = list(range(spectrum.shape[2]))
    phase = EnhancedStack(source_id=source_id, method="ppt_phase",
                          images=np.angle(spectrum), labels=labels)
    amplitude = EnhancedStack(source_id=source_id, method="ppt_amplitude",
                              images=np.abs(spectrum), labels=labels)
    return phase, amplitude


def tsr_fit(frames: np.ndarray, times: np.ndarray, degree: int,
            eval_times: np.ndarray | None = None, offset: float = 0.0,
            source_id: str = "",
            ) -> tuple[EnhancedStack, EnhancedStack, EnhancedStack]:
    """Least-squares fit of ln(T) as a degree-n polynomial in ln(t).

    Values are offset (for absolute-kelvin data pass the pre-pulse
    ambient) and clamped to a positive floor of 1e-6 of the dynamic range
    before taking logs; the floor lands in the output metadata.  Pixels
    with any non-positive sample after offsetting are excluded from the
    fit, zero-filled in every output image, and flagged in invalid_mask.

    Returns (coefficients, first log-derivative, second log-derivative)
    stacks; derivative images are d ln T / d ln t and its derivative,
    evaluated at `eval_times` (default: every sample time).
    """
    f = _check_sequence(frames, min_frames=2)
    t = np.asarray(times, dtype=np.float64)
    if t.shape != (f.shape[2],):
        raise DomainError("times length must equal the frame count")
    if np.any(t <= 0):
        raise DomainError("sample times must be positive")
    if degree < 0:
        raise DomainError("degree must be >= 0")
    if f.shape[2] < degree + 1:
        raise DomainError(
            f"{f.shape[2]} frames cannot determine degree {degree}")
    if eval_times is None:
        eval_times = t
    ev = np.asarray(eval_times, dtype=np.float64)
    if ev.ndim != 1 or ev.size < 1 or np.any(ev <= 0):
        raise DomainError("eval_times must be positive and non-empty")

    values = f - offset
    dyn = float(values.max() - values.min())
    floor = 1e-6 * dyn if dyn > 0 else np.finfo(np.float64).tiny
    invalid = np.any(values <= 0.0, axis=2)
    clamped = np.maximum(values, floor)

    rows, cols, n_frames = f.shape
    design = np.vander(np.log(t), degree + 1, increasing=True)
    log_curves = np.log(clamped).reshape(-1, n_frames).T
    valid_flat = ~invalid.reshape(-1)
    coeffs = np.zeros((degree + 1, rows * cols))
    if valid_flat.any():
        sol, *_ = np.linalg.lstsq(design, log_curves[:, valid_flat], rcond=None)
        coeffs[:, valid_flat] = sol

    log_ev = np.log(ev)
    orders = np.arange(degree + 1)
    d1 = np.zeros((ev.size, rows * cols))
    d2 = np.zeros((ev.size, rows * cols))
    for j in range(1, degree + 1):
        d1 += j * (log_ev ** (j - 1))[:, None] * coeffs[j][None, :]
    for j in range(2, degree + 1):
        d2 += j * (j - 1) * (log_ev ** (j - 2))[:, None] * coeffs[j][None, :]

    meta = {"floor": floor, "offset": offset, "degree": degree}
    coeff_stack = EnhancedStack(
        source_id=source_id, method="tsr_coeff",
        images=coeffs.T.reshape(rows, cols, degree + 1),
        labels=list(orders), invalid_mask=invalid,
        warning="invalid pixels excluded" if invalid.any() else None,
        metadata=dict(meta))
    d1_stack = EnhancedStack(
        source_id=source_id, method="tsr_deriv1",
        images=d1.T.reshape(rows, cols, ev.size),
        labels=list(ev), invalid_mask=invalid, metadata=dict(meta))
    d2_stack = EnhancedStack(
        source_id=source_id, method="tsr_deriv2",
        images=d2.T.reshape(rows, cols, ev.size),
        labels=list(ev), invalid_mask=invalid, metadata=dict(meta))
    return coeff_stack, d1_stack, d2_stack


def normalize_illumination(frames: np.ndarray,
                           reference_frame: int = 0) -> np.ndarray:
    """Cancel uneven lamp coverage by early-frame gain division.

    Right after the pulse the surface response is proportional to the
    local deposited energy, and subsurface features have not yet reached
    the surface — so the reference frame, divided by its spatial mean, is
    a per-pixel estimate of the relative illumination gain.  Dividing
    every frame by that map removes the multiplicative unevenness while
    leaving uniform scenes essentially untouched.  Pick a reference
    early enough that the shallowest defect of interest is still
    invisible there.
    """
    f = _check_sequence(frames, min_frames=1)
    if not 0 <= reference_frame < f.shape[2]:
        raise DomainError(
            f"reference_frame {reference_frame} outside 0..{f.shape[2] - 1}")
    ref = f[:, :, reference_frame]
    if np.any(ref <= 0):
        raise DomainError("reference frame must be strictly positive")
    gain = ref / ref.mean()
    return f / gain[:, :, None]


def contrast_map(frames: np.ndarray, frame_index: int,
                 background_mask: np.ndarray | None = None) -> np.ndarray:
    """One frame minus a robust background level.

    The level is the median of the frame, or of `background_mask` pixels
    when a region is marked; an empty region falls back to the
    whole-frame median with a warning.
    """
    f = _check_sequence(frames, min_frames=1)
    if not 0 <= frame_index < f.shape[2]:
        raise DomainError(
            f"frame_index {frame_index} outside 0..{f.shape[2] - 1}")
    frame = f[:, :, frame_index]
    if background_mask is not None:
        bg = np.asarray(background_mask, dtype=bool)
        if bg.shape != frame.shape:
            raise DomainError("background_mask shape differs from frame")
        if bg.any():
            return frame - np.median(frame[bg])
        warnings.warn("empty background region; using whole-frame median",
                      stacklevel=2)
    return frame - np.median(frame)


def peak_contrast_frame(frames: np.ndarray,
                        box: tuple[int, int, int, int] | None = None,
                        background_quantile: float = 0.1) -> int:
    """Index of the frame with the strongest local contrast.

    Contrast of a frame is its maximum inside `box` (inclusive
    row0,col0,row1,col1; whole frame when None) minus the box's
    `background_quantile` quantile — a background level robust to a few
    hot defect pixels inside the box.  Ties resolve to the earliest frame.
    """
    f = _check_sequence(frames, min_frames=1)
    if box is None:
        cut = f
    else:
        r0, c0, r1, c1 = box
        if not (0 <= r0 <= r1 < f.shape[0] and 0 <= c0 <= c1 < f.shape[1]):
            raise DomainError(f"box {box} outside the image")
        cut = f[r0:r1 + 1, c0:c1 + 1, :]
    flat = cut.reshape(-1, f.shape[2])
    signal = flat.max(axis=0) - np.quantile(flat, background_quantile, axis=0)
    return int(np.argmax(signal))
