"""Independent reference implementations used as test oracles.

Everything here is written in the most literal way possible — explicit
loops, naive formulas, rational arithmetic or extended precision where it
helps — so that the production code is checked against something that
shares no code path, no vectorization trick, and no algebraic
rearrangement with it.  Slow is fine; these run on tiny inputs.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------------------
# Spectral transform: O(F^2) discrete Fourier transform, one bin at a time.

def naive_dft_bins(curve) -> np.ndarray:
    """Positive-frequency DFT bins (0 .. floor(F/2)) of a real time series."""
    x = [float(v) for v in curve]
    f = len(x)
    out = []
    for k in range(f // 2 + 1):
        re = math.fsum(x[n] * math.cos(-2.0 * math.pi * k * n / f)
                       for n in range(f))
        im = math.fsum(x[n] * math.sin(-2.0 * math.pi * k * n / f)
                       for n in range(f))
        out.append(complex(re, im))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# Polynomial fitting: normal equations in extended precision, no lstsq.

def _solve_longdouble(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting over np.longdouble."""
    n = len(b)
    m = np.concatenate([a.astype(np.longdouble),
                        b.astype(np.longdouble)[:, None]], axis=1)
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(m[col:, col])))
        if m[pivot, col] == 0:
            raise ZeroDivisionError("singular system")
        if pivot != col:
            m[[col, pivot]] = m[[pivot, col]]
        m[col] = m[col] / m[col, col]
        for row in range(n):
            if row != col and m[row, col] != 0:
                m[row] = m[row] - m[row, col] * m[col]
    return m[:, n]


def polyfit_values_oracle(x, y, degree: int) -> np.ndarray:
    """Least-squares polynomial fit evaluated back at the sample points.

    Builds the normal equations sum_i x_i^(j+k) a_k = sum_i y_i x_i^j in
    longdouble and solves by elimination; returns the fitted values (which
    are well-conditioned even when individual coefficients are not).
    """
    xs = np.asarray(x, dtype=np.longdouble)
    ys = np.asarray(y, dtype=np.longdouble)
    n = degree + 1
    a = np.empty((n, n), dtype=np.longdouble)
    b = np.empty(n, dtype=np.longdouble)
    for j in range(n):
        for k in range(n):
            a[j, k] = np.sum(xs ** (j + k))
        b[j] = np.sum(ys * xs ** j)
    coeff = _solve_longdouble(a, b)
    fitted = np.zeros_like(xs)
    for j in range(n):
        fitted = fitted + coeff[j] * xs ** j
    return fitted.astype(np.float64)


# ---------------------------------------------------------------------------
# Residual-heat correction: per-pixel loops, nothing shared with numpy axes.

def residual_correct_two_loop(frames: np.ndarray, skip_head: int,
                              skip_tail: int) -> np.ndarray:
    """Tail-mean subtraction over the usable band, pixel by pixel."""
    rows, cols, f = frames.shape
    keep = f - skip_head - skip_tail
    out = np.empty((rows, cols, keep), dtype=frames.dtype)
    for i in range(rows):
        for j in range(cols):
            tail = frames[i, j, f - skip_tail:]
            mean = tail.mean()
            for t in range(keep):
                out[i, j, t] = frames[i, j, skip_head + t] - mean
    return out


# ---------------------------------------------------------------------------
# Pixel-counting segmentation metrics.

def counting_stats(y: np.ndarray, y_pred: np.ndarray) -> tuple[int, int, int]:
    """(true-positive, false-positive, false-negative) by per-pixel loop."""
    tp = fp = fn = 0
    for a, b in zip(np.asarray(y, dtype=bool).flat,
                    np.asarray(y_pred, dtype=bool).flat):
        if a and b:
            tp += 1
        elif b:
            fp += 1
        elif a:
            fn += 1
    return tp, fp, fn


def iou_counting(y: np.ndarray, y_pred: np.ndarray) -> float:
    tp, fp, fn = counting_stats(y, y_pred)
    union = tp + fp + fn
    return 1.0 if union == 0 else tp / union


def precision_recall_counting(y: np.ndarray,
                              y_pred: np.ndarray) -> tuple[float, float]:
    tp, fp, fn = counting_stats(y, y_pred)
    precision = 1.0 if tp + fp == 0 else tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    return precision, recall


def f_gamma_counting(y: np.ndarray, y_pred: np.ndarray,
                     gamma_sq: int = 4) -> Fraction:
    """F-score as an exact rational straight from pixel counts.

    Uses the count identity F = (1+g)tp / ((1+g)tp + g*fn + fp) with
    g = gamma^2, which never forms the intermediate precision/recall
    floats at all.
    """
    tp, fp, fn = counting_stats(y, y_pred)
    denom = (1 + gamma_sq) * tp + gamma_sq * fn + fp
    if denom == 0:
        # no defect pixels anywhere and none predicted: perfect agreement
        return Fraction(1)
    if tp == 0 and (fp == 0 or fn == 0):
        # one side empty: score collapses to the empty-side convention
        return Fraction(1) if fp == 0 and fn == 0 else Fraction(0)
    return Fraction((1 + gamma_sq) * tp, denom)


# ---------------------------------------------------------------------------
# Detection matching: an independent greedy matcher over explicit pair lists.

def greedy_match_oracle(gt_masks, pred_masks, threshold: float):
    """(matches, missed, spurious) with matches as (gt, pred, iou) tuples.

    Builds every (gt, pred) pair, sorts by descending overlap with
    (gt index, pred index) as the tie-break, and walks the list taking
    pairs whose endpoints are both unused and whose overlap clears the
    threshold.
    """
    pairs = []
    for gi, g in enumerate(gt_masks):
        for pi, p in enumerate(pred_masks):
            pairs.append((-iou_counting(g, p), gi, pi))
    pairs.sort()
    used_g, used_p, matches = set(), set(), []
    for neg, gi, pi in pairs:
        score = -neg
        if score <= 0.0 or score < threshold:
            break
        if gi in used_g or pi in used_p:
            continue
        used_g.add(gi)
        used_p.add(pi)
        matches.append((gi, pi, score))
    missed = [i for i in range(len(gt_masks)) if i not in used_g]
    spurious = [i for i in range(len(pred_masks)) if i not in used_p]
    return matches, missed, spurious


# ---------------------------------------------------------------------------
# Loss gradient: central finite differences, one element at a time.

def central_difference_grad(loss_fn, y_prob: np.ndarray,
                            step: float = 1e-5) -> np.ndarray:
    """d loss / d y_prob by symmetric perturbation of each element."""
    grad = np.zeros_like(y_prob, dtype=np.float64)
    flat = grad.reshape(-1)
    probe = y_prob.astype(np.float64).copy()
    probe_flat = probe.reshape(-1)
    for i in range(probe_flat.size):
        keep = probe_flat[i]
        probe_flat[i] = keep + step
        hi = loss_fn(probe)
        probe_flat[i] = keep - step
        lo = loss_fn(probe)
        probe_flat[i] = keep
        flat[i] = (hi - lo) / (2.0 * step)
    return grad


# ---------------------------------------------------------------------------
# Covariance eigenstructure via SVD of the centered data matrix.

def covariance_eig_oracle(frames: np.ndarray):
    """(eigenvalues desc, basis rows) of the temporal covariance.

    Centers the pixels-by-frames matrix and takes its SVD; the right
    singular vectors are the covariance eigenvectors and the squared
    singular values over (N-1) its eigenvalues.  No eigensolver shared
    with the production path.
    """
    rows, cols, f = frames.shape
    x = np.empty((rows * cols, f), dtype=np.float64)
    idx = 0
    for i in range(rows):
        for j in range(cols):
            x[idx] = frames[i, j, :]
            idx += 1
    xc = x - x.mean(axis=0, keepdims=True)
    _, s, vt = np.linalg.svd(xc, full_matrices=False)
    return (s * s) / (x.shape[0] - 1), vt


# ---------------------------------------------------------------------------
# Scalar bilinear sampling with half-pixel centers, for the resize oracle.

def bilinear_point(img: np.ndarray, r: float, c: float) -> float:
    """Sample a 2-D image at fractional (r, c) with edge clamping."""
    rows, cols = img.shape
    r = min(max(r, 0.0), rows - 1.0)
    c = min(max(c, 0.0), cols - 1.0)
    r0, c0 = int(math.floor(r)), int(math.floor(c))
    r1, c1 = min(r0 + 1, rows - 1), min(c0 + 1, cols - 1)
    wr, wc = r - r0, c - c0
    top = img[r0, c0] * (1 - wc) + img[r0, c1] * wc
    bot = img[r1, c0] * (1 - wc) + img[r1, c1] * wc
    return float(top * (1 - wr) + bot * wr)


def resize_oracle(img: np.ndarray, out_rows: int, out_cols: int) -> np.ndarray:
    rows, cols = img.shape
    out = np.empty((out_rows, out_cols), dtype=np.float64)
    for i in range(out_rows):
        for j in range(out_cols):
            r = (i + 0.5) * rows / out_rows - 0.5
            c = (j + 0.5) * cols / out_cols - 0.5
            out[i, j] = bilinear_point(img, r, c)
    return out


# ---------------------------------------------------------------------------
# Histogram threshold selection, spelled out bin by bin.

def otsu_bin_oracle(values: np.ndarray, bins: int = 256) -> int | None:
    """First bin index maximizing between-class variance, None if flat.

    Classic two-class form omega0*omega1*(mu0 - mu1)^2 over bin indices,
    accumulated with explicit loops.  The value scale and origin cancel
    out of the argmax, so plain indices stand in for bin values.
    """
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return None
    hist = [0] * bins
    for value in v:
        b = int((value - lo) * bins / (hi - lo))
        hist[min(b, bins - 1)] += 1
    total = len(v)
    best_t, best_score = None, -1.0
    for t in range(bins - 1):
        n0 = sum(hist[: t + 1])
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = sum(hist[b] * b for b in range(t + 1)) / n0
        mu1 = sum(hist[b] * b for b in range(t + 1, bins)) / n1
        score = (n0 / total) * (n1 / total) * (mu0 - mu1) ** 2
        if score > best_score:
            best_t, best_score = t, score
    return best_t


# ---------------------------------------------------------------------------
# Majority vote over three masks, per pixel.

def majority_vote_oracle(masks) -> np.ndarray:
    a, b, c = (np.asarray(m, dtype=bool) for m in masks)
    out = np.zeros(a.shape, dtype=bool)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            votes = int(a[i, j]) + int(b[i, j]) + int(c[i, j])
            out[i, j] = votes >= 2
    return out
