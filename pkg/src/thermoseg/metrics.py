"""Segmentation and detection scoring, plus the hybrid training loss.

Pixel-level scores (overlap ratio, precision/recall, recall-weighted
F-score), instance-level detection matching, the BCE+Dice hybrid loss
with its exact analytic gradient, and a deterministic CSV report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

DEFAULT_GAMMA = 2.0
DEFAULT_BETA = 1.0
DEFAULT_MATCH_IOU = 0.3
_EPS = 1e-7  # probability clamp for the loss


def _as_binary_pair(y: np.ndarray, y_pred: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(y)
    b = np.asarray(y_pred)
    if a.shape != b.shape:
        raise DomainError(f"mask shapes differ: {a.shape} vs {b.shape}")
    return a.astype(bool), b.astype(bool)


def iou(y: np.ndarray, y_pred: np.ndarray) -> float:
    """Overlap ratio sum(y*yp) / (sum(y^2) + sum(yp^2) - sum(y*yp)).

    For binary masks the algebraic form reduces to intersection over
    union.  Both masks empty is defined as 1.0 (vacuous agreement).
    """
    a, b = _as_binary_pair(y, y_pred)
    inter = float(np.count_nonzero(a & b))
    denom = float(np.count_nonzero(a)) + float(np.count_nonzero(b)) - inter
    if denom == 0.0:
        return 1.0
    return inter / denom


def precision_recall(y: np.ndarray, y_pred: np.ndarray) -> tuple[float, float]:
    """(precision, recall) with empty-denominator conventions.

    No predicted positives -> precision 1.0 (nothing asserted falsely);
    no ground-truth positives -> recall 1.0 (nothing to find).
    """
    a, b = _as_binary_pair(y, y_pred)
    tp = float(np.count_nonzero(a & b))
    pred = float(np.count_nonzero(b))
    pos = float(np.count_nonzero(a))
    precision = tp / pred if pred > 0 else 1.0
    recall = tp / pos if pos > 0 else 1.0
    return precision, recall


def f_score(precision: float, recall: float, gamma: float = DEFAULT_GAMMA) -> float:
    """(gamma^2 + 1) P R / (gamma^2 P + R); gamma > 1 weights recall.

    Defined as 0.0 at P = R = 0, the formula's removable singularity.
    """
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise DomainError("precision and recall must lie in [0, 1]")
    g2 = gamma * gamma
    denom = g2 * precision + recall
    if denom == 0.0:
        return 0.0
    return (g2 + 1.0) * precision * recall / denom


@dataclass
class DetectionOutcome:
    """Instance-level matching result for one image."""

    matches: list[tuple[int, int, float]]   # (gt index, pred index, IOU)
    missed: list[int]                       # unmatched gt indices
    spurious: list[int]                     # unmatched prediction indices
    precision: float
    recall: float
    f_gamma: float
    match_iou: float
    per_defect_iou: list[float]             # per gt instance; 0.0 when missed

    @property
    def n_gt(self) -> int:
        return len(self.matches) + len(self.missed)


def detection_score(gt_instances: list[np.ndarray],
                    pred_instances: list[np.ndarray],
                    match_iou: float = DEFAULT_MATCH_IOU,
                    gamma: float = DEFAULT_GAMMA) -> DetectionOutcome:
    """Greedy one-to-one instance matching in descending pairwise IOU.

    Pairs are consumed largest-IOU-first (ties broken by gt then pred
    index); a pair counts as a match when its IOU reaches `match_iou`.
    Precision/recall are over instance counts, with the same empty
    conventions as the pixel metrics.
    """
    if not 0.0 <= match_iou <= 1.0:
        raise DomainError("match_iou must lie in [0, 1]")
    pairs = []
    for i, g in enumerate(gt_instances):
        for j, p in enumerate(pred_instances):
            v = iou(g, p)
            if v > 0.0:
                pairs.append((v, i, j))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))

    gt_free = set(range(len(gt_instances)))
    pred_free = set(range(len(pred_instances)))
    matches: list[tuple[int, int, float]] = []
    per_defect = [0.0] * len(gt_instances)
    for v, i, j in pairs:
        if i in gt_free and j in pred_free and v >= match_iou:
            gt_free.remove(i)
            pred_free.remove(j)
            matches.append((i, j, v))
            per_defect[i] = v
    matches.sort()

    n_gt, n_pred, n_match = len(gt_instances), len(pred_instances), len(matches)
    precision = n_match / n_pred if n_pred else 1.0
    recall = n_match / n_gt if n_gt else 1.0
    return DetectionOutcome(
        matches=matches, missed=sorted(gt_free), spurious=sorted(pred_free),
        precision=precision, recall=recall,
        f_gamma=f_score(precision, recall, gamma), match_iou=match_iou,
        per_defect_iou=per_defect)


def _clamped_probs(y: np.ndarray, y_prob: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(y, dtype=np.float64)
    prob = np.asarray(y_prob, dtype=np.float64)
    if truth.shape != prob.shape:
        raise DomainError(f"shapes differ: {truth.shape} vs {prob.shape}")
    if not np.all((truth == 0.0) | (truth == 1.0)):
        raise DomainError("ground truth must be binary")
    if np.any(prob < 0.0) or np.any(prob > 1.0):
        raise DomainError("probabilities must lie in [0, 1]")
    return truth, np.clip(prob, _EPS, 1.0 - _EPS)


def hybrid_loss(y: np.ndarray, y_prob: np.ndarray, beta: float = DEFAULT_BETA,
                positive_term_only: bool = False) -> tuple[float, float, float]:
    """(total, cross-entropy, soft-Dice) of predicted probabilities.

    Cross-entropy uses the full two-term form
        -(1/N) sum[y ln p + (1-y) ln(1-p)]
    after clamping p to [1e-7, 1 - 1e-7].  `positive_term_only` drops the
    (1-y) term, reproducing a reduced one-term variant for comparison
    experiments (that variant is minimized by p == 1 everywhere, so it is
    not the default).  The Dice term is 1 - 2*sum(y*p)/(sum(y^2)+sum(p^2)),
    and the total is cross-entropy + beta * dice.
    """
    truth, prob = _clamped_probs(y, y_prob)
    n = truth.size
    if n == 0:
        raise DomainError("empty mask")
    if positive_term_only:
        bce = -float(np.sum(truth * np.log(prob))) / n
    else:
        bce = -float(np.sum(truth * np.log(prob)
                            + (1.0 - truth) * np.log(1.0 - prob))) / n
    overlap = float(np.sum(truth * prob))
    denom = float(np.sum(truth * truth) + np.sum(prob * prob))
    dice = 1.0 - 2.0 * overlap / denom
    return bce + beta * dice, bce, dice


def hybrid_loss_grad(y: np.ndarray, y_prob: np.ndarray,
                     beta: float = DEFAULT_BETA,
                     positive_term_only: bool = False) -> np.ndarray:
    """Exact dL/dp of hybrid_loss, element-wise, at the clamped values."""
    truth, prob = _clamped_probs(y, y_prob)
    n = truth.size
    if n == 0:
        raise DomainError("empty mask")
    if positive_term_only:
        d_bce = -(truth / prob) / n
    else:
        d_bce = -(truth / prob - (1.0 - truth) / (1.0 - prob)) / n
    overlap = float(np.sum(truth * prob))
    denom = float(np.sum(truth * truth) + np.sum(prob * prob))
    d_dice = -2.0 * (truth * denom - 2.0 * prob * overlap) / (denom * denom)
    return d_bce + beta * d_dice


@dataclass
class ImageScore:
    """Pixel- and instance-level scores for one evaluated image."""

    image_id: str
    iou: float
    precision: float
    recall: float
    f_gamma: float
    detection: DetectionOutcome | None = None


@dataclass
class EvalReport:
    """Scores for a set of images plus their aggregates."""

    scores: list[ImageScore]
    gamma: float = DEFAULT_GAMMA
    fold_of: dict[str, int] = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for s in self.scores:
            for v in (s.iou, s.precision, s.recall, s.f_gamma):
                if not 0.0 <= v <= 1.0:
                    raise DomainError(f"{s.image_id}: metric {v} outside [0, 1]")

    def _mean_std(self, values: list[float]) -> tuple[float, float]:
        if not values:
            return math.nan, math.nan
        arr = np.asarray(values, dtype=np.float64)
        return float(arr.mean()), float(arr.std())

    def aggregates(self) -> dict[str, tuple[float, float]]:
        """mean and population std of each metric over images."""
        out = {}
        for name in ("iou", "precision", "recall", "f_gamma"):
            out[name] = self._mean_std([getattr(s, name) for s in self.scores])
        return out

    def fold_aggregates(self) -> dict[int, dict[str, tuple[float, float]]]:
        folds = sorted(set(self.fold_of.values()))
        out = {}
        for fold in folds:
            members = [s for s in self.scores if self.fold_of.get(s.image_id) == fold]
            sub = EvalReport(scores=members, gamma=self.gamma)
            out[fold] = sub.aggregates()
        return out

    def detection_totals(self) -> dict[str, float]:
        """Instance counts and rates pooled over every image."""
        matched = missed = spurious = 0
        ious: list[float] = []
        for s in self.scores:
            if s.detection is None:
                continue
            matched += len(s.detection.matches)
            missed += len(s.detection.missed)
            spurious += len(s.detection.spurious)
            ious.extend(s.detection.per_defect_iou)
        n_gt = matched + missed
        n_pred = matched + spurious
        recall = matched / n_gt if n_gt else 1.0
        precision = matched / n_pred if n_pred else 1.0
        return {
            "matched": float(matched), "missed": float(missed),
            "spurious": float(spurious),
            "recall": recall, "precision": precision,
            "f_gamma": f_score(precision, recall, self.gamma),
            "mean_defect_iou": float(np.mean(ious)) if ious else math.nan,
        }

    def to_csv(self) -> str:
        """One row per image, then a summary block; bit-stable output."""
        lines = ["id,iou,precision,recall,f2"]
        for s in sorted(self.scores, key=lambda s: s.image_id):
            lines.append(f"{s.image_id},{s.iou!r},{s.precision!r},"
                         f"{s.recall!r},{s.f_gamma!r}")
        lines.append("# aggregates (mean,std)")
        for name, (mean, std) in self.aggregates().items():
            lines.append(f"# {name},{mean!r},{std!r}")
        totals = self.detection_totals()
        lines.append("# detection (pooled instances)")
        for key in ("matched", "missed", "spurious", "recall", "precision",
                    "f_gamma", "mean_defect_iou"):
            lines.append(f"# {key},{totals[key]!r}")
        lines.append(f"# gamma,{self.gamma!r}")
        return "\n".join(lines) + "\n"
