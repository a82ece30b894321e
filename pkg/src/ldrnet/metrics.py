"""Binary detection metrics: thresholded accuracy and ranking average precision.

Average precision is the information-retrieval variant: the mean of
precision@k over the ranks k of the positive samples in the score-descending
ordering.  Ties are broken by ascending original index, so every metric is a
pure function of the (score, label, index) triples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class ScoredSample:
    """A classifier score, its ground-truth label, and its original position."""

    score: float
    label: int
    index: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise DomainError(f"label must be 0 or 1, got {self.label}")


def make_samples(scores, labels) -> list[ScoredSample]:
    """Pair scores and labels, recording list positions as tie-break indices."""
    scores = list(scores)
    labels = list(labels)
    if len(scores) != len(labels):
        raise DomainError(f"{len(scores)} scores vs {len(labels)} labels")
    return [
        ScoredSample(score=float(s), label=int(y), index=i)
        for i, (s, y) in enumerate(zip(scores, labels))
    ]


def accuracy(samples, threshold: float = 0.5) -> float:
    """Fraction of samples where (score > threshold) agrees with the label.

    The comparison is strict, matching the detector's decision rule.
    """
    samples = list(samples)
    if not samples:
        raise DomainError("accuracy of an empty sample set is undefined")
    correct = sum(1 for s in samples if (s.score > threshold) == (s.label == 1))
    return correct / len(samples)


def _ranked(samples) -> list[ScoredSample]:
    # Descending score; ascending original index among ties.
    return sorted(samples, key=lambda s: (-s.score, s.index))


def average_precision(samples) -> float:
    """Mean of precision@k over the ranks k of the positive samples."""
    ranked = _ranked(samples)
    n_pos = sum(s.label for s in ranked)
    if n_pos == 0:
        raise DomainError("average precision requires at least one positive sample")
    total = 0.0
    tp = 0
    for k, s in enumerate(ranked, start=1):
        if s.label == 1:
            tp += 1
            total += tp / k
    return total / n_pos


def pr_curve(samples) -> list[tuple[float, float]]:
    """(recall, precision) points, one per distinct score threshold.

    Thresholds run in descending-score order and the curve stops once recall
    reaches 1.0 (further thresholds only add false positives).  Recall is
    non-decreasing along the returned points.
    """
    ranked = _ranked(samples)
    n_pos = sum(s.label for s in ranked)
    if n_pos == 0:
        raise DomainError("a PR curve requires at least one positive sample")
    points: list[tuple[float, float]] = []
    tp = 0
    for k, s in enumerate(ranked, start=1):
        tp += s.label
        last_of_group = k == len(ranked) or ranked[k].score != s.score
        if last_of_group:
            points.append((tp / n_pos, tp / k))
            if tp == n_pos:
                break
    return points


@dataclass
class EvalReport:
    """Accuracy, average precision, class counts and the PR curve."""

    acc: float
    ap: float
    n_pos: int
    n_neg: int
    pr_points: list[tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "acc": self.acc,
            "ap": self.ap,
            "n_pos": self.n_pos,
            "n_neg": self.n_neg,
            "pr_points": [[r, p] for r, p in self.pr_points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            acc=float(d["acc"]),
            ap=float(d["ap"]),
            n_pos=int(d["n_pos"]),
            n_neg=int(d["n_neg"]),
            pr_points=[(float(r), float(p)) for r, p in d["pr_points"]],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_dict(json.loads(text))


def evaluate(samples, threshold: float = 0.5) -> EvalReport:
    """Bundle accuracy, AP and the PR curve of one scored sample set."""
    samples = list(samples)
    n_pos = sum(s.label for s in samples)
    return EvalReport(
        acc=accuracy(samples, threshold),
        ap=average_precision(samples),
        n_pos=n_pos,
        n_neg=len(samples) - n_pos,
        pr_points=pr_curve(samples),
    )
