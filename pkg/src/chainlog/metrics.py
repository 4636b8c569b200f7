"""Contribution histograms and inequality measures."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistribution
from .paths import InteractionPath

__all__ = [
    "ContributionDistribution",
    "state_histogram",
    "user_contributions",
    "normalized_entropy",
    "gini_coefficient",
]


@dataclass(frozen=True)
class ContributionDistribution:
    """Non-negative counts per label. Zero entries count towards ``n``."""

    entries: dict

    def __post_init__(self):
        entries = {k: int(v) for k, v in sorted(self.entries.items())}
        if any(v < 0 for v in entries.values()):
            raise ValueError("counts must be non-negative")
        if not any(v > 0 for v in entries.values()):
            raise ValueError("distribution needs at least one positive count")
        object.__setattr__(self, "entries", entries)

    @property
    def total(self):
        return sum(self.entries.values())

    @property
    def n(self):
        return len(self.entries)

    def counts(self):
        return np.array(list(self.entries.values()), dtype=float)

    @classmethod
    def from_counts(cls, counts):
        """Build from a plain sequence; labels become positions."""
        return cls({i: c for i, c in enumerate(counts)})


def state_histogram(paths):
    """Occurrences of every label across all path elements."""
    counter = Counter()
    for p in paths:
        counter.update(p.labels if isinstance(p, InteractionPath) else p)
    if not counter:
        raise ValueError("no paths to count")
    return ContributionDistribution(dict(counter))


def user_contributions(log, roster=None):
    """Raw change counts per user; ``roster`` adds users with zero changes."""
    counter = Counter(r.user for r in log.records)
    if roster is not None:
        for user in roster:
            counter.setdefault(user, 0)
    return ContributionDistribution(dict(counter))


def _as_counts(d):
    if isinstance(d, ContributionDistribution):
        return d.counts()
    x = np.asarray(d, dtype=float)
    if (x < 0).any() or not (x > 0).any():
        raise ValueError("counts must be non-negative with at least one positive")
    return x


def normalized_entropy(d):
    """Shannon entropy divided by ln(n); 1 means perfectly even, 0 means one
    label holds everything."""
    x = _as_counts(d)
    n = x.size
    if n < 2:
        raise DegenerateDistribution("normalized entropy needs at least two entries")
    positive = x[x > 0]
    # exact endpoints, avoiding rounding in the log ratio
    if positive.size == 1:
        return 0.0
    if positive.size == n and (positive == positive[0]).all():
        return 1.0
    p = positive / x.sum()
    h =float(-(p * np.log(p)).sum() / np.log(n))
    return min(max(h, 0.0), 1.0)


def gini_coefficient(d):
    """Population Gini coefficient, ``sum_ij |x_i - x_j| / (2 n sum x)``.

    Evaluated in O(n log n) through the sorted-rank identity.
    """
    x = _as_counts(d)
    n = x.size
    if n < 2:
        raise DegenerateDistribution("Gini coefficient needs at least two entries")
    x = np.sort(x)
    ranks = np.arange(1, n + 1)
    # sum_ij |x_i - x_j| = 2 * sum_i (2i - n - 1) x_(i)
    return float(((2 * ranks - n - 1) * x).sum() / (n * x.sum()))
