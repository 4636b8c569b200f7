"""Markov chain models of order k fitted by maximum likelihood.

A model of order ``k`` conditions the next state on the ``k`` preceding
ones. Counts are taken with a sliding window inside each path; windows
never span two paths and there are no artificial start or end states.

With ``alpha = 0`` the estimate is plain normalized counts, and a history
that was never observed has no row at all (querying it raises
:class:`AbsentRow`). With ``alpha > 0`` additive smoothing is applied::

    p(j | h) = (counts[h, j] + alpha) / (sum_j counts[h, j] + alpha * |S|)
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import AbsentRow, InsufficientData, UnknownState
from .paths import InteractionPath

log = logging.getLogger(__name__)


class StateSpace:
    """Sorted, immutable set of state labels with a label -> index map."""

    def __init__(self, labels):
        self.labels = tuple(sorted(set(labels)))
        self.index = {lab: i for i, lab in enumerate(self.labels)}

    def __len__(self):
        return len(self.labels)

    def __contains__(self, label):
        return label in self.index

    def __iter__(self):
        return iter(self.labels)

    def __eq__(self, other):
        return isinstance(other, StateSpace) and self.labels == other.labels

    def __repr__(self):
        return f"StateSpace({list(self.labels)!r})"


def _labels_of(path):
    return path.labels if isinstance(path, InteractionPath) else tuple(path)


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Fitted transition model; ``counts`` is the source of truth.

    Attributes
    ----------
    order : int
    states : StateSpace
    histories : tuple of tuple
        Observed contexts (k-tuples of labels) in lexicographic order; row i of
        ``counts`` and ``probs`` belongs to ``histories[i]``.
    counts : ndarray of int64, shape (len(histories), len(states))
    alpha : float
    probs : ndarray of float64
        Rows with no mass are NaN (absent).
    """

    order: int
    states: StateSpace
    histories: tuple
    counts: np.ndarray
    alpha: float = 0.0

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).reshape(len(self.histories), len(self.states))
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "histories", tuple(tuple(h) for h in self.histories))
        object.__setattr__(self, "_row", {h: i for i, h in enumerate(self.histories)})
        totals = counts.sum(axis=1)
        denom = totals + self.alpha * len(self.states)
        with np.errstate(invalid="ignore", divide="ignore"):
            probs = (counts + self.alpha) / denom[:, None]
        probs[denom <= 0] = np.nan
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def n_transitions(self):
        return int(self.counts.sum())

    def row_present(self):
        return ~np.isnan(self.probs).any(axis=1)

    def _history(self, history):
        if self.order == 1 and not isinstance(history, tuple):
            history = (history,)
        history = tuple(history)
        if len(history) != self.order:
            raise ValueError(f"history must have length {self.order}, got {len(history)}")
        for lab in history:
            if lab not in self.states:
                raise UnknownState(lab)
        return history

    def row(self, history):
        """Probability vector over ``states`` for a history."""
        history = self._history(history)
        i = self._row.get(history)
        if i is not None and not np.isnan(self.probs[i, 0]):
            return self.probs[i]
        if self.alpha > 0:
            return np.full(len(self.states), 1.0 / len(self.states))
        raise AbsentRow(history)

    def count(self, history, nxt):
        history = self._history(history)
        if nxt not in self.states:
            raise UnknownState(nxt)
        i = self._row.get(history)
        return 0 if i is None else int(self.counts[i, self.states.index[nxt]])

    def full_matrix(self, which="probs"):
        """First-order square matrix over all states; absent rows are NaN."""
        if self.order != 1:
            raise ValueError("full_matrix is only defined for first-order models")
        n = len(self.states)
        if which == "counts":
            out = np.zeros((n, n), dtype=np.int64)
            src = self.counts
        else:
            out = np.full((n, n), np.nan)
            if self.alpha > 0:
                out[:] = 1.0 / n
            src = self.probs
        for h, i in self._row.items():
            out[self.states.index[h[0]]] = src[i]
        return out

    # -- persistence ------------------------------------------------------

    def to_dict(self):
        return {
            "order": self.order,
            "alpha": self.alpha,
            "states": list(self.states.labels),
            "histories": [list(h) for h in self.histories],
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, obj):
        states = StateSpace(obj["states"])
        if list(states.labels) != list(obj["states"]):
            raise ValueError("model states must be sorted and distinct")
        histories = [tuple(h) for h in obj["histories"]]
        counts = np.array(obj["counts"], dtype=np.int64).reshape(len(histories), len(states))
        return cls(int(obj["order"]), states, tuple(histories), counts, float(obj.get("alpha", 0.0)))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit(paths, order=1, alpha=0.0):
    """Fit a Markov chain of the given order to a collection of paths.

    Parameters
    ----------
    paths : iterable of InteractionPath or of label sequences
    order : int
        Number of preceding states the next state depends on (k >= 1).
    alpha : float
        Additive smoothing; 0 gives the maximum likelihood estimate.

    Raises
    ------
    InsufficientData
        If no path is longer than ``order``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    seqs = [_labels_of(p) for p in paths]
    states = StateSpace(lab for s in seqs for lab in s)
    index = states.index

    long_seqs = [s for s in seqs if len(s) > order]
    if not long_seqs:
        raise InsufficientData(f"no path is longer than the model order {order}")

    encoded = np.fromiter(
        (index[lab] for s in long_seqs for lab in s),
        dtype=np.int64,
        count=sum(len(s) for s in long_seqs),
    )
    lengths = np.array([len(s) for s in long_seqs], dtype=np.int64)
    path_id = np.repeat(np.arange(len(long_seqs)), lengths)
    windows = sliding_window_view(encoded, order + 1)
    valid = path_id[: len(windows)] == path_id[order:]
    windows = windows[valid]

    contexts, inverse = np.unique(windows[:, :order], axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    n = len(states)
    flat = np.bincount(inverse * n + windows[:, order], minlength=len(contexts) * n)
    counts = flat.reshape(len(contexts), n)
    histories = tuple(tuple(states.labels[i] for i in row) for row in contexts)
    return TransitionModel(order, states, histories, counts, float(alpha))


def transition_probability(m, history, nxt):
    """P(next | history). Raises AbsentRow for an unseen history when alpha is 0."""
    if nxt not in m.states:
        raise UnknownState(nxt)
    return float(m.row(history)[m.states.index[nxt]])


def predict_top_k(m, history, top=3):
    """Most likely next states, by probability then label."""
    if top < 1:
        raise ValueError("top must be >= 1")
    row = m.row(history)
    ranked = sorted(zip(m.states.labels, row.tolist()), key=lambda lp: (-lp[1], lp[0]))
    return ranked[:top]


def sample_paths(m, n_paths, length, seed=0, start=None):
    """Draw ``n_paths`` random walks of ``length`` labels from the model.

    ``start`` maps initial histories (or, for order 1, single labels) to
    weights; by default histories are weighted by their observed counts.
    The same seed always yields the same paths.
    """
    if n_paths < 1 or length < 1:
        raise ValueError("n_paths and length must be positive")
    rng = np.random.default_rng(seed)
    if start is None:
        starts = list(m.histories)
        weights = m.counts.sum(axis=1).astype(float)
    else:
        starts = [m._history(h) for h in start]
        weights = np.array([float(w) for w in start.values()])
    if len(starts) == 0 or weights.sum() <= 0 or (weights < 0).any():
        raise ValueError("start distribution has no mass")
    start_cum = np.cumsum(weights / weights.sum())

    cum_rows = {}

    def cum_row(history):
        c = cum_rows.get(history)
        if c is None:
            c = cum_rows[history] = np.cumsum(m.row(history))
        return c

    labels = m.states.labels
    last = len(labels) - 1
    out = []
    for i in range(n_paths):
        j = min(int(np.searchsorted(start_cum, rng.random(), side="right")), len(starts) - 1)
        seq = list(starts[j])
        draws = rng.random(max(0, length - len(seq)))
        for u in draws:
            history = tuple(seq[-m.order:])
            s = min(int(np.searchsorted(cum_row(history), u, side="right")), last)
            seq.append(labels[s])
        out.append(InteractionPath(f"sample-{i}", None, tuple(seq[:length])))
    return out


def log_likelihood(m, paths):
    """Sum of ln p over every (history, next) window in ``paths``.

    Returns ``-inf`` when any window has zero probability or an unseen
    history under an unsmoothed model.
    """
    total = 0.0
    impossible = 0
    for p in paths:
        seq = _labels_of(p)
        for lab in seq:
            if lab not in m.states:
                raise UnknownState(lab)
        for i in range(len(seq) - m.order):
            history = tuple(seq[i : i + m.order])
            try:
                prob = m.row(history)[m.states.index[seq[i + m.order]]]
            except AbsentRow:
                prob = 0.0
            if prob <= 0.0:
                impossible += 1
            else:
                total += math.log(prob)
    if impossible:
        log.warning("%d window(s) have zero probability under the model", impossible)
        return -math.inf
    return total


def expand_order(paths, k):
    """Rewrite each path as overlapping k-tuples so a first-order fit on the
    result reproduces an order-k fit. Paths shorter than k are dropped."""
    if k < 2:
        raise ValueError("k must be >= 2")
    out = []
    for p in paths:
        seq = _labels_of(p)
        if len(seq) < k:
            continue
        tuples = tuple(tuple(seq[i : i + k]) for i in range(len(seq) - k + 1))
        if isinstance(p, InteractionPath):
            out.append(InteractionPath(p.owner, p.kind, tuples))
        else:
            out.append(InteractionPath("", None, tuples))
    return out
