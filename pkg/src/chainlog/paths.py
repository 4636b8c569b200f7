"""Building sequential interaction paths from a change log.

User-view paths get a session BREAK wherever two consecutive changes of the
same user lie more than ``break_threshold`` seconds apart. The pipeline is
always: break insertion -> label extraction -> run merging.

Run merging caps each maximal run of equal run keys. Cap 1 removes every
repeat (user-sequence paths); cap 2 keeps exactly one self-transition (all
other path kinds).
"""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass
from itertools import groupby

from .errors import UnknownClass
from .hierarchy import Relationship

NO_PROPERTY = "no property"
BREAK_LABEL = "BREAK"


class PathKind(str, enum.Enum):
    USER_SEQUENCE = "user-seq"
    DEPTH = "depth"
    RELATIONSHIP = "relationship"
    PROPERTY_USER = "property-user"
    PROPERTY_CLASS = "property-class"
    ACTION = "action"

    def __str__(self):
        return self.value

    @property
    def needs_hierarchy(self):
        return self in (PathKind.DEPTH, PathKind.RELATIONSHIP)

    @property
    def user_view(self):
        return self not in (PathKind.USER_SEQUENCE, PathKind.PROPERTY_CLASS)


class _Break:
    """Session-break marker placed between two ChangeRecords."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BREAK"


BREAK = _Break()


@dataclass(frozen=True)
class SessionConfig:
    break_threshold: float = 300.0  # seconds
    break_label: str = BREAK_LABEL

    def __post_init__(self):
        if not self.break_threshold > 0:
            raise ValueError("break_threshold must be > 0")
        if not self.break_label:
            raise ValueError("break_label must be non-empty")

    @property
    def threshold_ms(self):
        return self.break_threshold * 1000.0


@dataclass(frozen=True)
class InteractionPath:
    owner: str
    kind: PathKind | None
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.kind is not None:
            object.__setattr__(self, "kind", PathKind(self.kind))
        if not self.labels:
            raise ValueError(f"path for {self.owner!r} has no labels")
        if any(lab == "" for lab in self.labels):
            raise ValueError("empty label in path")

    def __len__(self):
        return len(self.labels)

    def to_dict(self):
        kind = None if self.kind is None else self.kind.value
        return {"owner": self.owner, "kind": kind, "labels": list(self.labels)}

    @classmethod
    def from_dict(cls, obj):
        return cls(obj.get("owner", ""), obj.get("kind"), tuple(obj["labels"]))


def insert_breaks(events, cfg=None):
    """Interleave BREAK markers between events more than the threshold apart.

    A gap of exactly the threshold does not produce a marker.
    """
    cfg = cfg or SessionConfig()
    limit = cfg.threshold_ms
    out = []
    prev = None
    for ev in events:
        if prev is not None and ev.ts - prev.ts > limit:
            out.append(BREAK)
        out.append(ev)
        prev = ev
    return out


def merge_runs(labels, keys=None, cap=1):
    """Truncate every maximal run of equal keys to at most ``cap`` elements.

    ``keys`` runs parallel to ``labels``; by default the labels are their own
    keys. Order is preserved.

    >>> merge_runs(["A", "B", "B", "C"], cap=1)
    ['A', 'B', 'C']
    """
    if cap not in (1, 2):
        raise ValueError("cap must be 1 or 2")
    labels = list(labels)
    if keys is None:
        keys = labels
    else:
        keys = list(keys)
        if len(keys) != len(labels):
            raise ValueError("keys and labels differ in length")
    out = []
    for _, run in groupby(zip(keys, labels), key=lambda kl: kl[0]):
        for i, (_, label) in enumerate(run):
            if i < cap:
                out.append(label)
    return out


class _Unique:
    """A run key equal only to itself, so it never joins a run."""

    __slots__ = ()


def _by_owner(records, attr):
    groups = defaultdict(list)
    for r in records:
        groups[getattr(r, attr)].append(r)
    return {owner: groups[owner] for owner in sorted(groups)}


def _user_view_path(owner, kind, events, cfg, label_of, key_of):
    """Break insertion, then label extraction, then cap-2 merging."""
    labels, keys = [], []
    for item in insert_breaks(events, cfg):
        if item is BREAK:
            labels.append(cfg.break_label)
            keys.append(_Unique())
        else:
            labels.append(label_of(item))
            keys.append(key_of(item))
    return InteractionPath(owner, kind, merge_runs(labels, keys, cap=2))


def _require_classes(log, g):
    missing = [r for r in log.records if r.class_id not in g]
    if missing:
        raise UnknownClass([r.class_id for r in missing], missing)


def build_user_sequence_paths(log):
    """One path per class: its contributors in order, repeats collapsed."""
    paths = []
    for class_id, events in _by_owner(log.records, "class_id").items():
        users = [r.user for r in events]
        paths.append(InteractionPath(class_id, PathKind.USER_SEQUENCE, merge_runs(users, cap=1)))
    return paths


def depth_label(depth):
    return f"level-{depth}"


def build_depth_paths(log, g, cfg=None):
    """One path per user: depth level of each changed class."""
    cfg = cfg or SessionConfig()
    _require_classes(log, g)
    depth = g.depth
    return [
        _user_view_path(
            user,
            PathKind.DEPTH,
            events,
            cfg,
            label_of=lambda r: depth_label(depth[r.class_id]),
            key_of=lambda r: r.class_id,
        )
        for user, events in _by_owner(log.records, "user").items()
    ]


def build_relationship_paths(log, g, cfg=None):
    """One path per user: relationship of each changed class to the previous one.

    The relationship across a BREAK is still computed between the last class
    before and the first class after it. Runs of Self are capped at two.
    Users with a single change have no transitions and are dropped.
    """
    cfg = cfg or SessionConfig()
    _require_classes(log, g)
    cache = {}
    self_key = object()
    paths = []
    for user, events in _by_owner(log.records, "user").items():
        labels, keys = [], []
        prev = None
        for item in insert_breaks(events, cfg):
            if item is BREAK:
                labels.append(cfg.break_label)
                keys.append(_Unique())
                continue
            if prev is not None:
                pair = (prev.class_id, item.class_id)
                rel = cache.get(pair)
                if rel is None:
                    rel = cache[pair] = g.classify(*pair).value
                labels.append(rel)
                keys.append(self_key if rel == Relationship.SELF.value else _Unique())
            prev = item
        if labels:
            paths.append(InteractionPath(user, PathKind.RELATIONSHIP, merge_runs(labels, keys, cap=2)))
    return paths


def property_label(record):
    return record.property if record.property is not None else NO_PROPERTY


def build_property_paths(log, view="user", cfg=None):
    """Property-name paths, per user (with BREAKs) or per class (without)."""
    cfg = cfg or SessionConfig()
    if view == "user":
        return [
            _user_view_path(
                user,
                PathKind.PROPERTY_USER,
                events,
                cfg,
                label_of=property_label,
                key_of=lambda r: (r.class_id, property_label(r)),
            )
            for user, events in _by_owner(log.records, "user").items()
        ]
    if view == "class":
        paths = []
        for class_id, events in _by_owner(log.records, "class_id").items():
            labels = [property_label(r) for r in events]
            paths.append(InteractionPath(class_id, PathKind.PROPERTY_CLASS, merge_runs(labels, cap=2)))
        return paths
    raise ValueError(f"view must be 'user' or 'class', not {view!r}")


def build_action_paths(log, cfg=None):
    """One path per user: the change action of each event."""
    cfg = cfg or SessionConfig()
    return [
        _user_view_path(
            user,
            PathKind.ACTION,
            events,
            cfg,
            label_of=lambda r: r.action,
            key_of=lambda r: (r.class_id, r.action),
        )
        for user, events in _by_owner(log.records, "user").items()
    ]


def build_paths(log, kind, hierarchy=None, cfg=None):
    """Dispatch to the builder for ``kind``."""
    kind = PathKind(kind)
    if kind.needs_hierarchy and hierarchy is None:
        raise ValueError(f"path kind '{kind}' needs a hierarchy")
    if kind is PathKind.USER_SEQUENCE:
        return build_user_sequence_paths(log)
    if kind is PathKind.DEPTH:
        return build_depth_paths(log, hierarchy, cfg)
    if kind is PathKind.RELATIONSHIP:
        return build_relationship_paths(log, hierarchy, cfg)
    if kind is PathKind.PROPERTY_USER:
        return build_property_paths(log, "user", cfg)
    if kind is PathKind.PROPERTY_CLASS:
        return build_property_paths(log, "class", cfg)
    return build_action_paths(log, cfg)


def count_breaks(paths, break_label=BREAK_LABEL):
    return sum(1 for p in paths for lab in p.labels if lab == break_label)


def moved_before_changed(log, move_actions=frozenset({"class_moved"})):
    """Count changes on classes that were moved later on.

    Returns None when the log carries no move actions at all.
    """
    last_move = {}
    for r in log.records:
        if r.action in move_actions:
            last_move[r.class_id] = (r.ts, r.seq)
    if not last_move:
        return None
    return sum(
        1
        for r in log.records
        if r.class_id in last_move and (r.ts, r.seq) < last_move[r.class_id]
    )


def write_paths_jsonl(paths, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in paths:
            fh.write(json.dumps(p.to_dict(), ensure_ascii=False) + "\n")


def read_paths_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [InteractionPath.from_dict(json.loads(line)) for line in fh if line.strip()]
