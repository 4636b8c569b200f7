"""Every path family built from one hand-written log."""

from datetime import datetime, timezone

from chainlog import HierarchyGraph, PathKind, build_paths
from chainlog.ingest import ChangeRecord, build_changelog

g = HierarchyGraph([("A", "R"), ("B", "R"), ("A1", "A"), ("A2", "A"), ("B1", "B")])

t0 = int(datetime(2010, 3, 1, tzinfo=timezone.utc).timestamp() * 1000)
events = [
    # seconds, user, class, action, property
    (0, "ana", "A1", "property_value_changed", "title"),
    (20, "ana", "A1", "property_value_changed", "title"),
    (40, "ana", "A2", "property_value_changed", "definition"),
    (50, "bo", "A2", "property_value_changed", "title"),
    (70, "ana", "A", "class_moved", None),
    (900, "ana", "B1", "property_value_changed", "title"),  # after a long pause
    (960, "bo", "B", "class_created", None),
]
log = build_changelog(
    [ChangeRecord(i, t0 + s * 1000, u, c, a, p) for i, (s, u, c, a, p) in enumerate(events)]
)

for kind in PathKind:
    print(f"-- {kind.value}")
    for path in build_paths(log, kind, g if kind.needs_hierarchy else None):
        print(f"   {path.owner:4s}", " | ".join(path.labels))
