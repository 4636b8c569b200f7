import json
import random

import pytest

from chainlog.hierarchy import HierarchyGraph
from chainlog.ingest import ChangeLog, ChangeRecord

# R
# |- A -- A1 -- A1a
# |    `- A2
# |- B -- B1 -- B1a
# |    `- B2
# `- C -- C1 -- C1a
TREE_EDGES = [
    ("A", "R"), ("B", "R"), ("C", "R"),
    ("A1", "A"), ("A2", "A"), ("A1a", "A1"),
    ("B1", "B"), ("B2", "B"), ("B1a", "B1"),
    ("C1", "C"), ("C1a", "C1"),
]


@pytest.fixture
def tree():
    return HierarchyGraph(TREE_EDGES)


def make_log(events, start=1_000_000_000_000):
    """Build a ChangeLog from (offset_seconds, user, class, action, property) tuples."""
    records = []
    for seq, ev in enumerate(events):
        offset, user, cls = ev[:3]
        action = ev[3] if len(ev) > 3 else "property_value_changed"
        prop = ev[4] if len(ev) > 4 else ("title" if action == "property_value_changed" else None)
        records.append(ChangeRecord(seq, start + int(offset * 1000), user, cls, action, prop))
    records.sort(key=lambda r: (r.ts, r.seq))
    return ChangeLog(tuple(records))


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def random_tree_edges(rng: random.Random, n_nodes):
    """Random single-parent tree on nodes n0..n{k-1} rooted at n0."""
    return [(f"n{i}", f"n{rng.randrange(i)}") for i in range(1, n_nodes)]


def random_paths(rng: random.Random, max_states=10, max_paths=50, max_len=30):
    n_states = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n_states)]
    return [
        [rng.choice(states) for _ in range(rng.randint(1, max_len))]
        for _ in range(rng.randint(1, max_paths))
    ]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
