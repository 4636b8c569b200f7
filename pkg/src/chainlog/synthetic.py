"""Seeded synthetic hierarchies and change logs for demos and load tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

ACTIONS = ("property_value_changed", "class_moved", "class_created")
PROPERTIES = ("title", "definition", "use", "synonym", "code", "note")


def generate_hierarchy(n_classes, max_depth=10, seed=0):
    """Random single-rooted tree as (child, parent) edges.

    Class ``c0`` is the root; every other class hangs below an earlier class
    whose depth is below ``max_depth``.
    """
    rng = np.random.default_rng(seed)
    depth = np.zeros(n_classes, dtype=np.int64)
    edges = []
    eligible = [0]
    for i in range(1, n_classes):
        parent = eligible[int(rng.integers(len(eligible)))]
        depth[i] = depth[parent] + 1
        edges.append((f"c{i}", f"c{parent}"))
        if depth[i] < max_depth:
            eligible.append(i)
    return edges


def generate_records(n_records, n_users, n_classes, seed=0, start_ms=1_258_000_000_000):
    """Random change events as JSON-ready dicts, roughly session-shaped.

    Each user keeps a private clock: most gaps between their own changes are
    seconds to two minutes, about one in twenty exceeds five minutes. Rows
    come out in generation order, not time order. Consecutive edits of a
    user tend to stay on the same or a nearby class id.
    """
    rng = np.random.default_rng(seed)
    users = rng.integers(n_users, size=n_records)
    gaps = np.where(
        rng.random(n_records) < 0.05,
        rng.integers(301_000, 7_200_000, n_records),
        rng.integers(1_000, 120_000, n_records),
    )
    jump = rng.random(n_records)
    step = rng.integers(-3, 4, n_records)
    fresh = rng.integers(n_classes, size=n_records)
    action_ix = rng.choice(len(ACTIONS), size=n_records, p=[0.8, 0.1, 0.1])
    prop_ix = rng.integers(len(PROPERTIES), size=n_records)

    clock = {}
    last_class = {}
    rows = []
    for i in range(n_records):
        u = int(users[i])
        prev = last_class.get(u)
        if prev is None or jump[i] < 0.3:
            cls = int(fresh[i])
        elif jump[i] < 0.6:
            cls = prev
        else:
            cls = min(max(prev + int(step[i]), 0), n_classes - 1)
        last_class[u] = cls
        clock[u] = clock.get(u, start_ms) + int(gaps[i])
        action = ACTIONS[action_ix[i]]
        row = {"ts": clock[u], "user": f"user{u}", "class": f"c{cls}", "action": action}
        if action == "property_value_changed":
            row["property"] = PROPERTIES[prop_ix[i]]
        rows.append(row)
    return rows


def write_synthetic(out_dir, n_records=5_000, n_users=50, n_classes=500, max_depth=10, seed=0):
    """Write ``log.jsonl`` and ``hierarchy.csv`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    edges = generate_hierarchy(n_classes, max_depth, seed)
    with (out_dir / "hierarchy.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("child,parent\n")
        fh.writelines(f"{c},{p}\n" for c, p in edges)
    rows = generate_records(n_records, n_users, n_classes, seed)
    with (out_dir / "log.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(json.dumps(r) + "\n" for r in rows)
    return out_dir / "log.jsonl", out_dir / "hierarchy.csv"
