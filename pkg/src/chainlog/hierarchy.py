"""The isKindOf hierarchy: depths, distances and relationship labels.

Edges are read as ``child,parent`` pairs. Depth is the length of the
shortest path from the root, found by breadth-first search over the
parent -> child direction. When several classes have no parent and no root
is given, a virtual root ``__ROOT__`` is placed above all of them.
"""

from __future__ import annotations

import csv
import enum
from collections import deque
from functools import lru_cache
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import NamedTuple, Optional

from .errors import CycleDetected, DisconnectedHierarchy, UnknownClass, UnknownRoot

VIRTUAL_ROOT = "__ROOT__"
DEFAULT_DISTANCE_CAP = 6


class Relationship(str, enum.Enum):
    SELF = "Self"
    CHILD = "Child"
    PARENT = "Parent"
    DESCENDANT = "Descendant"
    ANCESTOR = "Ancestor"
    SIBLING = "Sibling"
    COUSIN = "Cousin"
    OTHER = "Other"
    BREAK = "BREAK"

    def __str__(self):
        return self.value


class DirectedRelation(NamedTuple):
    direction: str  # "up" (towards the root) or "down"
    distance: int


class HierarchyGraph:
    """Immutable class hierarchy with memoized depth and ancestry queries.

    Parameters
    ----------
    edges : iterable of (child, parent)
    nodes : iterable of str, optional
        Extra isolated classes (treated as parentless).
    root : str, optional
        Class to use as root; must exist.
    """

    def __init__(self, edges, nodes=(), root=None):
        parents = {}
        for child, parent in edges:
            if child == parent:
                raise CycleDetected([child, child])
            parents.setdefault(child, set()).add(parent)
            parents.setdefault(parent, set())
        for n in nodes:
            parents.setdefault(n, set())
        if not parents:
            raise ValueError("hierarchy has no classes")

        try:
            tuple(TopologicalSorter(parents).static_order())
        except CycleError as exc:
            cycle = exc.args[1]
            # graphlib reports the cycle in dependency order (child -> parent)
            raise CycleDetected(cycle) from None

        roots = sorted(n for n, ps in parents.items() if not ps)
        if root is not None:
            if root not in parents:
                raise UnknownRoot(f"root class {root!r} not in hierarchy")
            stray = [r for r in roots if r != root]
            if stray:
                raise DisconnectedHierarchy(
                    f"{len(stray)} parentless class(es) not below root {root!r}: "
                    + ", ".join(stray[:10])
                )
        elif len(roots) == 1:
            root = roots[0]
        else:
            if VIRTUAL_ROOT in parents:
                raise ValueError(f"class id {VIRTUAL_ROOT!r} is reserved")
            root = VIRTUAL_ROOT
            parents[root] = set()
            for r in roots:
                parents[r].add(root)

        children = {n: [] for n in parents}
        for child, ps in parents.items():
            for p in ps:
                children[p].append(child)
        self._parents = {n: frozenset(ps) for n, ps in parents.items()}
        self._children = {n: tuple(sorted(cs)) for n, cs in children.items()}
        self.root = root
        self.depth = self._bfs_depths()
        self._ancestors = lru_cache(maxsize=None)(self._ancestor_distances)

    def _bfs_depths(self):
        depth = {self.root: 0}
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            for child in self._children[node]:
                if child not in depth:
                    depth[child] = depth[node] + 1
                    queue.append(child)
        if len(depth) != len(self._parents):
            missing = sorted(set(self._parents) - set(depth))
            raise DisconnectedHierarchy("classes unreachable from root: " + ", ".join(missing[:10]))
        return depth

    # -- basic accessors ------------------------------------------------

    def __contains__(self, class_id):
        return class_id in self._parents

    def __len__(self):
        return len(self._parents)

    @property
    def nodes(self):
        return frozenset(self._parents)

    @property
    def child_to_parents(self):
        return dict(self._parents)

    def parents(self, class_id):
        self._check(class_id)
        return self._parents[class_id]

    def children(self, class_id):
        self._check(class_id)
        return self._children[class_id]

    def grandparents(self, class_id):
        return frozenset(g for p in self.parents(class_id) for g in self._parents[p])

    def _check(self, *class_ids):
        missing = [c for c in class_ids if c not in self._parents]
        if missing:
            raise UnknownClass(missing)

    def _ancestor_distances(self, class_id):
        """Map every proper ancestor to its minimum number of parent hops."""
        dist = {}
        frontier = [class_id]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for node in frontier:
                for p in self._parents[node]:
                    if p not in dist:
                        dist[p] = d
                        nxt.append(p)
            frontier = nxt
        return dist

    def ancestors(self, class_id):
        self._check(class_id)
        return dict(self._ancestors(class_id))

    # -- queries ----------------------------------------------------------

    def directed_relation(self, source, target) -> Optional[DirectedRelation]:
        """Return ``up(d)`` if target is reached from source by d parent hops,
        ``down(d)`` if by d child hops, else None."""
        self._check(source, target)
        if source == target:
            return None
        d = self._ancestors(source).get(target)
        if d is not None:
            return DirectedRelation("up", d)
        d = self._ancestors(target).get(source)
        if d is not None:
            return DirectedRelation("down", d)
        return None

    def undirected_distance(self, a, b, cap=DEFAULT_DISTANCE_CAP):
        """Shortest path length between a and b with edges walkable both ways.

        Returns None when the distance exceeds ``cap``.
        """
        self._check(a, b)
        if cap < 1:
            raise ValueError("cap must be >= 1")
        if a == b:
            return 0
        # bidirectional BFS; each side expands its smaller frontier first
        seen_a, seen_b = {a: 0}, {b: 0}
        front_a, front_b = [a], [b]
        ra = rb = 0
        while front_a and front_b and ra + rb < cap:
            if len(front_a) <= len(front_b):
                front_a, ra = self._expand(front_a, seen_a, ra), ra + 1
                hits = [seen_a[n] + seen_b[n] for n in front_a if n in seen_b]
            else:
                front_b, rb = self._expand(front_b, seen_b, rb), rb + 1
                hits = [seen_a[n] + seen_b[n] for n in front_b if n in seen_a]
            if hits:
                best = min(hits)
                return best if best <= cap else None
        return None

    def _expand(self, frontier, seen, radius):
        nxt = []
        for node in frontier:
            for nb in self._parents[node]:
                if nb not in seen:
                    seen[nb] = radius + 1
                    nxt.append(nb)
            for nb in self._children[node]:
                if nb not in seen:
                    seen[nb] = radius + 1
                    nxt.append(nb)
        return nxt

    def classify(self, prev, nxt) -> Relationship:
        """Label the class ``nxt`` relative to the previously edited ``prev``."""
        self._check(prev, nxt)
        if prev == nxt:
            return Relationship.SELF
        rel = self.directed_relation(prev, nxt)
        if rel is not None:
            if rel.direction == "down":
                return Relationship.CHILD if rel.distance == 1 else Relationship.DESCENDANT
            return Relationship.PARENT if rel.distance == 1 else Relationship.ANCESTOR
        if self.depth[prev] != self.depth[nxt]:
            return Relationship.OTHER
        pa, pb = self._parents[prev], self._parents[nxt]
        if pa & pb:
            if self.undirected_distance(prev, nxt, cap=4) == 2:
                return Relationship.SIBLING
            return Relationship.OTHER
        if self.grandparents(prev) & self.grandparents(nxt):
            if self.undirected_distance(prev, nxt, cap=4) == 4:
                return Relationship.COUSIN
        return Relationship.OTHER


def load_hierarchy(path, root_override=None):
    """Read a ``child,parent`` CSV edge list (header optional)."""
    edges = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not any(cell.strip() for cell in row):
                continue
            cells = [c.strip() for c in row]
            if i == 0 and cells[:2] == ["child", "parent"]:
                continue
            if len(cells) != 2 or not all(cells):
                raise ValueError(f"{path}: line {i + 1}: expected 'child,parent'")
            edges.append((cells[0], cells[1]))
    return HierarchyGraph(edges, root=root_override)


def undirected_distance(g, a, b, cap=DEFAULT_DISTANCE_CAP):
    return g.undirected_distance(a, b, cap)


def directed_relation(g, source, target):
    return g.directed_relation(source, target)


def classify_relationship(g, prev, nxt):
    return g.classify(prev, nxt)
