"""Depths and pairwise relationships in a small class tree."""

from chainlog import HierarchyGraph

edges = [
    ("A", "R"), ("B", "R"), ("C", "R"),
    ("A1", "A"), ("A2", "A"), ("A1a", "A1"),
    ("B1", "B"), ("B2", "B"), ("B1a", "B1"),
    ("C1", "C"), ("C1a", "C1"),
]
g = HierarchyGraph(edges)
print("root:", g.root)
print("depths:", {n: g.depth[n] for n in sorted(g.nodes)})

pairs = [("A1", "A1"), ("A", "A1"), ("A1", "A"), ("R", "A1a"), ("A1a", "R"),
         ("A1", "A2"), ("A1", "B1"), ("A1", "C"), ("A1a", "B2")]
for a, b in pairs:
    print(f"{a:>4s} -> {b:<4s} {g.classify(a, b).value}")

# two parentless nodes get a shared virtual root
forest = HierarchyGraph([("x1", "x"), ("y1", "y")])
print("forest root:", forest.root, "depth of x1:", forest.depth["x1"])
