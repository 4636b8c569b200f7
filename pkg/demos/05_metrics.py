"""How evenly work is spread over users."""

from chainlog import gini_coefficient, normalized_entropy

projects = {
    "even": [50, 50, 50, 50],
    "skewed": [3, 1],
    "one heavy user": [970, 10, 10, 5, 5],
    "long tail": [400, 120, 60, 30, 15, 8, 4, 2, 1, 1],
}
print(f"{'':16s} entropy   gini")
for name, counts in projects.items():
    print(f"{name:16s} {normalized_entropy(counts):.4f}   {gini_coefficient(counts):.4f}")

# both measures ignore scale and ordering
x = [400, 120, 60, 30]
y = [v * 7 for v in reversed(x)]
print(abs(normalized_entropy(x) - normalized_entropy(y)), abs(gini_coefficient(x) - gini_coefficient(y)))
