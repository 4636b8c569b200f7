"""Fit, query, sample from, and score Markov chains of order 1 and 2."""

import numpy as np

from chainlog import fit, log_likelihood, predict_top_k, sample_paths, transition_probability

paths = [
    ["Self", "Sibling", "Self", "Parent", "Child"],
    ["Self", "Self", "Sibling", "Sibling", "Other"],
    ["Child", "Self", "Sibling", "Self", "Self"],
]

m1 = fit(paths, order=1)
print("states:", m1.states.labels)
print(np.round(m1.full_matrix(), 3))
print("P(Sibling | Self) =", transition_probability(m1, "Self", "Sibling"))
print("top 2 after Self:", predict_top_k(m1, "Self", 2))

# "Other" never has a successor, so its row stays absent without smoothing
print("Other row:", m1.full_matrix()[m1.states.index["Other"]])
smooth = fit(paths, order=1, alpha=1.0)
print("smoothed Other row:", smooth.row("Other"))

m2 = fit(paths, order=2)
print("order-2 histories:", len(m2.histories))
print("P(Self | Self, Sibling) =", transition_probability(m2, ("Self", "Sibling"), "Self"))

# sampling needs a successor for every reachable state, so use the smoothed chain
fake = sample_paths(smooth, n_paths=3, length=8, seed=11, start={"Self": 1.0})
for p in fake:
    print(" ".join(p.labels))
print("log-likelihood of the data, order 1:", round(log_likelihood(m1, paths), 4))
print("log-likelihood of the data, smoothed:", round(log_likelihood(smooth, paths), 4))
