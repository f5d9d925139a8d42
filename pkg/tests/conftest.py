"""Shared test helpers.

The naive curve evaluator recomputes every bucket straight from the
definition with independent arithmetic (numpy means over slices, no
prefix sums), so it can serve as an oracle for the O(n) implementation.
"""

import numpy as np


def naive_curve(values):
    w = np.sort(np.asarray(values, dtype=float))
    n = w.size
    out = np.empty(n - 1)
    for k in range(1, n):
        lower = w[:k].mean() - w[k - 1]
        upper = w[k:].mean() - w[k]
        out[k - 1] = lower + upper
    return out


def random_samples(seed, count, size_range=(5, 200), law="mixed"):
    """Deterministic stream of float test samples."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(size_range[0], size_range[1] + 1))
        kind = law if law != "mixed" else rng.choice(["normal", "exp", "uniform"])
        if kind == "normal":
            yield rng.normal(1.5, 2.0, n)
        elif kind == "exp":
            yield rng.exponential(1.0, n)
        else:
            yield rng.uniform(-1.0, 3.0, n)
