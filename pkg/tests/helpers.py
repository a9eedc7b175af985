"""Independent brute-force oracles the engine-path tests compare against.

Everything here recounts from scratch with plain Python loops; none of it
shares code with the vectorized paths under test.
"""

import math
from collections import Counter


def brute_force_bag(window, n_s):
    counts = [0] * n_s
    for s in window:
        counts[s] += 1
    return tuple(counts)


def brute_force_epoch_bags(epoch, w, n_s):
    """Every window's bag, one by one, stride 1, within a single epoch."""
    return [brute_force_bag(epoch[i : i + w], n_s) for i in range(len(epoch) - w + 1)]


def brute_force_db(slot_stream, S, w, n_s):
    """From-scratch recount of the whole training db over full epochs."""
    freq = Counter()
    n_full = len(slot_stream) // S
    for e in range(n_full):
        epoch = slot_stream[e * S : (e + 1) * S]
        for bag in brute_force_epoch_bags(epoch, w, n_s):
            freq[bag] += 1
    return dict(freq)


def brute_force_mismatches(epoch, w, n_s, known_bags):
    return sum(1 for bag in brute_force_epoch_bags(epoch, w, n_s) if bag not in known_bags)


def reference_cosine(a, b):
    """Textbook cosine over two equal-length sequences."""
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)
