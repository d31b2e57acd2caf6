"""Independent reference computations used only by the tests."""
import numpy as np


def ar1_chain(phi, n, seed=0):
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = noise[0] / np.sqrt(1.0 - phi ** 2)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + noise[t]
    return x


def autocorrelations(x):
    x = np.asarray(x, dtype=float) - np.mean(x)
    n = x.size
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(x, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n] / n
    return acov / acov[0]


def truncated_sum_tau(x):
    """Autocorrelation sum truncated at the first non-positive pair (initial positive sequence)."""
    rho = autocorrelations(x)
    total = 0.0
    for k in range(0, rho.size - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        total += pair
    return -1.0 + 2.0 * total


def brute_force_complete_linkage(distance):
    """Complete linkage recomputing every cluster distance from scratch at each step.

    Returns ``[(left_members, right_members, height), ...]`` with the same
    tie-break: smallest least member of the first cluster, then of the second.
    """
    distance = np.asarray(distance, dtype=float)
    clusters = [(k,) for k in range(distance.shape[0])]
    merges = []
    while len(clusters) > 1:
        clusters.sort(key=lambda c: c[0])
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                height = max(distance[i, j] for i in clusters[a] for j in clusters[b])
                key = (height, clusters[a][0], clusters[b][0])
                if best is None or key < best[0]:
                    best = (key, a, b)
        (height, _, _), a, b = best
        left, right = clusters[a], clusters[b]
        merges.append((left, right, height))
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [tuple(sorted(left + right))]
    return merges


def brute_force_cut(merges, size, height):
    groups = [{k} for k in range(size)]
    if height > 0:
        for left, right, merge_height in merges:
            if merge_height > height:
                break
            a = next(g for g in groups if left[0] in g)
            b = next(g for g in groups if right[0] in g)
            groups = [g for g in groups if g is not a and g is not b] + [a | b]
    return sorted(tuple(sorted(g)) for g in groups)
