"""From posterior samples to candidate sampler plans.

Correlations of the retained samples become distances ``1 - |rho|``, a
complete-linkage dendrogram is grown over the theta slots, and cutting it at
height ``h`` yields groups whose members are pairwise at least ``1 - h``
correlated in absolute value.
"""
import logging
from dataclasses import dataclass

import numpy as np

from blockmcmc.exceptions import TooFewSamples
from blockmcmc.samplers import SamplerPlan

logger = logging.getLogger(__name__)

MIN_RETAINED = 10


def _samples(chain):
    return np.asarray(getattr(chain, 'samples', chain), dtype=float)


def correlation_matrix(chain, discard_fraction=0.5):
    """Pearson correlations of the rows kept after discarding the first ``discard_fraction``.

    Zero-variance columns correlate 0 with everything else and 1 with themselves.
    """
    samples = _samples(chain)
    if samples.ndim != 2:
        raise TooFewSamples('Expected an N x d sample matrix')
    start = int(samples.shape[0] * discard_fraction)
    retained = samples[start:]
    if retained.shape[0] < MIN_RETAINED:
        raise TooFewSamples(
            f'Only {retained.shape[0]} samples left after discarding {discard_fraction:.0%}; need {MIN_RETAINED}'
        )
    centered = retained - retained.mean(axis=0)
    sd = np.sqrt((centered ** 2).mean(axis=0))
    stuck = (sd == 0.0) | (np.ptp(retained, axis=0) == 0.0)
    scaled = np.zeros_like(centered)
    scaled[:, ~stuck] = centered[:, ~stuck] / sd[~stuck]
    correlation = scaled.T @ scaled / retained.shape[0]
    correlation = np.clip(0.5 * (correlation + correlation.T), -1.0, 1.0)
    correlation[stuck, :] = 0.0
    correlation[:, stuck] = 0.0
    np.fill_diagonal(correlation, 1.0)
    if stuck.any():
        logger.debug('%d zero-variance columns treated as uncorrelated', int(stuck.sum()))
    return correlation


def distance_matrix(correlation):
    distance = 1.0 - np.abs(np.asarray(correlation, dtype=float))
    distance = np.clip(0.5 * (distance + distance.T), 0.0, 1.0)
    np.fill_diagonal(distance, 0.0)
    return distance


@dataclass(frozen=True)
class Merge:
    left: tuple
    right: tuple
    height: float
    # Cluster ids in SciPy's numbering: leaves 0..d-1, merge i creates d + i.
    left_id: int
    right_id: int

    @property
    def members(self):
        return tuple(sorted(self.left + self.right))


@dataclass(frozen=True)
class Dendrogram:
    size: int
    merges: tuple

    @property
    def heights(self):
        return [merge.height for merge in self.merges]

    @property
    def leaf_order(self):
        if not self.merges:
            return list(range(self.size))
        children = {self.size + i: (m.left_id, m.right_id) for i, m in enumerate(self.merges)}
        order, stack = [], [self.size + len(self.merges) - 1]
        while stack:
            node = stack.pop()
            if node < self.size:
                order.append(node)
            else:
                left, right = children[node]
                stack.extend((right, left))
        return order

    def to_json(self, slot_names=None):
        def label(members):
            return [slot_names[k] for k in members] if slot_names is not None else list(members)

        return {
            'size': self.size,
            'merges': [
                {'left': label(m.left), 'right': label(m.right), 'height': m.height}
                for m in self.merges
            ],
            'leaf_order': label(self.leaf_order),
            'linkage': self.to_scipy_linkage().tolist(),
        }

    def to_scipy_linkage(self):
        """The merges as a ``scipy.cluster.hierarchy`` linkage matrix."""
        linkage = np.zeros((len(self.merges), 4))
        for i, merge in enumerate(self.merges):
            linkage[i] = (merge.left_id, merge.right_id, merge.height, len(merge.left) + len(merge.right))
        return linkage


def complete_linkage(distance):
    """Agglomerative clustering with the maximum pairwise distance between clusters.

    Ties are broken towards the pair with the smallest least members, first
    cluster first.
    """
    distance = np.asarray(distance, dtype=float)
    d = distance.shape[0]
    # Active clusters are indexed by their least member; only i < j is used.
    work = np.triu(distance, k=1)
    work[np.tril_indices(d)] = np.inf
    members = {k: (k,) for k in range(d)}
    ids = {k: k for k in range(d)}
    merges = []
    for step in range(d - 1):
        flat = int(np.argmin(work))
        i, j = divmod(flat, d)
        height = float(work[i, j])
        merges.append(Merge(members[i], members[j], height, ids[i], ids[j]))
        # Complete linkage: the merged cluster is as far as its farthest half.
        row = np.fmax(np.concatenate([work[:i, i], [np.inf], work[i, i + 1:]]),
                      np.concatenate([work[:j, j], [np.inf], work[j, j + 1:]]))
        active = np.array([k in members for k in range(d)])
        active[[i, j]] = False
        row[~active] = np.inf
        work[:i, i] = row[:i]
        work[i, i + 1:] = row[i + 1:]
        work[j, :] = np.inf
        work[:, j] = np.inf
        members[i] = tuple(sorted(members[i] + members.pop(j)))
        ids[i] = d + step
        del ids[j]
    return Dendrogram(d, tuple(merges))


@dataclass(frozen=True)
class Partition:
    """Disjoint groups of theta slots ordered by least member."""
    groups: tuple

    @classmethod
    def of(cls, groups):
        return cls(tuple(sorted((tuple(sorted(int(k) for k in g)) for g in groups), key=lambda g: g[0])))

    def __len__(self):
        return len(self.groups)

    def to_names(self, slot_names):
        return [[slot_names[k] for k in group] for group in self.groups]


def cut(dendrogram, height):
    """Groups formed by the merges at or below ``height``; height 0 is always all singletons."""
    parent = list(range(dendrogram.size))

    def find(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    if height > 0:
        for merge in dendrogram.merges:
            if merge.height > height:
                break
            a, b = find(merge.left[0]), find(merge.right[0])
            parent[max(a, b)] = min(a, b)
    groups = {}
    for k in range(dendrogram.size):
        groups.setdefault(find(k), []).append(k)
    return Partition.of(groups.values())


def plan_from_partition(partition):
    groups = partition.groups if isinstance(partition, Partition) else partition
    return SamplerPlan.from_groups(groups, sum(len(g) for g in groups))
