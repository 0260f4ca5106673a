"""Brute-force reimplementation of the greedy merge rule, for cross-checks.

Plain dict/list code path: no frequency-sorted arrays, no batched
similarity kernel. Shares only the embedding vectors with the engine.
"""

from __future__ import annotations

import numpy as np


def greedy_merge_bruteforce(stats, threshold, embedder):
    """Returns (entries, merges) like CanonMapping's fields.

    Rule: ascending (frequency, label) processing; candidates are all
    strictly more frequent labels; best candidate by cosine with ties to
    (higher frequency, then smaller label); merge when cosine >= threshold;
    chains closed at the end.
    """
    labels = [s.label for s in stats]
    freq = {s.label: s.frequency for s in stats}
    emb = {
        label: np.asarray(vec, dtype=np.float64)
        for label, vec in zip(labels, embedder.embed_batch(labels))
    }
    direct = {}
    merges = []
    for label in sorted(labels, key=lambda l: (freq[l], l)):
        candidates = [c for c in labels if freq[c] > freq[label]]
        best = None
        best_sim = None
        for candidate in candidates:
            sim = float(emb[label] @ emb[candidate])
            better = best is None or sim > best_sim
            tie = (
                best is not None
                and sim == best_sim
                and (-freq[candidate], candidate) < (-freq[best], best)
            )
            if better or tie:
                best, best_sim = candidate, sim
        if best is not None and best_sim >= threshold:
            direct[label] = best
            merges.append((label, best, best_sim))

    def resolve(label):
        while label in direct:
            label = direct[label]
        return label

    entries = {label: resolve(label) for label in labels}
    return entries, merges
