"""Numeric hot kernels: label embedding and similarity search.

Labels embed as L2-normalized 256-bin histograms of character trigrams,
each trigram hashed with 32-bit FNV-1a over its little-endian UTF-32
code points. Labels shorter than three characters hash as a single gram.
The scheme is fixed so embeddings are bit-identical across platforms.

Both kernels ship in two variants: a numba ``@njit`` build and a pure
numpy path. Set ``KBFORGE_PURE_NUMPY=1`` to force the numpy path (also
used automatically when numba is unavailable).
"""

from __future__ import annotations

import os

import numpy as np

EMBED_DIM = 256

_FNV_BASIS = np.uint64(0x811C9DC5)
_FNV_PRIME = np.uint64(0x01000193)
_MASK32 = np.uint64(0xFFFFFFFF)

PURE_NUMPY = os.environ.get("KBFORGE_PURE_NUMPY", "0") not in ("", "0")

if not PURE_NUMPY:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        PURE_NUMPY = True


def labels_to_arrays(labels: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Pack labels into a flat uint32 code-point array plus row offsets."""
    joined = "".join(labels)
    codes = np.frombuffer(joined.encode("utf-32-le"), dtype=np.uint32)
    offsets = np.zeros(len(labels) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in labels], out=offsets[1:])
    return codes, offsets


def _embed_rows_np(codes: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    out = np.zeros((len(offsets) - 1, EMBED_DIM), dtype=np.float32)
    for row in range(len(offsets) - 1):
        lo, hi = offsets[row], offsets[row + 1]
        n = hi - lo
        if n == 0:
            continue
        if n < 3:
            grams = codes[lo:hi].reshape(1, n)
        else:
            grams = np.lib.stride_tricks.sliding_window_view(codes[lo:hi], 3)
        h = np.full(grams.shape[0], _FNV_BASIS)
        for col in range(grams.shape[1]):
            c = grams[:, col].astype(np.uint64)
            for shift in (0, 8, 16, 24):
                h = ((h ^ ((c >> np.uint64(shift)) & np.uint64(0xFF))) * _FNV_PRIME) & _MASK32
        np.add.at(out[row], (h % np.uint64(EMBED_DIM)).astype(np.int64), 1.0)
        counts = out[row].astype(np.float64)
        out[row] = (counts / np.sqrt(counts @ counts)).astype(np.float32)
    return out


def _best_targets_np(emb: np.ndarray, first_candidate: np.ndarray, preference: np.ndarray):
    n = emb.shape[0]
    emb64 = emb.astype(np.float64)
    best = np.full(n, -1, dtype=np.int64)
    best_sim = np.full(n, -1.0, dtype=np.float64)
    for i in range(n):
        lo = first_candidate[i]
        if lo >= n:
            continue
        sims = emb64[lo:] @ emb64[i]
        top = sims.max()
        ties = np.flatnonzero(sims == top) + lo
        best[i] = ties[np.argmin(preference[ties])]
        best_sim[i] = top
    return best, best_sim


if not PURE_NUMPY:

    @numba.njit(cache=True)
    def _embed_rows_jit(codes, offsets):  # pragma: no cover - exercised via dispatch
        n_rows = offsets.shape[0] - 1
        out = np.zeros((n_rows, EMBED_DIM), dtype=np.float32)
        for row in range(n_rows):
            lo, hi = offsets[row], offsets[row + 1]
            length = hi - lo
            if length == 0:
                continue
            gram = 3 if length >= 3 else length
            n_grams = length - gram + 1
            for g in range(n_grams):
                h = np.uint64(0x811C9DC5)
                for k in range(gram):
                    c = np.uint64(codes[lo + g + k])
                    for shift in (np.uint64(0), np.uint64(8), np.uint64(16), np.uint64(24)):
                        h = ((h ^ ((c >> shift) & np.uint64(0xFF))) * np.uint64(0x01000193)) & np.uint64(0xFFFFFFFF)
                out[row, h % np.uint64(EMBED_DIM)] += np.float32(1.0)
            norm = 0.0
            for d in range(EMBED_DIM):
                norm += np.float64(out[row, d]) * np.float64(out[row, d])
            norm = np.sqrt(norm)
            for d in range(EMBED_DIM):
                out[row, d] = np.float32(np.float64(out[row, d]) / norm)
        return out

    @numba.njit(cache=True)
    def _best_targets_jit(emb, first_candidate, preference):  # pragma: no cover
        n = emb.shape[0]
        emb64 = emb.astype(np.float64)
        best = np.full(n, -1, dtype=np.int64)
        best_sim = np.full(n, -1.0, dtype=np.float64)
        for i in range(n):
            lo = first_candidate[i]
            if lo >= n:
                continue
            sims = emb64[lo:] @ emb64[i]
            for j in range(sims.shape[0]):
                s = sims[j]
                cand = lo + j
                if s > best_sim[i] or (
                    s == best_sim[i] and best[i] >= 0 and preference[cand] < preference[best[i]]
                ):
                    best_sim[i] = s
                    best[i] = cand
        return best, best_sim


def embed_rows(codes: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Embed packed labels into unit-norm (n, 256) float32 rows."""
    if PURE_NUMPY:
        return _embed_rows_np(codes, offsets)
    return _embed_rows_jit(codes, offsets)


def embed_labels(labels: list[str]) -> np.ndarray:
    if not labels:
        return np.zeros((0, EMBED_DIM), dtype=np.float32)
    codes, offsets = labels_to_arrays(labels)
    return embed_rows(codes, offsets)


def best_merge_targets(
    emb: np.ndarray, first_candidate: np.ndarray, preference: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per row i, the most similar row j >= first_candidate[i].

    Similarity is the float64 dot product; exact ties resolve to the
    lowest preference rank. Rows with no candidates get index -1.
    """
    if PURE_NUMPY:
        return _best_targets_np(emb, first_candidate, preference)
    return _best_targets_jit(emb, first_candidate, preference)
