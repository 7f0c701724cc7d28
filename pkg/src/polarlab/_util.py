"""Shared numeric helpers."""

from __future__ import annotations

import numpy as np


def entropy_bits(p: np.ndarray) -> float:
    """Shannon entropy -sum(p * log2 p) in bits, with 0*log(0) = 0."""
    p = np.asarray(p, dtype=float)
    nz = p > 0.0
    return float(-(p[nz] * np.log2(p[nz])).sum())


def row_entropies_bits(rows: np.ndarray) -> np.ndarray:
    """Entropy in bits of every row of a 2-D array of distributions."""
    rows = np.asarray(rows, dtype=float)
    contrib = np.zeros_like(rows)
    nz = rows > 0.0
    contrib[nz] = rows[nz] * np.log2(rows[nz])
    return -contrib.sum(axis=1)


def lex_order(rows: np.ndarray) -> np.ndarray:
    """Indices that sort the rows lexicographically (first column primary)."""
    return np.lexsort(rows.T[::-1])
