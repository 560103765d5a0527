"""Shared helpers: dense sketch-matrix oracle used to cross-check the
structured (gather-based) sampling products."""

import numpy as np
import pytest

from momsolve.sampling import SampleOp


def dense_sketch(op: SampleOp, m: int) -> np.ndarray:
    """Materialize the m x q sketching matrix S = scale * I[:, J]."""
    if op.indices is None:
        return np.eye(m) * op.scale
    q = len(op.indices)
    S = np.zeros((m, q))
    scale = np.broadcast_to(np.asarray(op.scale, dtype=float), (q,))
    for col, (i, s) in enumerate(zip(op.indices, scale)):
        S[i, col] = s
    return S


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
