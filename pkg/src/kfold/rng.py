"""Seed handling and Haar sampling shared by the samplers."""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError

MASK64 = (1 << 64) - 1


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise InvalidArgumentError("an explicit seed is required")
    return np.random.default_rng(int(seed) & MASK64)


def sample_seed(master: int, index: int) -> int:
    """Stable 64-bit seed for sample ``index`` of a batch."""
    ss = np.random.SeedSequence([int(master) & MASK64, int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_seeds(master: int, count: int) -> np.ndarray:
    return np.array([sample_seed(master, i) for i in range(count)], dtype=np.uint64)


def haar_unitary(n: int, seed) -> np.ndarray:
    """QR of a complex Ginibre matrix with the R-diagonal phases divided out."""
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    rng = as_generator(seed)
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diagonal(R) / np.abs(np.diagonal(R))
    return Q * ph


def haar_unitaries(n: int, count: int, seed) -> np.ndarray:
    """Batch of Haar unitaries, shape (count, n, n)."""
    rng = as_generator(seed)
    Z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[:, None, :]


def haar_orthogonal(n: int, seed) -> np.ndarray:
    rng = as_generator(seed)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diagonal(R))
