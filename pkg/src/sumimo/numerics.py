"""Complex Gaussian sampling, small matrix helpers and streaming moments.

Complex quantities are plain numpy ``complex128`` arrays; a matrix is any
array whose last two axes are (rows, cols), so every helper also works on a
stack of matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "make_rng",
    "sample_complex_gaussian",
    "hermitian",
    "mat_vec_mul",
    "MomentAccumulator",
]


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-style generator for the stream addressed by ``(seed, *keys)``.

    Philox is counter based, so the stream for e.g. frame 917 does not depend
    on how many frames were drawn before it or on which worker drew them.
    """
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return np.random.Generator(np.random.Philox(ss))


def sample_complex_gaussian(rng: np.random.Generator, sigma_per_dim: float, size=None) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples.

    Real and imaginary parts are independent, zero mean, each with variance
    ``sigma_per_dim**2``; total variance ``E|z|^2`` is ``2 * sigma_per_dim**2``.
    Returns a complex scalar when ``size`` is None.
    """
    if not sigma_per_dim > 0 or not np.isfinite(sigma_per_dim):
        raise ValueError(f"sigma_per_dim must be positive and finite, got {sigma_per_dim}")
    shape = () if size is None else tuple(int(n) for n in np.atleast_1d(size))
    # one draw of shape (..., 2) keeps re/im interleaved in the stream
    xy = rng.standard_normal(size=(*shape, 2))
    z = sigma_per_dim * (xy[..., 0] + 1j * xy[..., 1])
    if size is None:
        return complex(z)
    return z


def hermitian(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    m = np.asarray(m)
    if m.ndim < 2:
        raise ValueError("hermitian needs at least a 2-D array")
    return np.conj(np.swapaxes(m, -1, -2))


def mat_vec_mul(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Complex matrix-vector product ``m @ v`` broadcast over leading axes."""
    m = np.asarray(m)
    v = np.asarray(v)
    if m.ndim < 2 or v.ndim < 1:
        raise ValueError("expected a matrix and a vector")
    if m.shape[-1] != v.shape[-1]:
        raise ValueError(f"dimension mismatch: matrix has {m.shape[-1]} columns, vector has {v.shape[-1]} entries")
    return np.einsum("...ij,...j->...i", m, v)


@dataclass
class MomentAccumulator:
    """Streaming mean / variance of a real quantity.

    Batches are merged with the pairwise (Chan et al.) update, so large
    sample counts do not lose precision to cancellation.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, values) -> "MomentAccumulator":
        x = np.asarray(values, dtype=np.float64).ravel()
        n = x.size
        if n == 0:
            return self
        if not np.all(np.isfinite(x)):
            raise ValueError("non-finite sample")
        b_mean = float(np.mean(x))
        b_m2 = float(np.sum((x - b_mean) ** 2))
        total = self.count + n
        delta = b_mean - self.mean
        self.mean += delta * n / total
        self.m2 += b_m2 + delta * delta * self.count * n / total
        self.count = total
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        out = MomentAccumulator(self.count, self.mean, self.m2)
        if other.count == 0:
            return out
        total = out.count + other.count
        delta = other.mean - out.mean
        out.mean += delta * other.count / total
        out.m2 += other.m2 + delta * delta * self.count * other.count / total
        out.count = total
        return out

    @property
    def variance(self) -> float:
        """Unbiased sample variance (0 for fewer than two samples)."""
        if self.count < 2:
            return 0.0
        return max(self.m2 / (self.count - 1), 0.0)

    @property
    def std_error(self) -> float:
        if self.count == 0:
            return float("nan")
        return float(np.sqrt(self.variance / self.count))
