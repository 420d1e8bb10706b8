"""Counter-based random streams.

A :class:`PhiloxStream` is an explicit, seekable source of uniforms addressed
by ``(master_seed, sample_index, position)``.  Streams for different sample
indices are statistically independent, which is what makes the Monte Carlo
harness reproducible under any parallel schedule: worker threads never share
stream state.

Simulation routines accept any object with ``uniform()`` and ``normal()``
(plus optional vectorized ``uniforms(n)`` / ``normals(n)``), so tests can pass
stubs with pinned values.
"""

from __future__ import annotations

import numpy as np

from . import _kernels

TAU = 6.283185307179586


class PhiloxStream:
    """One sample's stream of doubles, read sequentially from a position."""

    __slots__ = ("seed", "sample_index", "position")

    def __init__(self, seed: int, sample_index: int = 0, position: int = 0):
        self.seed = int(seed)
        self.sample_index = int(sample_index)
        self.position = int(position)

    def __repr__(self):
        return (f"PhiloxStream(seed={self.seed}, sample_index="
                f"{self.sample_index}, position={self.position})")

    def spawn(self, sample_index: int) -> "PhiloxStream":
        """Independent stream for another sample index of the same seed."""
        return PhiloxStream(self.seed, sample_index)

    def uniforms(self, count: int) -> np.ndarray:
        u = _kernels.uniforms(self.seed, self.sample_index, self.position,
                              int(count))
        self.position += int(count)
        return u

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def normals(self, count: int) -> np.ndarray:
        # Box-Muller, cosine branch; two uniforms per Gaussian.
        u = self.uniforms(2 * int(count))
        return np.sqrt(-2.0 * np.log(u[0::2])) * np.cos(TAU * u[1::2])

    def normal(self) -> float:
        return float(self.normals(1)[0])


def take_uniforms(rng, count: int) -> np.ndarray:
    """Read `count` uniforms from a stream or a duck-typed stub."""
    if hasattr(rng, "uniforms"):
        return np.asarray(rng.uniforms(count), dtype=np.float64)
    return np.array([rng.uniform() for _ in range(count)], dtype=np.float64)


def take_normals(rng, count: int) -> np.ndarray:
    """Read `count` standard Gaussians from a stream or a stub."""
    if hasattr(rng, "normals"):
        return np.asarray(rng.normals(count), dtype=np.float64)
    return np.array([rng.normal() for _ in range(count)], dtype=np.float64)
