"""Reproducible multi-channel Wiener increments.

Every standard normal is a pure function of ``(base seed, replica, stream,
index)``: a Philox-4x64 key is derived from the first three and the raw
output at counter position ``index = step * N + channel`` is pushed through
the inverse normal CDF.  Nothing depends on generation order, worker count
or scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

GENERATOR_ID = f"philox4x64+ndtri(53-bit)/numpy-{np.__version__}"

_INCREMENT_STREAM = 0
_BRIDGE_STREAM = 1


def _key(base_seed, replica, stream, level=0):
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=(int(replica), stream, int(level)))
    return ss.generate_state(2, dtype=np.uint64)


def counter_normals(n, base_seed, replica, stream=_INCREMENT_STREAM, level=0):
    """First ``n`` standard normals of the keyed stream."""
    bg = np.random.Philox(key=_key(base_seed, replica, stream, level))
    raw = bg.random_raw(n) if n else np.zeros(0, dtype=np.uint64)
    u = ((raw >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53
    return ndtri(u)


@dataclass(frozen=True)
class WienerPath:
    """Increments ``ΔW[m, j] ~ N(0, dt)`` for ``m`` steps and ``j`` channels."""

    increments: np.ndarray
    dt: float
    base_seed: int = 0
    replica: int = 0
    level: int = 0
    generator: str = GENERATOR_ID

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=float)
        if inc.ndim != 2:
            raise ValueError("increments must be a (steps, channels) array")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)

    @classmethod
    def generate(cls, n_steps, n_channels, dt, base_seed=0, replica=0):
        z = counter_normals(n_steps * n_channels, base_seed, replica)
        return cls(np.sqrt(dt) * z.reshape(n_steps, n_channels), dt, base_seed, replica, 0)

    @classmethod
    def zeros(cls, n_steps, n_channels, dt):
        return cls(np.zeros((n_steps, n_channels)), dt)

    @property
    def n_steps(self):
        return self.increments.shape[0]

    @property
    def n_channels(self):
        return self.increments.shape[1]

    @property
    def horizon(self):
        return self.n_steps * self.dt

    def values(self):
        """``W`` at the step times, starting from 0; shape ``(steps + 1, N)``."""
        return np.vstack([np.zeros((1, self.n_channels)), np.cumsum(self.increments, axis=0)])

    def refine(self):
        """Brownian-bridge midpoint refinement to ``dt / 2``.

        Each increment ``ΔW`` splits into ``ΔW/2 + sqrt(dt)/2 ξ`` and its
        complement, so fine increments sum pairwise back to this path.
        """
        xi = counter_normals(self.increments.size, self.base_seed, self.replica,
                             _BRIDGE_STREAM, self.level + 1).reshape(self.increments.shape)
        first = 0.5 * self.increments + 0.5 * np.sqrt(self.dt) * xi
        fine = np.empty((2 * self.n_steps, self.n_channels))
        fine[0::2] = first
        fine[1::2] = self.increments - first
        return WienerPath(fine, 0.5 * self.dt, self.base_seed, self.replica, self.level + 1,
                          self.generator)

    def coarsen(self, factor=2):
        """Sum consecutive groups of ``factor`` increments."""
        if self.n_steps % factor:
            raise ValueError(f"{self.n_steps} steps are not divisible by {factor}")
        coarse = self.increments.reshape(-1, factor, self.n_channels).sum(axis=1)
        return WienerPath(coarse, self.dt * factor, self.base_seed, self.replica,
                          self.level - int(np.log2(factor)), self.generator)

    def hierarchy(self, n_levels):
        """This path followed by ``n_levels - 1`` successive refinements."""
        paths = [self]
        for _ in range(n_levels - 1):
            paths.append(paths[-1].refine())
        return paths

    def seed_descriptor(self):
        return {"base_seed": int(self.base_seed), "replica": int(self.replica),
                "level": int(self.level), "generator": self.generator}
