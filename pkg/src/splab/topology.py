"""Column-to-input wiring (the CSI matrix).

Two modes are supported.  ``global`` draws each column's ``q`` inputs
uniformly without replacement from all ``p`` inputs.  ``radius`` restricts
column ``i`` to the window ``[center_i - radius, center_i + radius]``
truncated at the input edges, with centers spread evenly over the inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .sdr import Sdr

GLOBAL = "global"
RADIUS = "radius"


@dataclass(frozen=True, eq=False)
class Topology:
    m: int
    q: int
    p: int
    csi: np.ndarray
    mode: str = GLOBAL
    centers: np.ndarray | None = None
    radius: int | None = None

    def __post_init__(self):
        csi = np.asarray(self.csi, dtype=np.int64)
        if csi.shape != (self.m, self.q):
            raise DimensionError(f"csi shape {csi.shape} != ({self.m}, {self.q})")
        if csi.size and (csi.min() < 0 or csi.max() >= self.p):
            raise ConfigError(f"csi entries must lie in [0, p={self.p})")
        csi.setflags(write=False)
        object.__setattr__(self, "csi", csi)
        if self.centers is not None:
            centers = np.asarray(self.centers, dtype=np.int64)
            centers.setflags(write=False)
            object.__setattr__(self, "centers", centers)

    def window(self, i: int) -> tuple[int, int]:
        """Inclusive input-index window of column ``i``."""
        if self.mode == GLOBAL:
            return 0, self.p - 1
        c = int(self.centers[i])
        return max(0, c - self.radius), min(self.p - 1, c + self.radius)

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        same_centers = (self.centers is None and other.centers is None) or (
            self.centers is not None
            and other.centers is not None
            and np.array_equal(self.centers, other.centers)
        )
        return (
            (self.m, self.q, self.p, self.mode, self.radius)
            == (other.m, other.q, other.p, other.mode, other.radius)
            and np.array_equal(self.csi, other.csi)
            and same_centers
        )


def _check_sizes(m: int, q: int, p: int) -> None:
    for name, v in (("m", m), ("q", q), ("p", p)):
        if v <= 0:
            raise ConfigError(f"topology.{name} must be positive (got {v})")


def init_global(m: int, q: int, p: int, seed) -> Topology:
    _check_sizes(m, q, p)
    if q > p:
        raise ConfigError(f"q <= p required for sampling without replacement (q={q}, p={p})")
    rng = np.random.default_rng(seed)
    # argsort of iid uniforms is a uniform random permutation per row
    csi = np.argsort(rng.random((m, p)), axis=1)[:, :q]
    return Topology(m, q, p, csi, GLOBAL)


def radius_centers(m: int, p: int) -> np.ndarray:
    return np.floor((np.arange(m) + 0.5) * p / m).astype(np.int64)


def init_radius(m: int, q: int, p: int, radius: int, seed) -> Topology:
    _check_sizes(m, q, p)
    if radius <= 0:
        raise ConfigError(f"topology.radius must be positive (got {radius})")
    centers = radius_centers(m, p)
    lo = np.maximum(0, centers - radius)
    hi = np.minimum(p - 1, centers + radius)
    sizes = hi - lo + 1
    bad = np.flatnonzero(sizes < q)
    if bad.size:
        i = int(bad[0])
        raise ConfigError(
            f"column {i}: window [{lo[i]}, {hi[i]}] holds {sizes[i]} inputs < q={q}"
        )
    rng = np.random.default_rng(seed)
    width = int(sizes.max())
    keys = rng.random((m, width))
    # pad slots beyond a truncated window sort last
    keys[np.arange(width)[None, :] >= sizes[:, None]] = np.inf
    csi = lo[:, None] + np.argsort(keys, axis=1)[:, :q]
    return Topology(m, q, p, csi, RADIUS, centers=centers, radius=radius)


def fanouts(t: Topology) -> np.ndarray:
    """Per-input count of (column, synapse) slots wired to it."""
    return np.bincount(t.csi.ravel(), minlength=t.p)


def input_fanout(t: Topology, r: int) -> int:
    if not 0 <= r < t.p:
        raise IndexError(f"input index {r} outside [0, {t.p})")
    return int(np.count_nonzero(t.csi == r))


def unconnected_input_count(t: Topology) -> int:
    return int(np.count_nonzero(fanouts(t) == 0))


def gather_inputs(t: Topology, pattern: Sdr | np.ndarray) -> np.ndarray:
    """m x q matrix of the input bits each synapse sees."""
    bits = pattern.bits if isinstance(pattern, Sdr) else np.asarray(pattern, dtype=np.uint8)
    if bits.shape != (t.p,):
        raise DimensionError(f"pattern length {bits.shape[0]} != p={t.p}")
    return bits[t.csi]
