"""Spatial Pooler laboratory: simulator, analytical model and oracles."""

from .encoder import ScalarEncoder, new_encoder
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    OutOfRangeError,
    SnapshotError,
    SnapshotVersionError,
)
from .pooler import SpatialPooler, SpConfig, SpState
from .sdr import Sdr, density, hamming_distance, overlap_score
from .topology import Topology, init_global, init_radius

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "OutOfRangeError",
    "ScalarEncoder",
    "Sdr",
    "SnapshotError",
    "SnapshotVersionError",
    "SpConfig",
    "SpState",
    "SpatialPooler",
    "Topology",
    "density",
    "hamming_distance",
    "init_global",
    "init_radius",
    "new_encoder",
    "overlap_score",
]
