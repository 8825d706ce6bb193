"""Scalar encoder: a contiguous run of ``w`` on-bits whose offset is the bucket."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, OutOfRangeError
from .sdr import Sdr


@dataclass(frozen=True)
class ScalarEncoder:
    n: int
    w: int
    val_min: float
    val_max: float
    buckets: int = field(init=False)

    def __post_init__(self):
        if self.n <= 0:
            raise ConfigError(f"encoder.n must be positive (got {self.n})")
        if not 0 < self.w <= self.n:
            raise ConfigError(f"encoder requires 0 < w <= n (got w={self.w}, n={self.n})")
        if not self.val_min < self.val_max:
            raise ConfigError(
                f"encoder requires val_min < val_max (got {self.val_min}, {self.val_max})"
            )
        object.__setattr__(self, "buckets", self.n - self.w + 1)

    def bucket_index(self, a: float) -> int:
        if not self.val_min <= a <= self.val_max:
            raise OutOfRangeError(f"{a} outside [{self.val_min}, {self.val_max}]")
        k = math.floor(self.buckets * (a - self.val_min) / (self.val_max - self.val_min))
        # a == val_max lands one past the last bucket
        return min(k, self.buckets - 1)

    def encode(self, a: float) -> Sdr:
        k = self.bucket_index(a)
        bits = np.zeros(self.n, dtype=np.uint8)
        bits[k : k + self.w] = 1
        return Sdr(bits, self.w)


def new_encoder(n: int, w: int, val_min: float, val_max: float) -> ScalarEncoder:
    return ScalarEncoder(n, w, val_min, val_max)
