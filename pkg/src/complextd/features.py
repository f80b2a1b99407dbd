"""Tile coding over a one-dimensional ring of integer states."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError


class TileCoder:
    """``num_tilings`` offset partitions of the circle ``[0, n_states)``.

    Each tile covers ``tile_span * n_states`` of the circle.  Tiling ``j`` is
    displaced by ``(j + offset_shift) * tile_width / num_tilings``.  A state
    ``s`` is binned at its cell centre ``s + 0.5`` so that no state sits on
    a tile boundary.  Feature indices are tiling-major.
    """

    def __init__(self, n_states=20, num_tilings=6, tile_span=1 / 3, offset_shift=0.0, wrap=True):
        if num_tilings < 1:
            raise DomainError("num_tilings", "must be positive")
        if not (0 < tile_span <= 1):
            raise DomainError("tile_span", "must lie in (0, 1]")
        self.n_states = int(n_states)
        self.num_tilings = int(num_tilings)
        self.tile_span = float(tile_span)
        self.offset_shift = float(offset_shift)
        self.wrap = bool(wrap)
        self.tile_width = self.n_states * self.tile_span
        if self.wrap:
            self.tiles_per_tiling = max(1, round(1 / self.tile_span))
        else:
            self.tiles_per_tiling = math.ceil(1 / self.tile_span) + 1
        self.offsets = np.array(
            [(j + self.offset_shift) * self.tile_width / self.num_tilings for j in range(self.num_tilings)]
        )
        self._table = np.array([self._tiles(s) for s in range(self.n_states)], dtype=np.intp)

    @property
    def total_features(self) -> int:
        return self.num_tilings * self.tiles_per_tiling

    def _tiles(self, s):
        pos = s + 0.5
        out = []
        for j, off in enumerate(self.offsets):
            if self.wrap:
                k = int(math.floor(((pos - off) % self.n_states) / self.tile_width)) % self.tiles_per_tiling
            else:
                k = int(math.floor((pos + off) / self.tile_width))
            out.append(j * self.tiles_per_tiling + k)
        return out

    def active(self, state) -> np.ndarray:
        """Indices of the ``num_tilings`` active features."""
        if not (0 <= state < self.n_states):
            raise DomainError("state", f"must lie in 0..{self.n_states - 1}, got {state}")
        return self._table[state]

    def encode(self, state) -> np.ndarray:
        x = np.zeros(self.total_features)
        x[self.active(state)] = 1.0
        return x

    def matrix(self) -> np.ndarray:
        """Feature matrix with one row per state."""
        return np.stack([self.encode(s) for s in range(self.n_states)])

    def shared(self, s1, s2) -> int:
        return len(set(self.active(s1)) & set(self.active(s2)))
