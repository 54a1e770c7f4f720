"""Open-addressing hash table keyed by 64-bit basis indices.

Linear probing over a power-of-two slot array, kept at load factor below 0.5
and grown by doubling. Operations are vectorized over batches of keys: each
probe round resolves every pending key against one slot, so a batch costs a
handful of numpy passes instead of a Python loop per key.
"""
from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)

MAX_LOAD = 0.5


def mix64(keys: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer; uint64 arithmetic wraps modulo 2**64."""
    z = keys.astype(np.uint64, copy=False) + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def segment_sum(index: np.ndarray, values: np.ndarray, size: int) -> np.ndarray:
    """out[i] = sum of values[index == i], added in input order."""
    values = np.asarray(values, dtype=np.complex128)
    out = np.empty(size, dtype=np.complex128)
    out.real = np.bincount(index, weights=values.real, minlength=size)
    out.imag = np.bincount(index, weights=values.imag, minlength=size)
    return out


def _capacity_for(n: int) -> int:
    cap = 16
    while n >= cap * MAX_LOAD:
        cap <<= 1
    return cap


class ProbeTable:
    """Map uint64 key -> complex128 value with additive merge on collision."""

    def __init__(self, expected: int = 0):
        self._alloc(_capacity_for(expected))
        self.count = 0

    def _alloc(self, capacity: int) -> None:
        self.capacity = capacity
        self._mask = np.uint64(capacity - 1)
        self.keys = np.zeros(capacity, dtype=np.uint64)
        self.used = np.zeros(capacity, dtype=bool)
        self.values = np.zeros(capacity, dtype=np.complex128)

    @property
    def load_factor(self) -> float:
        return self.count / self.capacity

    def __len__(self) -> int:
        return self.count

    def _grow(self, needed: int) -> None:
        cap = _capacity_for(needed)
        if cap <= self.capacity:
            return
        old_keys, old_vals = self.items()
        self._alloc(cap)
        self.count = 0
        if old_keys.size:
            slots = self._claim(old_keys)
            self.values[slots] = old_vals

    def _claim(self, keys: np.ndarray) -> np.ndarray:
        """Find or create the slot of every key; duplicates share a slot."""
        n = keys.size
        slots = np.empty(n, dtype=np.int64)
        home = (mix64(keys) & self._mask).astype(np.int64)
        offset = np.zeros(n, dtype=np.int64)
        pending = np.arange(n)
        cmask = self.capacity - 1
        while pending.size:
            s = (home[pending] + offset[pending]) & cmask
            free = ~self.used[s]
            if free.any():
                fs = s[free]
                # several keys may race for one empty slot; the last write wins
                # and the losers keep probing on the next round
                self.keys[fs] = keys[pending[free]]
                newly = np.unique(fs)
                self.used[newly] = True
                self.count += newly.size
            hit = self.keys[s] == keys[pending]
            slots[pending[hit]] = s[hit]
            miss = ~hit
            pending = pending[miss]
            offset[pending] += 1
        return slots

    def insert(self, keys: np.ndarray) -> np.ndarray:
        """Insert keys (existing ones are kept) and return their slots."""
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        self._grow(self.count + keys.size)
        return self._claim(keys)

    def accumulate(self, keys: np.ndarray, values: np.ndarray) -> None:
        """values[slot(key)] += value, summing in input order."""
        slots = self.insert(keys)
        self.values += segment_sum(slots, values, self.capacity)

    def lookup(self, keys: np.ndarray) -> np.ndarray:
        """Slot of each key, or -1 when absent."""
        keys = np.ascontiguousarray(keys, dtype=np.uint64)
        n = keys.size
        out = np.full(n, -1, dtype=np.int64)
        home = (mix64(keys) & self._mask).astype(np.int64)
        offset = np.zeros(n, dtype=np.int64)
        pending = np.arange(n)
        cmask = self.capacity - 1
        while pending.size:
            s = (home[pending] + offset[pending]) & cmask
            occupied = self.used[s]
            hit = occupied & (self.keys[s] == keys[pending])
            out[pending[hit]] = s[hit]
            cont = occupied & ~hit
            pending = pending[cont]
            offset[pending] += 1
        return out

    def get(self, keys: np.ndarray, default: complex = 0.0) -> np.ndarray:
        slots = self.lookup(keys)
        out = np.full(slots.size, default, dtype=np.complex128)
        found = slots >= 0
        out[found] = self.values[slots[found]]
        return out

    def items(self) -> tuple[np.ndarray, np.ndarray]:
        idx = np.flatnonzero(self.used)
        return self.keys[idx].copy(), self.values[idx].copy()

    @classmethod
    def from_items(cls, keys: np.ndarray, values: np.ndarray) -> "ProbeTable":
        table = cls(expected=len(keys))
        slots = table.insert(keys)
        table.values[slots] = values
        return table
