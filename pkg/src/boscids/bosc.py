"""Sliding-window bags of system calls and the normal-behavior frequency db.

A bag (BoSC) is the per-window count vector over the index's slots, stored
as a plain tuple of ints so it can key a dict. The BehaviorDb maps bags to
observed frequencies and remembers first-insertion order, which is what the
per-epoch change vectors are indexed by.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

log = logging.getLogger(__name__)

BoSC = tuple[int, ...]


@dataclass(frozen=True)
class Config:
    """Pipeline parameters: window size w, epoch size S, training similarity
    threshold, and the detection threshold as a fraction of epoch length."""

    window_size: int = 10
    epoch_size: int = 5000
    train_threshold: float = 0.99
    detect_threshold_fraction: float = 0.10

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError("window_size must be a positive integer")
        if self.epoch_size < self.window_size:
            raise ValueError("epoch_size must be >= window_size")
        if not 0.0 < self.train_threshold <= 1.0:
            raise ValueError("train_threshold must be in (0, 1]")
        if not 0.0 < self.detect_threshold_fraction <= 1.0:
            raise ValueError("detect_threshold_fraction must be in (0, 1]")


def epoch_windows(epoch: Sequence[int], w: int) -> Iterator[Sequence[int]]:
    """Yield all contiguous windows of size w (stride 1) within one epoch.

    Windows never span epoch boundaries. An epoch shorter than w yields
    nothing and logs a diagnostic.
    """
    if w < 1:
        raise ValueError("window size must be a positive integer")
    n = len(epoch)
    if n < w:
        log.warning("epoch of %d calls is shorter than window %d; no windows", n, w)
        return
    for i in range(n - w + 1):
        yield epoch[i : i + w]


def bag_of(window: Sequence[int], n_s: int) -> BoSC:
    """Count each slot's occurrences in one window; the result sums to w."""
    counts = [0] * n_s
    for s in window:
        if not 0 <= s < n_s:
            raise ValueError(f"slot {s} out of range for n_s={n_s}")
        counts[s] += 1
    return tuple(counts)


def epoch_bag_matrix(slots, w: int, n_s: int) -> np.ndarray:
    """All window bags of one epoch as an (n_windows, n_s) count matrix.

    Vectorized equivalent of bag_of over epoch_windows; the pure versions
    stay as the reference the tests compare against.
    """
    arr = np.asarray(slots, dtype=np.int64)
    n = arr.shape[0]
    if n < w:
        return np.zeros((0, n_s), dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= n_s):
        raise ValueError(f"slot out of range for n_s={n_s}")
    nwin = n - w + 1
    win = np.lib.stride_tricks.sliding_window_view(arr, w)
    flat = (win + np.arange(nwin, dtype=np.int64)[:, None] * n_s).ravel()
    return np.bincount(flat, minlength=nwin * n_s).reshape(nwin, n_s)


def unique_bags(bag_matrix: np.ndarray) -> tuple[list[BoSC], np.ndarray]:
    """Collapse a bag matrix to its distinct rows plus multiplicities."""
    if bag_matrix.shape[0] == 0:
        return [], np.zeros(0, dtype=np.int64)
    uniq, counts = np.unique(bag_matrix, axis=0, return_counts=True)
    return [tuple(row) for row in uniq.tolist()], counts


def unique_window_bags(slots, w: int, n_s: int) -> tuple[list[BoSC], np.ndarray]:
    """Distinct window bags of one epoch plus multiplicities.

    Same result as unique_bags(epoch_bag_matrix(...)), but when a sorted
    window packs into one int64 the uniquing runs on scalar codes instead of
    matrix rows, which is what makes multi-million-call traces cheap.
    """
    arr = np.asarray(slots, dtype=np.int64)
    n = arr.shape[0]
    if n < w:
        return [], np.zeros(0, dtype=np.int64)
    if arr.min() < 0 or arr.max() >= n_s:
        raise ValueError(f"slot out of range for n_s={n_s}")
    if n_s**w >= 2**62:  # codes would overflow; fall back to row uniquing
        return unique_bags(epoch_bag_matrix(arr, w, n_s))
    win = np.sort(np.lib.stride_tricks.sliding_window_view(arr, w), axis=1)
    powers = np.array([n_s**i for i in range(w)], dtype=np.int64)
    codes, counts = np.unique(win @ powers, return_counts=True)
    digits = (codes[:, None] // powers) % n_s
    m = digits.shape[0]
    flat = (digits + np.arange(m, dtype=np.int64)[:, None] * n_s).ravel()
    bags = np.bincount(flat, minlength=m * n_s).reshape(m, n_s)
    order = np.lexsort(bags.T[::-1])  # match unique_bags' row ordering
    return [tuple(row) for row in bags[order].tolist()], counts[order]


@dataclass(frozen=True, eq=False)
class DbSnapshot:
    """Immutable picture of a BehaviorDb: keys in insertion order plus their
    frequencies at snapshot time."""

    keys: tuple[BoSC, ...]
    freqs: np.ndarray

    def __len__(self):
        return len(self.keys)


@dataclass(frozen=True, eq=False)
class ChangeVector:
    """Per-epoch frequency deltas, indexed by the db's insertion order after
    the epoch that produced them."""

    deltas: np.ndarray

    @property
    def n_k(self) -> int:
        return int(self.deltas.shape[0])


class FrozenDbError(RuntimeError):
    pass


class BehaviorDb:
    """Map from bag to observed frequency; insertion order is first-insertion
    order and is stable under later increments.

    Single-writer during training; freeze() makes it safe for any number of
    concurrent readers.
    """

    def __init__(self):
        self._freq: dict[BoSC, int] = {}
        self._frozen = False

    def __len__(self) -> int:
        return len(self._freq)

    def __contains__(self, bag) -> bool:
        return tuple(bag) in self._freq

    def frequency(self, bag) -> int:
        return self._freq.get(tuple(bag), 0)

    @property
    def frozen(self) -> bool:
        return self._frozen

    @property
    def insertion_order(self) -> list[BoSC]:
        return list(self._freq)

    def items(self):
        return self._freq.items()

    def total_frequency(self) -> int:
        return sum(self._freq.values())

    def insert(self, bag) -> int:
        """Increment the bag's frequency (new bags start at 1); returns the
        new frequency."""
        if self._frozen:
            raise FrozenDbError("behavior db is frozen")
        key = tuple(bag)
        f = self._freq.get(key, 0) + 1
        self._freq[key] = f
        return f

    def insert_many(self, bags: Iterable[BoSC], multiplicities) -> None:
        """Bulk form of insert for pre-aggregated (bag, multiplicity) pairs."""
        if self._frozen:
            raise FrozenDbError("behavior db is frozen")
        freq = self._freq
        for bag, m in zip(bags, multiplicities):
            key = tuple(bag)  # no-op for tuples
            freq[key] = freq.get(key, 0) + int(m)

    def freeze(self) -> None:
        self._frozen = True

    def snapshot(self) -> DbSnapshot:
        keys = tuple(self._freq)
        freqs = np.fromiter(self._freq.values(), dtype=np.int64, count=len(keys))
        return DbSnapshot(keys, freqs)

    def frequencies_array(self) -> np.ndarray:
        return np.fromiter(self._freq.values(), dtype=np.int64, count=len(self._freq))


def db_diff(before: DbSnapshot, after: BehaviorDb) -> ChangeVector:
    """Frequency deltas between a snapshot and the current db state.

    Keys absent from the snapshot count as frequency 0. The snapshot's keys
    must be a prefix of the db's insertion order (same lineage) or this is a
    hard error.
    """
    order = after.insertion_order
    n_before = len(before.keys)
    if n_before > len(order) or order[:n_before] != list(before.keys):
        raise ValueError("snapshot is not a prefix of the database (different lineage)")
    deltas = after.frequencies_array()
    deltas[:n_before] -= before.freqs
    return ChangeVector(deltas)
