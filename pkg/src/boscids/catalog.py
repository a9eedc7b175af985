"""Syscall-to-slot index with an OTHER bucket for rare and unknown names."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .trace_ingest import CountTable

OTHER_NAME = "other"


@dataclass(frozen=True)
class SyscallIndex:
    """Frozen mapping from syscall name to bag slot.

    Retained (frequent) names occupy slots 0..retained-1 in count-table
    order; everything else, including names never seen in training, resolves
    to the reserved final OTHER slot.
    """

    slots: tuple[str, ...]
    t_o: int

    def __post_init__(self):
        if len(set(self.slots)) != len(self.slots):
            raise ValueError("slot names must be unique")
        if OTHER_NAME in self.slots:
            raise ValueError(f"{OTHER_NAME!r} is reserved for the fallback slot")
        if self.t_o < 0:
            raise ValueError("t_o must be non-negative")

    @property
    def other_slot(self) -> int:
        return len(self.slots)

    @property
    def retained(self) -> int:
        return len(self.slots)

    @property
    def n_s(self) -> int:
        return len(self.slots) + 1

    @cached_property
    def _slot_of(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.slots)}

    def resolve(self, name: str) -> int:
        return self._slot_of.get(name, len(self.slots))

    def resolve_stream(self, names) -> np.ndarray:
        """Resolve a whole name sequence to an int64 slot array."""
        lut = self._slot_of
        other = len(self.slots)
        return np.array([lut.get(n, other) for n in names], dtype=np.int64)


def build_index(counts: CountTable) -> SyscallIndex:
    """Build the slot index from a count table.

    The rarity threshold equals the number of distinct names seen: a name
    keeps its own slot only if its count reaches that threshold, everything
    rarer folds into OTHER. Slot order follows the count table, so the same
    table always rebuilds the identical index.
    """
    t_o = len(counts.entries)
    slots = tuple(
        name for name, count in counts.entries if count >= t_o and name != OTHER_NAME
    )
    return SyscallIndex(slots, t_o)


def resolve(index: SyscallIndex, name: str) -> int:
    return index.resolve(name)
