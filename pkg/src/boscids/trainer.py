"""Train the normal-behavior db epoch by epoch until the per-epoch frequency
changes stabilize, then persist the whole model as a versioned text file."""

import logging
import math
import re
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bosc import (
    BehaviorDb,
    ChangeVector,
    Config,
    db_diff,
    unique_window_bags,
)
from .catalog import OTHER_NAME, SyscallIndex, build_index
from .trace_ingest import SYSCALL_NAME_RE, CountTable, RawTrace, count_table

log = logging.getLogger(__name__)

MODEL_HEADER = "boscids-model v1"


@dataclass(frozen=True)
class SimilarityRecord:
    """Cosine similarity between epoch k's change vector and epoch k-1's."""

    k: int
    cos_theta: float


@dataclass
class TrainedModel:
    index: SyscallIndex
    db: BehaviorDb
    config: Config
    history: list[SimilarityRecord]
    epochs_trained: int
    converged: bool


class ModelFormatError(ValueError):
    """Model file rejected; carries the section that failed."""

    def __init__(self, section: str, message: str):
        super().__init__(f"{section}: {message}")
        self.section = section


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between change vector a and the shorter, earlier
    vector b, zero-extended to a's length.

    Conventions for degenerate norms: both zero means two perfectly
    stationary epochs (1.0); exactly one zero means change appeared from
    nothing (0.0).
    """
    va = np.asarray(a.deltas if isinstance(a, ChangeVector) else a, dtype=np.float64)
    vb = np.asarray(b.deltas if isinstance(b, ChangeVector) else b, dtype=np.float64)
    if vb.shape[0] > va.shape[0]:
        raise ValueError("earlier change vector is longer than the later one")
    if vb.shape[0] < va.shape[0]:
        vb = np.concatenate([vb, np.zeros(va.shape[0] - vb.shape[0])])
    na = math.sqrt(float(va @ va))
    nb = math.sqrt(float(vb @ vb))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(va @ vb) / (na * nb)


def _as_slot_stream(trace, counts: CountTable | None):
    """Normalize the accepted trace forms to (slot array, index)."""
    seq = trace.calls if isinstance(trace, RawTrace) else trace
    if isinstance(seq, np.ndarray) and np.issubdtype(seq.dtype, np.integer):
        if counts is None:
            raise ValueError("a pre-resolved slot stream needs an explicit count table")
        index = build_index(counts)
        slots = seq.astype(np.int64, copy=False)
    elif len(seq) > 0 and isinstance(seq[0], (int, np.integer)):
        if counts is None:
            raise ValueError("a pre-resolved slot stream needs an explicit count table")
        index = build_index(counts)
        slots = np.asarray(seq, dtype=np.int64)
    else:
        if counts is None:
            counts = count_table(seq)
        index = build_index(counts)
        slots = index.resolve_stream(seq)
    if slots.size and (slots.min() < 0 or slots.max() >= index.n_s):
        raise ValueError("slot stream contains indices outside the index")
    return slots, index


def train(trace, counts: CountTable | None = None, config: Config | None = None) -> TrainedModel:
    """Learn normal behavior from a trace of full epochs.

    After each epoch k>1 the change vector is compared to the previous one;
    training stops once the similarity stays at or above the threshold for
    two consecutive epochs. Exhausting the trace without that happening
    returns a model flagged as non-converged rather than failing: the
    operator can inspect the history and re-run with more data.
    """
    if config is None:
        config = Config()
    slots, index = _as_slot_stream(trace, counts)
    S = config.epoch_size
    w = config.window_size
    n_epochs = len(slots) // S
    if n_epochs < 2:
        raise ValueError(
            f"training needs at least 2 full epochs of {S} calls; got {len(slots)} calls"
        )
    if len(slots) % S:
        log.info("discarding trailing partial epoch of %d calls", len(slots) % S)

    db = BehaviorDb()
    history: list[SimilarityRecord] = []
    change_prev: ChangeVector | None = None
    prev_cos: float | None = None
    converged = False
    trained = 0
    for k in range(1, n_epochs + 1):
        snap = db.snapshot()
        epoch = slots[(k - 1) * S : k * S]
        keys, mult = unique_window_bags(epoch, w, index.n_s)
        db.insert_many(keys, mult)
        change = db_diff(snap, db)
        trained = k
        if k > 1:
            cos = cosine_similarity(change, change_prev)
            history.append(SimilarityRecord(k, cos))
            if prev_cos is not None and cos >= config.train_threshold and prev_cos >= config.train_threshold:
                converged = True
            prev_cos = cos
        change_prev = change
        if converged:
            break
    db.freeze()
    if not converged:
        log.warning("training did not converge after %d epochs", trained)
    return TrainedModel(index, db, config, history, trained, converged)


def save_model(model: TrainedModel, path) -> None:
    """Write the versioned line-oriented model file with a crc32 trailer."""
    c = model.config
    lines = [
        MODEL_HEADER,
        f"w={c.window_size} S={c.epoch_size} Tt={c.train_threshold!r} TdFrac={c.detect_threshold_fraction!r}",
        f"ns={model.index.n_s} retained={model.index.retained}",
    ]
    lines.extend(model.index.slots)
    lines.append("@" + OTHER_NAME)
    lines.append(f"entries={len(model.db)}")
    for bag, freq in model.db.items():
        lines.append(" ".join(map(str, bag)) + " : " + str(freq))
    lines.append(f"history={len(model.history)}")
    for rec in model.history:
        lines.append(f"{rec.k} {rec.cos_theta:.9f}")
    blob = ("\n".join(lines) + "\n").encode("ascii")
    crc = zlib.crc32(blob) & 0xFFFFFFFF
    Path(path).write_bytes(blob + f"crc32={crc:08x}\n".encode("ascii"))


class _LineReader:
    def __init__(self, lines: list[str]):
        self._lines = lines
        self._pos = 0

    def next(self, section: str) -> str:
        if self._pos >= len(self._lines):
            raise ModelFormatError(section, "file truncated")
        line = self._lines[self._pos]
        self._pos += 1
        return line

    def exhausted(self) -> bool:
        return self._pos >= len(self._lines)


def load_model(path) -> TrainedModel:
    """Read a model file written by save_model, verifying version, structure,
    and checksum; failures name the offending section."""
    data = Path(path).read_bytes()
    newline = data.find(b"\n")
    first = data[:newline] if newline >= 0 else data
    if first != MODEL_HEADER.encode("ascii"):
        raise ModelFormatError("version", f"expected {MODEL_HEADER!r} header")

    marker = data.rfind(b"crc32=")
    if marker < 0 or (marker > 0 and data[marker - 1 : marker] != b"\n"):
        raise ModelFormatError("checksum", "missing crc32 trailer")
    trailer = data[marker:].decode("ascii", errors="replace").strip()
    try:
        declared = int(trailer.removeprefix("crc32="), 16)
    except ValueError:
        raise ModelFormatError("checksum", f"unparseable trailer {trailer!r}") from None
    if zlib.crc32(data[:marker]) & 0xFFFFFFFF != declared:
        raise ModelFormatError("checksum", "crc32 mismatch; file corrupted")

    body = data[:marker].decode("ascii").split("\n")
    if body and body[-1] == "":
        body.pop()
    rd = _LineReader(body)
    rd.next("version")

    params = rd.next("params")
    m = re.fullmatch(
        r"w=(\d+) S=(\d+) Tt=([0-9.eE+-]+) TdFrac=([0-9.eE+-]+)", params
    )
    if m is None:
        raise ModelFormatError("params", f"bad parameter line {params!r}")
    config = Config(
        window_size=int(m.group(1)),
        epoch_size=int(m.group(2)),
        train_threshold=float(m.group(3)),
        detect_threshold_fraction=float(m.group(4)),
    )

    sizes = rd.next("index")
    m = re.fullmatch(r"ns=(\d+) retained=(\d+)", sizes)
    if m is None:
        raise ModelFormatError("index", f"bad size line {sizes!r}")
    n_s, retained = int(m.group(1)), int(m.group(2))
    if n_s != retained + 1:
        raise ModelFormatError("index", f"ns={n_s} does not equal retained+1={retained + 1}")
    slots = []
    for _ in range(retained):
        name = rd.next("index")
        if not SYSCALL_NAME_RE.fullmatch(name) or name == OTHER_NAME:
            raise ModelFormatError("index", f"bad slot name {name!r}")
        slots.append(name)
    sentinel = rd.next("index")
    if sentinel != "@" + OTHER_NAME:
        raise ModelFormatError("index", f"missing @{OTHER_NAME} sentinel, got {sentinel!r}")
    # The rarity threshold is a training-time statistic the format does not
    # carry; 0 marks it unknown on loaded models.
    index = SyscallIndex(tuple(slots), 0)

    header = rd.next("entries")
    m = re.fullmatch(r"entries=(\d+)", header)
    if m is None:
        raise ModelFormatError("entries", f"bad entry header {header!r}")
    db = BehaviorDb()
    for i in range(int(m.group(1))):
        line = rd.next("entries")
        counts_part, sep, freq_part = line.rpartition(":")
        if not sep:
            raise ModelFormatError("entries", f"entry {i}: missing ':' separator")
        try:
            bag = tuple(int(tok) for tok in counts_part.split())
            freq = int(freq_part)
        except ValueError:
            raise ModelFormatError("entries", f"entry {i}: unparseable {line!r}") from None
        if len(bag) != n_s:
            raise ModelFormatError("entries", f"entry {i}: {len(bag)} counts, expected {n_s}")
        if freq < 1 or min(bag) < 0:
            raise ModelFormatError("entries", f"entry {i}: negative value")
        if bag in db:
            raise ModelFormatError("entries", f"entry {i}: duplicate bag")
        db.insert_many([bag], [freq])
    db.freeze()

    header = rd.next("history")
    m = re.fullmatch(r"history=(\d+)", header)
    if m is None:
        raise ModelFormatError("history", f"bad history header {header!r}")
    history = []
    for i in range(int(m.group(1))):
        line = rd.next("history")
        try:
            k_str, cos_str = line.split()
            history.append(SimilarityRecord(int(k_str), float(cos_str)))
        except ValueError:
            raise ModelFormatError("history", f"record {i}: unparseable {line!r}") from None
    if not rd.exhausted():
        raise ModelFormatError("structure", "unexpected trailing content before checksum")

    epochs_trained = len(history) + 1
    thr = config.train_threshold
    # Training stops exactly when the last two similarities clear the
    # threshold, so convergence is reconstructible from the history tail.
    converged = (
        len(history) >= 2
        and history[-1].cos_theta >= thr
        and history[-2].cos_theta >= thr
    )
    return TrainedModel(index, db, config, history, epochs_trained, converged)
