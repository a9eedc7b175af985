"""Scan traces against a frozen model and flag epochs with too many unknown
bags."""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bosc import unique_window_bags
from .trace_ingest import RawTrace
from .trainer import TrainedModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpochVerdict:
    epoch_index: int
    windows_scanned: int
    mismatches: int
    threshold_used: float
    anomalous: bool
    warning: str | None = None


@dataclass
class DetectionReport:
    verdicts: list[EpochVerdict]
    trace_anomalous: bool
    totals: dict[str, int]


def scan_epoch(model: TrainedModel, epoch, epoch_index: int = 0,
               threshold_fraction: float | None = None) -> EpochVerdict:
    """Slide the window over one epoch's slot stream and count bags absent
    from the db.

    The threshold scales with the epoch's actual length, so partial final
    epochs are judged proportionally. Comparison is strict: exactly hitting
    the threshold is still normal. Never mutates the model.
    """
    frac = model.config.detect_threshold_fraction if threshold_fraction is None else threshold_fraction
    w = model.config.window_size
    slots = np.asarray(epoch, dtype=np.int64)
    n = int(slots.shape[0])
    threshold = frac * n
    if n < w:
        return EpochVerdict(
            epoch_index, 0, 0, threshold, False,
            warning=f"epoch of {n} calls is shorter than window {w}; skipped",
        )
    keys, mult = unique_window_bags(slots, w, model.index.n_s)
    db = model.db
    mismatches = int(sum(int(m) for bag, m in zip(keys, mult) if bag not in db))
    n_windows = n - w + 1
    return EpochVerdict(epoch_index, n_windows, mismatches, threshold, mismatches > threshold)


def detect(model: TrainedModel, trace, threshold_fraction: float | None = None) -> DetectionReport:
    """Partition a trace into epochs and scan each against the frozen model.

    The trailing partial epoch is scanned when it is at least one window
    long; anything shorter is dropped with a note in the totals. Unknown
    syscall names resolve to the OTHER slot, never failing.
    """
    seq = trace.calls if isinstance(trace, RawTrace) else trace
    if isinstance(seq, np.ndarray) and np.issubdtype(seq.dtype, np.integer):
        slots = seq.astype(np.int64, copy=False)
    elif len(seq) > 0 and isinstance(seq[0], (int, np.integer)):
        slots = np.asarray(seq, dtype=np.int64)
    else:
        slots = model.index.resolve_stream(seq)

    S = model.config.epoch_size
    w = model.config.window_size
    n = int(slots.shape[0])
    verdicts: list[EpochVerdict] = []
    full, rem = divmod(n, S)
    for e in range(full):
        verdicts.append(scan_epoch(model, slots[e * S : (e + 1) * S], e, threshold_fraction))
    dropped = 0
    if rem >= w:
        verdicts.append(scan_epoch(model, slots[full * S :], full, threshold_fraction))
    elif rem:
        dropped = rem
        log.warning("dropping trailing %d calls (shorter than window %d)", rem, w)

    totals = {
        "epochs": len(verdicts),
        "windows": sum(v.windows_scanned for v in verdicts),
        "mismatches": sum(v.mismatches for v in verdicts),
        "anomalous_epochs": sum(v.anomalous for v in verdicts),
        "dropped_tail_calls": dropped,
    }
    return DetectionReport(verdicts, any(v.anomalous for v in verdicts), totals)


def format_report(report: DetectionReport) -> str:
    """Line-oriented report: one row per epoch, then a summary line.

    Row fields: epoch_index windows mismatches threshold anomalous(0/1).
    """
    rows = [
        f"{v.epoch_index} {v.windows_scanned} {v.mismatches} {v.threshold_used!r} {int(v.anomalous)}"
        for v in report.verdicts
    ]
    t = report.totals
    rows.append(
        "total epochs={epochs} windows={windows} mismatches={mismatches} "
        "anomalous_epochs={anomalous_epochs} trace_anomalous={flag}".format(
            flag=int(report.trace_anomalous), **{k: t[k] for k in
            ("epochs", "windows", "mismatches", "anomalous_epochs")}
        )
    )
    return "\n".join(rows) + "\n"


def write_report_file(report: DetectionReport, path) -> None:
    Path(path).write_bytes(format_report(report).encode("ascii"))


def read_report_file(path) -> DetectionReport:
    p = Path(path)
    verdicts = []
    saw_total = False
    for i, line in enumerate(p.read_text(encoding="ascii").splitlines(), start=1):
        if line.startswith("total "):
            saw_total = True
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"{p}: line {i}: expected 5 fields, got {len(parts)}")
        idx, windows, mism, thr, flag = parts
        verdicts.append(
            EpochVerdict(int(idx), int(windows), int(mism), float(thr), flag == "1")
        )
    if not saw_total:
        raise ValueError(f"{p}: missing summary line")
    totals = {
        "epochs": len(verdicts),
        "windows": sum(v.windows_scanned for v in verdicts),
        "mismatches": sum(v.mismatches for v in verdicts),
        "anomalous_epochs": sum(v.anomalous for v in verdicts),
        "dropped_tail_calls": 0,
    }
    return DetectionReport(verdicts, any(v.anomalous for v in verdicts), totals)
