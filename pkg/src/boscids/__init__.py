"""boscids: bag-of-system-calls anomaly detection for syscall traces.

Pipeline: ingest tracer text, build a syscall-slot index, learn a frequency
database of sliding-window bags from normal traces, then flag epochs of new
traces whose unknown-bag count exceeds the threshold.
"""

from .bosc import (
    BehaviorDb,
    BoSC,
    ChangeVector,
    Config,
    DbSnapshot,
    FrozenDbError,
    bag_of,
    db_diff,
    epoch_bag_matrix,
    epoch_windows,
    unique_bags,
)
from .catalog import OTHER_NAME, SyscallIndex, build_index, resolve
from .detector import (
    DetectionReport,
    EpochVerdict,
    detect,
    format_report,
    read_report_file,
    scan_epoch,
    write_report_file,
)
from .evaluator import (
    LabeledCorpus,
    Metrics,
    compute_metrics,
    format_metrics,
    read_labels,
    write_labels,
)
from .synth import (
    InjectionSpec,
    SourceSpec,
    gen_anomalous,
    gen_normal,
    make_source,
    trace_digest,
)
from .trace_ingest import (
    CountTable,
    RawTrace,
    RawTraceLine,
    count_table,
    ingest,
    ingest_file,
    parse_line,
    read_count_file,
    read_trace_file,
    write_count_file,
    write_trace_file,
)
from .trainer import (
    ModelFormatError,
    SimilarityRecord,
    TrainedModel,
    cosine_similarity,
    load_model,
    save_model,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BehaviorDb", "BoSC", "ChangeVector", "Config", "DbSnapshot",
    "FrozenDbError", "bag_of", "db_diff", "epoch_bag_matrix", "epoch_windows",
    "unique_bags", "OTHER_NAME", "SyscallIndex", "build_index", "resolve",
    "DetectionReport", "EpochVerdict", "detect", "format_report",
    "read_report_file", "scan_epoch", "write_report_file", "LabeledCorpus",
    "Metrics", "compute_metrics", "format_metrics", "read_labels",
    "write_labels", "InjectionSpec", "SourceSpec", "gen_anomalous",
    "gen_normal", "make_source", "trace_digest", "CountTable", "RawTrace",
    "RawTraceLine", "count_table", "ingest", "ingest_file", "parse_line",
    "read_count_file", "read_trace_file", "write_count_file",
    "write_trace_file", "ModelFormatError", "SimilarityRecord",
    "TrainedModel", "cosine_similarity", "load_model", "save_model", "train",
]
