"""Command-line entry point wiring the pipeline: ingest, train, detect, eval,
gen.

Exit statuses: 0 success/clean, 2 anomaly detected (detect), 3 training did
not converge (train), 1 operational error. Defaults follow the standard
parameterization (window 10, epoch 5000, train threshold 0.99, detection
threshold 10% of the epoch).
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import detector, evaluator, synth, trace_ingest, trainer
from .bosc import Config

CONFIG_ENV_VAR = "BOSCIDS_CONFIG"

_DEFAULTS = {
    "window": 10,
    "epoch-size": 5000,
    "train-threshold": 0.99,
    "detect-fraction": 0.10,
    "seed": 42,
    "jobs": 1,
    "granularity": "epoch",
    "alphabet-size": 64,
    "zipf-s": 1.2,
    "intensity": 0.5,
    "inject-mode": "novel_names",
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; 2 is reserved for anomalies.
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _dest(flag: str) -> str:
    return flag.replace("-", "_")


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    p = Path(path)
    if not p.is_file():
        raise CliError(f"config: file not found: {path}")
    for i, line in enumerate(p.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"config: {path}:{i}: expected key=value, got {line!r}")
        values[key.strip()] = value.strip()
    return values


class _Settings:
    """Layered option lookup: explicit flag > config file > built-in default."""

    def __init__(self, args: argparse.Namespace):
        self._args = args
        path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
        self._file = _load_config_file(path) if path else {}
        known = set(_DEFAULTS)
        for key in self._file:
            if key not in known:
                raise CliError(f"config: unknown field {key!r}")

    def has_file_value(self, flag: str) -> bool:
        return flag in self._file

    def get(self, flag: str, cast=str):
        value = getattr(self._args, _dest(flag), None)
        if value is not None:
            return value
        if flag in self._file:
            try:
                return cast(self._file[flag])
            except ValueError:
                raise CliError(f"config: field {flag!r}: invalid value {self._file[flag]!r}") from None
        return _DEFAULTS[flag]

    def pipeline_config(self) -> Config:
        return Config(
            window_size=self.get("window", int),
            epoch_size=self.get("epoch-size", int),
            train_threshold=self.get("train-threshold", float),
            detect_threshold_fraction=self.get("detect-fraction", float),
        )


def _add_config_flags(p: argparse.ArgumentParser, *, window=True, thresholds=True):
    if window:
        p.add_argument("--window", type=int, metavar="W",
                       help="sliding window size in calls (default: 10)")
        p.add_argument("--epoch-size", type=int, metavar="S",
                       help="epoch size in calls (default: 5000)")
    if thresholds:
        p.add_argument("--train-threshold", type=float, metavar="T",
                       help="cosine similarity needed for two consecutive epochs to stop training (default: 0.99)")
        p.add_argument("--detect-fraction", type=float, metavar="F",
                       help="mismatch threshold as a fraction of epoch length (default: 0.10)")
    p.add_argument("--config", metavar="PATH",
                   help=f"key=value config file; ${CONFIG_ENV_VAR} names a default (flags win)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boscids",
                     description="Bag-of-system-calls anomaly detection over syscall traces.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND",
                              parser_class=_Parser)

    p = sub.add_parser("ingest",
                       help="parse tracer output into trace and count files",
                       description="Parse strace-format text into a name-per-line trace file and a tab-separated count file.")
    p.add_argument("input", metavar="STRACE_FILE", help="captured tracer output")
    p.add_argument("--trace-out", metavar="PATH",
                   help="trace file to write (default: INPUT.trace)")
    p.add_argument("--count-out", metavar="PATH",
                   help="count file to write (default: INPUT.counts)")

    p = sub.add_parser("train",
                       help="learn a normal-behavior model from a trace file",
                       description="Train on a name-per-line trace file; prints per-epoch similarity and writes the model. Exit 3 if training does not converge.")
    p.add_argument("trace", metavar="TRACE_FILE", help="name-per-line trace file")
    p.add_argument("--model", required=True, metavar="PATH", help="model file to write")
    p.add_argument("--counts", metavar="PATH",
                   help="count file from ingest (default: recomputed from the trace)")
    _add_config_flags(p)

    p = sub.add_parser("detect",
                       help="scan trace files against a trained model",
                       description="Scan one or more name-per-line trace files; exit 2 when any epoch is anomalous.")
    p.add_argument("traces", nargs="+", metavar="TRACE_FILE", help="name-per-line trace file(s)")
    p.add_argument("--model", required=True, metavar="PATH", help="trained model file")
    p.add_argument("--report", metavar="PATH",
                   help="write the report here instead of stdout (single trace only)")
    p.add_argument("--detect-fraction", type=float, metavar="F",
                   help="override the model's mismatch threshold fraction (default: 0.10)")
    p.add_argument("--jobs", type=int, metavar="N",
                   help="scan multiple traces in parallel (default: 1)")
    p.add_argument("--config", metavar="PATH",
                   help=f"key=value config file; ${CONFIG_ENV_VAR} names a default (flags win)")

    p = sub.add_parser("eval",
                       help="compute TPR/FPR from reports and label files",
                       description="Pair detection reports with ground-truth label files and compute TPR/FPR.")
    p.add_argument("--report", action="append", required=True, metavar="PATH",
                   help="detection report file (repeatable)")
    p.add_argument("--labels", action="append", required=True, metavar="PATH",
                   help="label file matching the report given in the same position (repeatable)")
    p.add_argument("--granularity", choices=("epoch", "window"),
                   help="count epochs or windows (default: epoch)")
    p.add_argument("--config", metavar="PATH",
                   help=f"key=value config file; ${CONFIG_ENV_VAR} names a default (flags win)")

    p = sub.add_parser("gen",
                       help="generate a deterministic synthetic trace",
                       description="Generate a seeded synthetic workload trace, optionally with labeled injected epochs.")
    p.add_argument("--calls", type=int, required=True, metavar="N", help="trace length in calls")
    p.add_argument("--out", required=True, metavar="PATH", help="trace file to write")
    p.add_argument("--seed", type=int, metavar="SEED", help="generator seed (default: 42)")
    p.add_argument("--alphabet-size", type=int, metavar="N",
                   help="distinct syscall names in the source (default: 64)")
    p.add_argument("--zipf-s", type=float, metavar="S",
                   help="stationary frequency skew, 0 = uniform (default: 1.2)")
    p.add_argument("--labels", metavar="PATH", help="write per-epoch labels here")
    p.add_argument("--inject-epochs", metavar="E1,E2,...",
                   help="comma-separated epoch indices to corrupt")
    p.add_argument("--inject-mode", choices=synth.INJECTION_MODES,
                   help="corruption mode (default: novel_names)")
    p.add_argument("--intensity", type=float, metavar="F",
                   help="fraction of each target epoch replaced (default: 0.5)")
    p.add_argument("--epoch-size", type=int, metavar="S",
                   help="epoch size for labels/injection (default: 5000)")
    p.add_argument("--config", metavar="PATH",
                   help=f"key=value config file; ${CONFIG_ENV_VAR} names a default (flags win)")

    return parser


def _cmd_ingest(args) -> int:
    src = Path(args.input)
    if not src.is_file():
        raise CliError(f"input: file not found: {src}")
    trace = trace_ingest.ingest_file(src)
    table = trace_ingest.count_table(trace)
    trace_out = Path(args.trace_out) if args.trace_out else src.with_name(src.name + ".trace")
    count_out = Path(args.count_out) if args.count_out else src.with_name(src.name + ".counts")
    trace_ingest.write_trace_file(trace, trace_out)
    trace_ingest.write_count_file(table, count_out)
    print(f"{trace.source_meta}; {len(trace.calls)} calls, {len(table)} distinct")
    print(f"trace: {trace_out}")
    print(f"counts: {count_out}")
    return 0


def _cmd_train(args) -> int:
    settings = _Settings(args)
    config = settings.pipeline_config()
    trace = trace_ingest.read_trace_file(args.trace)
    counts = trace_ingest.read_count_file(args.counts) if args.counts else None
    model = trainer.train(trace, counts=counts, config=config)
    for rec in model.history:
        print(f"epoch {rec.k} cos={rec.cos_theta:.9f}")
    trainer.save_model(model, args.model)
    status = "converged" if model.converged else "did NOT converge"
    print(
        f"{status} after {model.epochs_trained} epochs; "
        f"db entries={len(model.db)} retained={model.index.retained} ns={model.index.n_s}"
    )
    print(f"model: {args.model}")
    return 0 if model.converged else 3


def _cmd_detect(args) -> int:
    settings = _Settings(args)
    model = trainer.load_model(args.model)
    frac = args.detect_fraction
    if frac is None and settings.has_file_value("detect-fraction"):
        frac = settings.get("detect-fraction", float)
    if frac is not None and not 0.0 < frac <= 1.0:
        raise CliError("detect_fraction: must be in (0, 1]")
    jobs = settings.get("jobs", int)
    if args.report and len(args.traces) > 1:
        raise CliError("report: --report accepts a single input trace")

    def scan(path: str) -> detector.DetectionReport:
        return detector.detect(model, trace_ingest.read_trace_file(path), frac)

    if jobs > 1 and len(args.traces) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(scan, args.traces))
    else:
        reports = [scan(p) for p in args.traces]

    empty = False
    for path, report in zip(args.traces, reports):
        if not report.verdicts:
            print(f"{path}: empty trace, nothing scanned", file=sys.stderr)
            empty = True
            continue
        text = detector.format_report(report)
        if args.report:
            detector.write_report_file(report, args.report)
            print(f"report: {args.report}")
        else:
            if len(args.traces) > 1:
                print(f"== {path}")
            print(text, end="")
    if empty:
        return 1
    return 2 if any(r.trace_anomalous for r in reports) else 0


def _cmd_eval(args) -> int:
    settings = _Settings(args)
    granularity = settings.get("granularity")
    if len(args.report) != len(args.labels):
        raise CliError("labels: need exactly one label file per report")
    reports = {}
    pairs = []
    for rpath, lpath in zip(args.report, args.labels):
        trace_id = Path(rpath).stem
        reports[trace_id] = detector.read_report_file(rpath)
        pairs.append((trace_id, evaluator.read_labels(lpath)))
    corpus = evaluator.LabeledCorpus.from_pairs(pairs)
    metrics = evaluator.compute_metrics(reports, corpus, granularity)
    print(evaluator.format_metrics(metrics), end="")
    return 0


def _cmd_gen(args) -> int:
    settings = _Settings(args)
    seed = settings.get("seed", int)
    spec = synth.make_source(
        n_names=settings.get("alphabet-size", int),
        zipf_s=settings.get("zipf-s", float),
        seed=seed,
    )
    epoch_size = settings.get("epoch-size", int)
    if args.inject_epochs:
        try:
            targets = frozenset(int(tok) for tok in args.inject_epochs.split(","))
        except ValueError:
            raise CliError(f"inject-epochs: expected comma-separated integers, got {args.inject_epochs!r}") from None
        inj = synth.InjectionSpec(targets, settings.get("inject-mode"),
                                  settings.get("intensity", float))
        trace, labels = synth.gen_anomalous(spec, args.calls, inj, epoch_size)
    else:
        trace = synth.gen_normal(spec, args.calls)
        labels = None
        if args.labels:
            if args.calls % epoch_size:
                raise CliError("calls: must be a multiple of epoch-size when labels are requested")
            labels = ["normal"] * (args.calls // epoch_size)
    trace_ingest.write_trace_file(trace, args.out)
    print(f"{trace.source_meta}")
    print(f"trace: {args.out}")
    if args.labels:
        if labels is None:
            raise CliError("labels: nothing to write")
        evaluator.write_labels(labels, args.labels)
        print(f"labels: {args.labels}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "detect": _cmd_detect,
    "eval": _cmd_eval,
    "gen": _cmd_gen,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (CliError, ValueError, trainer.ModelFormatError) as e:
        print(f"boscids {args.command}: error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"boscids {args.command}: error: {e}", file=sys.stderr)
        return 1


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
