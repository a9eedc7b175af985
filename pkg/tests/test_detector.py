import logging
import random

import numpy as np
import pytest

from boscids.bosc import BehaviorDb, Config, bag_of, epoch_windows
from boscids.catalog import SyscallIndex
from boscids.detector import (
    DetectionReport,
    detect,
    format_report,
    read_report_file,
    scan_epoch,
    write_report_file,
)
from boscids.trace_ingest import RawTrace
from boscids.trainer import TrainedModel, train
from helpers import brute_force_mismatches

logging.getLogger("boscids").setLevel(logging.ERROR)


def tiny_model(bags, slots=("a", "b"), w=2, S=4, frac=0.10):
    db = BehaviorDb()
    for bag in bags:
        db.insert(bag)
    db.freeze()
    index = SyscallIndex(tuple(slots), len(slots))
    cfg = Config(window_size=w, epoch_size=S, detect_threshold_fraction=frac)
    return TrainedModel(index, db, cfg, [], 1, True)


def test_scan_epoch_counts_absent_bags():
    # db holds only the a,b window bag; epoch a a b b has two unknown bags
    model = tiny_model([(1, 1, 0)])
    verdict = scan_epoch(model, [0, 0, 1, 1])
    assert verdict.windows_scanned == 3
    assert verdict.mismatches == 2
    assert verdict.threshold_used == pytest.approx(0.4)
    assert verdict.anomalous


def test_scan_epoch_from_training_data_has_zero_mismatches():
    rng = random.Random(21)
    epoch = [rng.randrange(2) for _ in range(50)]
    db = BehaviorDb()
    for window in epoch_windows(epoch, 2):
        db.insert(bag_of(window, 3))
    db.freeze()
    model = TrainedModel(SyscallIndex(("a", "b"), 2), db, Config(2, 50), [], 1, True)
    verdict = scan_epoch(model, epoch)
    assert verdict.mismatches == 0
    assert not verdict.anomalous


def test_scan_epoch_threshold_comparison_is_strict():
    # exactly at the threshold stays normal: 1 mismatch of 10 calls, frac 0.1
    model = tiny_model([(1, 1, 0)], w=2, S=10)
    epoch = [0, 1] * 5
    epoch[0] = 1  # one (b,b) window
    verdict = scan_epoch(model, epoch)
    assert verdict.mismatches == 1
    assert verdict.threshold_used == pytest.approx(1.0)
    assert not verdict.anomalous


def test_scan_epoch_shorter_than_window():
    model = tiny_model([(1, 1, 0)], w=4, S=8)
    verdict = scan_epoch(model, [0, 1])
    assert verdict.windows_scanned == 0
    assert verdict.mismatches == 0
    assert not verdict.anomalous
    assert verdict.warning is not None


def test_scan_matches_brute_force():
    rng = random.Random(22)
    for _ in range(20):
        n_s = rng.randint(2, 8)
        w = rng.randint(2, 5)
        known = {bag_of([rng.randrange(n_s) for _ in range(w)], n_s) for _ in range(30)}
        db = BehaviorDb()
        for bag in known:
            db.insert(bag)
        db.freeze()
        model = TrainedModel(
            SyscallIndex(tuple(f"s{i}" for i in range(n_s - 1)), 0),
            db, Config(w, 64), [], 1, True,
        )
        epoch = [rng.randrange(n_s) for _ in range(64)]
        verdict = scan_epoch(model, epoch)
        assert verdict.mismatches == brute_force_mismatches(epoch, w, n_s, known)


def test_detection_does_not_mutate_model():
    model = tiny_model([(1, 1, 0)])
    before = dict(model.db.items())
    detect(model, RawTrace(["a", "a", "b", "b"] * 3))
    assert dict(model.db.items()) == before
    assert model.db.frozen


def test_bag_invariant_under_swap_within_window():
    # swapping two adjacent calls inside one window span leaves that
    # window's bag unchanged (bags ignore order)
    epoch = [0, 1, 2, 1, 0, 2]
    swapped = list(epoch)
    swapped[2], swapped[3] = swapped[3], swapped[2]
    assert bag_of(epoch[1:5], 3) == bag_of(swapped[1:5], 3)


def test_adding_db_entries_never_increases_mismatches():
    rng = random.Random(23)
    epoch = [rng.randrange(3) for _ in range(60)]
    small = tiny_model([(1, 1, 0)], slots=("a", "b"), w=2, S=60)
    grown_db = BehaviorDb()
    for bag in [(1, 1, 0), (2, 0, 0), (0, 2, 0), (0, 1, 1)]:
        grown_db.insert(bag)
    grown_db.freeze()
    grown = TrainedModel(small.index, grown_db, small.config, [], 1, True)
    assert scan_epoch(grown, epoch).mismatches <= scan_epoch(small, epoch).mismatches


def test_detect_partitions_and_aggregates():
    model = tiny_model([(1, 1, 0)], S=4)
    # two clean epochs then one corrupt epoch
    trace = RawTrace(["a", "b"] * 4 + ["b", "b", "b", "b"])
    report = detect(model, trace)
    assert [v.anomalous for v in report.verdicts] == [False, False, True]
    assert report.trace_anomalous
    assert report.totals["epochs"] == 3
    assert report.totals["anomalous_epochs"] == 1


def test_detect_trace_anomalous_is_or_of_verdicts():
    model = tiny_model([(1, 1, 0)], S=4)
    clean = detect(model, RawTrace(["a", "b"] * 4))
    assert not clean.trace_anomalous
    assert clean.totals["anomalous_epochs"] == 0


def test_detect_scans_partial_tail_with_scaled_threshold():
    model = tiny_model([(1, 1, 0)], S=4)
    trace = RawTrace(["a", "b"] * 2 + ["a", "b", "a"])  # 4 + 3 calls
    report = detect(model, trace)
    assert len(report.verdicts) == 2
    tail = report.verdicts[1]
    assert tail.windows_scanned == 2
    assert tail.threshold_used == pytest.approx(0.1 * 3)


def test_detect_drops_tail_shorter_than_window():
    model = tiny_model([(1, 1, 0)], S=4)
    trace = RawTrace(["a", "b"] * 2 + ["a"])  # tail of 1 < w=2
    report = detect(model, trace)
    assert len(report.verdicts) == 1
    assert report.totals["dropped_tail_calls"] == 1


def test_detect_empty_trace_gives_empty_report():
    model = tiny_model([(1, 1, 0)])
    report = detect(model, RawTrace([]))
    assert report.verdicts == []
    assert not report.trace_anomalous


def test_detect_unknown_names_go_to_other_slot():
    model = tiny_model([(1, 1, 0)], S=4)
    report = detect(model, RawTrace(["ptrace", "bpf"] * 2))
    assert report.verdicts[0].mismatches == 3  # every bag is (0,0,2), unseen


def test_detect_threshold_fraction_override():
    model = tiny_model([(1, 1, 0)], S=4)
    trace = RawTrace(["a", "a", "b", "b"])
    assert detect(model, trace).verdicts[0].anomalous
    # with the loosest threshold nothing gets flagged
    loose = detect(model, trace, threshold_fraction=1.0)
    assert not loose.verdicts[0].anomalous


def test_report_round_trip(tmp_path):
    model = tiny_model([(1, 1, 0)], S=4)
    report = detect(model, RawTrace(["a", "b"] * 4 + ["b"] * 4))
    path = tmp_path / "r.report"
    write_report_file(report, path)
    loaded = read_report_file(path)
    assert loaded.verdicts == report.verdicts
    assert loaded.trace_anomalous == report.trace_anomalous


def test_format_report_rows():
    model = tiny_model([(1, 1, 0)], S=4)
    text = format_report(detect(model, RawTrace(["a", "b"] * 2)))
    lines = text.splitlines()
    assert lines[0].split() == ["0", "3", "0", "0.4", "0"]
    assert lines[-1].startswith("total ")
