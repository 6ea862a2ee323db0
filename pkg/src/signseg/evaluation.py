"""Ground-truth ingestion, detection matching, and precision/recall reports.

Matching is greedy in descending IoU with deterministic tie-breaks; a
pair counts as a true positive only at or above the IoU threshold.
Percentages are computed in exact rational arithmetic and rendered at
two decimals with round-half-to-even; undefined ratios (zero
denominator) are reported as None/null, never as 0 or 100.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

Box = tuple[int, int, int, int]  # (left, top, right, bottom), right/bottom exclusive


@dataclass(frozen=True)
class GroundTruthRecord:
    image_id: str
    bbox: Box
    class_tag: str | None = None

    def __post_init__(self) -> None:
        if not self.image_id:
            raise ValueError("image_id must be non-empty")
        left, top, right, bottom = self.bbox
        if not (right > left and bottom > top):
            raise ValueError(f"degenerate bbox {self.bbox}")


def parse_ground_truth(text: str, source: str = "<string>") -> list[GroundTruthRecord]:
    """Parse semicolon-separated records: image_id;left;top;right;bottom[;tag].

    Blank lines and '#' comments are skipped. Malformed lines raise
    ValueError naming the offending line number.
    """
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(";")
        if len(parts) not in (5, 6):
            raise ValueError(
                f"{source}: line {lineno}: expected 5 or 6 ';'-separated fields, "
                f"got {len(parts)}"
            )
        image_id = parts[0].strip()
        try:
            coords = tuple(int(p) for p in parts[1:5])
        except ValueError as exc:
            raise ValueError(f"{source}: line {lineno}: bad coordinate: {exc}") from exc
        tag = parts[5].strip() if len(parts) == 6 else None
        try:
            records.append(GroundTruthRecord(image_id, coords, tag))
        except ValueError as exc:
            raise ValueError(f"{source}: line {lineno}: {exc}") from exc
    return records


def load_ground_truth(path) -> list[GroundTruthRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ground_truth(fh.read(), source=str(path))


def box_iou(a: Box, b: Box) -> float:
    """Intersection-over-union of two inclusive-exclusive integer boxes."""
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


@dataclass
class MatchResult:
    tp: int
    fp: int
    fn: int
    pairs: list[tuple[int, int]] = field(default_factory=list)  # (truth_idx, det_idx)

    def __add__(self, other: "MatchResult") -> "MatchResult":
        return MatchResult(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def match_detections(
    detections, truths, iou_min: float = 0.5
) -> MatchResult:
    """Greedy one-to-one matching in descending IoU order.

    Only pairs with positive IoU at or above ``iou_min`` are eligible;
    ties break on the lower (truth index, detection index). Unmatched
    detections are false positives, unmatched truths false negatives.
    """
    if not 0.0 <= iou_min <= 1.0:
        raise ValueError(f"iou_min={iou_min} outside [0, 1]")
    det_boxes = [d.bbox for d in detections]
    truth_boxes = [t.bbox for t in truths]
    candidates = []
    for ti, tb in enumerate(truth_boxes):
        for di, db in enumerate(det_boxes):
            iou = box_iou(tb, db)
            if iou > 0.0 and iou >= iou_min:
                candidates.append((-iou, ti, di))
    candidates.sort()
    truth_used = [False] * len(truth_boxes)
    det_used = [False] * len(det_boxes)
    pairs = []
    for _, ti, di in candidates:
        if truth_used[ti] or det_used[di]:
            continue
        truth_used[ti] = True
        det_used[di] = True
        pairs.append((ti, di))
    tp = len(pairs)
    return MatchResult(
        tp=tp,
        fp=len(det_boxes) - tp,
        fn=len(truth_boxes) - tp,
        pairs=sorted(pairs),
    )


def percent_exact(numerator: int, denominator: int) -> float | None:
    """100 * numerator / denominator at 2 decimals, round-half-to-even,
    computed in integer arithmetic. None when the denominator is zero."""
    if denominator == 0:
        return None
    n = 10000 * numerator
    q, r = divmod(n, denominator)
    if 2 * r > denominator or (2 * r == denominator and q % 2 == 1):
        q += 1
    return q / 100.0


@dataclass(frozen=True)
class EvalRow:
    """One method's counts and percentages on one dataset.

    Counts may be None for externally supplied reference rows (published
    numbers quoted for comparison rather than recomputed)."""

    method: str
    dataset: str
    precision: float | None
    recall: float | None
    tp: int | None
    fp: int | None
    fn: int | None


def compute_metrics(m: MatchResult, method: str = "", dataset: str = "") -> EvalRow:
    """Precision = TP / all detections, recall = TP / all truths, as
    percentages; undefined ratios become None."""
    return EvalRow(
        method=method,
        dataset=dataset,
        precision=percent_exact(m.tp, m.tp + m.fp),
        recall=percent_exact(m.tp, m.tp + m.fn),
        tp=m.tp,
        fp=m.fp,
        fn=m.fn,
    )


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def add(self, row: EvalRow) -> None:
        self.rows.append(row)


def _fmt_pct(value: float | None) -> str:
    return "null" if value is None else f"{value:.2f}"


def _fmt_count(value: int | None) -> str:
    return "-" if value is None else str(value)


def render_report_text(report: EvalReport) -> str:
    """One table per dataset: rows are methods, columns are
    Precision %, Recall %, TP, FP, FN."""
    lines = []
    datasets = []
    for row in report.rows:
        if row.dataset not in datasets:
            datasets.append(row.dataset)
    header = f"{'Method':<16} {'Precision %':>12} {'Recall %':>10} {'TP':>6} {'FP':>6} {'FN':>6}"
    for ds in datasets:
        lines.append(f"Dataset: {ds}")
        lines.append(header)
        lines.append("-" * len(header))
        for row in report.rows:
            if row.dataset != ds:
                continue
            lines.append(
                f"{row.method:<16} {_fmt_pct(row.precision):>12} "
                f"{_fmt_pct(row.recall):>10} {_fmt_count(row.tp):>6} "
                f"{_fmt_count(row.fp):>6} {_fmt_count(row.fn):>6}"
            )
        lines.append("")
    if report.failures:
        lines.append("Failures:")
        lines.extend(f"  {msg}" for msg in sorted(report.failures))
        lines.append("")
    return "\n".join(lines)


def render_report_jsonl(report: EvalReport) -> str:
    """Machine-readable variant: one JSON object per row."""
    out = []
    for row in report.rows:
        out.append(json.dumps({
            "method": row.method,
            "dataset": row.dataset,
            "precision": row.precision,
            "recall": row.recall,
            "tp": row.tp,
            "fp": row.fp,
            "fn": row.fn,
        }))
    return "\n".join(out) + ("\n" if out else "")


@dataclass
class PRCurve:
    """(threshold, precision, recall) triples over a strictly monotone
    threshold sweep."""

    points: list[tuple[float, float | None, float | None]]

    def __post_init__(self) -> None:
        ts = [t for t, _, _ in self.points]
        if not _strictly_monotone(ts):
            raise ValueError("thresholds must be strictly monotone")


def _strictly_monotone(ts) -> bool:
    if len(ts) < 2:
        return True
    return (all(b > a for a, b in zip(ts, ts[1:]))
            or all(b < a for a, b in zip(ts, ts[1:])))


def pr_sweep(run_at, thresholds) -> PRCurve:
    """Evaluate ``run_at(threshold) -> MatchResult`` over the sweep."""
    ts = list(thresholds)
    if not ts:
        raise ValueError("thresholds must be non-empty")
    if not _strictly_monotone(ts):
        raise ValueError("thresholds must be strictly monotone")
    points = []
    for t in ts:
        result = run_at(t)
        row = compute_metrics(result)
        points.append((float(t), row.precision, row.recall))
    return PRCurve(points)


def render_pr_curve(curve: PRCurve) -> str:
    """Two-column text (recall, precision), one line per threshold;
    undefined values render as nan."""
    def num(v):
        return "nan" if v is None else f"{v:.2f}"

    return "\n".join(f"{num(r)} {num(p)}" for _, p, r in curve.points) + "\n"
