"""Benchmark harness: load the expert QA set, run it against model backends,
collect metric scores, latencies and human ratings, and render reports.

The strict dataset shape is three groups (clinical, visual, general) of four
question/reference pairs each. Reports aggregate per (model, group): mean
METEOR, mean chrF, mean latency in minutes, plus per-model human-rating
averages when ratings exist.
"""

from __future__ import annotations

import csv
import io
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import (
    DatasetEmpty,
    DuplicateItemId,
    NoRecords,
    OutOfRange,
    ParseError,
    RagBenchError,
    StrictShapeViolation,
    UnknownRecord,
)
from .evalmetrics import (
    METEOR_VARIANT,
    ChrfConfig,
    MetricScores,
    score_response,
)
from .ragchat import ChatEngine, Session

GROUPS = ("clinical", "visual", "general")
GROUP_LABELS = {"clinical": "G1 (clinical)", "visual": "G2 (visual)",
                "general": "G3 (general)"}
STRICT_ITEMS_PER_GROUP = 4


@dataclass(frozen=True)
class BenchmarkItem:
    item_id: str
    group: str
    question: str
    reference: str


@dataclass(frozen=True)
class BenchmarkDataset:
    name: str
    items: tuple[BenchmarkItem, ...]


@dataclass
class RunRecord:
    record_id: str
    item_id: str
    model_id: str
    group: str
    answer_text: str
    scores: MetricScores | None
    latency_s: float
    retrieval_s: float
    error: str | None = None


@dataclass(frozen=True)
class HumanRating:
    record_id: str
    fidelity_pct: int
    relevance_pct: int
    rater_id: str


def parse_dataset(data: dict, strict: bool = False) -> BenchmarkDataset:
    try:
        name = data["name"]
        raw_items = data["items"]
        items = []
        for raw in raw_items:
            group = raw["group"]
            if group not in GROUPS:
                raise ParseError(f"unknown group {group!r} in item {raw.get('id')!r}")
            if not raw["question"] or not raw["reference"]:
                raise ParseError(f"item {raw.get('id')!r} has empty question/reference")
            items.append(BenchmarkItem(
                item_id=raw["id"], group=group,
                question=raw["question"], reference=raw["reference"],
            ))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed dataset: {exc}") from exc

    seen = set()
    for item in items:
        if item.item_id in seen:
            raise DuplicateItemId(f"duplicate item id: {item.item_id}")
        seen.add(item.item_id)

    if strict:
        counts = {g: sum(1 for i in items if i.group == g) for g in GROUPS}
        if any(counts[g] != STRICT_ITEMS_PER_GROUP for g in GROUPS):
            raise StrictShapeViolation(
                f"strict mode requires 4 items per group, got {counts}")
    return BenchmarkDataset(name=name, items=tuple(items))


def load_dataset(path: str | Path, strict: bool = False) -> BenchmarkDataset:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot load dataset {path}: {exc}") from exc
    return parse_dataset(data, strict=strict)


def bundled_dataset_path() -> Path:
    """Path of the packaged pediatric-hypertension QA dataset."""
    return Path(__file__).parent / "data" / "pediatric_hypertension_qa.json"


def run_benchmark(
    dataset: BenchmarkDataset,
    model_ids: list[str],
    engine: ChatEngine,
    session: Session,
    chrf_cfg: ChrfConfig = ChrfConfig(),
    k: int | None = None,
    workers: int = 1,
) -> list[RunRecord]:
    """Pose every item to every model; one record per (item, model).

    Per-item backend failures become error-marked records, never aborts.
    workers > 1 runs items concurrently, which makes wall-clock latency
    figures meaningless; reports then omit latency columns.
    """
    if not dataset.items:
        raise DatasetEmpty("dataset has no items")

    def run_one(pair: tuple[str, BenchmarkItem]) -> RunRecord:
        model_id, item = pair
        record_id = f"{model_id}::{item.item_id}"
        try:
            answer = engine.answer_query(session, item.question, model_id, k=k)
            scores = score_response(answer.text, item.reference, chrf_cfg)
            return RunRecord(
                record_id=record_id, item_id=item.item_id, model_id=model_id,
                group=item.group, answer_text=answer.text, scores=scores,
                latency_s=answer.latency_s, retrieval_s=answer.retrieval_s,
            )
        except RagBenchError as exc:
            return RunRecord(
                record_id=record_id, item_id=item.item_id, model_id=model_id,
                group=item.group, answer_text="", scores=None,
                latency_s=0.0, retrieval_s=0.0,
                error=f"{type(exc).__name__}: {exc}",
            )

    pairs = [(m, item) for m in model_ids for item in dataset.items]
    if workers <= 1:
        return [run_one(p) for p in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, pairs))


class RatingStore:
    """Human ratings keyed by (record, rater); re-rating overwrites."""

    def __init__(self):
        self._known_records: set[str] = set()
        self._ratings: dict[tuple[str, str], HumanRating] = {}
        self._lock = threading.Lock()

    def register_records(self, records: list[RunRecord]) -> None:
        with self._lock:
            self._known_records.update(r.record_id for r in records)

    def record_rating(self, record_id: str, fidelity_pct: int,
                      relevance_pct: int, rater_id: str) -> None:
        if record_id not in self._known_records:
            raise UnknownRecord(f"no such run record: {record_id}")
        for name, value in (("fidelity_pct", fidelity_pct),
                            ("relevance_pct", relevance_pct)):
            if not (0 <= value <= 100):
                raise OutOfRange(f"{name} must be in 0..100, got {value}")
        with self._lock:
            self._ratings[(record_id, rater_id)] = HumanRating(
                record_id, fidelity_pct, relevance_pct, rater_id)

    def all_ratings(self) -> list[HumanRating]:
        with self._lock:
            return list(self._ratings.values())


@dataclass(frozen=True)
class GroupModelCell:
    group: str
    model_id: str
    meteor: float
    chrf: float
    latency_minutes: float
    n: int
    n_failed: int


@dataclass(frozen=True)
class ModelRatingSummary:
    model_id: str
    fidelity_pct: float
    relevance_pct: float
    combined_pct: float  # unweighted mean of the two
    n: int


@dataclass(frozen=True)
class EvaluationReport:
    cells: tuple[GroupModelCell, ...]
    ratings: tuple[ModelRatingSummary, ...]
    models: tuple[str, ...]
    chrf_beta: float
    meteor_variant: str
    generated_at: str
    latency_valid: bool


def build_report(
    records: list[RunRecord],
    ratings: list[HumanRating] | None = None,
    chrf_cfg: ChrfConfig = ChrfConfig(),
    latency_valid: bool = True,
) -> EvaluationReport:
    """Aggregate records into per (group, model) means.

    Error-marked records are excluded from means (n shrinks, n_failed notes
    them) instead of contributing zero scores.
    """
    if not records:
        raise NoRecords("no records to report on")
    ratings = ratings or []

    models: list[str] = []
    for rec in records:
        if rec.model_id not in models:
            models.append(rec.model_id)

    cells: list[GroupModelCell] = []
    for group in GROUPS:
        for model_id in models:
            bucket = [r for r in records if r.group == group and r.model_id == model_id]
            if not bucket:
                continue
            ok = [r for r in bucket if r.error is None]
            n, n_failed = len(ok), len(bucket) - len(ok)
            if ok:
                meteor = sum(r.scores.meteor for r in ok) / n
                chrf_v = sum(r.scores.chrf for r in ok) / n
                latency_minutes = sum(r.latency_s for r in ok) / n / 60.0
            else:
                meteor = chrf_v = latency_minutes = 0.0
            cells.append(GroupModelCell(
                group=group, model_id=model_id, meteor=meteor, chrf=chrf_v,
                latency_minutes=latency_minutes, n=n, n_failed=n_failed,
            ))

    rating_rows: list[ModelRatingSummary] = []
    by_record = {r.record_id: r for r in records}
    for model_id in models:
        mine = [rt for rt in ratings
                if by_record.get(rt.record_id) is not None
                and by_record[rt.record_id].model_id == model_id]
        if not mine:
            continue
        fid = sum(rt.fidelity_pct for rt in mine) / len(mine)
        rel = sum(rt.relevance_pct for rt in mine) / len(mine)
        rating_rows.append(ModelRatingSummary(
            model_id=model_id, fidelity_pct=fid, relevance_pct=rel,
            combined_pct=(fid + rel) / 2.0, n=len(mine),
        ))

    return EvaluationReport(
        cells=tuple(cells),
        ratings=tuple(rating_rows),
        models=tuple(models),
        chrf_beta=chrf_cfg.beta,
        meteor_variant=METEOR_VARIANT,
        generated_at=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        latency_valid=latency_valid,
    )


def render_report(
    records: list[RunRecord],
    ratings: list[HumanRating] | None = None,
    fmt: str = "markdown",
    chrf_cfg: ChrfConfig = ChrfConfig(),
    latency_valid: bool = True,
) -> bytes:
    report = build_report(records, ratings, chrf_cfg, latency_valid)
    if fmt == "markdown":
        return render_markdown(report).encode("utf-8")
    if fmt == "csv":
        return render_csv(report).encode("utf-8")
    if fmt == "json":
        return report_to_json(report).encode("utf-8")
    raise ValueError(f"unknown report format: {fmt!r}")


def _cell_map(report: EvaluationReport) -> dict[tuple[str, str], GroupModelCell]:
    return {(c.group, c.model_id): c for c in report.cells}


def render_markdown(report: EvaluationReport) -> str:
    cells = _cell_map(report)
    models = report.models
    lines = ["# Evaluation report", ""]
    lines.append(f"Metric config: chrF beta = {report.chrf_beta:g}, "
                 f"variant = {report.meteor_variant}. "
                 f"Generated {report.generated_at}.")
    lines.append("")

    # score grid: one row per group, METEOR + chrF column pair per model
    lines.append("## Average METEOR and chrF scores")
    lines.append("")
    header = "| Group |" + "".join(f" {m} METEOR | {m} chrF |" for m in models)
    lines.append(header)
    lines.append("|" + " --- |" * (1 + 2 * len(models)))
    for group in GROUPS:
        row = [GROUP_LABELS[group]]
        present = False
        for m in models:
            cell = cells.get((group, m))
            if cell is None:
                row.extend(["-", "-"])
                continue
            present = True
            row.extend([f"{cell.meteor:.2f}", f"{cell.chrf:.2f}"])
        if present:
            lines.append("| " + " | ".join(row) + " |")
    lines.append("")

    if report.latency_valid:
        lines.append("## Average response time (minutes)")
        lines.append("")
        lines.append("Generation time only; retrieval is accounted separately.")
        lines.append("")
        lines.append("| Group |" + "".join(f" {m} |" for m in models))
        lines.append("|" + " --- |" * (1 + len(models)))
        for group in GROUPS:
            row = [GROUP_LABELS[group]]
            present = False
            for m in models:
                cell = cells.get((group, m))
                if cell is None:
                    row.append("-")
                    continue
                present = True
                row.append(f"{cell.latency_minutes:.2f}")
            if present:
                lines.append("| " + " | ".join(row) + " |")
        lines.append("")

    if report.ratings:
        lines.append("## Human ratings (0-100%)")
        lines.append("")
        lines.append("| Model | Fidelity | Relevance | Combined (unweighted) | n |")
        lines.append("| --- | --- | --- | --- | --- |")
        for rr in report.ratings:
            lines.append(f"| {rr.model_id} | {rr.fidelity_pct:.1f} | "
                         f"{rr.relevance_pct:.1f} | {rr.combined_pct:.1f} | {rr.n} |")
        lines.append("")

    failed = sum(c.n_failed for c in report.cells)
    if failed:
        lines.append(f"Note: {failed} record(s) failed and are excluded from means.")
        lines.append("")
    return "\n".join(lines)


def render_csv(report: EvaluationReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["group", "model", "meteor", "chrf", "n", "mean_latency_minutes"])
    for cell in report.cells:
        writer.writerow([
            cell.group, cell.model_id, repr(cell.meteor), repr(cell.chrf),
            cell.n, repr(cell.latency_minutes) if report.latency_valid else "",
        ])
    return out.getvalue()


def report_to_json(report: EvaluationReport) -> str:
    return json.dumps(asdict(report), indent=2)


def report_from_json(text: str | bytes) -> EvaluationReport:
    data = json.loads(text)
    return EvaluationReport(
        cells=tuple(GroupModelCell(**c) for c in data["cells"]),
        ratings=tuple(ModelRatingSummary(**r) for r in data["ratings"]),
        models=tuple(data["models"]),
        chrf_beta=data["chrf_beta"],
        meteor_variant=data["meteor_variant"],
        generated_at=data["generated_at"],
        latency_valid=data["latency_valid"],
    )
