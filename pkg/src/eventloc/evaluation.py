"""Token-level P/R/F1, sentence exact-match, model evaluation, ablation.

Token metrics are micro-aggregated: tp/fp/fn are summed over all
(sentence, event) instances and the ratios computed once, with the 0/0
cases pinned to 0. Sentence exact-match counts whole label vectors, one
per instance.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Corpus, LabelVector, event_label_vector, split_corpus
from .features import FeatureConfig
from .models import TrainConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TokenMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class SentenceMetrics:
    exact: int
    total: int
    accuracy: float

    def to_dict(self) -> dict:
        return {"exact": self.exact, "total": self.total, "accuracy": self.accuracy}


def token_prf(pred: LabelVector, gold: LabelVector) -> tuple[int, int, int]:
    """(tp, fp, fn) counts for one instance."""
    if len(pred) != len(gold):
        raise ValueError(f"length mismatch: pred {len(pred)} vs gold {len(gold)}")
    tp = fp = fn = 0
    for p, g in zip(pred, gold):
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif g and not p:
            fn += 1
    return tp, fp, fn


def aggregate(counts) -> TokenMetrics:
    """Micro-aggregate per-instance (tp, fp, fn) triples; 0/0 ratios are 0."""
    tp = fp = fn = 0
    for t, f, n in counts:
        tp += t
        fp += f
        fn += n
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
    return TokenMetrics(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


def sentence_exact(instances) -> SentenceMetrics:
    """Exact-match accuracy over (pred, gold) label-vector pairs.

    An all-zero prediction on an all-zero gold counts as exact: events
    with no location can be exactly right.
    """
    exact = total = 0
    for pred, gold in instances:
        if len(pred) != len(gold):
            raise ValueError(f"length mismatch: pred {len(pred)} vs gold {len(gold)}")
        total += 1
        if all(int(p) == int(g) for p, g in zip(pred, gold)):
            exact += 1
    return SentenceMetrics(exact=exact, total=total,
                           accuracy=exact / total if total else 0.0)


@dataclass
class InstanceOutcome:
    sentence_index: int
    event_index: int
    verb_index: int
    gold: LabelVector
    pred: LabelVector
    exact: bool
    failed: bool = False
    error: str = ""


@dataclass
class EvaluationResult:
    token: TokenMetrics
    sentence: SentenceMetrics
    instances: list[InstanceOutcome]

    def mismatches(self) -> list[InstanceOutcome]:
        """Per-instance error listing for qualitative inspection."""
        return [o for o in self.instances if not o.exact]

    def to_dict(self) -> dict:
        return {"token": self.token.to_dict(), "sentence": self.sentence.to_dict()}


def _predict_labels(predictor, sentence, verb_index) -> LabelVector:
    out = predictor.predict(sentence, verb_index)
    labels = out[0] if isinstance(out, tuple) else out
    return [int(v) for v in labels]


def evaluate_model(predictor, corpus: Corpus, threads: int = 1) -> EvaluationResult:
    """Run a predictor over every (sentence, event) instance of a corpus.

    The predictor exposes predict(sentence, verb_index) returning a label
    vector or a (labels, probabilities) pair. A predictor failure on an
    instance is recorded and scored as an all-zero prediction, not fatal.
    Aggregates are order-independent, so prediction may fan out across
    threads on a frozen model.
    """
    work = [
        (i, k, sentence, event)
        for i, sentence in enumerate(corpus.sentences)
        for k, event in enumerate(sentence.events)
    ]

    def run_one(item) -> InstanceOutcome:
        i, k, sentence, event = item
        gold = event_label_vector(sentence, event)
        try:
            pred = _predict_labels(predictor, sentence, event.verb_index)
        except Exception as exc:  # scored, not raised
            return InstanceOutcome(i, k, event.verb_index, gold, [0] * len(gold),
                                   exact=not any(gold), failed=True, error=str(exc))
        return InstanceOutcome(i, k, event.verb_index, gold, pred,
                               exact=pred == gold)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_one, work))
    else:
        outcomes = [run_one(item) for item in work]

    failed = sum(1 for o in outcomes if o.failed)
    if failed:
        log.warning("%d of %d instances failed prediction", failed, len(outcomes))
    token = aggregate(token_prf(o.pred, o.gold) for o in outcomes)
    sentence_m = sentence_exact((o.pred, o.gold) for o in outcomes)
    return EvaluationResult(token=token, sentence=sentence_m, instances=outcomes)


# ---------------------------------------------------------------------------
# ablation


@dataclass
class AblationCell:
    condition: str
    partition: int
    split_seed: int
    model_seed: int
    membership_digest: str
    token: TokenMetrics
    valid: bool = True
    error: str = ""

    def to_dict(self) -> dict:
        return {
            "condition": self.condition, "partition": self.partition,
            "split_seed": self.split_seed, "model_seed": self.model_seed,
            "membership_digest": self.membership_digest,
            "token": self.token.to_dict(), "valid": self.valid, "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AblationCell":
        token = TokenMetrics(**data["token"])
        return cls(condition=data["condition"], partition=data["partition"],
                   split_seed=data["split_seed"], model_seed=data["model_seed"],
                   membership_digest=data["membership_digest"], token=token,
                   valid=data.get("valid", True), error=data.get("error", ""))


@dataclass
class AblationReport:
    conditions: list[str]
    n_partitions: int
    base_seed: int
    cells: list[AblationCell] = field(default_factory=list)

    def cells_for(self, condition: str) -> list[AblationCell]:
        return [c for c in self.cells if c.condition == condition and c.valid]

    def mean_f1(self, condition: str) -> float:
        cells = self.cells_for(condition)
        return sum(c.token.f1 for c in cells) / len(cells) if cells else 0.0

    def f1_range(self, condition: str) -> tuple[float, float]:
        values = [c.token.f1 for c in self.cells_for(condition)]
        return (min(values), max(values)) if values else (0.0, 0.0)

    def summary_rows(self, reference: str = "full") -> list[dict]:
        ref = self.mean_f1(reference) if reference in self.conditions else None
        rows = []
        for condition in self.conditions:
            lo, hi = self.f1_range(condition)
            row = {
                "condition": condition,
                "mean_f1": self.mean_f1(condition),
                "min_f1": lo,
                "max_f1": hi,
                "partitions": len(self.cells_for(condition)),
            }
            if ref is not None:
                row["delta_vs_full"] = row["mean_f1"] - ref
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        return {
            "conditions": self.conditions,
            "n_partitions": self.n_partitions,
            "base_seed": self.base_seed,
            "cells": [c.to_dict() for c in self.cells],
            "summary": self.summary_rows(),
        }


def _membership_digest(parts) -> str:
    joined = "|".join(
        ";".join(s.sent_id or str(i) for i, s in enumerate(part.sentences))
        for part in parts
    )
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()[:16]


def _cell_path(cache_dir: Path, condition: str, partition: int) -> Path:
    safe = re.sub(r"[^A-Za-z0-9_-]+", "_", condition)
    return cache_dir / f"cell_{safe}_p{partition}.json"


def run_ablation(
    corpus: Corpus,
    conditions: dict[str, FeatureConfig],
    n_partitions: int,
    base_seed: int,
    train_cfg: TrainConfig,
    embeddings=None,
    architecture: str = "bilstm",
    fractions: tuple[float, float, float] = (0.7, 0.15, 0.15),
    cache_dir: str | Path | None = None,
) -> AblationReport:
    """Train/evaluate every (condition, partition) cell on shared splits.

    Partitions are drawn once per partition index and reused across all
    conditions, as is the model seed, so F1 differences isolate the
    feature change. Completed cells found in ``cache_dir`` are reused,
    making long runs resumable; a failed cell is marked invalid and the
    run continues.
    """
    from . import models  # deferred: models trains, this module scores
    from .features import build_inventories

    if n_partitions < 2:
        raise ValueError("need at least 2 partitions to expose variance")
    if not conditions:
        raise ValueError("no ablation conditions given")

    cache = Path(cache_dir) if cache_dir is not None else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)

    report = AblationReport(conditions=list(conditions), n_partitions=n_partitions,
                            base_seed=base_seed)
    for partition in range(n_partitions):
        split_seed = base_seed + partition
        model_seed = base_seed * 1000 + partition
        parts = split_corpus(corpus, fractions, seed=split_seed)
        train_c, val_c, test_c = parts
        digest = _membership_digest(parts)
        inventories = build_inventories(train_c)

        for condition, feature_cfg in conditions.items():
            cell_file = _cell_path(cache, condition, partition) if cache else None
            if cell_file is not None and cell_file.exists():
                cell = AblationCell.from_dict(json.loads(cell_file.read_text()))
                if cell.membership_digest != digest:
                    raise ValueError(
                        f"cached cell {cell_file} was computed on a different partition"
                    )
                report.cells.append(cell)
                continue

            log.info("ablation cell condition=%s partition=%d", condition, partition)
            try:
                model = models.new_model(architecture, feature_cfg, inventories,
                                         embeddings, seed=model_seed)
                cfg = TrainConfig(epochs=train_cfg.epochs, batch_size=train_cfg.batch_size,
                                  lr=train_cfg.lr, patience=train_cfg.patience,
                                  seed=model_seed)
                models.train(model, train_c, val_c, cfg)
                result = evaluate_model(model, test_c)
                cell = AblationCell(condition, partition, split_seed, model_seed,
                                    digest, result.token)
            except Exception as exc:
                log.warning("ablation cell failed: condition=%s partition=%d: %s",
                            condition, partition, exc)
                cell = AblationCell(condition, partition, split_seed, model_seed,
                                    digest, aggregate([]), valid=False, error=str(exc))
            if cell_file is not None and cell.valid:
                cell_file.write_text(json.dumps(cell.to_dict(), indent=2))
            report.cells.append(cell)

    return report
