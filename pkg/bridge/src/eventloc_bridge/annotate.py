"""Raw text -> corpus JSONL, plus verb-candidate and sidecar event merging.

Output records follow the consumer's corpus schema: parallel arrays
"tokens", "pos", "dep", "head", "ner" plus an "events" array, one JSON
object per line. Sentences whose head pointers fail the tree invariant
are dropped and counted rather than emitted.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .pipeline import AnnotatedTokens, Annotator

log = logging.getLogger(__name__)

# verbs never proposed as event anchors
BE_FORMS = {"be", "is", "am", "are", "was", "were", "been", "being"}
_AUX_DEPS = {"aux", "auxpass", "cop"}


@dataclass
class AnnotateStats:
    documents: int = 0
    sentences: int = 0
    dropped: int = 0
    merged_events: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        log.warning("%s", message)


def _tree_violations(head: list[int]) -> bool:
    n = len(head)
    if any(not 0 <= h < n for h in head):
        return True
    roots = [i for i, h in enumerate(head) if h == i]
    if len(roots) != 1:
        return True
    for start in range(n):
        node, steps = start, 0
        while head[node] != node:
            node = head[node]
            steps += 1
            if steps > n:
                return True
    return False


def record_from_annotation(ann: AnnotatedTokens, sent_id: str, source: str | None = None) -> dict:
    record = {
        "tokens": ann.tokens, "pos": ann.pos, "dep": ann.dep,
        "head": ann.head, "ner": ann.ner, "events": [], "id": sent_id,
    }
    if source:
        record["source"] = source
    return record


def annotate_documents(
    documents: list[str],
    annotator: Annotator | None = None,
    source: str | None = None,
) -> tuple[list[dict], AnnotateStats]:
    """Annotate documents into schema records; invalid trees are dropped."""
    annotator = annotator or Annotator()
    stats = AnnotateStats()
    records = []
    for d, text in enumerate(documents):
        stats.documents += 1
        for s, ann in enumerate(annotator.annotate_document(text)):
            if _tree_violations(ann.head):
                stats.dropped += 1
                stats.warn(f"dropped document {d} sentence {s}: invalid head tree")
                continue
            records.append(record_from_annotation(ann, f"d{d:04d}-s{s:03d}", source))
            stats.sentences += 1
    return records, stats


# ---------------------------------------------------------------------------
# sidecar event annotations


def _find_token_spans(tokens: list[str], phrase: str) -> list[list[int]]:
    want = phrase.split()
    spans = []
    for start in range(len(tokens) - len(want) + 1):
        if tokens[start:start + len(want)] == want:
            spans.append(list(range(start, start + len(want))))
    return spans


def merge_sidecar(records: list[dict], sidecar_entries: list[dict],
                  stats: AnnotateStats | None = None) -> list[dict]:
    """Resolve {sentence_id, verb_text, locations} entries to token indices.

    Ambiguous strings resolve to the match nearest the verb, with a
    warning; unresolvable entries are skipped, also with a warning.
    """
    stats = stats or AnnotateStats()
    by_id = {r.get("id"): r for r in records}
    for entry in sidecar_entries:
        sent_id = entry.get("sentence_id")
        record = by_id.get(sent_id)
        if record is None:
            stats.warn(f"sidecar: unknown sentence_id {sent_id!r}")
            continue
        tokens = record["tokens"]
        verb_spans = _find_token_spans(tokens, entry["verb_text"])
        if not verb_spans:
            stats.warn(f"sidecar {sent_id}: verb {entry['verb_text']!r} not found")
            continue
        if len(verb_spans) > 1:
            stats.warn(f"sidecar {sent_id}: verb {entry['verb_text']!r} ambiguous, "
                       "using first occurrence")
        verb_index = verb_spans[0][0]

        location_indices: set[int] = set()
        ok = True
        for phrase in entry.get("locations", []):
            spans = _find_token_spans(tokens, phrase)
            if not spans:
                stats.warn(f"sidecar {sent_id}: location {phrase!r} not found")
                ok = False
                break
            if len(spans) > 1:
                spans.sort(key=lambda span: min(abs(i - verb_index) for i in span))
                stats.warn(f"sidecar {sent_id}: location {phrase!r} ambiguous, "
                           "using the match nearest the verb")
            location_indices.update(spans[0])
        if not ok:
            continue
        location_indices.discard(verb_index)
        record["events"].append({"verb_index": verb_index,
                                 "location_indices": sorted(location_indices)})
        stats.merged_events += 1
    return records


# ---------------------------------------------------------------------------
# verb candidates


def is_candidate_verb(pos: str, dep: str, text: str) -> bool:
    """Non-auxiliary, non-copula verbs anchor candidate events."""
    if pos != "VERB":
        return False
    if dep in _AUX_DEPS:
        return False
    return text.lower() not in BE_FORMS


def detect_verbs(record: dict) -> dict:
    """Add one empty-location candidate event per qualifying verb token."""
    existing = {e["verb_index"] for e in record.get("events", [])}
    events = list(record.get("events", []))
    for i, text in enumerate(record["tokens"]):
        if i in existing:
            continue
        if is_candidate_verb(record["pos"][i], record["dep"][i], text):
            events.append({"verb_index": i, "location_indices": []})
    return {**record, "events": events}


# ---------------------------------------------------------------------------
# file-level entry points


def write_records(records: list[dict], out_path: str | Path) -> None:
    with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_records(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def annotate_files(
    paths: list[str | Path],
    out_path: str | Path,
    line_mode: bool = False,
    sidecar_path: str | Path | None = None,
    backend: str = "auto",
    add_verb_candidates: bool = False,
) -> AnnotateStats:
    """Annotate text files (one document per file, or per line with
    line_mode) into a corpus JSONL file."""
    documents = []
    for path in paths:
        text = Path(path).read_text(encoding="utf-8")
        if line_mode:
            documents.extend(line for line in text.splitlines() if line.strip())
        else:
            documents.append(text)
    annotator = Annotator(backend)
    records, stats = annotate_documents(documents, annotator)
    if sidecar_path is not None:
        merge_sidecar(records, read_records(sidecar_path), stats)
    if add_verb_candidates:
        records = [detect_verbs(r) for r in records]
    write_records(records, out_path)
    return stats
