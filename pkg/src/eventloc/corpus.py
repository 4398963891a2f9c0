"""Annotated-sentence data model, JSONL corpus I/O, and synthetic corpora.

A corpus file is UTF-8 JSONL, one sentence object per line:

    {"tokens": [...], "pos": [...], "dep": [...], "head": [...], "ner": [...],
     "events": [{"verb_index": 3, "location_indices": [5, 6]}],
     "id": "optional", "source": "optional"}

The five token arrays are parallel and equal length. Head indices are
0-based; the root token points at itself. Corpus objects are treated as
immutable once loaded and are safe to share across workers.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CorpusFormatError, CorpusValidationError, DataError

# A label vector is one 0/1 entry per token of a sentence.
LabelVector = list[int]


@dataclass(frozen=True)
class Token:
    index: int
    text: str
    pos: str
    dep: str
    head: int
    ner: str


@dataclass(frozen=True)
class EventAnnotation:
    """An event anchored at a verb, with the token indices naming its location.

    ``location_indices`` may be empty (events with no reported location),
    a single index, or several indices (multi-token names and multi-place
    events alike).
    """

    verb_index: int
    location_indices: frozenset[int] = frozenset()


@dataclass
class AnnotatedSentence:
    tokens: list[Token]
    events: list[EventAnnotation] = field(default_factory=list)
    sent_id: str | None = None
    source: str | None = None

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


@dataclass
class Corpus:
    sentences: list[AnnotatedSentence]
    provenance: str = ""

    def __len__(self) -> int:
        return len(self.sentences)

    def instances(self) -> list[tuple[int, int]]:
        """All (sentence index, event index) pairs, in corpus order."""
        return [
            (i, k)
            for i, s in enumerate(self.sentences)
            for k in range(len(s.events))
        ]


def event_label_vector(sentence: AnnotatedSentence, event: EventAnnotation) -> LabelVector:
    """Binary per-token labels: 1 exactly on the event's location indices."""
    labels = [0] * len(sentence)
    for i in event.location_indices:
        labels[i] = 1
    return labels


def contiguous_spans(indices: Iterable[int]) -> list[tuple[int, int]]:
    """Group token indices into maximal contiguous [start, end] spans."""
    ordered = sorted(set(indices))
    spans: list[tuple[int, int]] = []
    for i in ordered:
        if spans and i == spans[-1][1] + 1:
            spans[-1] = (spans[-1][0], i)
        else:
            spans.append((i, i))
    return spans


# ---------------------------------------------------------------------------
# validation


def validate_sentence(sentence: AnnotatedSentence) -> list[str]:
    """Check every sentence invariant; return human-readable violations.

    An empty list means the sentence is well formed. Violations are data,
    not exceptions: callers decide whether to raise.
    """
    violations: list[str] = []
    n = len(sentence.tokens)
    if n == 0:
        return ["sentence has no tokens"]

    for t in sentence.tokens:
        for name in ("pos", "dep", "ner"):
            if not getattr(t, name):
                violations.append(f"token {t.index}: empty {name}")

    heads_ok = True
    for t in sentence.tokens:
        if not 0 <= t.head < n:
            violations.append(f"token {t.index}: head out of range")
            heads_ok = False

    if heads_ok:
        roots = [t.index for t in sentence.tokens if t.head == t.index]
        if not roots:
            violations.append("no root (no token is its own head)")
        elif len(roots) > 1:
            violations.append("multiple roots")
        if _has_head_cycle(sentence.tokens):
            violations.append("head pointers contain cycle")

    for k, event in enumerate(sentence.events):
        if not 0 <= event.verb_index < n:
            violations.append(f"event {k}: verb_index out of range")
        for i in sorted(event.location_indices):
            if not 0 <= i < n:
                violations.append(f"event {k}: location index {i} out of range")
        if event.verb_index in event.location_indices:
            violations.append(f"event {k}: verb_index in location_indices")

    return violations


def _has_head_cycle(tokens: Sequence[Token]) -> bool:
    # Follow head chains; a chain that revisits a node before reaching a
    # fixed point is a cycle. Memoized so the scan is linear.
    UNKNOWN, IN_PROGRESS, CLEAN = 0, 1, 2
    state = [UNKNOWN] * len(tokens)
    for start in range(len(tokens)):
        if state[start] != UNKNOWN:
            continue
        chain = []
        node = start
        while True:
            if state[node] == IN_PROGRESS:
                return True
            if state[node] == CLEAN:
                break
            state[node] = IN_PROGRESS
            chain.append(node)
            head = tokens[node].head
            if head == node:
                break
            node = head
        for visited in chain:
            state[visited] = CLEAN
    return False


# ---------------------------------------------------------------------------
# JSONL I/O

_PARALLEL_KEYS = ("tokens", "pos", "dep", "head", "ner")


def sentence_from_record(record: Mapping, index: int = 0, line: int | None = None) -> AnnotatedSentence:
    """Build an AnnotatedSentence from one decoded JSONL object (unvalidated)."""
    where = f"line {line}" if line is not None else f"sentence {index}"
    for key in _PARALLEL_KEYS:
        if key not in record:
            raise CorpusFormatError(f"{where}: missing key {key!r}")
        if not isinstance(record[key], list):
            raise CorpusFormatError(f"{where}: key {key!r} is not an array")
    n = len(record["tokens"])
    for key in _PARALLEL_KEYS[1:]:
        if len(record[key]) != n:
            raise CorpusFormatError(
                f"{where}: array {key!r} has length {len(record[key])}, expected {n}"
            )
    tokens = [
        Token(
            index=i,
            text=str(record["tokens"][i]),
            pos=str(record["pos"][i]),
            dep=str(record["dep"][i]),
            head=int(record["head"][i]),
            ner=str(record["ner"][i]),
        )
        for i in range(n)
    ]
    events = []
    for k, ev in enumerate(record.get("events", [])):
        if "verb_index" not in ev:
            raise CorpusFormatError(f"{where}: event {k} missing verb_index")
        events.append(
            EventAnnotation(
                verb_index=int(ev["verb_index"]),
                location_indices=frozenset(int(i) for i in ev.get("location_indices", [])),
            )
        )
    return AnnotatedSentence(
        tokens=tokens,
        events=events,
        sent_id=record.get("id"),
        source=record.get("source"),
    )


def sentence_to_record(sentence: AnnotatedSentence) -> dict:
    record: dict = {
        "tokens": [t.text for t in sentence.tokens],
        "pos": [t.pos for t in sentence.tokens],
        "dep": [t.dep for t in sentence.tokens],
        "head": [t.head for t in sentence.tokens],
        "ner": [t.ner for t in sentence.tokens],
        "events": [
            {"verb_index": e.verb_index, "location_indices": sorted(e.location_indices)}
            for e in sentence.events
        ],
    }
    if sentence.sent_id is not None:
        record["id"] = sentence.sent_id
    if sentence.source is not None:
        record["source"] = sentence.source
    return record


def iter_records(path: str | Path):
    """Yield (line number, decoded object) for every non-blank line."""
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {line_no}: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"line {line_no}: expected a JSON object")
            yield line_no, record


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a JSONL corpus; raise on the first invalid sentence."""
    sentences = []
    for line_no, record in iter_records(path):
        sentence = sentence_from_record(record, index=len(sentences), line=line_no)
        violations = validate_sentence(sentence)
        if violations:
            raise CorpusValidationError(len(sentences), violations, line=line_no)
        sentences.append(sentence)
    return Corpus(sentences=sentences, provenance=str(path))


def corpus_file_violations(path: str | Path) -> list[str]:
    """All violations in a file, prefixed with sentence index and line number.

    Unlike load_corpus this does not stop at the first bad sentence; parse
    errors still raise because later lines cannot be trusted after one.
    """
    out = []
    index = 0
    for line_no, record in iter_records(path):
        sentence = sentence_from_record(record, index=index, line=line_no)
        for v in validate_sentence(sentence):
            out.append(f"sentence {index} (line {line_no}): {v}")
        index += 1
    return out


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for sentence in corpus.sentences:
            handle.write(json.dumps(sentence_to_record(sentence), ensure_ascii=False))
            handle.write("\n")


# ---------------------------------------------------------------------------
# splitting


def split_corpus(
    corpus: Corpus,
    fractions: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> tuple[Corpus, Corpus, Corpus]:
    """Partition sentences into (train, val, test) splits, seedably.

    Whole sentences move together, so all events of a sentence land in one
    split. Membership is a pure function of (corpus order, fractions, seed).
    """
    if len(fractions) != 3:
        raise ValueError("fractions must be a (train, val, test) triple")
    if any(f <= 0 for f in fractions):
        raise ValueError("fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {sum(fractions)!r}")

    n = len(corpus.sentences)
    n_train = round(fractions[0] * n)
    n_val = round(fractions[1] * n)
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise DataError(
            f"split too small: {n} sentences cannot fill fractions {fractions}"
        )

    order = list(range(n))
    random.Random(seed).shuffle(order)
    picks = (
        sorted(order[:n_train]),
        sorted(order[n_train : n_train + n_val]),
        sorted(order[n_train + n_val :]),
    )
    parts = tuple(
        Corpus(
            sentences=[corpus.sentences[i] for i in pick],
            provenance=f"{corpus.provenance}[{name} seed={seed}]",
        )
        for name, pick in zip(("train", "val", "test"), picks)
    )
    return parts  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# synthetic corpus generator
#
# Templates cover the hard cases the labelers must handle: multi-event
# sentences with disjoint gold sets, reporting events with no location but
# place names nearby, multi-token names, and distractor places attached to
# the wrong verb. Gold labels are correct by construction.

_PLACES: tuple[tuple[tuple[str, ...], str], ...] = (
    (("Homs",), "GPE"),
    (("Aleppo",), "GPE"),
    (("Idlib",), "GPE"),
    (("Raqqa",), "GPE"),
    (("Hama",), "GPE"),
    (("Manbij",), "GPE"),
    (("Afrin",), "GPE"),
    (("Kobane",), "GPE"),
    (("Jarablus",), "GPE"),
    (("Tadif",), "GPE"),
    (("Bza'a",), "GPE"),
    (("Damascus",), "GPE"),
    (("Tartus",), "GPE"),
    (("Douma",), "GPE"),
    (("Palmyra",), "GPE"),
    (("Saraqib",), "GPE"),
    (("Azaz",), "GPE"),
    (("Dabiq",), "GPE"),
    (("Marea",), "GPE"),
    (("Khanasir",), "LOC"),
    (("Deir", "ez-Zor"), "GPE"),
    (("Al", "Bab"), "GPE"),
    (("Ain", "Issa"), "GPE"),
    (("Tel", "Rifaat"), "GPE"),
    (("Abu", "Kamal"), "GPE"),
    (("Khan", "Shaykhun"), "GPE"),
    (("Menagh", "Airbase"), "FAC"),
    (("Ras", "al", "Ayn"), "GPE"),
    (("Ain", "al", "Arab"), "GPE"),
)

_ACTION_VERBS = (
    "attacked", "seized", "captured", "shelled", "bombed", "stormed",
    "raided", "entered", "liberated", "besieged", "struck", "ambushed",
    "recaptured", "assaulted", "overran", "targeted", "surrounded", "hit",
)

_GERUND_VERBS = (
    "establishing", "capturing", "seizing", "securing", "entering",
    "storming", "clearing", "retaking",
)

_REPORTING_VERBS = ("said", "announced", "reported", "claimed", "stated", "confirmed")

_ACTORS = (
    (("Government", "NOUN"), ("forces", "NOUN")),
    (("Kurdish", "ADJ"), ("fighters", "NOUN")),
    (("the", "DET"), ("rebels", "NOUN")),
    (("opposition", "NOUN"), ("fighters", "NOUN")),
    (("the", "DET"), ("army", "NOUN")),
    (("regime", "NOUN"), ("troops", "NOUN")),
    (("the", "DET"), ("militants", "NOUN")),
    (("tribal", "ADJ"), ("fighters", "NOUN")),
    (("the", "DET"), ("insurgents", "NOUN")),
)

_OBJECTS = (
    (("a", "DET"), ("checkpoint", "NOUN")),
    (("an", "DET"), ("outpost", "NOUN")),
    (("rebel", "NOUN"), ("positions", "NOUN")),
    (("an", "DET"), ("offensive", "NOUN")),
    (("the", "DET"), ("village", "NOUN")),
    (("a", "DET"), ("convoy", "NOUN")),
    (("an", "DET"), ("airbase", "NOUN")),
    (("a", "DET"), ("garrison", "NOUN")),
    (("a", "DET"), ("foothold", "NOUN")),
)

_SPEAKERS = (
    (("a", "DET"), ("spokesperson", "NOUN")),
    (("the", "DET"), ("ministry", "NOUN")),
    (("local", "ADJ"), ("residents", "NOUN")),
    (("a", "DET"), ("commander", "NOUN")),
    (("state", "NOUN"), ("media", "NOUN")),
    (("an", "DET"), ("official", "NOUN")),
    (("aid", "NOUN"), ("workers", "NOUN")),
)

_WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")

_PLACE_NOUNS = ("town", "village", "city", "district")

# Long object chains as (text, pos, dep, head offset) with offsets relative
# to the chain start; the chain head (offset -1 marks it) attaches to the
# verb as dobj. They put >= 9 tokens between a verb and its place phrase.
_LONG_OBJECTS = (
    (("a", "DET", "det", 1), ("series", "NOUN", "dobj", -1),
     ("of", "ADP", "prep", 1), ("coordinated", "ADJ", "amod", 5),
     ("overnight", "ADJ", "amod", 5), ("raids", "NOUN", "pobj", 2),
     ("on", "ADP", "prep", 5), ("rebel", "NOUN", "compound", 8),
     ("positions", "NOUN", "pobj", 6)),
    (("a", "DET", "det", 2), ("new", "ADJ", "amod", 2),
     ("round", "NOUN", "dobj", -1), ("of", "ADP", "prep", 2),
     ("long", "ADJ", "amod", 5), ("negotiations", "NOUN", "pobj", 3),
     ("over", "ADP", "prep", 5), ("prisoner", "NOUN", "compound", 8),
     ("exchanges", "NOUN", "pobj", 6)),
    (("the", "DET", "det", 2), ("complete", "ADJ", "amod", 2),
     ("withdrawal", "NOUN", "dobj", -1), ("of", "ADP", "prep", 2),
     ("all", "DET", "det", 6), ("heavy", "ADJ", "amod", 6),
     ("weapons", "NOUN", "pobj", 3), ("and", "CCONJ", "cc", 6),
     ("armored", "ADJ", "amod", 9), ("vehicles", "NOUN", "conj", 6)),
    (("a", "DET", "det", 2), ("fresh", "ADJ", "amod", 2),
     ("series", "NOUN", "dobj", -1), ("of", "ADP", "prep", 2),
     ("heavy", "ADJ", "amod", 6), ("overnight", "ADJ", "amod", 6),
     ("strikes", "NOUN", "pobj", 3), ("against", "ADP", "prep", 6),
     ("fortified", "ADJ", "amod", 10), ("supply", "NOUN", "compound", 10),
     ("depots", "NOUN", "pobj", 7)),
)

DEFAULT_TEMPLATE_MIX: dict[str, float] = {
    "single-said": 0.168,
    "reported-action": 0.185,
    "reported-only": 0.185,
    "two-event": 0.067,
    "single": 0.059,
    "origin-distractor": 0.059,
    "fronted": 0.050,
    "multi-location": 0.067,
    "far-verb": 0.160,
}


@dataclass(frozen=True)
class GeneratorConfig:
    n_sentences: int = 100
    template_mix: Mapping[str, float] | None = None
    places: Sequence[tuple[tuple[str, ...], str]] = _PLACES
    action_verbs: Sequence[str] = _ACTION_VERBS
    gerund_verbs: Sequence[str] = _GERUND_VERBS
    reporting_verbs: Sequence[str] = _REPORTING_VERBS
    actors: Sequence = _ACTORS
    objects: Sequence = _OBJECTS
    speakers: Sequence = _SPEAKERS


class _SentenceBuilder:
    """Accumulates tokens whose head references are resolved at the end."""

    def __init__(self) -> None:
        self.texts: list[str] = []
        self.pos: list[str] = []
        self.dep: list[str] = []
        self.ner: list[str] = []
        self._heads: list[object] = []  # int or str placeholder

    def add(self, text: str, pos: str, dep: str, head, ner: str = "O") -> int:
        self.texts.append(text)
        self.pos.append(pos)
        self.dep.append(dep)
        self.ner.append(ner)
        self._heads.append(head)
        return len(self.texts) - 1

    def mark(self, name: str, index: int) -> None:
        setattr(self, f"_mark_{name}", index)

    def resolve(self, name: str) -> int:
        return getattr(self, f"_mark_{name}")

    def build(self, events: list[EventAnnotation], sent_id: str) -> AnnotatedSentence:
        heads = [h if isinstance(h, int) else self.resolve(h) for h in self._heads]
        tokens = [
            Token(index=i, text=self.texts[i], pos=self.pos[i],
                  dep=self.dep[i], head=heads[i], ner=self.ner[i])
            for i in range(len(self.texts))
        ]
        return AnnotatedSentence(tokens=tokens, events=events, sent_id=sent_id)


def _add_noun_phrase(b: _SentenceBuilder, phrase, dep: str, head) -> int:
    """Add a head-final noun phrase; returns the index of the head noun."""
    start = len(b.texts)
    last = start + len(phrase) - 1
    for text, pos in phrase[:-1]:
        mod_dep = "det" if pos == "DET" else ("amod" if pos == "ADJ" else "compound")
        b.add(text, pos, mod_dep, last)
    b.add(phrase[-1][0], phrase[-1][1], dep, head)
    return last


def _add_place(b: _SentenceBuilder, place_tokens: tuple[str, ...], ner: str,
               dep: str, head) -> list[int]:
    """Add a head-final place span; returns all its token indices."""
    start = len(b.texts)
    last = start + len(place_tokens) - 1
    for text in place_tokens[:-1]:
        b.add(text, "PROPN", "compound", last, ner=ner)
    b.add(place_tokens[-1], "PROPN", dep, head, ner=ner)
    return list(range(start, last + 1))


def _attach_place(b: _SentenceBuilder, rng: random.Random, place, verb_head,
                  prepositions=("in", "near", "at", "outside"),
                  allow_dobj: bool = True) -> list[int]:
    """Attach a place to a verb as dobj, prep+pobj, or 'the town of X'."""
    tokens, ner = place
    styles = ("prep", "dobj", "place-noun") if allow_dobj else ("prep", "place-noun")
    weights = (5, 3, 3) if allow_dobj else (5, 3)
    style = rng.choices(styles, weights=weights)[0]
    if style == "dobj":
        return _add_place(b, tokens, ner, "dobj", verb_head)
    if style == "prep":
        prep = b.add(rng.choice(prepositions), "ADP", "prep", verb_head)
        return _add_place(b, tokens, ner, "pobj", prep)
    prep = b.add(rng.choice(("in", "near", "on")), "ADP", "prep", verb_head)
    det = b.add("the", "DET", "det", len(b.texts) + 1)
    noun = b.add(rng.choice(_PLACE_NOUNS), "NOUN", "pobj", prep)
    of = b.add("of", "ADP", "prep", noun)
    return _add_place(b, tokens, ner, "pobj", of)


def _add_time(b: _SentenceBuilder, rng: random.Random, verb_head) -> None:
    if rng.random() < 0.4:
        prep = b.add("on", "ADP", "prep", verb_head)
        b.add(rng.choice(_WEEKDAYS), "PROPN", "pobj", prep, ner="DATE")


def _tmpl_single(rng: random.Random, cfg: GeneratorConfig, with_said: bool):
    b = _SentenceBuilder()
    verb_slot = "verb"
    actor_head = _add_noun_phrase(b, rng.choice(cfg.actors), "nsubj", verb_slot)
    verb = b.add(rng.choice(cfg.action_verbs), "VERB",
                 "ccomp" if with_said else "ROOT", verb_slot)
    b.mark("verb", verb)
    if rng.random() < 0.6:
        _add_noun_phrase(b, rng.choice(cfg.objects), "dobj", verb)
        gold = _attach_place(b, rng, rng.choice(cfg.places), verb, allow_dobj=False)
    else:
        gold = _attach_place(b, rng, rng.choice(cfg.places), verb)
    _add_time(b, rng, verb)
    events = [EventAnnotation(verb, frozenset(gold))]
    if with_said:
        said_slot = "said"
        b.add(",", "PUNCT", "punct", said_slot)
        _add_noun_phrase(b, rng.choice(cfg.speakers), "nsubj", said_slot)
        said = b.add(rng.choice(cfg.reporting_verbs), "VERB", "ROOT", said_slot)
        b.mark("said", said)
        # resolve the main verb's placeholder head now that said exists
        b._heads[verb] = said
        b.add(".", "PUNCT", "punct", said)
        events.append(EventAnnotation(said, frozenset()))
    else:
        b._heads[verb] = verb
        b.add(".", "PUNCT", "punct", verb)
    return b, events


def _tmpl_reported_action(rng: random.Random, cfg: GeneratorConfig):
    b = _SentenceBuilder()
    speaker_head = _add_noun_phrase(b, rng.choice(cfg.speakers), "nsubj", "said")
    prep = b.add("in", "ADP", "prep", speaker_head)
    _add_place(b, rng.choice(cfg.places)[0], rng.choice(cfg.places)[1], "pobj", prep)
    said = b.add(rng.choice(cfg.reporting_verbs), "VERB", "ROOT", "said")
    b.mark("said", said)
    _add_noun_phrase(b, rng.choice(cfg.actors), "nsubj", "verb")
    b.add("had", "AUX", "aux", "verb")
    verb = b.add(rng.choice(cfg.action_verbs), "VERB", "ccomp", said)
    b.mark("verb", verb)
    gold = _attach_place(b, rng, rng.choice(cfg.places), verb)
    b.add(".", "PUNCT", "punct", said)
    return b, [EventAnnotation(said, frozenset()), EventAnnotation(verb, frozenset(gold))]


def _tmpl_reported_only(rng: random.Random, cfg: GeneratorConfig):
    b = _SentenceBuilder()
    speaker_head = _add_noun_phrase(b, rng.choice(cfg.speakers), "nsubj", "said")
    prep = b.add("in", "ADP", "prep", speaker_head)
    _add_place(b, *rng.choice(cfg.places), dep="pobj", head=prep)
    said = b.add(rng.choice(cfg.reporting_verbs), "VERB", "ROOT", "said")
    b.mark("said", said)
    b.add("that", "SCONJ", "mark", "inner")
    if rng.random() < 0.5:
        b.add("the", "DET", "det", len(b.texts) + 1)
        b.add("situation", "NOUN", "nsubj", "inner")
        inner = b.add("remained", "VERB", "ccomp", said)
        b.mark("inner", inner)
        b.add("tense", "ADJ", "acomp", inner)
    else:
        b.add("the", "DET", "det", len(b.texts) + 1)
        b.add("offensive", "NOUN", "nsubj", "inner")
        b.add("had", "AUX", "aux", "inner")
        inner = b.add("begun", "VERB", "ccomp", said)
        b.mark("inner", inner)
    b.add(".", "PUNCT", "punct", said)
    return b, [EventAnnotation(said, frozenset())]


def _tmpl_two_event(rng: random.Random, cfg: GeneratorConfig):
    b = _SentenceBuilder()
    after = b.add("After", "ADP", "prep", "verb2")
    gerund = b.add(rng.choice(cfg.gerund_verbs), "VERB", "pcomp", after)
    _add_noun_phrase(b, rng.choice(cfg.objects), "dobj", gerund)
    prep = b.add("in", "ADP", "prep", gerund)
    place1, ner1 = rng.choice(cfg.places)
    gold1 = _add_place(b, place1, ner1, "pobj", prep)
    b.add(",", "PUNCT", "punct", "verb2")
    _add_noun_phrase(b, rng.choice(cfg.actors), "nsubj", "verb2")
    verb2 = b.add(rng.choice(cfg.action_verbs), "VERB", "ccomp", "said")
    b.mark("verb2", verb2)
    _add_noun_phrase(b, rng.choice(cfg.objects), "dobj", verb2)
    prep2 = b.add(rng.choice(("near", "on", "in")), "ADP", "prep", verb2)
    place2, ner2 = rng.choice(cfg.places)
    gold2 = _add_place(b, place2, ner2, "pobj", prep2)
    b.add(",", "PUNCT", "punct", "said")
    _add_noun_phrase(b, rng.choice(cfg.speakers), "nsubj", "said")
    said = b.add("said", "VERB", "ROOT", "said")
    b.mark("said", said)
    b.add(".", "PUNCT", "punct", said)
    return b, [
        EventAnnotation(gerund, frozenset(gold1)),
        EventAnnotation(verb2, frozenset(gold2)),
        EventAnnotation(said, frozenset()),
    ]


def _tmpl_origin_distractor(rng: random.Random, cfg: GeneratorConfig):
    b = _SentenceBuilder()
    actor_head = _add_noun_phrase(b, rng.choice(cfg.actors), "nsubj", "verb")
    frm = b.add("from", "ADP", "prep", actor_head)
    _add_place(b, *rng.choice(cfg.places), dep="pobj", head=frm)
    verb = b.add(rng.choice(cfg.action_verbs), "VERB", "ROOT", "verb")
    b.mark("verb", verb)
    _add_noun_phrase(b, rng.choice(cfg.objects), "dobj", verb)
    gold = _attach_place(b, rng, rng.choice(cfg.places), verb,
                         prepositions=("outside", "near", "in"), allow_dobj=False)
    b.add(".", "PUNCT", "punct", verb)
    return b, [EventAnnotation(verb, frozenset(gold))]


def _tmpl_fronted(rng: random.Random, cfg: GeneratorConfig):
    b = _SentenceBuilder()
    prep = b.add("In", "ADP", "prep", "verb")
    place, ner = rng.choice(cfg.places)
    gold = _add_place(b, place, ner, "pobj", prep)
    b.add(",", "PUNCT", "punct", "verb")
    _add_noun_phrase(b, rng.choice(cfg.actors), "nsubj", "verb")
    verb = b.add(rng.choice(cfg.action_verbs), "VERB", "ROOT", "verb")
    b.mark("verb", verb)
    _add_noun_phrase(b, rng.choice(cfg.objects), "dobj", verb)
    _add_time(b, rng, verb)
    b.add(".", "PUNCT", "punct", verb)
    return b, [EventAnnotation(verb, frozenset(gold))]


def _tmpl_multi_location(rng: random.Random, cfg: GeneratorConfig):
    b = _SentenceBuilder()
    _add_noun_phrase(b, rng.choice(cfg.actors), "nsubj", "verb")
    verb = b.add(rng.choice(cfg.action_verbs), "VERB", "ROOT", "verb")
    b.mark("verb", verb)
    if rng.random() < 0.5:
        _add_noun_phrase(b, rng.choice(cfg.objects), "dobj", verb)
    prep = b.add("in", "ADP", "prep", verb)
    place1, place2 = rng.sample(list(cfg.places), 2)
    gold1 = _add_place(b, place1[0], place1[1], "pobj", prep)
    b.add("and", "CCONJ", "cc", gold1[-1])
    gold2 = _add_place(b, place2[0], place2[1], "conj", gold1[-1])
    b.add(".", "PUNCT", "punct", verb)
    return b, [EventAnnotation(verb, frozenset(gold1 + gold2))]


def _tmpl_far_verb(rng: random.Random, cfg: GeneratorConfig):
    """Verb and place separated by a long object chain, so only the verb's
    identity (action vs reporting), read from context, decides the gold."""
    b = _SentenceBuilder()
    reporting = rng.random() < 0.5
    subject = rng.choice(cfg.speakers if reporting else cfg.actors)
    _add_noun_phrase(b, subject, "nsubj", "verb")
    verb_word = rng.choice(cfg.reporting_verbs if reporting else cfg.action_verbs)
    verb = b.add(verb_word, "VERB", "ROOT", "verb")
    b.mark("verb", verb)
    chain = rng.choice(_LONG_OBJECTS)
    start = len(b.texts)
    for text, pos, dep, offset in chain:
        head = verb if offset == -1 else start + offset
        b.add(text, pos, dep, head)
    prep = b.add("in", "ADP", "prep", verb)
    place, ner = rng.choice(cfg.places)
    gold = _add_place(b, place, ner, "pobj", prep)
    b.add(".", "PUNCT", "punct", verb)
    locations = frozenset() if reporting else frozenset(gold)
    return b, [EventAnnotation(verb, locations)]


_TEMPLATES = {
    "single": lambda rng, cfg: _tmpl_single(rng, cfg, with_said=False),
    "single-said": lambda rng, cfg: _tmpl_single(rng, cfg, with_said=True),
    "reported-action": _tmpl_reported_action,
    "reported-only": _tmpl_reported_only,
    "two-event": _tmpl_two_event,
    "origin-distractor": _tmpl_origin_distractor,
    "fronted": _tmpl_fronted,
    "multi-location": _tmpl_multi_location,
    "far-verb": _tmpl_far_verb,
}


def generate_synthetic(config: GeneratorConfig, seed: int = 0) -> Corpus:
    """Generate a labeled corpus from templates; gold is correct by construction.

    Deterministic: the same (config, seed) pair yields an identical corpus.
    """
    for name in ("places", "action_verbs", "gerund_verbs", "reporting_verbs",
                 "actors", "objects", "speakers"):
        if not getattr(config, name):
            raise DataError(f"empty lexicon: {name}")
    mix = dict(config.template_mix) if config.template_mix else dict(DEFAULT_TEMPLATE_MIX)
    unknown = set(mix) - set(_TEMPLATES)
    if unknown:
        raise DataError(f"unknown templates in mix: {sorted(unknown)}")
    if not mix or any(w <= 0 for w in mix.values()):
        raise DataError("template mix must have positive weights")

    rng = random.Random(seed)
    names = sorted(mix)
    weights = [mix[name] for name in names]
    sentences = []
    for i in range(config.n_sentences):
        template = _TEMPLATES[rng.choices(names, weights=weights)[0]]
        builder, events = template(rng, config)
        sentence = builder.build(events, sent_id=f"synth-{seed}-{i:05d}")
        violations = validate_sentence(sentence)
        if violations:  # a template bug, not a data problem
            raise AssertionError(f"generated sentence invalid: {violations}")
        sentences.append(sentence)
    return Corpus(sentences=sentences, provenance=f"synthetic(n={config.n_sentences},seed={seed})")


def corpus_vocabulary(corpus: Corpus) -> list[str]:
    """Sorted unique token texts, e.g. for building synthetic embeddings."""
    return sorted({t.text for s in corpus.sentences for t in s.tokens})
