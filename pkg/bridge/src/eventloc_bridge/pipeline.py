"""Annotation backends that turn raw sentences into token annotations.

Two backends: "spacy" wraps the spaCy library when it is installed
locally; "builtin" is a dependency-free deterministic annotator (regex
tokenizer, lexicon/suffix tagger, heuristic head attacher, gazetteer
NER). Both emit the same record shape, with the root token pointing at
itself, matching the corpus contract downstream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class PipelineUnavailable(RuntimeError):
    """The requested annotation backend cannot run on this machine."""


@dataclass
class AnnotatedTokens:
    tokens: list[str]
    pos: list[str]
    dep: list[str]
    head: list[int]
    ner: list[str]


# ---------------------------------------------------------------------------
# builtin backend

_TOKEN_RE = re.compile(r"\w+(?:[-'’]\w+)*|[^\w\s]")

_SENT_SPLIT_RE = re.compile(r"(?<=[.!?])\s+(?=[A-Z\"'(])")

_DETERMINERS = {"a", "an", "the", "this", "that", "these", "those", "its",
                "his", "her", "their", "our", "all", "some", "no", "every"}
_ADPOSITIONS = {"in", "on", "at", "near", "from", "to", "of", "for", "with",
                "by", "against", "over", "under", "after", "before", "into",
                "toward", "towards", "outside", "inside", "around", "across",
                "between", "during", "without", "within"}
_PRONOUNS = {"he", "she", "it", "they", "we", "i", "you", "who", "them",
             "him", "her", "us", "me"}
_CCONJ = {"and", "or", "but", "nor"}
_SCONJ = {"that", "while", "because", "although", "if", "when", "as", "since"}
_BE_FORMS = {"be", "is", "am", "are", "was", "were", "been", "being"}
_AUXILIARIES = _BE_FORMS | {"have", "has", "had", "do", "does", "did", "will",
                            "would", "shall", "should", "may", "might", "can",
                            "could", "must"}
_ADVERB_SUFFIXES = ("ly",)
_COMMON_VERBS = {
    "said", "says", "say", "told", "tell", "announced", "reported", "claimed",
    "stated", "confirmed", "added", "noted", "declared", "launched", "launch",
    "attacked", "attack", "seized", "seize", "captured", "capture", "shelled",
    "bombed", "stormed", "raided", "entered", "enter", "liberated", "besieged",
    "struck", "strike", "ambushed", "recaptured", "assaulted", "overran",
    "targeted", "surrounded", "hit", "killed", "kill", "wounded", "continued",
    "continue", "began", "begin", "begun", "ended", "end", "moved", "move",
    "advanced", "advance", "withdrew", "withdraw", "remained", "remain",
    "established", "establish", "establishing", "fled", "arrived", "left",
    "took", "take", "taken", "held", "hold", "fell", "fall", "clashed",
    "resumed", "regrouped", "spread", "mourned", "celebrated", "ordered",
    "closed", "opened", "waited", "speaking", "fighting",
}

_GAZETTEER = {
    # single-token place names
    ("Aleppo",), ("Ankara",), ("Tadif",), ("Bza'a",), ("Homs",), ("Idlib",),
    ("Raqqa",), ("Hama",), ("Manbij",), ("Afrin",), ("Kobane",), ("Jarablus",),
    ("Damascus",), ("Tartus",), ("Douma",), ("Palmyra",), ("Azaz",),
    ("Syria",), ("Turkey",), ("Iraq",), ("Lebanon",), ("Jordan",),
    ("Al-Bab",), ("Saraqib",), ("Dabiq",), ("Marea",), ("Mosul",),
    ("Baghdad",), ("Beirut",), ("Kobani",),
    # multi-token place names
    ("Deir", "ez-Zor"), ("Al", "Bab"), ("Ain", "Issa"), ("Tel", "Rifaat"),
    ("Abu", "Kamal"), ("Khan", "Shaykhun"), ("Ras", "al", "Ayn"),
    ("New", "York"),
}

_WEEKDAYS = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday",
             "Saturday", "Sunday"}
_MONTHS = {"January", "February", "March", "April", "May", "June", "July",
           "August", "September", "October", "November", "December"}


def split_sentences(text: str) -> list[str]:
    parts = [p.strip() for p in _SENT_SPLIT_RE.split(text.strip())]
    return [p for p in parts if p]


def tokenize(sentence: str) -> list[str]:
    return _TOKEN_RE.findall(sentence)


def _tag_pos(tokens: list[str]) -> list[str]:
    tags = []
    for i, tok in enumerate(tokens):
        low = tok.lower()
        if not tok[0].isalnum():
            tags.append("PUNCT")
        elif tok.isdigit():
            tags.append("NUM")
        elif low in _AUXILIARIES:
            tags.append("AUX")
        elif low in _DETERMINERS:
            tags.append("DET")
        elif low in _ADPOSITIONS:
            tags.append("ADP")
        elif low in _PRONOUNS:
            tags.append("PRON")
        elif low in _CCONJ:
            tags.append("CCONJ")
        elif low in _SCONJ:
            tags.append("SCONJ")
        elif low == "to":
            tags.append("PART")
        elif low in _COMMON_VERBS:
            tags.append("VERB")
        elif tok[0].isupper() and i > 0:
            tags.append("PROPN")
        elif tok[0].isupper() and any(tok == entry[0] for entry in _GAZETTEER):
            tags.append("PROPN")  # sentence-initial place name
        elif low.endswith(_ADVERB_SUFFIXES):
            tags.append("ADV")
        else:
            tags.append("NOUN")
    return tags


def _tag_ner(tokens: list[str]) -> list[str]:
    ner = ["O"] * len(tokens)
    by_first: dict[str, list[tuple[str, ...]]] = {}
    for entry in _GAZETTEER:
        by_first.setdefault(entry[0], []).append(entry)
    i = 0
    while i < len(tokens):
        matched = None
        for entry in sorted(by_first.get(tokens[i], []), key=len, reverse=True):
            if tuple(tokens[i:i + len(entry)]) == entry:
                matched = entry
                break
        if matched:
            for j in range(i, i + len(matched)):
                ner[j] = "GPE"
            i += len(matched)
            continue
        if tokens[i] in _WEEKDAYS or tokens[i] in _MONTHS:
            ner[i] = "DATE"
        i += 1
    return ner


def _would_cycle(heads: list[int], token: int, candidate_head: int) -> bool:
    node = candidate_head
    for _ in range(len(heads) + 1):
        if node == token:
            return True
        if heads[node] == node:
            return False
        node = heads[node]
    return True


def _attach_heads(tokens: list[str], pos: list[str]) -> tuple[list[int], list[str]]:
    n = len(tokens)
    root = next((i for i, p in enumerate(pos) if p == "VERB"), 0)
    heads = [root] * n
    heads[root] = root
    deps = ["dep"] * n
    deps[root] = "ROOT"

    def reattach(i, head, dep):
        if i != head and not _would_cycle(heads, i, head):
            heads[i] = head
            deps[i] = dep

    for i in range(n):
        if i == root:
            continue
        p = pos[i]
        if p == "PUNCT":
            reattach(i, root, "punct")
        elif p in ("DET", "ADJ"):
            for j in range(i + 1, min(n, i + 4)):
                if pos[j] in ("NOUN", "PROPN"):
                    reattach(i, j, "det" if p == "DET" else "amod")
                    break
        elif p in ("AUX", "PART"):
            for j in range(i + 1, min(n, i + 4)):
                if pos[j] == "VERB":
                    reattach(i, j, "aux")
                    break
        elif p == "PROPN" and i + 1 < n and pos[i + 1] == "PROPN":
            end = i
            while end + 1 < n and pos[end + 1] == "PROPN":
                end += 1
            reattach(i, end, "compound")
        elif p in ("NOUN", "PROPN", "PRON", "NUM"):
            for j in range(i - 1, max(-1, i - 4), -1):
                if pos[j] == "ADP":
                    reattach(i, j, "pobj")
                    break
            else:
                reattach(i, root, "nsubj" if i < root else "dobj")
        elif p == "ADP":
            for j in range(i - 1, -1, -1):
                if pos[j] in ("VERB", "NOUN", "PROPN"):
                    reattach(i, j, "prep")
                    break
        elif p == "VERB":
            reattach(i, root, "conj")
        elif p == "ADV":
            reattach(i, root, "advmod")
    return heads, deps


def annotate_builtin(sentence: str) -> AnnotatedTokens | None:
    tokens = tokenize(sentence)
    if not tokens:
        return None
    pos = _tag_pos(tokens)
    heads, deps = _attach_heads(tokens, pos)
    return AnnotatedTokens(tokens=tokens, pos=pos, dep=deps, head=heads,
                           ner=_tag_ner(tokens))


# ---------------------------------------------------------------------------
# spaCy backend


def _load_spacy():
    try:
        import spacy  # type: ignore
    except ImportError as exc:
        raise PipelineUnavailable(
            "spaCy backend requested but spacy is not installed"
        ) from exc
    for model in ("en_core_web_sm", "en_core_web_md"):
        try:
            return spacy.load(model)
        except OSError:
            continue
    raise PipelineUnavailable("spaCy is installed but no English model is available")


def annotate_spacy_document(nlp, text: str) -> list[AnnotatedTokens]:
    out = []
    for sent in nlp(text).sents:
        tokens = list(sent)
        index = {t.i: k for k, t in enumerate(tokens)}
        out.append(AnnotatedTokens(
            tokens=[t.text for t in tokens],
            pos=[t.pos_ for t in tokens],
            dep=[t.dep_ for t in tokens],
            # spaCy roots head themselves already; clamp crossing heads to self
            head=[index.get(t.head.i, k) for k, t in enumerate(tokens)],
            ner=[t.ent_type_ or "O" for t in tokens],
        ))
    return out


class Annotator:
    """Front door: pick a backend once, annotate document strings."""

    def __init__(self, backend: str = "auto"):
        if backend == "auto":
            try:
                self._nlp = _load_spacy()
                self.backend = "spacy"
            except PipelineUnavailable:
                self._nlp = None
                self.backend = "builtin"
        elif backend == "spacy":
            self._nlp = _load_spacy()
            self.backend = "spacy"
        elif backend == "builtin":
            self._nlp = None
            self.backend = "builtin"
        else:
            raise ValueError(f"unknown backend {backend!r}")

    def annotate_document(self, text: str) -> list[AnnotatedTokens]:
        if self.backend == "spacy":
            return annotate_spacy_document(self._nlp, text)
        annotated = []
        for sentence in split_sentences(text):
            result = annotate_builtin(sentence)
            if result is not None:
                annotated.append(result)
        return annotated
