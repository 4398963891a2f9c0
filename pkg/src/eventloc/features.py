"""Per-token dense feature encoding conditioned on an event verb.

Each token row is the concatenation, in fixed group order, of: pretrained
word embedding, one-hot dependency label, one-hot entity label, one-hot
POS tag, a flag marking the event verb, the clipped signed token distance
to the verb, and the clipped dependency-tree distance to the verb. Every
group can be switched off independently for ablation; a disabled group
contributes no columns.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import AnnotatedSentence, Corpus
from .errors import EmbeddingFormatError

log = logging.getLogger(__name__)

UNK_LABEL = "<unk>"

# Concatenation order of enabled feature groups.
GROUP_ORDER = ("embedding", "dep", "ner", "pos", "verb_flag",
               "linear_distance", "tree_distance")


class EmbeddingTable:
    """Word -> dense vector map with case-sensitive lookup and lowercase
    fallback. Unknown words map to the zero vector."""

    def __init__(self, dimension: int, entries: dict[str, np.ndarray] | None = None,
                 lowercase_lookup: bool = True):
        if dimension <= 0:
            raise ValueError("embedding dimension must be positive")
        self.dimension = dimension
        self.entries = entries or {}
        self.lowercase_lookup = lowercase_lookup
        self._zero = np.zeros(dimension)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def lookup(self, word: str) -> np.ndarray:
        vec = self.entries.get(word)
        if vec is None and self.lowercase_lookup:
            vec = self.entries.get(word.lower())
        return vec if vec is not None else self._zero


def load_embeddings(path: str | Path, dim: int) -> EmbeddingTable:
    """Load a plain-text embedding file: one word then `dim` reals per line.

    A line with the wrong number of fields raises (naming the line); lines
    whose vector fields fail to parse as reals are skipped, counted, and
    reported via a warning.
    """
    entries: dict[str, np.ndarray] = {}
    malformed = 0
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            parts = raw.rstrip("\n").split(" ")
            if parts == [""]:
                malformed += 1
                continue
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"line {line_no}: expected {dim} values after the word, "
                    f"got {len(parts) - 1}"
                )
            try:
                vec = np.array([float(x) for x in parts[1:]])
            except ValueError:
                malformed += 1
                continue
            entries[parts[0]] = vec
    if not entries:
        raise EmbeddingFormatError(f"no embeddings parsed from {path}")
    if malformed:
        log.warning("skipped %d malformed embedding lines in %s", malformed, path)
    table = EmbeddingTable(dim, entries)
    table.malformed_lines = malformed  # type: ignore[attr-defined]
    return table


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for word in sorted(table.entries):
            values = " ".join(f"{v:.6f}" for v in table.entries[word])
            handle.write(f"{word} {values}\n")


def hash_embeddings(words, dim: int, seed: int = 0, scale: float = 0.5) -> EmbeddingTable:
    """Deterministic pseudo-random vectors per word, for synthetic corpora.

    Stable across processes (keyed on a SHA-256 of the word, not on the
    interpreter's salted hash).
    """
    entries = {}
    for word in words:
        digest = hashlib.sha256(f"{seed}:{word}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        entries[word] = (rng.random(dim) * 2.0 - 1.0) * scale
    return EmbeddingTable(dim, entries, lowercase_lookup=False)


@dataclass(frozen=True)
class TagInventory:
    """Label lists built from the training split, each with a reserved
    unknown slot at position 0."""

    pos_tags: tuple[str, ...]
    dep_labels: tuple[str, ...]
    ner_labels: tuple[str, ...]

    def __post_init__(self):
        for name in ("pos_tags", "dep_labels", "ner_labels"):
            labels = getattr(self, name)
            if labels[0] != UNK_LABEL:
                raise ValueError(f"{name} must reserve slot 0 for {UNK_LABEL!r}")
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate labels in {name}")
            object.__setattr__(self, f"_{name}_index",
                               {label: i for i, label in enumerate(labels)})

    def pos_index(self, tag: str) -> int:
        return self._pos_tags_index.get(tag, 0)  # type: ignore[attr-defined]

    def dep_index(self, label: str) -> int:
        return self._dep_labels_index.get(label, 0)  # type: ignore[attr-defined]

    def ner_index(self, label: str) -> int:
        return self._ner_labels_index.get(label, 0)  # type: ignore[attr-defined]

    def to_dict(self) -> dict:
        return {"pos_tags": list(self.pos_tags),
                "dep_labels": list(self.dep_labels),
                "ner_labels": list(self.ner_labels)}

    @classmethod
    def from_dict(cls, data: dict) -> "TagInventory":
        return cls(pos_tags=tuple(data["pos_tags"]),
                   dep_labels=tuple(data["dep_labels"]),
                   ner_labels=tuple(data["ner_labels"]))


def build_inventories(train: Corpus) -> TagInventory:
    """Collect sorted label inventories from a training corpus."""
    if not train.sentences:
        raise ValueError("cannot build inventories from an empty corpus")
    pos, dep, ner = set(), set(), set()
    for sentence in train.sentences:
        for token in sentence.tokens:
            pos.add(token.pos)
            dep.add(token.dep)
            ner.add(token.ner)
    return TagInventory(
        pos_tags=(UNK_LABEL, *sorted(pos)),
        dep_labels=(UNK_LABEL, *sorted(dep)),
        ner_labels=(UNK_LABEL, *sorted(ner)),
    )


@dataclass(frozen=True)
class FeatureConfig:
    embedding: bool = True
    dep: bool = True
    pos: bool = True
    ner: bool = True
    verb_flag: bool = True
    linear_distance: bool = True
    tree_distance: bool = True
    distance_clip: int = 20
    embedding_dim: int = 300

    def __post_init__(self):
        if not any((self.embedding, self.dep, self.pos, self.ner,
                    self.verb_flag, self.linear_distance, self.tree_distance)):
            raise ValueError("at least one feature group must be enabled")
        if self.distance_clip < 1:
            raise ValueError("distance_clip must be >= 1")
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be >= 1")

    def enabled_groups(self) -> tuple[str, ...]:
        # group names match the switch attribute names
        return tuple(g for g in GROUP_ORDER if getattr(self, g))

    def to_dict(self) -> dict:
        return {
            "embedding": self.embedding, "dep": self.dep, "pos": self.pos,
            "ner": self.ner, "verb_flag": self.verb_flag,
            "linear_distance": self.linear_distance,
            "tree_distance": self.tree_distance,
            "distance_clip": self.distance_clip,
            "embedding_dim": self.embedding_dim,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureConfig":
        return cls(**data)


def group_widths(cfg: FeatureConfig, inventories: TagInventory) -> dict[str, int]:
    """Column width of each enabled group, in concatenation order."""
    widths = {
        "embedding": cfg.embedding_dim,
        "dep": len(inventories.dep_labels),
        "ner": len(inventories.ner_labels),
        "pos": len(inventories.pos_tags),
        "verb_flag": 1,
        "linear_distance": 1,
        "tree_distance": 1,
    }
    return {g: widths[g] for g in cfg.enabled_groups()}


def feature_width(cfg: FeatureConfig, inventories: TagInventory) -> int:
    return sum(group_widths(cfg, inventories).values())


@dataclass
class FeatureMatrix:
    rows: np.ndarray  # (n tokens, feature width)
    verb_index: int
    width_map: dict[str, slice]

    @property
    def width(self) -> int:
        return self.rows.shape[1]

    def group(self, name: str) -> np.ndarray:
        return self.rows[:, self.width_map[name]]


def linear_offset(i: int, verb_index: int, clip: int) -> float:
    """Signed token distance to the verb, clipped to [-clip, clip] and
    scaled to [-1, 1]."""
    return max(-clip, min(clip, i - verb_index)) / clip


def dep_tree_distance(sentence: AnnotatedSentence, i: int, j: int) -> int:
    """Edges on the unique undirected head path between tokens i and j.

    Uses root paths and their first common node, so tests can check it
    against an independent breadth-first search.
    """
    n = len(sentence.tokens)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError("token index out of range")
    if i == j:
        return 0
    path_i = _path_to_root(sentence, i)
    path_j = _path_to_root(sentence, j)
    depth_j = {node: d for d, node in enumerate(path_j)}
    for d_i, node in enumerate(path_i):
        if node in depth_j:
            return d_i + depth_j[node]
    raise ValueError("head pointers do not form a single tree")


def _path_to_root(sentence: AnnotatedSentence, i: int) -> list[int]:
    path = [i]
    node = i
    for _ in range(len(sentence.tokens)):
        head = sentence.tokens[node].head
        if head == node:
            return path
        path.append(head)
        node = head
    raise ValueError("head pointers contain cycle")


def featurize(
    sentence: AnnotatedSentence,
    verb_index: int,
    cfg: FeatureConfig,
    emb: EmbeddingTable | None,
    inv: TagInventory,
) -> FeatureMatrix:
    """Encode one (sentence, verb) pair as a dense per-token matrix.

    Pure function: identical inputs yield identical matrices.
    """
    n = len(sentence.tokens)
    if not 0 <= verb_index < n:
        raise IndexError(f"verb_index {verb_index} out of range for {n} tokens")
    if cfg.embedding:
        if emb is None:
            raise ValueError("feature config enables embeddings but no table given")
        if emb.dimension != cfg.embedding_dim:
            raise ValueError(
                f"embedding dimension mismatch: table has {emb.dimension}, "
                f"config expects {cfg.embedding_dim}"
            )

    widths = group_widths(cfg, inv)
    width_map: dict[str, slice] = {}
    start = 0
    for name, w in widths.items():
        width_map[name] = slice(start, start + w)
        start += w
    rows = np.zeros((n, start))

    clip = cfg.distance_clip
    for t in sentence.tokens:
        i = t.index
        if "embedding" in width_map:
            rows[i, width_map["embedding"]] = emb.lookup(t.text)  # type: ignore[union-attr]
        if "dep" in width_map:
            rows[i, width_map["dep"].start + inv.dep_index(t.dep)] = 1.0
        if "ner" in width_map:
            rows[i, width_map["ner"].start + inv.ner_index(t.ner)] = 1.0
        if "pos" in width_map:
            rows[i, width_map["pos"].start + inv.pos_index(t.pos)] = 1.0
        if "verb_flag" in width_map:
            rows[i, width_map["verb_flag"].start] = 1.0 if i == verb_index else 0.0
        if "linear_distance" in width_map:
            rows[i, width_map["linear_distance"].start] = linear_offset(i, verb_index, clip)
        if "tree_distance" in width_map:
            d = dep_tree_distance(sentence, i, verb_index)
            rows[i, width_map["tree_distance"].start] = min(clip, d) / clip

    return FeatureMatrix(rows=rows, verb_index=verb_index, width_map=width_map)


def ablation_conditions(base: FeatureConfig | None = None) -> dict[str, FeatureConfig]:
    """The standard ablation grid: full model, one group family off at a
    time, and embeddings alone."""
    base = base or FeatureConfig()
    return {
        "full": base,
        "-embeddings": replace(base, embedding=False),
        "-distances": replace(base, linear_distance=False, tree_distance=False),
        "-pos": replace(base, pos=False),
        "-dep": replace(base, dep=False),
        "-ner": replace(base, ner=False),
        "embeddings-only": replace(
            base, dep=False, pos=False, ner=False, verb_flag=False,
            linear_distance=False, tree_distance=False,
        ),
    }
