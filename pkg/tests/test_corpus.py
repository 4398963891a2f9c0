import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eventloc import corpus as C
from eventloc.errors import CorpusFormatError, CorpusValidationError, DataError

MINIMAL_LINE = json.dumps({
    "tokens": ["He", "ran"], "pos": ["PRON", "VERB"],
    "dep": ["nsubj", "ROOT"], "head": [1, 1], "ner": ["O", "O"],
    "events": [{"verb_index": 1, "location_indices": []}],
})


def write(tmp_path, *lines):
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_load_minimal_record(tmp_path):
    corpus = C.load_corpus(write(tmp_path, MINIMAL_LINE))
    assert len(corpus) == 1
    sentence = corpus.sentences[0]
    assert len(sentence.events) == 1
    assert sentence.events[0].location_indices == frozenset()


def test_load_rejects_multiple_roots(tmp_path):
    record = json.loads(MINIMAL_LINE)
    record["head"] = [0, 1]
    with pytest.raises(CorpusValidationError, match="multiple roots"):
        C.load_corpus(write(tmp_path, json.dumps(record)))


def test_load_reports_line_number_on_parse_error(tmp_path):
    with pytest.raises(CorpusFormatError, match="line 2"):
        C.load_corpus(write(tmp_path, MINIMAL_LINE, "{not json"))


def test_load_running_example(fixture_corpus):
    sentence = fixture_corpus.sentences[0]
    launched = sentence.texts.index("launched")
    event = next(e for e in sentence.events if e.verb_index == launched)
    assert event.location_indices == {sentence.texts.index("Bza'a")}


def test_validate_well_formed():
    sentence = C.sentence_from_record(json.loads(MINIMAL_LINE))
    assert C.validate_sentence(sentence) == []


def test_validate_verb_out_of_range():
    record = json.loads(MINIMAL_LINE)
    record["tokens"] = ["a", "b", "c"]
    record["pos"] = record["dep"] = record["ner"] = ["X", "X", "X"]
    record["head"] = [1, 1, 1]
    record["events"] = [{"verb_index": 7, "location_indices": []}]
    sentence = C.sentence_from_record(record)
    assert C.validate_sentence(sentence) == ["event 0: verb_index out of range"]


def test_validate_head_cycle():
    record = {
        "tokens": ["a", "b", "c"], "pos": ["X"] * 3, "dep": ["X"] * 3,
        "ner": ["O"] * 3, "head": [1, 0, 2], "events": [],
    }
    sentence = C.sentence_from_record(record)
    assert C.validate_sentence(sentence) == ["head pointers contain cycle"]


def test_validate_verb_inside_locations():
    record = json.loads(MINIMAL_LINE)
    record["events"] = [{"verb_index": 1, "location_indices": [1]}]
    sentence = C.sentence_from_record(record)
    assert "event 0: verb_index in location_indices" in C.validate_sentence(sentence)


def test_label_vector_matches_location_indices(fixture_corpus):
    for sentence in fixture_corpus.sentences:
        for event in sentence.events:
            labels = C.event_label_vector(sentence, event)
            assert len(labels) == len(sentence)
            assert {i for i, v in enumerate(labels) if v} == set(event.location_indices)


# ---------------------------------------------------------------------------
# splitting


def test_split_sizes_and_determinism():
    corpus = C.generate_synthetic(C.GeneratorConfig(n_sentences=10), seed=3)
    a = C.split_corpus(corpus, (0.8, 0.1, 0.1), seed=42)
    b = C.split_corpus(corpus, (0.8, 0.1, 0.1), seed=42)
    assert tuple(len(p) for p in a) == (8, 1, 1)
    for pa, pb in zip(a, b):
        assert [s.sent_id for s in pa.sentences] == [s.sent_id for s in pb.sentences]


def test_split_different_seed_changes_membership():
    corpus = C.generate_synthetic(C.GeneratorConfig(n_sentences=40), seed=3)
    a = C.split_corpus(corpus, (0.8, 0.1, 0.1), seed=42)
    b = C.split_corpus(corpus, (0.8, 0.1, 0.1), seed=43)
    assert tuple(len(p) for p in b) == (32, 4, 4)
    assert [s.sent_id for s in a[0].sentences] != [s.sent_id for s in b[0].sentences]


def test_split_partitions_without_overlap():
    corpus = C.generate_synthetic(C.GeneratorConfig(n_sentences=25), seed=9)
    parts = C.split_corpus(corpus, (0.6, 0.2, 0.2), seed=1)
    ids = [s.sent_id for part in parts for s in part.sentences]
    assert sorted(ids) == sorted(s.sent_id for s in corpus.sentences)


def test_split_too_small():
    corpus = C.generate_synthetic(C.GeneratorConfig(n_sentences=2), seed=3)
    with pytest.raises(DataError, match="split too small"):
        C.split_corpus(corpus, (0.8, 0.1, 0.1), seed=0)


def test_split_rejects_bad_fractions():
    corpus = C.generate_synthetic(C.GeneratorConfig(n_sentences=10), seed=3)
    with pytest.raises(ValueError):
        C.split_corpus(corpus, (0.5, 0.2, 0.2), seed=0)


# ---------------------------------------------------------------------------
# synthetic generation


def test_generator_two_event_template_disjoint_gold():
    cfg = C.GeneratorConfig(n_sentences=1, template_mix={"two-event": 1.0})
    corpus = C.generate_synthetic(cfg, seed=7)
    sentence = corpus.sentences[0]
    located = [e for e in sentence.events if e.location_indices]
    assert len(located) == 2
    assert located[0].location_indices.isdisjoint(located[1].location_indices)
    assert any(not e.location_indices for e in sentence.events)


def test_generator_deterministic_bytes(tmp_path):
    cfg = C.GeneratorConfig(n_sentences=200)
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    C.save_corpus(C.generate_synthetic(cfg, seed=1), p1)
    C.save_corpus(C.generate_synthetic(cfg, seed=1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_generator_label_distribution():
    corpus = C.generate_synthetic(C.GeneratorConfig(n_sentences=2000), seed=1)
    events = [(s, e) for s in corpus.sentences for e in s.events]
    one = sum(1 for s, e in events
              if len(C.contiguous_spans(e.location_indices)) == 1)
    none = sum(1 for _, e in events if not e.location_indices)
    assert 0.39 <= one / len(events) <= 0.59
    assert 0.37 <= none / len(events) <= 0.57


def test_generator_always_validates():
    corpus = C.generate_synthetic(C.GeneratorConfig(n_sentences=150), seed=2)
    for sentence in corpus.sentences:
        assert C.validate_sentence(sentence) == []


def test_generator_rejects_empty_lexicon():
    with pytest.raises(DataError, match="empty lexicon"):
        C.generate_synthetic(C.GeneratorConfig(n_sentences=3, places=()), seed=0)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_round_trip_preserves_corpus(tmp_path_factory, seed):
    corpus = C.generate_synthetic(C.GeneratorConfig(n_sentences=12), seed=seed)
    path = tmp_path_factory.mktemp("rt") / "c.jsonl"
    C.save_corpus(corpus, path)
    loaded = C.load_corpus(path)
    assert len(loaded) == len(corpus)
    for a, b in zip(corpus.sentences, loaded.sentences):
        assert a.tokens == b.tokens
        assert a.events == b.events


def test_contiguous_spans():
    assert C.contiguous_spans([5, 3, 4, 9]) == [(3, 5), (9, 9)]
    assert C.contiguous_spans([]) == []
