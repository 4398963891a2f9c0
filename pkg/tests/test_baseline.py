from eventloc import corpus as C
from eventloc.baseline import NearestPlaceLinker, link_nearest
from eventloc.evaluation import evaluate_model


def test_no_place_tokens_gives_all_zeros(fixture_corpus):
    sentence = next(s for s in fixture_corpus.sentences if s.sent_id == "no-place")
    assert link_nearest(sentence, sentence.events[0].verb_index) == [0] * len(sentence)


def test_running_example_links_bzaa(fixture_corpus):
    sentence = fixture_corpus.sentences[0]
    launched = sentence.texts.index("launched")
    # offsets in this tokenization: Bza'a +8, Al-Bab -11, Ankara +13
    assert sentence.texts.index("Bza'a") - launched == 8
    assert sentence.texts.index("Al-Bab") - launched == -11
    labels = link_nearest(sentence, launched)
    assert [i for i, v in enumerate(labels) if v] == [sentence.texts.index("Bza'a")]


def test_tie_prefers_earlier_token(fixture_corpus):
    sentence = next(s for s in fixture_corpus.sentences if s.sent_id == "tie-earlier-wins")
    labels = link_nearest(sentence, sentence.events[0].verb_index)
    assert [i for i, v in enumerate(labels) if v] == [sentence.texts.index("Homs")]


def test_whole_fixture_set(fixture_corpus, baseline_expected):
    for case in baseline_expected:
        sentence = fixture_corpus.sentences[case["sentence"]]
        verb = sentence.events[case["event"]].verb_index
        got = link_nearest(sentence, verb)
        want = [1 if i in case["marked"] else 0 for i in range(len(sentence))]
        assert got == want, sentence.sent_id


def test_marks_at_most_one_contiguous_span(fixture_corpus):
    for sentence in fixture_corpus.sentences:
        for event in sentence.events:
            labels = link_nearest(sentence, event.verb_index)
            marked = [i for i, v in enumerate(labels) if v]
            assert len(C.contiguous_spans(marked)) <= 1


def test_invariant_to_non_ner_annotations(fixture_corpus):
    sentence = fixture_corpus.sentences[0]
    scrambled = C.AnnotatedSentence(
        tokens=[C.Token(t.index, t.text, "X", "weird", t.head, t.ner)
                for t in sentence.tokens],
        events=sentence.events,
    )
    verb = sentence.events[1].verb_index
    assert link_nearest(sentence, verb) == link_nearest(scrambled, verb)


def test_gold_equals_unique_place_floor():
    # every "single" template sentence has exactly one place span = gold
    cfg = C.GeneratorConfig(n_sentences=30, template_mix={"single": 1.0})
    corpus = C.generate_synthetic(cfg, seed=21)
    result = evaluate_model(NearestPlaceLinker(), corpus)
    assert result.token.f1 == 1.0
    assert result.sentence.accuracy == 1.0
