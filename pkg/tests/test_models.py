import dataclasses

import numpy as np
import pytest

from eventloc import corpus as C
from eventloc import features as F
from eventloc import models as M
from eventloc import nn
from eventloc.errors import CheckpointError


def small_corpus(n=14, seed=17, mix=None):
    cfg = C.GeneratorConfig(n_sentences=n, template_mix=mix or {"single": 1.0})
    return C.generate_synthetic(cfg, seed=seed)


def small_model(corpus, arch="bilstm", seed=0):
    inv = F.build_inventories(corpus)
    emb = F.hash_embeddings(C.corpus_vocabulary(corpus), 8)
    cfg = F.FeatureConfig(embedding_dim=8)
    return M.new_model(arch, cfg, inv, emb, seed=seed)


# ---------------------------------------------------------------------------
# builders


def test_bilstm_parameter_count_closed_form():
    # per direction: 15*512 + 128*512 + 512 = 73,728; two directions,
    # then 256*128+128 and 128*1+1.
    model = M.build_bilstm(15)
    assert model.parameter_count() == 2 * 73_728 + 32_896 + 129 == 180_481


def test_bilstm_forward_shapes_and_range():
    model = M.build_bilstm(9, seed=1)
    logits, _ = model.forward(np.random.default_rng(0).standard_normal((4, 9)))
    probs = nn.sigmoid(logits)
    assert probs.shape == (4,)
    assert np.all((probs > 0) & (probs < 1))


def test_same_seed_same_initial_parameters():
    a = M.build_bilstm(7, seed=5)
    b = M.build_bilstm(7, seed=5)
    for name in a.params.params:
        np.testing.assert_array_equal(a.params.params[name], b.params.params[name])


def test_cnn_zero_conv_equals_dense_path():
    model = M.build_cnn(6, seed=2)
    for k in range(M.CNN_BLOCKS):
        model.params.params[f"block{k}.K"][...] = 0.0
        model.params.params[f"block{k}.b"][...] = 0.0
    x = np.random.default_rng(3).standard_normal((5, 6))
    logits, _ = model.forward(x)

    p = model.params.params
    h, _ = nn.dense(x, p["proj.W"], p["proj.b"], "identity")
    h, _ = nn.dense(h, p["head1.W"], p["head1.b"], "relu")
    h, _ = nn.dense(h, p["head2.W"], p["head2.b"], "relu")
    expected, _ = nn.dense(h, p["out.W"], p["out.b"], "identity")
    np.testing.assert_array_equal(logits, expected[:, 0])


def test_cnn_single_token_sentence():
    model = M.build_cnn(6, seed=2)
    logits, _ = model.forward(np.ones((1, 6)))
    assert logits.shape == (1,)


def test_cnn_receptive_field_is_seven_tokens():
    model = M.build_cnn(5, seed=4)
    rng = np.random.default_rng(5)
    x = rng.standard_normal((20, 5))
    base, _ = model.forward(x)
    center = 10
    for offset, expect_change in ((8, False), (-8, False), (1, True), (-1, True)):
        perturbed = x.copy()
        perturbed[center + offset] += 1.0
        out, _ = model.forward(perturbed)
        changed = out[center] != base[center]
        assert changed == expect_change, offset


# ---------------------------------------------------------------------------
# training


def test_train_overfits_small_corpus():
    corpus = small_corpus(n=12)
    model = small_model(corpus)
    cfg = M.TrainConfig(epochs=60, batch_size=8, patience=59, seed=0)
    model, history = M.train(model, corpus, corpus, cfg)
    assert max(history.val_f1) >= 0.95


def test_train_same_seed_identical_history():
    corpus = small_corpus(n=10)
    histories = []
    for _ in range(2):
        model = small_model(corpus, seed=3)
        cfg = M.TrainConfig(epochs=6, batch_size=8, patience=5, seed=3)
        _, history = M.train(model, corpus, corpus, cfg)
        histories.append(history)
    assert histories[0].train_loss == histories[1].train_loss
    assert histories[0].val_f1 == histories[1].val_f1
    assert histories[0].best_epoch == histories[1].best_epoch


def test_train_early_stopping_contract():
    corpus = small_corpus(n=10)
    model = small_model(corpus, seed=1)
    cfg = M.TrainConfig(epochs=40, batch_size=8, patience=3, seed=1)
    _, history = M.train(model, corpus, corpus, cfg)
    ran = len(history.val_f1)
    assert history.val_f1[history.best_epoch] == max(history.val_f1)
    if ran < cfg.epochs:  # stopped early: exactly patience epochs after best
        assert ran == history.best_epoch + 1 + cfg.patience


def test_train_divergence_guard():
    corpus = small_corpus(n=10)
    model = small_model(corpus)
    model.params.params["out.b"][...] = np.nan
    with pytest.raises(RuntimeError, match="non-finite"):
        M.train(model, corpus, corpus, M.TrainConfig(epochs=3, batch_size=8,
                                                     patience=2, seed=0))


def test_train_config_validation():
    with pytest.raises(ValueError):
        M.TrainConfig(epochs=5, patience=5)
    with pytest.raises(ValueError):
        M.TrainConfig(lr=-1.0)


# ---------------------------------------------------------------------------
# prediction


def test_predict_is_deterministic_and_threshold_gated():
    corpus = small_corpus(n=8)
    model = small_model(corpus)
    sentence = corpus.sentences[0]
    verb = sentence.events[0].verb_index
    labels1, probs1 = M.predict(model, sentence, verb)
    labels2, probs2 = M.predict(model, sentence, verb)
    assert labels1 == labels2
    np.testing.assert_array_equal(probs1, probs2)
    assert labels1 == [int(p >= model.threshold) for p in probs1]


def test_predict_ignores_other_events():
    corpus = small_corpus(n=8)
    model = small_model(corpus)
    sentence = corpus.sentences[0]
    verb = sentence.events[0].verb_index
    _, probs = M.predict(model, sentence, verb)
    modified = C.AnnotatedSentence(
        tokens=sentence.tokens,
        events=sentence.events + [C.EventAnnotation(verb_index=0)],
    )
    _, probs2 = M.predict(model, modified, verb)
    np.testing.assert_array_equal(probs, probs2)


def test_predict_all_below_threshold_gives_empty_labels():
    corpus = small_corpus(n=8)
    model = small_model(corpus)
    model.params.params["out.b"][...] = -10.0
    model.params.params["out.W"][...] = 0.0
    sentence = corpus.sentences[0]
    labels, probs = M.predict(model, sentence, sentence.events[0].verb_index)
    assert labels == [0] * len(sentence)
    assert np.all(probs < 0.01)


# ---------------------------------------------------------------------------
# checkpoints


def test_checkpoint_round_trip_bitexact(tmp_path):
    corpus = small_corpus(n=10)
    model = small_model(corpus)
    path = tmp_path / "model.ckpt"
    M.save_checkpoint(model, path)
    loaded = M.load_checkpoint(path, embeddings=model.embeddings)
    for sentence in corpus.sentences:
        for event in sentence.events:
            labels_a, probs_a = M.predict(model, sentence, event.verb_index)
            labels_b, probs_b = M.predict(loaded, sentence, event.verb_index)
            assert labels_a == labels_b
            np.testing.assert_array_equal(probs_a, probs_b)


def test_checkpoint_truncated_file(tmp_path):
    corpus = small_corpus(n=8)
    model = small_model(corpus)
    path = tmp_path / "model.ckpt"
    M.save_checkpoint(model, path)
    path.write_bytes(path.read_bytes()[:120])
    with pytest.raises(CheckpointError, match="corrupt"):
        M.load_checkpoint(path)


def test_checkpoint_not_a_checkpoint(tmp_path):
    path = tmp_path / "model.ckpt"
    path.write_bytes(b"definitely not a zip")
    with pytest.raises(CheckpointError):
        M.load_checkpoint(path)


def test_checkpoint_embedding_dim_mismatch_detected(tmp_path):
    corpus = small_corpus(n=8)
    model = small_model(corpus)
    path = tmp_path / "model.ckpt"
    M.save_checkpoint(model, path)
    loaded = M.load_checkpoint(path)
    loaded.embeddings = F.hash_embeddings(["x"], dim=5)  # config says 8
    sentence = corpus.sentences[0]
    with pytest.raises(ValueError, match="mismatch"):
        M.predict(loaded, sentence, sentence.events[0].verb_index)


def test_forward_feature_width_mismatch():
    model = M.build_bilstm(9)
    with pytest.raises(ValueError, match="feature width mismatch"):
        model.forward(np.zeros((3, 11)))
