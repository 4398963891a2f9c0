"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with its measured values. Run with `pytest -rA` (or -s) to
see the lines; tolerances are asserted regardless."""

import json
import random
import time
from pathlib import Path

import numpy as np
import pytest

from eventloc import corpus as C
from eventloc import evaluation as E
from eventloc import features as F
from eventloc import models as M
from eventloc import nn
from eventloc.baseline import NearestPlaceLinker, link_nearest

FIXTURES = Path(__file__).parent / "fixtures"

GRAD_SEEDS = range(10)
E2E_SENTENCES = 2_000
E2E_SEED = 1


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# criterion 1: gradient correctness


def _dense_case(seed):
    rng = np.random.default_rng(seed)
    n, a, b = rng.integers(2, 7, size=3)
    x = rng.standard_normal((n, a))
    params = {"W": rng.standard_normal((a, b)), "b": rng.standard_normal(b)}
    target = rng.standard_normal((n, b))

    def loss():
        y, cache = nn.dense(x, params["W"], params["b"], "identity")
        _, d_w, d_b = nn.dense_backward(y - target, cache)
        return 0.5 * float(np.sum((y - target) ** 2)), {"W": d_w, "b": d_b}

    return loss, params


def _lstm_case(seed):
    rng = np.random.default_rng(seed)
    steps, m, hidden = rng.integers(2, 7), rng.integers(2, 6), rng.integers(2, 6)
    x = rng.standard_normal((steps, m))
    params = nn.init_lstm(rng, m, hidden)
    target = rng.standard_normal((steps, hidden))

    def loss():
        h, cache = nn.lstm_forward(x, params)
        _, grads = nn.lstm_backward(h - target, cache)
        return 0.5 * float(np.sum((h - target) ** 2)), grads

    return loss, params


def _conv_case(seed):
    rng = np.random.default_rng(seed)
    n, channels = rng.integers(2, 8), rng.integers(2, 6)
    x = rng.standard_normal((n, channels))
    kernel, bias = nn.init_conv3(rng, channels)
    params = {"K": kernel, "b": bias}
    target = rng.standard_normal((n, channels))

    def loss():
        y, cache = nn.residual_conv_block(x, params["K"], params["b"])
        _, d_k, d_b = nn.residual_conv_backward(y - target, cache)
        return 0.5 * float(np.sum((y - target) ** 2)), {"K": d_k, "b": d_b}

    return loss, params


def _bce_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 12))
    params = {"z": rng.standard_normal(n)}
    y = (rng.random(n) > 0.5).astype(float)

    def loss():
        value, grad = nn.bce_with_logits(params["z"], y)
        return value, {"z": grad}

    return loss, params


def test_acceptance_gradient_correctness():
    start = time.time()
    families = {
        "dense (affine)": (_dense_case, 1e-6),
        "lstm bptt": (_lstm_case, 1e-4),
        "residual conv": (_conv_case, 1e-4),
        "bce-with-logits (affine)": (_bce_case, 1e-6),
    }
    details = []
    ok = True
    for name, (case, tolerance) in families.items():
        worst = 0.0
        for seed in GRAD_SEEDS:
            loss, params = case(seed)
            worst = max(worst, nn.grad_check(loss, params, seed=seed))
        details.append(f"{name} max err {worst:.2e} (tol {tolerance:.0e})")
        ok = ok and worst < tolerance
    elapsed = time.time() - start
    ok = ok and elapsed < 60.0
    report("gradient correctness",
           ok, "; ".join(details) + f"; {len(GRAD_SEEDS)} seeds in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criterion 2: metric oracle


def test_acceptance_metric_oracle():
    start = time.time()
    rng = random.Random(99)
    mismatches = 0
    counts = []
    brute = []
    exact_pairs = []
    for _ in range(1000):
        n = rng.randrange(1, 40)
        pred = [rng.randrange(2) for _ in range(n)]
        gold = [rng.randrange(2) for _ in range(n)]
        got = E.token_prf(pred, gold)
        tp = sum(1 for i in range(n) if pred[i] and gold[i])
        fp = sum(1 for i in range(n) if pred[i] and not gold[i])
        fn = sum(1 for i in range(n) if not pred[i] and gold[i])
        if got != (tp, fp, fn):
            mismatches += 1
        counts.append(got)
        brute.append((tp, fp, fn))
        exact_pairs.append((pred, gold))

    metrics = E.aggregate(counts)
    tp = sum(b[0] for b in brute)
    fp = sum(b[1] for b in brute)
    fn = sum(b[2] for b in brute)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    real_ok = (abs(metrics.precision - precision) < 1e-12
               and abs(metrics.recall - recall) < 1e-12
               and abs(metrics.f1 - f1) < 1e-12)

    sm = E.sentence_exact(exact_pairs)
    brute_exact = sum(1 for p, g in exact_pairs if p == g)
    ok = mismatches == 0 and real_ok and sm.exact == brute_exact
    report("metric oracle", ok,
           f"1000 random pairs, {mismatches} count mismatches, reals within "
           f"1e-12, exact-match {sm.exact}=={brute_exact}, "
           f"{time.time() - start:.1f}s")


# ---------------------------------------------------------------------------
# criterion 3: baseline fixtures


def test_acceptance_baseline_fixtures():
    corpus = C.load_corpus(FIXTURES / "baseline_fixtures.jsonl")
    expected = json.loads((FIXTURES / "baseline_expected.json").read_text())
    wrong = []
    for case in expected:
        sentence = corpus.sentences[case["sentence"]]
        verb = sentence.events[case["event"]].verb_index
        got = link_nearest(sentence, verb)
        want = [1 if i in case["marked"] else 0 for i in range(len(sentence))]
        if got != want:
            wrong.append(sentence.sent_id)

    running = corpus.sentences[0]
    launched = running.texts.index("launched")
    labels = link_nearest(running, launched)
    running_ok = ([i for i, v in enumerate(labels) if v]
                  == [running.texts.index("Bza'a")])
    ids = {s.sent_id for s in corpus.sentences}
    ok = (not wrong and running_ok and len(corpus) == 20
          and {"tie-earlier-wins", "no-place"} <= ids)
    report("baseline fixtures", ok,
           f"20 sentences / {len(expected)} events, mismatches {wrong or 'none'}, "
           f"running example -> Bza'a span {running_ok}")


# ---------------------------------------------------------------------------
# criterion 4: capacity (overfit) check


def test_acceptance_capacity_overfit():
    start = time.time()
    # single-said template yields exactly 2 events per sentence
    cfg = C.GeneratorConfig(n_sentences=25, template_mix={"single-said": 1.0})
    corpus = C.generate_synthetic(cfg, seed=13)
    instances = sum(len(s.events) for s in corpus.sentences)
    inv = F.build_inventories(corpus)
    emb = F.hash_embeddings(C.corpus_vocabulary(corpus), 16)
    model = M.new_model("bilstm", F.FeatureConfig(embedding_dim=16), inv, emb, seed=3)
    train_cfg = M.TrainConfig(epochs=200, batch_size=16, patience=30, seed=3)
    model, history = M.train(model, corpus, corpus, train_cfg)
    best = max(history.val_f1)
    elapsed = time.time() - start
    ok = instances == 50 and best >= 0.99 and len(history.val_f1) <= 200 and elapsed < 300
    report("capacity overfit", ok,
           f"{instances} instances, train F1 {best:.4f} after "
           f"{len(history.val_f1)} epochs, {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# criteria 5 and 6 share one expensive training run


@pytest.fixture(scope="module")
def end_to_end():
    data = C.generate_synthetic(C.GeneratorConfig(n_sentences=E2E_SENTENCES),
                                seed=E2E_SEED)
    train_c, val_c, test_c = C.split_corpus(data, (0.7, 0.15, 0.15), seed=100)
    inv = F.build_inventories(train_c)
    emb = F.hash_embeddings(C.corpus_vocabulary(data), 24)
    feature_cfg = F.FeatureConfig(embedding_dim=24)
    cfg = M.TrainConfig(epochs=24, batch_size=32, patience=6, seed=7)

    start = time.time()
    results = {}
    trained = {}
    for arch in (M.ARCH_BILSTM, M.ARCH_CNN):
        model = M.new_model(arch, feature_cfg, inv, emb, seed=7)
        model, _ = M.train(model, train_c, val_c, cfg)
        results[arch] = E.evaluate_model(model, test_c)
        trained[arch] = model
    results["baseline"] = E.evaluate_model(NearestPlaceLinker(), test_c)
    return {"results": results, "models": trained, "elapsed": time.time() - start,
            "inv": inv, "emb": emb, "feature_cfg": feature_cfg}


def test_acceptance_end_to_end_ordering(end_to_end):
    r = end_to_end["results"]
    lstm = r[M.ARCH_BILSTM].token.f1
    cnn = r[M.ARCH_CNN].token.f1
    base = r["baseline"].token.f1
    elapsed = end_to_end["elapsed"]
    ok = lstm >= cnn and lstm >= base + 0.20 and elapsed < 900
    report("end-to-end ordering", ok,
           f"{E2E_SENTENCES} sentences: LSTM F1 {lstm:.3f} >= CNN {cnn:.3f}, "
           f"LSTM >= baseline {base:.3f} + 0.20, trained in {elapsed:.0f}s")


def test_acceptance_verb_conditioning(end_to_end):
    model = end_to_end["models"][M.ARCH_BILSTM]
    fixtures = C.generate_synthetic(
        C.GeneratorConfig(n_sentences=30, template_mix={"two-event": 1.0}), seed=77)
    differing = 0
    for sentence in fixtures.sentences:
        located = [e for e in sentence.events if e.location_indices]
        sets = []
        for event in located[:2]:
            labels, _ = M.predict(model, sentence, event.verb_index)
            sets.append({i for i, v in enumerate(labels) if v})
        if sets[0] != sets[1]:
            differing += 1
    fraction = differing / len(fixtures.sentences)
    ok = fraction >= 0.90
    report("verb conditioning", ok,
           f"{differing}/{len(fixtures.sentences)} two-event fixtures give "
           f"different location sets ({fraction:.0%})")


# ---------------------------------------------------------------------------
# criterion 7: ablation harness


def test_acceptance_ablation_harness(tmp_path):
    start = time.time()
    data = C.generate_synthetic(C.GeneratorConfig(n_sentences=500), seed=3)
    conditions = F.ablation_conditions(F.FeatureConfig(embedding_dim=24))
    emb = F.hash_embeddings(C.corpus_vocabulary(data), 24)
    cfg = M.TrainConfig(epochs=8, batch_size=32, patience=3, seed=0)
    cache = tmp_path / "cells"
    run = E.run_ablation(data, conditions, n_partitions=3, base_seed=11,
                         train_cfg=cfg, embeddings=emb, cache_dir=cache)

    cells_ok = (len(run.cells) == 21 and all(c.valid for c in run.cells))
    shared = all(
        len({c.membership_digest for c in run.cells if c.partition == p}) == 1
        for p in range(3)
    )
    full = run.mean_f1("full")
    embeddings_only = run.mean_f1("embeddings-only")
    margin_ok = full >= embeddings_only - 0.02

    resumed = E.run_ablation(data, conditions, n_partitions=3, base_seed=11,
                             train_cfg=cfg, embeddings=emb, cache_dir=cache)
    resume_ok = [c.token for c in resumed.cells] == [c.token for c in run.cells]
    elapsed = time.time() - start
    ok = cells_ok and shared and margin_ok and resume_ok and elapsed < 7200
    report("ablation harness", ok,
           f"21 cells valid {cells_ok}, shared partitions {shared}, "
           f"full {full:.3f} vs embeddings-only {embeddings_only:.3f}, "
           f"cache resume {resume_ok}, {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# criterion 8: reproducibility


def test_acceptance_reproducibility(tmp_path):
    data = C.generate_synthetic(C.GeneratorConfig(n_sentences=120), seed=5)
    train_c, val_c, test_c = C.split_corpus(data, (0.7, 0.15, 0.15), seed=8)
    inv = F.build_inventories(train_c)
    emb = F.hash_embeddings(C.corpus_vocabulary(data), 16)

    outputs = []
    for run in range(2):
        model = M.new_model("bilstm", F.FeatureConfig(embedding_dim=16), inv,
                            emb, seed=4)
        cfg = M.TrainConfig(epochs=5, batch_size=16, patience=4, seed=4)
        model, history = M.train(model, train_c, val_c, cfg)
        path = tmp_path / f"run{run}.ckpt"
        M.save_checkpoint(model, path)
        outputs.append((history, path))

    h0, h1 = outputs[0][0], outputs[1][0]
    history_ok = (h0.train_loss == h1.train_loss and h0.val_f1 == h1.val_f1
                  and h0.best_epoch == h1.best_epoch)

    m0 = M.load_checkpoint(outputs[0][1], embeddings=emb)
    m1 = M.load_checkpoint(outputs[1][1], embeddings=emb)
    predictions_ok = True
    for sentence in test_c.sentences:
        for event in sentence.events:
            l0, p0 = M.predict(m0, sentence, event.verb_index)
            l1, p1 = M.predict(m1, sentence, event.verb_index)
            if l0 != l1 or not np.array_equal(p0, p1):
                predictions_ok = False
    ok = history_ok and predictions_ok
    report("reproducibility", ok,
           f"identical history {history_ok}, checkpoints predict identically "
           f"{predictions_ok}")
