import json
from pathlib import Path

import pytest

from eventloc import corpus as corpus_mod
from eventloc import features

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_corpus():
    return corpus_mod.load_corpus(FIXTURES / "baseline_fixtures.jsonl")


@pytest.fixture(scope="session")
def baseline_expected():
    return json.loads((FIXTURES / "baseline_expected.json").read_text())


@pytest.fixture(scope="session")
def tiny_corpus():
    cfg = corpus_mod.GeneratorConfig(n_sentences=40)
    return corpus_mod.generate_synthetic(cfg, seed=11)


@pytest.fixture(scope="session")
def tiny_setup(tiny_corpus):
    """(feature config, inventories, embeddings) for quick model tests."""
    inv = features.build_inventories(tiny_corpus)
    emb = features.hash_embeddings(corpus_mod.corpus_vocabulary(tiny_corpus), 16)
    cfg = features.FeatureConfig(embedding_dim=16)
    return cfg, inv, emb
