"""The two labeler architectures, the training loop, and checkpoint I/O.

Both models map an (n, m) feature matrix to one probability per token.
The event verb enters only through the features (flag and distances);
there is no separate verb pathway. Every (sentence, event) pair is one
independent training or prediction instance.
"""

from __future__ import annotations

import json
import logging
import zipfile
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .corpus import AnnotatedSentence, Corpus, LabelVector, event_label_vector
from .errors import CheckpointError
from .features import EmbeddingTable, FeatureConfig, TagInventory, feature_width, featurize

log = logging.getLogger(__name__)

ARCH_BILSTM = "bilstm"
ARCH_CNN = "residual_cnn"
ARCHITECTURES = (ARCH_BILSTM, ARCH_CNN)

BILSTM_HIDDEN = 128
BILSTM_DENSE = 128
BILSTM_DROPOUT = 0.5
BILSTM_RECURRENT_DROPOUT = 0.2

CNN_CHANNELS = 64
CNN_BLOCKS = 7
CNN_DENSE = 512
CNN_DROPOUT = 0.4

CHECKPOINT_FORMAT = "eventloc-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    patience: int = 5
    seed: int = 0
    validation_metric: str = "token_f1"

    def __post_init__(self):
        if min(self.epochs, self.batch_size, self.patience) < 1 or self.lr <= 0:
            raise ValueError("train config values must be positive")
        if self.patience >= self.epochs:
            raise ValueError("patience must be smaller than epochs")
        if self.validation_metric != "token_f1":
            raise ValueError(f"unknown validation metric {self.validation_metric!r}")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    val_f1: list[float] = field(default_factory=list)
    best_epoch: int = -1

    def to_dict(self) -> dict:
        return {"train_loss": self.train_loss, "val_f1": self.val_f1,
                "best_epoch": self.best_epoch}


class LinkerModel:
    """A parameter set plus the featurization recipe needed to apply it."""

    def __init__(self, architecture: str, input_width: int, params: nn.ParamStore,
                 feature_config: FeatureConfig | None = None,
                 inventories: TagInventory | None = None,
                 embeddings: EmbeddingTable | None = None,
                 threshold: float = 0.5):
        if architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {architecture!r}")
        if not 0.0 < threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        self.architecture = architecture
        self.input_width = input_width
        self.params = params
        self.feature_config = feature_config
        self.inventories = inventories
        self.embeddings = embeddings
        self.threshold = threshold

    # -- forward / backward ------------------------------------------------

    def forward(self, x: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None):
        """Per-token logits for one feature matrix; returns (logits, cache)."""
        if x.ndim != 2 or x.shape[1] != self.input_width:
            raise ValueError(
                f"feature width mismatch: matrix has {x.shape[1] if x.ndim == 2 else '?'}"
                f" columns, model expects {self.input_width}"
            )
        p = self.params.params
        if self.architecture == ARCH_BILSTM:
            lstm_params = {
                "fwd": {"W": p["lstm_fwd.W"], "U": p["lstm_fwd.U"], "b": p["lstm_fwd.b"]},
                "bwd": {"W": p["lstm_bwd.W"], "U": p["lstm_bwd.U"], "b": p["lstm_bwd.b"]},
            }
            seq, lstm_cache = nn.bilstm(x, lstm_params, BILSTM_RECURRENT_DROPOUT,
                                        training, rng)
            hid, head_cache = nn.dense(seq, p["head.W"], p["head.b"], "relu")
            hid_drop, drop_mask = nn.dropout(hid, BILSTM_DROPOUT, training, rng)
            logits, out_cache = nn.dense(hid_drop, p["out.W"], p["out.b"], "identity")
            return logits[:, 0], (lstm_cache, head_cache, drop_mask, out_cache)

        proj, proj_cache = nn.dense(x, p["proj.W"], p["proj.b"], "identity")
        block_caches = []
        h = proj
        for k in range(CNN_BLOCKS):
            h, cache = nn.residual_conv_block(h, p[f"block{k}.K"], p[f"block{k}.b"])
            block_caches.append(cache)
        hid1, head1_cache = nn.dense(h, p["head1.W"], p["head1.b"], "relu")
        hid1, drop1 = nn.dropout(hid1, CNN_DROPOUT, training, rng)
        hid2, head2_cache = nn.dense(hid1, p["head2.W"], p["head2.b"], "relu")
        hid2, drop2 = nn.dropout(hid2, CNN_DROPOUT, training, rng)
        logits, out_cache = nn.dense(hid2, p["out.W"], p["out.b"], "identity")
        return logits[:, 0], (proj_cache, block_caches, head1_cache, drop1,
                              head2_cache, drop2, out_cache)

    def backward(self, d_logits: np.ndarray, cache) -> None:
        """Accumulate parameter gradients for one forward pass."""
        g = self.params.grads
        d_out = d_logits[:, None]
        if self.architecture == ARCH_BILSTM:
            lstm_cache, head_cache, drop_mask, out_cache = cache
            d_hid, d_w, d_b = nn.dense_backward(d_out, out_cache)
            g["out.W"] += d_w
            g["out.b"] += d_b
            d_hid = nn.dropout_backward(d_hid, drop_mask)
            d_seq, d_w, d_b = nn.dense_backward(d_hid, head_cache)
            g["head.W"] += d_w
            g["head.b"] += d_b
            _, lstm_grads = nn.bilstm_backward(d_seq, lstm_cache)
            for direction in ("fwd", "bwd"):
                for name, grad in lstm_grads[direction].items():
                    g[f"lstm_{direction}.{name}"] += grad
            return

        proj_cache, block_caches, head1_cache, drop1, head2_cache, drop2, out_cache = cache
        d_hid2, d_w, d_b = nn.dense_backward(d_out, out_cache)
        g["out.W"] += d_w
        g["out.b"] += d_b
        d_hid2 = nn.dropout_backward(d_hid2, drop2)
        d_hid1, d_w, d_b = nn.dense_backward(d_hid2, head2_cache)
        g["head2.W"] += d_w
        g["head2.b"] += d_b
        d_hid1 = nn.dropout_backward(d_hid1, drop1)
        d_h, d_w, d_b = nn.dense_backward(d_hid1, head1_cache)
        g["head1.W"] += d_w
        g["head1.b"] += d_b
        for k in range(CNN_BLOCKS - 1, -1, -1):
            d_h, d_kernel, d_bias = nn.residual_conv_backward(d_h, block_caches[k])
            g[f"block{k}.K"] += d_kernel
            g[f"block{k}.b"] += d_bias
        _, d_w, d_b = nn.dense_backward(d_h, proj_cache)
        g["proj.W"] += d_w
        g["proj.b"] += d_b

    # -- featurization -----------------------------------------------------

    def featurize(self, sentence: AnnotatedSentence, verb_index: int) -> np.ndarray:
        if self.feature_config is None or self.inventories is None:
            raise ValueError("model has no featurization recipe attached")
        matrix = featurize(sentence, verb_index, self.feature_config,
                           self.embeddings, self.inventories)
        return matrix.rows

    def predict(self, sentence: AnnotatedSentence, verb_index: int):
        return predict(self, sentence, verb_index)

    def parameter_count(self) -> int:
        return sum(v.size for v in self.params.params.values())


def build_bilstm(input_width: int, *, seed: int = 0,
                 feature_config: FeatureConfig | None = None,
                 inventories: TagInventory | None = None,
                 embeddings: EmbeddingTable | None = None,
                 threshold: float = 0.5, dtype=np.float64) -> LinkerModel:
    """Bidirectional LSTM (hidden 128, recurrent dropout 0.2) -> dense 128
    ReLU -> dropout 0.5 -> per-step binary output node."""
    if input_width < 1:
        raise ValueError("input width must be positive")
    rng = np.random.default_rng(seed)
    store = nn.ParamStore(dtype=dtype, rng_seed=seed)
    for direction in ("fwd", "bwd"):
        lstm = nn.init_lstm(rng, input_width, BILSTM_HIDDEN, dtype)
        for name, value in lstm.items():
            store.add(f"lstm_{direction}.{name}", value)
    w, b = nn.init_dense(rng, 2 * BILSTM_HIDDEN, BILSTM_DENSE, dtype)
    store.add("head.W", w)
    store.add("head.b", b)
    w, b = nn.init_dense(rng, BILSTM_DENSE, 1, dtype)
    store.add("out.W", w)
    store.add("out.b", b)
    return LinkerModel(ARCH_BILSTM, input_width, store, feature_config,
                       inventories, embeddings, threshold)


def build_cnn(input_width: int, *, seed: int = 0,
              feature_config: FeatureConfig | None = None,
              inventories: TagInventory | None = None,
              embeddings: EmbeddingTable | None = None,
              threshold: float = 0.5, dtype=np.float64) -> LinkerModel:
    """Projection to 64 channels -> 7 width-3 residual conv blocks -> two
    dense 512 ReLU layers with dropout 0.4 -> per-token binary output."""
    if input_width < 1:
        raise ValueError("input width must be positive")
    rng = np.random.default_rng(seed)
    store = nn.ParamStore(dtype=dtype, rng_seed=seed)
    w, b = nn.init_dense(rng, input_width, CNN_CHANNELS, dtype)
    store.add("proj.W", w)
    store.add("proj.b", b)
    for k in range(CNN_BLOCKS):
        kernel, bias = nn.init_conv3(rng, CNN_CHANNELS, dtype)
        store.add(f"block{k}.K", kernel)
        store.add(f"block{k}.b", bias)
    w, b = nn.init_dense(rng, CNN_CHANNELS, CNN_DENSE, dtype)
    store.add("head1.W", w)
    store.add("head1.b", b)
    w, b = nn.init_dense(rng, CNN_DENSE, CNN_DENSE, dtype)
    store.add("head2.W", w)
    store.add("head2.b", b)
    w, b = nn.init_dense(rng, CNN_DENSE, 1, dtype)
    store.add("out.W", w)
    store.add("out.b", b)
    return LinkerModel(ARCH_CNN, input_width, store, feature_config,
                       inventories, embeddings, threshold)


def new_model(architecture: str, feature_config: FeatureConfig,
              inventories: TagInventory, embeddings: EmbeddingTable | None = None,
              *, seed: int = 0, threshold: float = 0.5, dtype=np.float64) -> LinkerModel:
    """Build a model whose input width follows from the feature recipe."""
    width = feature_width(feature_config, inventories)
    builder = build_bilstm if architecture == ARCH_BILSTM else build_cnn
    if architecture not in ARCHITECTURES:
        raise ValueError(f"unknown architecture {architecture!r}")
    return builder(width, seed=seed, feature_config=feature_config,
                   inventories=inventories, embeddings=embeddings,
                   threshold=threshold, dtype=dtype)


# ---------------------------------------------------------------------------
# training


def _corpus_instances(model: LinkerModel, corpus: Corpus):
    """Featurize every (sentence, event) pair once up front."""
    out = []
    for sentence in corpus.sentences:
        for event in sentence.events:
            x = model.featurize(sentence, event.verb_index)
            y = np.array(event_label_vector(sentence, event), dtype=np.float64)
            out.append((x, y))
    return out


def _micro_f1(model: LinkerModel, instances) -> float:
    tp = fp = fn = 0
    for x, y in instances:
        logits, _ = model.forward(x, training=False)
        pred = nn.sigmoid(logits) >= model.threshold
        gold = y >= 0.5
        tp += int(np.sum(pred & gold))
        fp += int(np.sum(pred & ~gold))
        fn += int(np.sum(~pred & gold))
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def train(model: LinkerModel, train_corpus: Corpus, val_corpus: Corpus,
          cfg: TrainConfig) -> tuple[LinkerModel, TrainHistory]:
    """Minibatch Adam on per-token BCE with validation-F1 early stopping.

    Keeps the parameters of the best validation epoch. Deterministic for a
    fixed config seed: shuffling, dropout, and update order all flow from
    one generator.
    """
    train_instances = _corpus_instances(model, train_corpus)
    val_instances = _corpus_instances(model, val_corpus)
    if not train_instances or not val_instances:
        raise ValueError("training and validation corpora must contain events")

    rng = np.random.default_rng(cfg.seed)
    adam = nn.AdamState.for_store(model.params, lr=cfg.lr)
    history = TrainHistory()
    best_f1 = -1.0
    best_params = model.params.snapshot()
    epochs_since_best = 0

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train_instances))
        epoch_losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            model.params.zero_grads()
            batch_loss = 0.0
            for idx in batch:
                x, y = train_instances[idx]
                logits, cache = model.forward(x, training=True, rng=rng)
                loss, d_logits = nn.bce_with_logits(logits, y)
                batch_loss += loss
                model.backward(d_logits / len(batch), cache)
            batch_loss /= len(batch)
            if not np.isfinite(batch_loss):
                raise RuntimeError(f"training diverged: non-finite loss at epoch {epoch}")
            nn.adam_step(model.params, adam)
            epoch_losses.append(batch_loss)

        epoch_loss = float(np.mean(epoch_losses))
        val_f1 = _micro_f1(model, val_instances)
        history.train_loss.append(epoch_loss)
        history.val_f1.append(val_f1)
        log.info("epoch=%d loss=%.6f val_f1=%.4f", epoch, epoch_loss, val_f1)

        if val_f1 > best_f1:
            best_f1 = val_f1
            history.best_epoch = epoch
            best_params = model.params.snapshot()
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= cfg.patience:
                break

    model.params.restore(best_params)
    return model, history


# ---------------------------------------------------------------------------
# prediction


def predict(model: LinkerModel, sentence: AnnotatedSentence,
            verb_index: int) -> tuple[LabelVector, np.ndarray]:
    """Per-token labels and probabilities, inference mode (no dropout)."""
    x = model.featurize(sentence, verb_index)
    logits, _ = model.forward(x, training=False)
    probs = nn.sigmoid(logits)
    labels = [int(p >= model.threshold) for p in probs]
    return labels, probs


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(model: LinkerModel, path) -> None:
    """Self-describing container: named tensors plus the featurization
    recipe. Round-trips bit-exactly (embedding table is external)."""
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "architecture": model.architecture,
        "input_width": model.input_width,
        "threshold": model.threshold,
        "dtype": np.dtype(model.params.dtype).name,
        "rng_seed": model.params.rng_seed,
        "feature_config": model.feature_config.to_dict() if model.feature_config else None,
        "inventories": model.inventories.to_dict() if model.inventories else None,
        "param_names": list(model.params.params.keys()),
    }
    meta_bytes = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    arrays = {f"param/{name}": value for name, value in model.params.params.items()}
    with open(path, "wb") as handle:
        np.savez(handle, __meta__=meta_bytes, **arrays)


def load_checkpoint(path, embeddings: EmbeddingTable | None = None) -> LinkerModel:
    try:
        archive = np.load(path, allow_pickle=False)
        meta = json.loads(bytes(archive["__meta__"]).decode("utf-8"))
    except (zipfile.BadZipFile, OSError, ValueError, KeyError,
            json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"not an eventloc checkpoint: {path}")
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {meta.get('version')!r} in {path}"
        )

    store = nn.ParamStore(dtype=np.dtype(meta["dtype"]), rng_seed=meta["rng_seed"])
    for name in meta["param_names"]:
        key = f"param/{name}"
        if key not in archive:
            raise CheckpointError(f"corrupt checkpoint {path}: missing tensor {name}")
        store.add(name, archive[key])
    feature_config = (FeatureConfig.from_dict(meta["feature_config"])
                      if meta["feature_config"] else None)
    inventories = (TagInventory.from_dict(meta["inventories"])
                   if meta["inventories"] else None)
    return LinkerModel(meta["architecture"], meta["input_width"], store,
                       feature_config, inventories, embeddings, meta["threshold"])
