"""Command-line surface: validate, synth, train, evaluate, predict,
baseline, ablate.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 runtime error. All
randomness flows from the per-run --seed; report paths write delimited
tables and JSON next to rendered figures.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import baseline as baseline_mod
from . import corpus as corpus_mod
from . import evaluation, models, report
from .errors import DataError, EventLocError
from .features import (FeatureConfig, ablation_conditions, build_inventories,
                       hash_embeddings, load_embeddings, save_embeddings)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


@click.group()
@click.option("--threads", type=int, default=1, envvar="EVENTLOC_THREADS",
              show_default=True, help="Worker cap for evaluation fan-out.")
@click.option("--json", "json_output", is_flag=True, help="Machine-readable output.")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
@click.pass_context
def cli(ctx, threads: int, json_output: bool, verbose: bool):
    """Event-location linking: data tools, labelers, and evaluation."""
    ctx.ensure_object(dict)
    ctx.obj["threads"] = max(1, threads)
    ctx.obj["json"] = json_output
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(message)s",
        stream=sys.stderr,
    )
    # training progress lines are the parseable record of a run
    if verbose:
        logging.getLogger("eventloc").setLevel(logging.INFO)


def _emit(ctx, payload: dict, text: str) -> None:
    if ctx.obj.get("json"):
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(text)


def _read_config_file(path: str | None) -> dict[str, str]:
    """Simple key=value config; '#' starts a comment. Flags override it."""
    if not path:
        return {}
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config {path} line {line_no}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _setting(flag, file_values: dict, key: str, cast, default):
    if flag is not None:
        return flag
    if key in file_values:
        return cast(file_values[key])
    return default


def _embeddings_for(path: str | None, dim: int, vocab, seed: int):
    if path:
        return load_embeddings(path, dim)
    log.info("no embedding file given; using deterministic hash vectors (dim=%d)", dim)
    return hash_embeddings(vocab, dim, seed=seed)


# ---------------------------------------------------------------------------


@cli.command()
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def validate(ctx, corpus_path):
    """Check a JSONL corpus; exit 0 iff every sentence is valid."""
    violations = corpus_mod.corpus_file_violations(corpus_path)
    if violations:
        _emit(ctx, {"valid": False, "violations": violations}, "\n".join(violations))
        raise DataError(f"{len(violations)} violation(s) in {corpus_path}")
    _emit(ctx, {"valid": True, "violations": []}, f"{corpus_path}: OK")


@cli.command()
@click.option("--n", "n_sentences", type=int, required=True, help="Sentence count.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--template", "templates", multiple=True,
              help="Restrict to template(s), e.g. --template two-event.")
@click.option("--emb-out", type=click.Path(dir_okay=False),
              help="Also write hash embeddings for the generated vocabulary.")
@click.option("--emb-dim", type=int, default=32, show_default=True)
@click.pass_context
def synth(ctx, n_sentences, seed, out_path, templates, emb_out, emb_dim):
    """Write a synthetic labeled corpus (deterministic for a seed)."""
    mix = {name: 1.0 for name in templates} if templates else None
    config = corpus_mod.GeneratorConfig(n_sentences=n_sentences, template_mix=mix)
    generated = corpus_mod.generate_synthetic(config, seed=seed)
    corpus_mod.save_corpus(generated, out_path)
    if emb_out:
        table = hash_embeddings(corpus_mod.corpus_vocabulary(generated), emb_dim, seed=seed)
        save_embeddings(table, emb_out)
    events = sum(len(s.events) for s in generated.sentences)
    _emit(ctx, {"sentences": len(generated), "events": events, "path": out_path},
          f"wrote {len(generated)} sentences / {events} events to {out_path}")


@cli.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--arch", type=click.Choice(models.ARCHITECTURES), default=None)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--embedding-dim", type=int, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None)
@click.option("--out-checkpoint", type=click.Path(dir_okay=False), required=True)
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--lr", type=float, default=None)
@click.option("--patience", type=int, default=None)
@click.option("--val-fraction", type=float, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--report-dir", type=click.Path(file_okay=False))
@click.pass_context
def train(ctx, corpus_path, arch, embeddings_path, embedding_dim, config_path,
          seed, out_checkpoint, epochs, batch_size, lr, patience, val_fraction,
          threshold, report_dir):
    """Train a labeler; writes a checkpoint, history, and test-split row."""
    file_values = _read_config_file(config_path)
    arch = _setting(arch, file_values, "arch", str, models.ARCH_BILSTM)
    seed = _setting(seed, file_values, "seed", int, 0)
    epochs = _setting(epochs, file_values, "epochs", int, 30)
    batch_size = _setting(batch_size, file_values, "batch_size", int, 32)
    lr = _setting(lr, file_values, "lr", float, 1e-3)
    patience = _setting(patience, file_values, "patience", int, 5)
    val_fraction = _setting(val_fraction, file_values, "val_fraction", float, 0.15)
    threshold = _setting(threshold, file_values, "threshold", float, 0.5)
    embedding_dim = _setting(embedding_dim, file_values, "embedding_dim", int, 32)
    if arch not in models.ARCHITECTURES:
        raise click.UsageError(f"unknown arch {arch!r}")

    data = corpus_mod.load_corpus(corpus_path)
    train_c, val_c, test_c = corpus_mod.split_corpus(
        data, (1.0 - 2 * val_fraction, val_fraction, val_fraction), seed=seed)
    inventories = build_inventories(train_c)
    feature_cfg = FeatureConfig(embedding_dim=embedding_dim)
    emb = _embeddings_for(embeddings_path, embedding_dim,
                          corpus_mod.corpus_vocabulary(data), seed)

    model = models.new_model(arch, feature_cfg, inventories, emb,
                             seed=seed, threshold=threshold)
    cfg = models.TrainConfig(epochs=epochs, batch_size=batch_size, lr=lr,
                             patience=patience, seed=seed)
    model, history = models.train(model, train_c, val_c, cfg)
    models.save_checkpoint(model, out_checkpoint)
    report.write_json(history.to_dict(), str(out_checkpoint) + ".history.json")

    result = evaluation.evaluate_model(model, test_c, threads=ctx.obj["threads"])
    row = report.metrics_row(arch, result.token, result.sentence)
    if report_dir:
        out = Path(report_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_json({"history": history.to_dict(), "test": result.to_dict()},
                          out / "history.json")
        report.write_delimited(
            [{"epoch": i, "train_loss": l, "val_f1": f}
             for i, (l, f) in enumerate(zip(history.train_loss, history.val_f1))],
            out / "history.csv")
        report.write_delimited([row], out / "test_metrics.csv")
        report.plot_history(history, out / "history.png")
        report.plot_metric_bars([row], out / "test_metrics.png")
    payload = {"checkpoint": out_checkpoint, "best_epoch": history.best_epoch,
               "epochs_run": len(history.train_loss),
               "val_f1": history.val_f1[history.best_epoch], "test": result.to_dict()}
    _emit(ctx, payload,
          f"checkpoint {out_checkpoint}: best epoch {history.best_epoch}, "
          f"val F1 {history.val_f1[history.best_epoch]:.3f}, "
          f"test F1 {result.token.f1:.3f}")


def _evaluate_common(ctx, corpus_path, predictor, name, out_dir):
    data = corpus_mod.load_corpus(corpus_path)
    result = evaluation.evaluate_model(predictor, data, threads=ctx.obj["threads"])
    row = report.metrics_row(name, result.token, result.sentence)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_delimited([row], out / "metrics.csv")
        report.write_json({"rows": [row]}, out / "metrics.json")
        report.plot_metric_bars([row], out / "metrics.png")
    _emit(ctx, {"rows": [row]}, report.format_table([row], report.METRIC_COLUMNS))


@cli.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--system", type=click.Choice(["baseline"]),
              help="Evaluate a built-in system instead of a checkpoint.")
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", type=click.Path(file_okay=False))
@click.pass_context
def evaluate(ctx, corpus_path, checkpoint_path, system, embeddings_path, out_dir):
    """Score a checkpoint or built-in system on a corpus."""
    if bool(checkpoint_path) == bool(system):
        raise click.UsageError("give exactly one of --checkpoint or --system")
    if system:
        predictor, name = baseline_mod.NearestPlaceLinker(), "baseline"
    else:
        predictor, name = _load_model(checkpoint_path, embeddings_path, corpus_path), "model"
        name = predictor.architecture
    _evaluate_common(ctx, corpus_path, predictor, name, out_dir)


@cli.command(name="baseline")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--out-dir", type=click.Path(file_okay=False))
@click.pass_context
def baseline_cmd(ctx, corpus_path, out_dir):
    """Evaluate the nearest-place rule system on a corpus."""
    _evaluate_common(ctx, corpus_path, baseline_mod.NearestPlaceLinker(),
                     "baseline", out_dir)


def _load_model(checkpoint_path, embeddings_path, vocab_source=None):
    model = models.load_checkpoint(checkpoint_path)
    cfg = model.feature_config
    if cfg is not None and cfg.embedding:
        if embeddings_path:
            model.embeddings = load_embeddings(embeddings_path, cfg.embedding_dim)
        else:
            vocab: list[str] = []
            if vocab_source:
                vocab = corpus_mod.corpus_vocabulary(corpus_mod.load_corpus(vocab_source))
            model.embeddings = hash_embeddings(vocab, cfg.embedding_dim,
                                               seed=model.params.rng_seed)
    return model


@cli.command()
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--sentence-json", "sentence_path", required=True,
              help="Path to one sentence object (JSONL schema), or '-' for stdin.")
@click.option("--verb-index", type=int, required=True)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def predict(ctx, checkpoint_path, sentence_path, verb_index, embeddings_path):
    """Print per-token probabilities and labels for one (sentence, verb)."""
    raw = sys.stdin.read() if sentence_path == "-" else Path(sentence_path).read_text("utf-8")
    try:
        record = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise DataError(f"sentence JSON: {exc}") from exc
    sentence = corpus_mod.sentence_from_record(record)
    violations = corpus_mod.validate_sentence(sentence)
    if violations:
        raise DataError("invalid sentence: " + "; ".join(violations))

    model = models.load_checkpoint(checkpoint_path)
    cfg = model.feature_config
    if cfg is not None and cfg.embedding:
        if embeddings_path:
            model.embeddings = load_embeddings(embeddings_path, cfg.embedding_dim)
        else:
            model.embeddings = hash_embeddings(sentence.texts, cfg.embedding_dim,
                                               seed=model.params.rng_seed)
    labels, probs = models.predict(model, sentence, verb_index)
    payload = {
        "tokens": sentence.texts,
        "verb_index": verb_index,
        "probabilities": [round(float(p), 6) for p in probs],
        "labels": labels,
    }
    lines = [
        f"{i:3d}  {text:20s}  p={p:.4f}  {'LOC' if lab else '-'}"
        for i, (text, p, lab) in enumerate(zip(sentence.texts, probs, labels))
    ]
    _emit(ctx, payload, "\n".join(lines))


@cli.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--conditions", default="full,-embeddings,-distances,-pos,-dep,-ner,embeddings-only",
              show_default=True, help="Comma-separated subset of the standard grid.")
@click.option("--partitions", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--embedding-dim", type=int, default=32, show_default=True)
@click.option("--epochs", type=int, default=8, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--patience", type=int, default=3, show_default=True)
@click.option("--arch", type=click.Choice(models.ARCHITECTURES),
              default=models.ARCH_BILSTM, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False))
@click.option("--cache-dir", type=click.Path(file_okay=False),
              help="Per-cell result cache; reruns resume from it.")
@click.pass_context
def ablate(ctx, corpus_path, conditions, partitions, seed, embeddings_path,
           embedding_dim, epochs, batch_size, patience, arch, out_dir, cache_dir):
    """Ablation grid: retrain per condition over shared partitions."""
    grid = ablation_conditions(FeatureConfig(embedding_dim=embedding_dim))
    wanted = [name.strip() for name in conditions.split(",") if name.strip()]
    unknown = [name for name in wanted if name not in grid]
    if unknown:
        raise click.UsageError(
            f"unknown conditions {unknown}; choose from {sorted(grid)}")
    data = corpus_mod.load_corpus(corpus_path)
    emb = _embeddings_for(embeddings_path, embedding_dim,
                          corpus_mod.corpus_vocabulary(data), seed)
    cfg = models.TrainConfig(epochs=epochs, batch_size=batch_size,
                             patience=patience, seed=seed)
    result = evaluation.run_ablation(
        data, {name: grid[name] for name in wanted}, partitions, seed, cfg,
        embeddings=emb, architecture=arch, cache_dir=cache_dir)
    rows = result.summary_rows()
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report.write_json(result.to_dict(), out / "ablation.json")
        report.write_delimited(rows, out / "ablation.csv")
        report.plot_ablation(rows, out / "ablation.png")
    _emit(ctx, result.to_dict(), report.format_table(rows))


def main(argv=None) -> int:
    """Entry point with the package's exit-code contract."""
    args = list(argv) if argv is not None else sys.argv[1:]
    json_mode = "--json" in args

    def fail(kind: str, exc, code: int) -> int:
        if json_mode:
            click.echo(json.dumps({"error": str(exc), "kind": kind}), err=True)
        else:
            click.echo(f"{kind} error: {exc}", err=True)
        return code

    try:
        cli.main(args=args, standalone_mode=False)
        return EXIT_OK
    except click.UsageError as exc:
        return fail("usage", exc.format_message(), EXIT_USAGE)
    except click.Abort:
        return EXIT_USAGE
    except DataError as exc:
        return fail("data", exc, EXIT_DATA)
    except (EventLocError, Exception) as exc:  # noqa: BLE001
        return fail("runtime", exc, EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
