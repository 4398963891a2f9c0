"""CLI for the annotation bridge.

`annotate` turns raw text into corpus JSONL; `detect-verbs` adds one
candidate event per non-auxiliary, non-copula verb to an existing file.
Output order always follows input order.
"""

from __future__ import annotations

import logging
import sys

import click

from .annotate import annotate_files, detect_verbs, read_records, write_records
from .pipeline import PipelineUnavailable


@click.group()
@click.option("-v", "--verbose", is_flag=True)
def cli(verbose: bool):
    """Raw text to event-location corpus JSONL."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)


@cli.command()
@click.argument("inputs", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--line-mode", is_flag=True,
              help="Treat each input line as one document.")
@click.option("--sidecar", "sidecar_path", type=click.Path(exists=True, dir_okay=False),
              help="JSONL of {sentence_id, verb_text, locations} to merge.")
@click.option("--pipeline", "backend", default="auto", show_default=True,
              type=click.Choice(["auto", "builtin", "spacy"]))
@click.option("--detect-verbs", "add_verbs", is_flag=True,
              help="Also add candidate events for every qualifying verb.")
def annotate(inputs, out_path, line_mode, sidecar_path, backend, add_verbs):
    """Annotate raw text files into corpus JSONL."""
    stats = annotate_files(list(inputs), out_path, line_mode=line_mode,
                           sidecar_path=sidecar_path, backend=backend,
                           add_verb_candidates=add_verbs)
    click.echo(f"wrote {stats.sentences} sentences from {stats.documents} "
               f"documents to {out_path}"
               + (f" ({stats.dropped} dropped)" if stats.dropped else "")
               + (f", merged {stats.merged_events} events" if stats.merged_events else ""))


@cli.command(name="detect-verbs")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def detect_verbs_cmd(input_path, out_path):
    """Add candidate events to an annotated JSONL file."""
    records = [detect_verbs(r) for r in read_records(input_path)]
    write_records(records, out_path)
    total = sum(len(r["events"]) for r in records)
    click.echo(f"wrote {len(records)} sentences with {total} candidate events")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except PipelineUnavailable as exc:
        click.echo(f"pipeline unavailable: {exc}", err=True)
        return 2
    except Exception as exc:  # noqa: BLE001
        click.echo(f"error: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
