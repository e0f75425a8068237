import csv
import io
import json
import logging
import os
import sys

import click
import click_log
from click_log import ClickHandler

from pymaui import (
    FORMAT_BINARY,
    FORMAT_JSONL,
    FORMATS,
    MauiError,
    compare,
    generate,
    load_config,
    load_manifest,
    load_store,
    population_spec_from_dict,
    run,
    write_store,
)
from pymaui.exceptions import ConfigError

if sys.version_info < (3, 8):  # pragma: no cover
    print(
        "To use this script you need python 3.8 or newer! got %s"
        % sys.version_info
    )
    sys.exit(1)


class CustomColorFormatter(click_log.ColorFormatter):
    colors = {
        "error": dict(fg="red"),
        "exception": dict(fg="red"),
        "critical": dict(fg="red"),
        "info": dict(fg="bright_green"),
        "debug": dict(fg="blue"),
        "warning": dict(fg="yellow"),
    }

    def format(self, record):
        if not record.exc_info:
            level = record.levelname.lower()
            msg = record.getMessage()

            prefix = self.formatTime(record, self.datefmt) + " - "
            if level in self.colors:
                prefix += click.style(
                    "{}: ".format(level), **self.colors[level]
                )

            msg = "\n".join(prefix + x for x in msg.splitlines())
            return msg
        return logging.Formatter.format(self, record)


logger = logging.getLogger(__name__)
click_log.basic_config(logger)

_default_handler = ClickHandler()
_default_handler.formatter = CustomColorFormatter()

logger.handlers = [_default_handler]
logger.propagate = False

# library modules log through the same handler
package_logger = logging.getLogger("pymaui")
package_logger.handlers = [_default_handler]
package_logger.propagate = False


class UsageExitMixin(object):
    """Bad command line usage exits with 1 like any other config error."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent, **extra)
        except click.UsageError as e:
            e.exit_code = ConfigError.exit_code
            raise


class MauiCommand(UsageExitMixin, click.Command):
    pass


class MauiGroup(UsageExitMixin, click.Group):
    command_class = MauiCommand

    def resolve_command(self, ctx, args):
        try:
            return super().resolve_command(ctx, args)
        except click.UsageError as e:
            e.exit_code = ConfigError.exit_code
            raise


def abort(error: MauiError):
    logger.error("%s", error)
    sys.exit(error.exit_code)


def _sync_levels():
    package_logger.setLevel(logger.level)


@click.group(cls=MauiGroup)
@click_log.simple_verbosity_option(logger, "--loglevel", "-l")
@click.version_option()
def cli():
    """Evaluate how fairly embed-and-rank attribution treats authors."""
    _sync_levels()


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--format",
    "store_format",
    type=click.Choice(FORMATS),
    default=FORMAT_JSONL,
    show_default=True,
    help="Format of the input store.",
)
@click.option(
    "--convert",
    type=click.Path(dir_okay=False),
    help="Write the validated store here in the other format.",
)
def ingest(path, store_format, convert):
    """Validate an embedding store and optionally convert it."""
    try:
        store = load_store(path, store_format)
        logger.info(
            "%s: %d authors, %d documents, dimension %d, %s",
            path,
            len(store),
            store.n_documents,
            store.dimension,
            "split" if store.is_split else "unsplit",
        )

        if convert:
            target = (
                FORMAT_BINARY if store_format == FORMAT_JSONL else FORMAT_JSONL
            )
            for written in write_store(store, convert, target):
                logger.info("wrote %s", written)
    except MauiError as e:
        abort(e)


@cli.command()
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON population spec.",
)
@click.option(
    "--out",
    required=True,
    type=click.Path(dir_okay=False),
    help="Store file to write.",
)
@click.option("--seed", type=int, help="Override the population seed.")
@click.option(
    "--format",
    "store_format",
    type=click.Choice(FORMATS),
    default=FORMAT_JSONL,
    show_default=True,
)
def synth(config_path, out, seed, store_format):
    """Generate a synthetic embedding store from a population spec."""
    try:
        try:
            with open(config_path, encoding="utf-8") as handle:
                data = json.load(handle)
        except ValueError as e:
            raise ConfigError("cannot read %s: %s" % (config_path, e))

        if seed is not None and isinstance(data, dict):
            data["seed"] = seed

        store = generate(population_spec_from_dict(data))
        for written in write_store(store, out, store_format):
            logger.info("wrote %s", written)
    except MauiError as e:
        abort(e)


@cli.command("run")
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON run config.",
)
@click.option("--out", help="Override the output directory.")
@click.option("--seed", type=int, help="Override the global seed.")
@click.option(
    "--threads", type=click.IntRange(min=1), help="Ranking threads."
)
def run_command(config_path, out, seed, threads):
    """Run the full evaluation pipeline."""
    try:
        config = load_config(config_path).with_overrides(
            output_dir=out, seed=seed, threads=threads
        )
        manifest = run(config, logger=logger)
    except MauiError as e:
        abort(e)

    for metric, value in (
        ("R@%d" % manifest.summary["recall_k"], manifest.summary["recall"]),
        ("MRR", manifest.summary["mrr"]),
    ):
        logger.info("%s = %.4f", metric, value)
    for k, value in manifest.summary["maui"].items():
        logger.info("MAUI_%s = %.4f", k, value)


@cli.command("compare")
@click.argument("manifests", nargs=-1, required=True)
@click.option(
    "--out",
    type=click.Path(dir_okay=False),
    help="CSV file to write; printed when omitted.",
)
def compare_command(manifests, out):
    """Merge the summaries of several runs into one table."""
    try:
        header, rows = compare([load_manifest(m) for m in manifests])
    except MauiError as e:
        abort(e)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])

    if not out:
        click.echo(buffer.getvalue(), nl=False)
        return

    directory = os.path.dirname(out)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)
    with open(out, "w", encoding="utf-8", newline="") as handle:
        handle.write(buffer.getvalue())
    logger.info("wrote %s", out)


if __name__ == "__main__":
    # pylint: disable=no-value-for-parameter
    cli()
