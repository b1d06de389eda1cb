"""
Comando extract - StarBasis

Annotations (or a synthetic corpus) to the contour CSV.
"""

import click

from commands.common import (common_options, corpus_options, corpus_spec, load_corpus, provenance, require,
                             resolve_run)
from services.dataset_io import write_contour_csv
from utils.logger import get_logger

logger = get_logger(__name__)


@click.command('extract')
@common_options
@corpus_options
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Contour CSV to write.')
def extract_cmd(**params):
    """Extract N-sample star contours from an annotation corpus."""
    run = resolve_run('extract', params)
    out = require(run, 'out', '--out')
    corpus_spec(run)

    corpus = load_corpus(run)
    block = provenance(run, corpus.inputs)
    block['skipped'] = [{'id': i, 'reason': reason} for i, reason in corpus.skipped]
    write_contour_csv(corpus.contours, out, provenance=block)

    logger.info(f"Wrote {len(corpus.contours)} contours to {out}")
    click.echo(f"{len(corpus.contours)} contours written to {out} ({len(corpus.skipped)} skipped)")
