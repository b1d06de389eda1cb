"""
Comando fit - StarBasis

Fits one eigencontour basis per group and writes it as JSON.
"""

import click

from commands.common import (artifact_timestamp, common_options, corpus_options, corpus_spec, load_corpus,
                             provenance, require, resolve_run, suffixed)
from services.dataset_io import UNIVERSAL_KEY, build_contour_matrix
from services.eigenbasis import energy_profile, fit_eigenbasis
from utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_M = 16


@click.command('fit')
@common_options
@corpus_options
@click.option('--contours', type=click.Path(dir_okay=False), default=None,
              help='Contour CSV written by extract (instead of --input/--synthetic).')
@click.option('--m', type=int, default=None, help=f'Basis dimension (default {DEFAULT_M}).')
@click.option('--group', type=click.Choice(['universal', 'per-category']), default=None,
              help='One basis for all instances or one per category.')
@click.option('--out', type=click.Path(dir_okay=False), default=None,
              help='Basis JSON; per-category files get a _<category> suffix.')
def fit_cmd(**params):
    """Fit eigencontour bases on a contour corpus."""
    run = resolve_run('fit', params)
    out = require(run, 'out', '--out')
    M = int(DEFAULT_M if run.get('m') is None else run['m'])
    spec = corpus_spec(run)

    corpus = load_corpus(run)
    block = provenance(run, corpus.inputs)
    timestamp = artifact_timestamp(corpus.inputs)
    dataset = run.get('input_path') or run.get('contours') or 'synthetic'

    matrices = build_contour_matrix(corpus.contours, spec)
    for key, matrix in matrices.items():
        basis = fit_eigenbasis(matrix, M, angle0=spec.angle0, provenance={
            'dataset': str(dataset),
            'timestamp': timestamp,
            **block,
        })
        path = out if key == UNIVERSAL_KEY else suffixed(out, key)
        basis.save(path)
        energy = energy_profile(basis)[M - 1]
        click.echo(f"[{key}] basis N={basis.N} M={M} from L={matrix.L} contours, "
                   f"energy {energy:.6f} -> {path}")
