"""
Comando codec - StarBasis

Encodes contours in a basis, decodes them back and reports per-instance
reconstruction errors.
"""

import csv
import json
from pathlib import Path

import click
import numpy as np

from commands.common import check_positive, common_options, load_corpus, provenance, require, resolve_run
from models.basis import EigenBasis
from models.instance import ExtractedContour
from services.dataset_io import PROVENANCE_PREFIX, write_contour_csv
from services.eigenbasis import decode_batch, encode_batch
from services.evaluation import boundary_fscore
from utils.errors import DimensionMismatch
from utils.logger import get_logger
from utils.serialization import file_checksum, format_float

logger = get_logger(__name__)


@click.command('codec')
@common_options
@click.option('--basis', 'basis_path', type=click.Path(dir_okay=False), default=None,
              help='Basis JSON written by fit.')
@click.option('--contours', type=click.Path(dir_okay=False), default=None, help='Contour CSV to encode.')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Reconstructed contour CSV.')
@click.option('--errors', 'errors_path', type=click.Path(dir_okay=False), default=None,
              help='Per-instance error table (id, category, l2, max_abs, f).')
@click.option('--tol-px', type=float, default=None, help='Fixed boundary matching tolerance.')
@click.option('--tol-fraction', type=float, default=None,
              help='Tolerance as a fraction of the reference bbox diagonal.')
def codec_cmd(**params):
    """Encode and decode contours in an eigencontour basis."""
    run = resolve_run('codec', params)
    basis_path = require(run, 'basis_path', '--basis')
    require(run, 'contours', '--contours')
    out = require(run, 'out', '--out')
    check_positive(run.get('tol_px'), '--tol-px')
    check_positive(run.get('tol_fraction'), '--tol-fraction')

    basis = EigenBasis.load(basis_path)
    corpus = load_corpus(run)
    R = np.vstack([c.contour.radii for c in corpus.contours])
    if R.shape[1] != basis.N:
        raise DimensionMismatch(f"Contours have N={R.shape[1]}, basis {basis_path} has N={basis.N}")
    decoded = decode_batch(encode_batch(R, basis), basis)

    reconstructed = [
        ExtractedContour(id=item.id, category=item.category, contour=item.contour.with_radii(radii))
        for item, radii in zip(corpus.contours, decoded)
    ]
    inputs = dict(corpus.inputs)
    inputs[str(basis_path)] = file_checksum(basis_path)
    block = provenance(run, inputs)
    block['basis_id'] = basis.basis_id
    write_contour_csv(reconstructed, out, provenance=block)

    if run.get('errors_path'):
        _write_errors(run, corpus.contours, reconstructed, run['errors_path'], block)

    l2 = np.linalg.norm(R - decoded, axis=1)
    click.echo(f"{len(reconstructed)} contours reconstructed with M={basis.M} -> {out} "
               f"(mean l2 {float(l2.mean()):.6g})")


def _write_errors(run, originals, reconstructed, path, block):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        handle.write(PROVENANCE_PREFIX + json.dumps(block, sort_keys=True, separators=(',', ':')) + '\n')
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['id', 'category', 'l2', 'max_abs', 'f'])
        for original, recon in zip(originals, reconstructed):
            diff = original.contour.radii - recon.contour.radii
            score = boundary_fscore(recon.contour, original.contour, run.get('tol_px'),
                                    run.get('tol_fraction'))
            writer.writerow([original.id, original.category,
                             format_float(np.linalg.norm(diff)),
                             format_float(np.max(np.abs(diff))),
                             format_float(score.f)])
    logger.info(f"Wrote per-instance errors to {path}")
