"""
Comando synth - StarBasis

Writes a seeded synthetic corpus as a COCO-style annotation document.
"""

import click

from commands.common import common_options, provenance, require, resolve_run, synthetic_params
from services.dataset_io import dump_annotations
from services.synthetic import generate_synthetic
from utils.logger import get_logger
from utils.serialization import dumps_json, text_checksum

logger = get_logger(__name__)


@click.command('synth')
@common_options
@click.option('--count', type=int, default=None, help='Number of shapes (default 500).')
@click.option('--seed', type=int, default=None, help='Generator seed (default STARBASIS_SEED).')
@click.option('--min-harmonic', type=int, default=None, help='Lowest radial harmonic (default 1).')
@click.option('--max-harmonic', type=int, default=None,
              help='Highest radial harmonic; 0 gives circles (default 6).')
@click.option('--amplitude', type=float, default=None, help='Amplitude scale of the harmonics.')
@click.option('--smoothness', type=float, default=None,
              help='Amplitude decay exponent over the harmonic order (default 1.5).')
@click.option('--phase-spread', type=float, default=None,
              help='Phase jitter around each category template, as a fraction of pi; 1 gives random phases.')
@click.option('--noise', type=float, default=None, help='Multiplicative per-vertex noise (default 0).')
@click.option('--base-radius', type=float, default=None, help='Mean radius in pixels (default 50).')
@click.option('--vertices', type=int, default=None, help='Polygon vertices per shape (default 360).')
@click.option('--categories', default=None, help='Comma-separated category names, assigned in turn.')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Annotation JSON to write.')
def synth_cmd(**params):
    """Generate a synthetic star-polygon corpus."""
    run = resolve_run('synth', params)
    out = require(run, 'out', '--out')
    settings = synthetic_params(run, run.get('count') or 500)

    records = generate_synthetic(settings)
    inputs = {'synthetic': text_checksum(dumps_json(settings.to_dict()))}
    dump_annotations(records, out, info={'provenance': provenance(run, inputs)})
    click.echo(f"{len(records)} synthetic shapes written to {out}")
