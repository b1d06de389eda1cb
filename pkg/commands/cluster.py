"""
Comando cluster - StarBasis

K-means in a descriptor space; writes the cluster model JSON and the
decoded centroid contours.
"""

from collections import Counter

import click
import numpy as np

from commands.common import (check_positive, common_options, corpus_options, load_corpus, provenance, require,
                             resolve_run)
from config import Config
from models.basis import ContourMatrix, EigenBasis
from models.instance import ExtractedContour
from models.shape import Point, StarContour
from services.baseline_descriptors import KIND_ALIASES, build_descriptor
from services.clustering import centroid_contours, kmeans
from services.dataset_io import write_contour_csv
from utils.logger import get_logger
from utils.serialization import file_checksum

logger = get_logger(__name__)

DEFAULT_M = 16


def _dominant_category(categories):
    if not categories:
        return 'empty'
    counts = Counter(categories)
    best = max(counts.values())
    return sorted(c for c, n in counts.items() if n == best)[0]


@click.command('cluster')
@common_options
@corpus_options
@click.option('--contours', type=click.Path(dir_okay=False), default=None, help='Contour CSV to cluster.')
@click.option('--descriptor', type=click.Choice(sorted(KIND_ALIASES)), default=None,
              help='Descriptor space (default eigencontour).')
@click.option('--basis', 'basis_path', type=click.Path(dir_okay=False), default=None,
              help='Eigencontour basis JSON; fitted on the contours when omitted.')
@click.option('--m', type=int, default=None, help=f'Descriptor dimension (default {DEFAULT_M}).')
@click.option('--k', type=int, default=None, help=f'Number of clusters (default {Config.K_PATTERNS}).')
@click.option('--seed', type=int, default=None, help='k-means++ seed (default STARBASIS_SEED).')
@click.option('--max-iter', type=int, default=None, help='Lloyd iteration cap.')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Cluster model JSON.')
@click.option('--centroids', 'centroids_path', type=click.Path(dir_okay=False), default=None,
              help='CSV of decoded centroid contours.')
def cluster_cmd(**params):
    """Cluster contours in an eigencontour or baseline descriptor space."""
    run = resolve_run('cluster', params)
    out = require(run, 'out', '--out')
    K = int(Config.K_PATTERNS if run.get('k') is None else run['k'])
    check_positive(K, '--k')

    corpus = load_corpus(run)
    inputs = dict(corpus.inputs)
    R = np.vstack([c.contour.radii for c in corpus.contours])
    N = R.shape[1]
    kind = run.get('descriptor') or 'eigencontour'

    basis = None
    if run.get('basis_path'):
        basis = EigenBasis.load(run['basis_path'])
        inputs[str(run['basis_path'])] = file_checksum(run['basis_path'])
    M = int(run['m'] if run.get('m') is not None else (basis.M if basis is not None else DEFAULT_M))
    training = None
    if basis is None:
        training = ContourMatrix(data=R.T, ids=[c.id for c in corpus.contours])
    descriptor = build_descriptor(kind, M, N, training=training, basis=basis,
                                  angle0=corpus.contours[0].contour.angle0)

    model = kmeans(descriptor.encode_batch(R), K, seed=run['seed'], max_iter=run['max_iter'],
                   descriptor_ref=descriptor.descriptor_id)
    model.save(out, extra={
        'descriptor': descriptor.to_dict(),
        'ids': [c.id for c in corpus.contours],
        'provenance': provenance(run, inputs),
    })

    sizes = model.sizes
    if run.get('centroids_path'):
        radii = centroid_contours(model, descriptor)
        members = [[] for _ in range(model.K)]
        for item, label in zip(corpus.contours, model.assignments):
            members[label].append(item.category)
        patterns = [
            ExtractedContour(id=str(j), category=_dominant_category(members[j]),
                             contour=StarContour(center=Point(0.0, 0.0), radii=radii[j],
                                                 angle0=corpus.contours[0].contour.angle0))
            for j in range(model.K)
        ]
        write_contour_csv(patterns, run['centroids_path'],
                          provenance={**provenance(run, inputs), 'cluster_sizes': sizes.tolist()})

    click.echo(f"K={model.K} clusters over {R.shape[0]} contours in {descriptor.kind} space "
               f"(M={descriptor.M}): inertia {model.inertia:.6g}, {model.n_iter} iterations -> {out}")
