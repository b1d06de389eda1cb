"""
Comando eval - StarBasis

F-vs-M curves (or the nearest-centroid protocol) for one or all
descriptor families; writes the report JSON and flat `M,mean_f` CSVs.
"""

import click

from commands.common import (DEFAULT_M_SWEEP, check_positive, common_options, corpus_options, load_corpus,
                             parse_m_values, provenance, require, resolve_run, suffixed)
from config import Config
from services.baseline_descriptors import KINDS, normalize_kind
from services.evaluation import (REFERENCE_POLYGON, REFERENCES, clustering_curve, grouped_f_curve,
                                 split_train_eval, write_curve_csv)
from utils.errors import InvalidParams
from utils.logger import get_logger
from utils.serialization import write_json

logger = get_logger(__name__)

PROTOCOLS = ('curve', 'clustering')


@click.command('eval')
@common_options
@corpus_options
@click.option('--contours', type=click.Path(dir_okay=False), default=None, help='Contour CSV to evaluate.')
@click.option('--descriptor', default=None,
              help='eigencontour, centroidal, chebyshev or all (default all).')
@click.option('--m', 'm_values', default=None, help=f'M sweep start:stop:step or a comma list '
                                                    f'(default {DEFAULT_M_SWEEP}).')
@click.option('--protocol', type=click.Choice(PROTOCOLS), default=None,
              help='F curve of encode/decode, or nearest-centroid matching.')
@click.option('--k', type=int, default=None, help=f'Clusters for the clustering protocol '
                                                  f'(default {Config.K_EVAL}).')
@click.option('--tol-px', type=float, default=None, help='Fixed boundary matching tolerance.')
@click.option('--tol-fraction', type=float, default=None,
              help='Tolerance as a fraction of the reference bbox diagonal (default 0.01).')
@click.option('--reference', type=click.Choice(REFERENCES), default=None,
              help='Score against the star contour (default) or the annotation polygon.')
@click.option('--group', type=click.Choice(['universal', 'per-category']), default=None,
              help='Universal basis or one basis per category.')
@click.option('--seed', type=int, default=None, help='Seed of the held-out split and k-means++.')
@click.option('--max-iter', type=int, default=None, help='Lloyd iteration cap.')
@click.option('--out', type=click.Path(dir_okay=False), default=None, help='Report JSON.')
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), default=None,
              help='Curve CSV; with several descriptors one file per descriptor (_<kind> suffix).')
def eval_cmd(**params):
    """Evaluate descriptor families over an M sweep."""
    run = resolve_run('eval', params)
    out = require(run, 'out', '--out')
    M_values = parse_m_values(run.get('m_values') or DEFAULT_M_SWEEP)
    requested = str(run.get('descriptor') or 'all')
    kinds = list(KINDS) if requested == 'all' else [normalize_kind(requested)]
    protocol = run.get('protocol') or 'curve'
    reference = run.get('reference') or 'star'
    grouping = run.get('group') or 'universal'
    K = int(Config.K_EVAL if run.get('k') is None else run['k'])
    check_positive(K, '--k')
    check_positive(run.get('tol_px'), '--tol-px')
    check_positive(run.get('tol_fraction'), '--tol-fraction')

    # --holdout splits the extracted contours below
    run.params['split'] = 'all'
    corpus = load_corpus(run)
    if reference == REFERENCE_POLYGON and corpus.records is None:
        raise InvalidParams("--reference polygon needs --input or --synthetic, not --contours")
    train, test = split_train_eval(corpus.contours, float(run.get('holdout') or 0.0), run['seed'])

    reports = {}
    for kind in kinds:
        if protocol == 'clustering':
            reports[kind] = clustering_curve(
                test, kind, M_values, K=K, seed=run['seed'],
                max_iter=run['max_iter'], training=train, tol_px=run.get('tol_px'),
                tol_fraction=run.get('tol_fraction'), workers=int(run['threads']))
        else:
            reports[kind] = grouped_f_curve(
                test, kind, M_values, training=train, grouping=grouping, tol_px=run.get('tol_px'),
                tol_fraction=run.get('tol_fraction'), reference=reference,
                references=corpus.shapes, workers=int(run['threads']))

    write_json(out, {
        'reports': {kind: report.to_dict(include_instances=True) for kind, report in reports.items()},
        'auc_f': {kind: report.auc_f for kind, report in reports.items()},
        'M_values': M_values,
        'protocol': protocol,
        'skipped': [{'id': i, 'reason': reason} for i, reason in corpus.skipped],
        'provenance': provenance(run, corpus.inputs),
    })

    if run.get('csv_path'):
        for kind, report in reports.items():
            path = run['csv_path'] if len(reports) == 1 else suffixed(run['csv_path'], kind)
            write_curve_csv(report, path)

    for kind, report in reports.items():
        auc = 'n/a' if report.auc_f is None else f'{report.auc_f:.2f}'
        click.echo(f"{kind:>12}: AUC-F {auc} over M={M_values[0]}..{M_values[-1]} "
                   f"({len(report.pairs)}/{len(report.curve)} points)")
    logger.info(f"Report written to {out}")
