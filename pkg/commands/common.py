"""
Shared pieces of the StarBasis commands: common options, run config
resolution, corpus loading and artifact provenance.
"""

import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click

from config import Config, RunConfig
from models.instance import GROUPINGS, SPLITS, CorpusSpec, ExtractedContour, InstanceRecord, SyntheticParams
from services.dataset_io import extract_corpus, load_annotations, read_contour_csv, select_split
from services.synthetic import generate_synthetic
from utils.errors import ConfigError, EmptyGroup, InvalidN, InvalidParams
from utils.logger import get_logger, setup_logger
from utils.serialization import dumps_json, file_checksum, text_checksum

logger = get_logger(__name__)

DEFAULT_M_SWEEP = '4:36:4'


def common_options(fn: Callable) -> Callable:
    """--config, --log-level and --threads, shared by every command."""
    fn = click.option('--threads', type=int, default=None,
                      help='Worker threads for per-instance work (default STARBASIS_THREADS).')(fn)
    fn = click.option('--log-level', default=None,
                      type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                                        case_sensitive=False),
                      help='Logging level (default STARBASIS_LOG_LEVEL).')(fn)
    fn = click.option('--config', 'config_file', type=click.Path(dir_okay=False), default=None,
                      help='JSON config file; flags override its values.')(fn)
    return fn


def corpus_options(fn: Callable) -> Callable:
    """Options selecting and extracting a corpus (extract and the fused paths)."""
    options = [
        click.option('--input', 'input_path', type=click.Path(dir_okay=False), default=None,
                     help='COCO-style annotation JSON.'),
        click.option('--synthetic', type=int, default=None,
                     help='Generate this many synthetic shapes instead of reading annotations.'),
        click.option('--n', type=int, default=None, help='Angular samples per contour (default 360).'),
        click.option('--angle0', type=float, default=None, help='Direction of the first ray (radians).'),
        click.option('--include', multiple=True, help='Keep only these categories (repeatable).'),
        click.option('--exclude', multiple=True, help='Drop these categories (repeatable).'),
        click.option('--grid-step', type=float, default=None, help='Inner-center resolution in pixels.'),
        click.option('--clip-to-image/--no-clip-to-image', default=None,
                     help='Clip polygons to the image rectangle.'),
        click.option('--split', type=click.Choice(SPLITS), default=None, help='Split to use.'),
        click.option('--holdout', type=float, default=None,
                     help='Held-out fraction for --split and held-out evaluation (default 0).'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def resolve_run(command: str, params: Dict[str, Any]) -> RunConfig:
    """
    Resolve the run config and configure logging.

    Only flags the user gave (not None, non-empty) override the config file.
    """
    params = dict(params)
    config_file = params.pop('config_file', None)
    overrides = {}
    for key, value in params.items():
        if isinstance(value, tuple):
            value = list(value) or None
        overrides[key] = value
    run = RunConfig.resolve(command, config_file, overrides)
    setup_logger(run.get('log_level', Config.LOG_LEVEL), Config.LOG_FILE)
    logger.debug(f"Resolved {command} config: {run.to_dict()}")
    return run


def parse_m_values(value: Any) -> List[int]:
    """
    M sweep from `start:stop:step` (stop inclusive), a comma list, a single
    integer or a list from the config file.

    Raises:
        click.BadParameter: If the sweep is malformed
    """
    if isinstance(value, (list, tuple)):
        values = value
    else:
        text = str(value).strip()
        try:
            if ':' in text:
                parts = [int(p) for p in text.split(':')]
                if len(parts) == 2:
                    parts.append(1)
                if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                    raise ValueError(text)
                values = list(range(parts[0], parts[1] + 1, parts[2]))
            else:
                values = [int(p) for p in text.split(',') if p.strip()]
        except ValueError:
            raise click.BadParameter(f"'{value}' is not start:stop:step or a comma list of integers",
                                     param_hint="'--m'", ctx=_ctx())
    try:
        values = [int(v) for v in values]
    except (TypeError, ValueError):
        raise click.BadParameter(f"'{value}' contains a non-integer M", param_hint="'--m'", ctx=_ctx())
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise click.BadParameter(f"'{value}' must list strictly increasing M values",
                                 param_hint="'--m'", ctx=_ctx())
    return values


def corpus_spec(run: RunConfig) -> CorpusSpec:
    """CorpusSpec of the resolved run."""
    grouping = run.get('group') or 'universal'
    if grouping not in GROUPINGS:
        raise ConfigError(f"group must be one of {GROUPINGS}, got {grouping!r}")
    n = int(run['n'])
    if n < 3:
        raise InvalidN(f"N must be at least 3, got {n}")
    return CorpusSpec(
        source=run.get('input_path'),
        include=list(run.get('include') or []),
        exclude=list(run.get('exclude') or []),
        N=n,
        angle0=float(run['angle0']),
        grid_step=float(run['grid_step']),
        split=run.get('split') or 'all',
        holdout=float(run.get('holdout') or 0.0),
        seed=int(run['seed']),
        grouping=grouping,
        clip_to_image=bool(run.get('clip_to_image') or False),
    )


def synthetic_params(run: RunConfig, count: int) -> SyntheticParams:
    """Generator parameters from the run (defaults where unset)."""
    defaults = SyntheticParams()
    categories = run.get('categories') or defaults.categories
    if isinstance(categories, str):
        categories = [c.strip() for c in categories.split(',') if c.strip()]
    return SyntheticParams(
        count=int(count),
        seed=int(run['seed']),
        min_harmonic=int(_pick(run.get('min_harmonic'), defaults.min_harmonic)),
        max_harmonic=int(_pick(run.get('max_harmonic'), defaults.max_harmonic)),
        amplitude=float(_pick(run.get('amplitude'), defaults.amplitude)),
        smoothness=float(_pick(run.get('smoothness'), defaults.smoothness)),
        phase_spread=float(_pick(run.get('phase_spread'), defaults.phase_spread)),
        noise=float(_pick(run.get('noise'), defaults.noise)),
        base_radius=float(_pick(run.get('base_radius'), defaults.base_radius)),
        vertices=int(_pick(run.get('vertices'), defaults.vertices)),
        categories=list(categories),
    )


def _pick(value: Any, default: Any) -> Any:
    return default if value is None else value


class Corpus:
    """Contours of a run plus everything needed for provenance."""

    def __init__(self, contours: List[ExtractedContour], records: Optional[List[InstanceRecord]],
                 inputs: Dict[str, str], skipped: Sequence[Tuple[str, str]] = ()):
        self.contours = contours
        self.records = records
        self.inputs = inputs
        self.skipped = list(skipped)

    @property
    def shapes(self) -> Optional[Dict[str, Any]]:
        if self.records is None:
            return None
        return {r.id: r.shape for r in self.records}


def load_records(run: RunConfig) -> Tuple[List[InstanceRecord], Dict[str, str]]:
    """Instance records from --input or --synthetic, with input checksums."""
    spec = corpus_spec(run)
    if run.get('input_path'):
        path = run['input_path']
        if not os.path.exists(path):
            raise click.BadParameter(f"File not found: {path}", param_hint="'--input'")
        records = load_annotations(path, spec)
        inputs = {str(path): file_checksum(path)}
    elif run.get('synthetic'):
        params = synthetic_params(run, run['synthetic'])
        records = generate_synthetic(params)
        inputs = {'synthetic': text_checksum(dumps_json(params.to_dict()))}
    else:
        raise click.UsageError("One of --input, --synthetic or --contours is required", ctx=_ctx())
    records = select_split(records, spec)
    if not records:
        raise EmptyGroup("No instances left after filters "
                         f"(include={spec.include or 'all'}, exclude={spec.exclude or 'none'}, "
                         f"split={spec.split})")
    return records, inputs


def load_corpus(run: RunConfig) -> Corpus:
    """
    Contours of a run: read from --contours, or extracted from the
    annotation/synthetic inputs (fused path).
    """
    if run.get('contours'):
        path = run['contours']
        if not os.path.exists(path):
            raise click.BadParameter(f"File not found: {path}", param_hint="'--contours'")
        contours, _ = read_contour_csv(path)
        spec = corpus_spec(run)
        if spec.include or spec.exclude:
            contours = [c for c in contours if spec.accepts(c.category)]
        if not contours:
            raise EmptyGroup(f"No contours in {path} after filters")
        return Corpus(contours, None, {str(path): file_checksum(path)})

    records, inputs = load_records(run)
    contours, skipped = extract_corpus(records, corpus_spec(run), workers=int(run['threads']))
    if not contours:
        raise EmptyGroup("Every instance failed extraction")
    return Corpus(contours, records, inputs, skipped)


def provenance(run: RunConfig, inputs: Dict[str, str]) -> Dict[str, Any]:
    """Provenance block embedded in every artifact."""
    return {'run_config': run.to_dict(), 'inputs': dict(sorted(inputs.items()))}


def artifact_timestamp(inputs: Dict[str, str]) -> str:
    """
    UTC ISO-8601 timestamp for artifacts: SOURCE_DATE_EPOCH when set,
    otherwise the newest input file's modification time.
    """
    epoch = os.getenv('SOURCE_DATE_EPOCH')
    if epoch:
        try:
            seconds = float(epoch)
        except ValueError:
            raise ConfigError(f"SOURCE_DATE_EPOCH must be a number, got {epoch!r}")
    else:
        times = [os.path.getmtime(p) for p in inputs if os.path.exists(p)]
        seconds = max(times) if times else 0.0
    return datetime.fromtimestamp(seconds, tz=timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')


def suffixed(path: str, suffix: str) -> Path:
    """path with _<suffix> inserted before its extension."""
    path = Path(path)
    return path.with_name(f"{path.stem}_{suffix}{path.suffix}")


def require(run: RunConfig, key: str, flag: str) -> Any:
    """A parameter the command cannot run without."""
    value = run.get(key)
    if value is None:
        raise click.UsageError(f"Missing option '{flag}'", ctx=_ctx())
    return value


def check_positive(value: Any, name: str) -> None:
    if value is not None and value <= 0:
        raise InvalidParams(f"{name} must be positive, got {value}")


def _ctx():
    return click.get_current_context(silent=True)
