"""
Configurações do StarBasis

Define the environment-backed defaults for development and testing, and
the RunConfig that every command resolves from defaults, an optional
config file and explicit CLI flags.
"""

import os
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from dotenv import load_dotenv

from utils.errors import ConfigError
from utils.serialization import read_json

# Carrega variáveis de ambiente do arquivo .env
load_dotenv()


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, str(default)))
    except ValueError:
        return default


def _env_float(name: str, default: float) -> float:
    try:
        return float(os.getenv(name, str(default)))
    except ValueError:
        return default


class Config:
    """Base configuration."""

    # Contour resolution: 360 samples, one per degree
    N = _env_int('STARBASIS_N', 360)
    ANGLE0 = _env_float('STARBASIS_ANGLE0', 0.0)
    GRID_STEP = _env_float('STARBASIS_GRID_STEP', 0.05)

    # Boundary matching tolerance as a fraction of the reference bbox diagonal
    TOL_FRACTION = _env_float('STARBASIS_TOL_FRACTION', 0.01)

    SEED = _env_int('STARBASIS_SEED', 0)
    K_PATTERNS = 100
    K_EVAL = 500
    MAX_ITER = 300

    THREADS = max(1, _env_int('STARBASIS_THREADS', 1))

    LOG_LEVEL = os.getenv('STARBASIS_LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('STARBASIS_LOG_FILE')

    DEBUG = os.getenv('STARBASIS_DEBUG', 'False').lower() == 'true'

    @classmethod
    def defaults(cls) -> Dict[str, Any]:
        """Run parameters every command starts from."""
        return {
            'n': cls.N,
            'angle0': cls.ANGLE0,
            'grid_step': cls.GRID_STEP,
            'tol_fraction': cls.TOL_FRACTION,
            'seed': cls.SEED,
            'max_iter': cls.MAX_ITER,
            'threads': cls.THREADS,
            'log_level': cls.LOG_LEVEL,
        }


class DevelopmentConfig(Config):
    """Configuração para ambiente de desenvolvimento."""
    DEBUG = True


class TestingConfig(Config):
    """Configuração para testes."""
    TESTING = True
    THREADS = 1
    LOG_LEVEL = 'WARNING'


# Mapeamento de configurações por ambiente
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'default': Config
}


def get_config(name: Optional[str] = None) -> type:
    """Return the configuration class selected by name or STARBASIS_ENV."""
    name = name or os.getenv('STARBASIS_ENV', 'default')
    return config.get(name, Config)


@dataclass
class RunConfig:
    """
    Fully resolved parameters of one command run.

    The resolved dictionary is echoed into every artifact's provenance
    block, together with the checksums of the inputs.
    """

    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    config_file: Optional[str] = None

    @classmethod
    def resolve(cls, command: str, config_file: Optional[str] = None,
                overrides: Optional[Mapping[str, Any]] = None,
                base: Optional[type] = None) -> 'RunConfig':
        """
        Merge defaults, config file values and explicit overrides.

        The config file is a JSON object; top-level keys apply to every
        command and a nested object keyed by the command name applies to
        that command only. Keys use the long flag names with dashes
        replaced by underscores.

        Args:
            command: Command name (extract, fit, codec, cluster, eval, synth)
            config_file: Optional JSON config path
            overrides: Flag values explicitly given on the command line
            base: Configuration class providing defaults

        Returns:
            RunConfig: Resolved configuration

        Raises:
            ConfigError: If the file is not a JSON object
        """
        params: Dict[str, Any] = dict((base or get_config()).defaults())

        if config_file:
            if not os.path.exists(config_file):
                raise ConfigError(f"Config file not found: {config_file}")
            document = read_json(config_file)
            if not isinstance(document, dict):
                raise ConfigError(f"Config file {config_file} must contain a JSON object")
            section = document.get(command, {})
            if not isinstance(section, dict):
                raise ConfigError(f"Section '{command}' in {config_file} must be an object")
            shared = {k: v for k, v in document.items() if not isinstance(v, dict)}
            params.update(_normalize(shared))
            params.update(_normalize(section))

        for key, value in _normalize(overrides or {}).items():
            if value is not None:
                params[key] = value

        return cls(command=command, params=params, config_file=config_file)

    def get(self, key: str, default: Any = None) -> Any:
        return self.params.get(key, default)

    def __getitem__(self, key: str) -> Any:
        try:
            return self.params[key]
        except KeyError:
            raise ConfigError(f"Missing required parameter '{key}' for {self.command}")

    def to_dict(self) -> Dict[str, Any]:
        """Provenance form: sorted plain values only."""
        return {
            'command': self.command,
            'params': {k: _provenance_value(v) for k, v in sorted(self.params.items())},
        }


def _normalize(values: Mapping[str, Any]) -> Dict[str, Any]:
    return {str(k).replace('-', '_'): v for k, v in values.items()}


def _provenance_value(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_provenance_value(v) for v in value]
    if value is None or isinstance(value, (str, int, float, bool)):
        return value
    return str(value)
