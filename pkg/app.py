"""
StarBasis - Eigencontour descriptors for object boundaries

Command-line application that turns instance annotations into star-convex
contours, fits low-rank eigencontour bases, encodes/decodes contours,
clusters them and evaluates boundary quality against baseline descriptors.

Funcionalidades principais:
- extract: annotations -> N-sample contour CSV
- fit: eigencontour basis per group
- codec: encode/decode with per-instance errors
- cluster: K-means patterns in descriptor space
- eval: F-vs-M curves, AUC-F and the nearest-centroid protocol
- synth: seeded synthetic corpora
"""

import sys
from typing import List, Optional

import click

from utils.errors import EXIT_INPUT_ERROR, EXIT_OK, exit_code_for
from utils.logger import get_logger, log_error

logger = get_logger(__name__)


def create_cli() -> click.Group:
    """
    Factory function para criação da aplicação de linha de comando.

    Registers every command module on one click group.

    Returns:
        click.Group: Configured CLI
    """

    @click.group(name='starbasis', context_settings={'help_option_names': ['-h', '--help']})
    def cli():
        """StarBasis: eigencontour boundary descriptors."""

    # Importa e registra comandos
    from commands.cluster import cluster_cmd
    from commands.codec import codec_cmd
    from commands.evaluate import eval_cmd
    from commands.extract import extract_cmd
    from commands.fit import fit_cmd
    from commands.synth import synth_cmd

    cli.add_command(extract_cmd)
    cli.add_command(fit_cmd)
    cli.add_command(codec_cmd)
    cli.add_command(cluster_cmd)
    cli.add_command(eval_cmd)
    cli.add_command(synth_cmd)

    return cli


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI and map the outcome to an exit code.

    0 on success, 1 on input and usage errors, 2 on internal errors.
    """
    cli = create_cli()
    try:
        result = cli.main(args=argv, prog_name='starbasis', standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return exit_code_for(e)
    except click.Abort as e:
        click.echo('Aborted!', err=True)
        return exit_code_for(e)
    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_INPUT_ERROR:
            click.echo(f"Error: {e}", err=True)
            logger.debug('Input error details', exc_info=True)
        else:
            log_error(logger, e, 'Internal error')
            click.echo(f"Internal error: {type(e).__name__}: {e}", err=True)
        return code
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
