"""
CLI error-handling decorators.

Every command is wrapped so that configuration problems and file-system
failures end the process with a documented exit code instead of a traceback:

- 2: invalid or unknown configuration
- 3: output or input path could not be read or written
"""
from functools import wraps

import click
from flask import current_app

from fairbandits.exceptions import ConfigError

EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3


def handles_experiment_errors(f):
    """Decorator mapping ConfigError and OSError to exit codes."""
    @wraps(f)
    def decorated_function(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ConfigError as e:
            current_app.logger.error(f"Configuration error: {e}")
            click.echo(f"Error: {e}", err=True)
            click.get_current_context().exit(EXIT_CONFIG_ERROR)
        except OSError as e:
            current_app.logger.error(f"I/O error: {e}")
            click.echo(f"Error: {e}", err=True)
            click.get_current_context().exit(EXIT_IO_ERROR)
    return decorated_function
