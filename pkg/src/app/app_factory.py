"""
Application Factory for hoforms.

This module implements the application factory pattern for the command
line application. The factory selects the configuration for the requested
environment, initialises the numeric backend with it, registers the settings
in the service registry and builds the argument parser with every
subcommand, so tests can create a fully configured application without
running a command.
"""
import argparse
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from app.cli.commands import dispatch, register_commands
from app.services.service_registry import registry
from config.settings import Config, get_settings


@dataclass
class HoformsApp:
    """
    A configured command line application.

    Attributes:
        parser: Argument parser with the six subcommands
        settings: Configuration class of the selected environment
        config_name: Name the configuration was selected by
        subcommands: Names registered on the parser
    """
    parser: argparse.ArgumentParser
    settings: type[Config]
    config_name: str
    subcommands: Tuple[str, ...] = ()

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Parse the arguments and run one command.

        Returns:
            Exit status: 0 success, 1 failure or error, 2 usage error
        """
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code) if exc.code is not None else 0
        return dispatch(args, self.settings)


def create_app(config_name: str = 'default') -> HoformsApp:
    """
    Create and configure the command line application.

    Args:
        config_name: The configuration environment to use ('development', 'testing',
                    'production', or 'default')

    Returns:
        A HoformsApp ready to run commands
    """
    # Load configuration settings for the specified environment
    settings: type[Config] = get_settings(config_name)

    # Working precision and verbosity are process-wide; set them once here
    registry.configure(settings)

    parser = argparse.ArgumentParser(
        prog="hoforms",
        description="Higher-order forms toolkit: higher invariants, Hecke operators, "
                    "Fourier-Taylor series and convolution L-functions.",
    )
    subcommands = register_commands(parser)
    return HoformsApp(parser, settings, config_name, subcommands)
