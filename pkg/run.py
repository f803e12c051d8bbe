#!/usr/bin/env python3
"""
Main entry point for the hoforms command line.

This module serves as the application launcher, setting up the Python path,
selecting the configuration from the environment and running one command.
Reports go to stdout, status lines to stderr.
"""
import os
import sys
from pathlib import Path

# Add src directory to Python path to enable imports from our custom modules
src_path = Path(__file__).parent / 'src'
sys.path.insert(0, str(src_path))

from app.app_factory import create_app


def main() -> None:
    """
    Main application entry point.

    Loads the configuration named by HOFORMS_ENV, creates the application and
    exits with the status of the command (0 ok, 1 failure, 2 usage error).
    """
    # Defaults to 'development' for local work with verbose status lines
    config_name: str = os.getenv('HOFORMS_ENV', 'development')

    app = create_app(config_name)
    sys.exit(app.run(sys.argv[1:]))


if __name__ == '__main__':
    main()
