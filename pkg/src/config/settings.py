"""
Configuration settings for hoforms.

This module defines configuration classes that manage numeric tolerances,
truncation caps, file paths, and environment-specific behaviour of the
higher-order forms toolkit. Every default can be overridden through an
environment variable (prefixed HOFORMS_) loaded with the dotenv library, so a
local .env file is enough to tune a workstation without touching the code.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()


def _env_float(name: str, default: float) -> float:
    """Read a float from the environment, falling back to the default."""
    raw = os.getenv(name)
    return float(raw) if raw not in (None, "") else default


def _env_int(name: str, default: int) -> int:
    """Read an integer from the environment, falling back to the default."""
    raw = os.getenv(name)
    return int(raw) if raw not in (None, "") else default


class Config:
    """
    Base configuration class containing common settings for all environments.

    The numeric defaults are the tolerances and caps every service reads; the
    command line and YAML run files may override a subset of them per run
    (see app.cli.run_config).
    """

    # Application flags
    DEBUG: bool = False
    TESTING: bool = False
    VERBOSE: bool = os.getenv("HOFORMS_VERBOSE", "1") == "1"  # Emoji status lines on stderr

    # File system paths - calculated relative to this configuration file
    BASE_DIR: Path = Path(__file__).parent.parent.parent  # config -> src -> repository root
    DATA_DIR: Path = BASE_DIR / 'data'  # Shipped q-expansions and golden reports
    FORMS_DIR: Path = DATA_DIR / 'forms'
    GOLDEN_DIR: Path = DATA_DIR / 'golden'

    # Working precision for mpmath evaluations
    MP_DPS: int = _env_int("HOFORMS_MP_DPS", 30)

    # Exact algebra limits
    Q_MAX: int = _env_int("HOFORMS_Q_MAX", 4)  # Highest order accepted by the invariant solvers
    COSET_CAP: int = _env_int("HOFORMS_COSET_CAP", 10000)  # BFS cap for coset enumeration
    UNITARY_TOLERANCE: float = _env_float("HOFORMS_UNITARY_TOLERANCE", 1e-12)

    # Series truncation and tail control
    TAIL_TOLERANCE: float = _env_float("HOFORMS_TAIL_TOLERANCE", 1e-12)
    TRUNCATION_CAP: int = _env_int("HOFORMS_TRUNCATION_CAP", 2000)
    STOP_TOLERANCE: float = _env_float("HOFORMS_STOP_TOLERANCE", 1e-20)  # Sums stop once the tail bound is below this
    GROWTH_EXPONENT: float = _env_float("HOFORMS_GROWTH_EXPONENT", 6.0)  # Fallback when a fit is impossible

    # Incomplete gamma
    GAMMA_EPS: float = _env_float("HOFORMS_GAMMA_EPS", 1e-15)
    GAMMA_MAX_ITER: int = _env_int("HOFORMS_GAMMA_MAX_ITER", 5000)

    # Quadrature
    TRAPEZOID_POINTS: int = _env_int("HOFORMS_TRAPEZOID_POINTS", 64)
    TRAPEZOID_DOUBLINGS: int = 6
    QUAD_MAXDEGREE: int = _env_int("HOFORMS_QUAD_MAXDEGREE", 8)

    # Analytic continuation of the convolution L-function in t
    CONTINUATION_DEPTH: int = _env_int("HOFORMS_CONTINUATION_DEPTH", 3)

    # Run defaults
    DEFAULT_TOLERANCE: float = _env_float("HOFORMS_TOLERANCE", 1e-8)
    SEED: int = _env_int("HOFORMS_SEED", 20240607)


class DevelopmentConfig(Config):
    """
    Development environment configuration.

    Prints every status line so long numeric checks show their progress.
    """
    DEBUG: bool = True


class ProductionConfig(Config):
    """
    Production environment configuration.

    Batch runs only want warnings and failures on stderr.
    """
    DEBUG: bool = False
    VERBOSE: bool = False


class TestingConfig(Config):
    """
    Testing environment configuration.

    Keeps the console quiet and the truncations small enough for the unit
    test suite; the seed stays fixed so randomized checks are reproducible.
    """
    TESTING: bool = True
    VERBOSE: bool = os.getenv("HOFORMS_VERBOSE", "0") == "1"
    TRUNCATION_CAP: int = 400
    SEED: int = 12345


# Configuration mapping for easy lookup by environment name
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_settings(config_name: str = 'default') -> type[Config]:
    """
    Get configuration settings for the specified environment.

    Args:
        config_name: The name of the configuration environment ('development',
                    'testing', 'production', or 'default')

    Returns:
        The matching configuration class; unknown names fall back to development
    """
    return config.get(config_name, DevelopmentConfig)
