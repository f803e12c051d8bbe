"""
mpmath-specific configuration.

The L-function and convolution services evaluate incomplete gamma sums and
adaptive quadratures with mpmath. This module transfers our settings into
mpmath's global context once per process, the way the application factory
expects every backend to be initialised before commands run.
"""
from typing import Any

import mpmath


class MpmathConfig:
    """
    Configuration manager for the mpmath backend.
    """

    @staticmethod
    def init_app(settings: Any) -> Any:
        """
        Initialize mpmath with the working precision of the given settings.

        Args:
            settings: Configuration class containing MP_DPS

        Returns:
            The mpmath context after configuration
        """
        # Decimal digits used by every mpf/mpc created afterwards
        mpmath.mp.dps = int(settings.MP_DPS)
        return mpmath.mp
