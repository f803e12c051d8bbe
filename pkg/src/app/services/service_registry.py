"""
Service Registry for hoforms.

This module implements a singleton registry that gives the command handlers
and the tests one shared place for the active settings and for forms that
were already loaded or generated. Loading Delta to a few hundred
coefficients and reading the same q-expansion file for f and g would
otherwise be repeated by every check within a run.
"""
from pathlib import Path
from typing import Callable, Dict, Optional, Union

from app.services.data_service import load_qexp
from app.services.forms_service import QExpansion, delta_qexp, eisenstein_qexp, level11_qexp
from config.mpmath_config import MpmathConfig
from config.settings import Config
from utils import console


class ServiceRegistry:
    """
    Singleton registry for the active configuration and cached forms.

    The registry is configured once by the application factory; services
    keep receiving their settings explicitly, the registry only remembers
    which settings the current run uses.
    """

    _instance: Optional['ServiceRegistry'] = None

    def __new__(cls) -> 'ServiceRegistry':
        """
        Create or return the singleton instance.

        Returns:
            The singleton ServiceRegistry instance
        """
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self) -> None:
        if self._initialized:
            return
        self._settings: type[Config] = Config
        self._forms: Dict[str, QExpansion] = {}
        self._initialized = True

    def configure(self, settings: type[Config]) -> None:
        """
        Register the settings of the current run and apply the mpmath precision.

        Args:
            settings: Configuration class selected by the application factory
        """
        self._settings = settings
        MpmathConfig.init_app(settings)
        console.set_verbose(settings.VERBOSE)

    @property
    def settings(self) -> type[Config]:
        return self._settings

    def load_form(self, path: Union[str, Path]) -> QExpansion:
        """Load a q-expansion file once per run."""
        key = str(Path(path).resolve())
        if key not in self._forms:
            self._forms[key] = load_qexp(path)
        return self._forms[key]

    def builtin_form(self, name: str, n_max: int, weight: int = 4) -> QExpansion:
        """
        A generated form, cached by name and length.

        Args:
            name: "delta", "eisenstein" or "level11"
            n_max: Number of coefficients
            weight: Weight of the Eisenstein series

        Raises:
            KeyError: If the name is unknown
        """
        generators: Dict[str, Callable[[], QExpansion]] = {
            'delta': lambda: delta_qexp(n_max),
            'eisenstein': lambda: eisenstein_qexp(weight, n_max),
            'level11': lambda: level11_qexp(n_max),
        }
        key = f"{name}:{n_max}:{weight if name == 'eisenstein' else ''}"
        if key not in self._forms:
            self._forms[key] = generators[name]()
            console.info(f"Generated {name} up to n = {n_max}", icon="🧮")
        return self._forms[key]

    def clear(self) -> None:
        self._forms.clear()


# Global registry instance used by the command handlers
registry = ServiceRegistry()
