"""
Run configuration for the hoforms command line.

A run is described by the subcommand, its verb, the command-specific
options and the shared reporting settings. Values are merged with the
precedence command-line flags > YAML config file > settings defaults, so a
config file can pin a reproducible run while single flags still override it.
"""
from argparse import Namespace
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from app.exceptions import InputError, ParseError
from config.settings import Config

SHARED_KEYS = ('tolerance', 'seed', 'output', 'report', 'golden', 'timing', 'quiet')
OUTPUT_FORMATS = ('json', 'table')


@dataclass
class RunConfig:
    """
    Everything one command needs to run and report.

    Attributes:
        command: Subcommand name (invariants, hecke, ft, lfun, conv, forms)
        verb: Action within the subcommand
        options: Command-specific options (paths, weights, grids, ...)
        tolerance: Residual tolerance, strictly positive
        seed: Seed for randomized checks, echoed in the report
        output: "json" or "table"
        report: Optional file the JSON report is written to
        golden: Optional golden report to compare against
        timing: Add the wall time to the report
        quiet: Silence info lines on stderr
    """
    command: str
    verb: str
    options: Dict[str, Any] = field(default_factory=dict)
    tolerance: float = Config.DEFAULT_TOLERANCE
    seed: int = Config.SEED
    output: str = "json"
    report: Optional[str] = None
    golden: Optional[str] = None
    timing: bool = False
    quiet: bool = False

    def __post_init__(self) -> None:
        if not self.tolerance > 0:
            raise InputError("tolerance must be positive", {'tolerance': self.tolerance})
        if self.output not in OUTPUT_FORMATS:
            raise InputError(f"output must be one of {', '.join(OUTPUT_FORMATS)}", {'output': self.output})

    def option(self, name: str, default: Any = None) -> Any:
        value = self.options.get(name)
        return default if value is None else value

    def inputs(self) -> Dict[str, Any]:
        """Echo of the inputs for the report (paths as given, options without None)."""
        echo = {key: value for key, value in sorted(self.options.items()) if value is not None}
        echo['tolerance'] = self.tolerance
        return echo


def load_yaml_config(path: Optional[str]) -> Dict[str, Any]:
    """
    Read a YAML run file.

    Raises:
        ParseError: If the file is missing, empty or not a mapping
    """
    if not path:
        return {}
    file = Path(path)
    if not file.exists():
        raise ParseError(f"config file not found: {file}")
    try:
        data = yaml.safe_load(file.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        mark = getattr(exc, 'problem_mark', None)
        raise ParseError(f"invalid YAML in {file}", line=mark.line + 1 if mark else None) from exc
    if data is None:
        raise ParseError(f"empty config file: {file}", line=1)
    if not isinstance(data, dict):
        raise ParseError("config file must contain a mapping", line=1)
    return data


def build_run_config(args: Namespace, settings: type[Config] = Config) -> RunConfig:
    """
    Merge flags, the YAML file named by --config, and settings defaults.

    The YAML file holds the shared keys at top level and command options
    under a key named after the command, e.g. ``lfun: {weight: 12}``.
    """
    parsed = vars(args)
    data = load_yaml_config(parsed.get('config'))
    command = parsed['command']
    file_options = data.get(command, {}) or {}
    if not isinstance(file_options, dict):
        raise ParseError(f"config section {command} must be a mapping", field=command)

    defaults = {
        'tolerance': settings.DEFAULT_TOLERANCE,
        'seed': settings.SEED,
        'output': 'json',
        'report': None,
        'golden': None,
        'timing': False,
        'quiet': not settings.VERBOSE,
    }
    shared = {}
    for key in SHARED_KEYS:
        flag = parsed.get(key)
        if flag is not None and flag is not False:
            shared[key] = flag
        elif key in data:
            shared[key] = data[key]
        else:
            shared[key] = defaults[key]

    skip = set(SHARED_KEYS) | {'command', 'verb', 'config', 'handler'}
    options = {key: value for key, value in file_options.items() if key != 'verb'}
    for key, value in parsed.items():
        if key not in skip and value is not None:
            options[key] = value
    verb = parsed.get('verb') or file_options.get('verb')
    if not verb:
        raise InputError(f"{command} needs a verb")
    return RunConfig(command=command, verb=verb, options=options,
                     tolerance=float(shared['tolerance']), seed=int(shared['seed']), output=str(shared['output']),
                     report=shared['report'], golden=shared['golden'], timing=bool(shared['timing']),
                     quiet=bool(shared['quiet']))
