"""
Report Service for hoforms.

Every command produces one JSON report with a fixed set of keys. This
service builds reports, converts numeric values (mpmath, Fraction, Q(i)
scalars, numpy) to plain JSON, validates the report layout before it is
written, compares a report against a stored golden fixture and renders the
values as a pandas table for terminal output.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import mpmath
import numpy as np
import pandas as pd

from app.exceptions import HoformsError, InputError
from app.services.data_service import read_json, dump_canonical
from utils import console
from utils.exact_linalg import ExactScalar

REQUIRED_KEYS = ('command', 'verb', 'status', 'seed', 'inputs', 'values', 'residuals', 'tail_bounds', 'metadata')
STATUSES = ('ok', 'fail', 'error')
_MAPPING_KEYS = ('inputs', 'values', 'residuals', 'tail_bounds', 'metadata')


def jsonable(value: Any) -> Any:
    """Recursively convert a computed value into plain JSON data."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else int(value)
    if isinstance(value, ExactScalar):
        return jsonable(value.re) if not value.im else value.to_json()
    if isinstance(value, (float, np.floating, mpmath.mpf)):
        x = float(value)
        return x if math.isfinite(x) else str(x)
    if isinstance(value, (complex, np.complexfloating, mpmath.mpc)):
        z = complex(value)
        return [jsonable(z.real), jsonable(z.imag)]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if hasattr(value, 'to_dict'):
        return jsonable(value.to_dict())
    return str(value)


@dataclass
class Report:
    """
    Accumulates the outcome of one command.

    A residual is recorded with the tolerance it is judged against; the
    report status is "ok" only while every residual is within its tolerance.
    """
    command: str
    verb: str
    seed: int
    tolerance: float
    inputs: Dict[str, Any] = field(default_factory=dict)
    values: Dict[str, Any] = field(default_factory=dict)
    residuals: Dict[str, Any] = field(default_factory=dict)
    tail_bounds: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)
    errors: List[Dict[str, Any]] = field(default_factory=list)
    wall_time: Optional[float] = None

    def value(self, name: str, value: Any) -> None:
        self.values[name] = jsonable(value)

    def residual(self, name: str, value: Any, tolerance: Optional[float] = None) -> bool:
        tolerance = self.tolerance if tolerance is None else tolerance
        x = float(abs(value)) if not isinstance(value, bool) else float(not value)
        self.residuals[name] = jsonable(x)
        ok = x <= tolerance
        if not ok:
            self.failures.append(name)
            console.error(f"{self.command} {self.verb}: residual {name} = {x:.3e} exceeds {tolerance:.1e}")
        return ok

    def check(self, name: str, passed: bool) -> bool:
        """Boolean property: recorded as residual 0 when it holds and 1 when it does not."""
        return self.residual(name, 0.0 if passed else 1.0, 0.5)

    def tail(self, name: str, bound: Any) -> None:
        self.tail_bounds[name] = jsonable(bound)

    def error(self, exc: HoformsError) -> None:
        self.errors.append(exc.to_dict())

    @property
    def status(self) -> str:
        if self.errors:
            return 'error'
        return 'fail' if self.failures else 'ok'

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'command': self.command,
            'verb': self.verb,
            'status': self.status,
            'seed': self.seed,
            'inputs': jsonable(self.inputs),
            'values': self.values,
            'residuals': self.residuals,
            'tail_bounds': self.tail_bounds,
            'metadata': jsonable(self.metadata),
        }
        if self.errors:
            data['errors'] = jsonable(self.errors)
        if self.wall_time is not None:
            data['wall_time'] = round(self.wall_time, 6)
        return data


def validate_report(data: Dict[str, Any]) -> None:
    """
    Check the report layout.

    Raises:
        InputError: If a required key is missing or has the wrong type
    """
    missing = [key for key in REQUIRED_KEYS if key not in data]
    if missing:
        raise InputError(f"report is missing keys: {', '.join(missing)}", {'missing': missing})
    if data['status'] not in STATUSES:
        raise InputError(f"unknown report status {data['status']!r}")
    if not isinstance(data['seed'], int):
        raise InputError("report seed must be an integer")
    for key in _MAPPING_KEYS:
        if not isinstance(data[key], dict):
            raise InputError(f"report field {key} must be an object")
    for name, value in data['residuals'].items():
        if not isinstance(value, (int, float)) and value not in ('inf', 'nan'):
            raise InputError(f"residual {name} must be a number", {'value': value})


def render_json(report: Report) -> str:
    data = report.to_dict()
    validate_report(data)
    return dump_canonical(data)


def write_report(report: Report, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_json(report), encoding="utf-8")
    console.info(f"Saved report {path}", icon="💾")
    return path


def _flatten(prefix: str, value: Any, rows: List[Dict[str, Any]], section: str) -> None:
    if isinstance(value, dict):
        for key, inner in value.items():
            _flatten(f"{prefix}.{key}" if prefix else str(key), inner, rows, section)
    else:
        rows.append({'section': section, 'name': prefix, 'value': value})


def report_table(report: Report) -> pd.DataFrame:
    """One row per value, residual and tail bound."""
    data = report.to_dict()
    rows: List[Dict[str, Any]] = []
    for section in ('values', 'residuals', 'tail_bounds'):
        _flatten('', data[section], rows, section)
    return pd.DataFrame(rows, columns=['section', 'name', 'value'])


def render_table(report: Report) -> str:
    validate_report(report.to_dict())
    frame = report_table(report)
    header = f"{report.command} {report.verb}: {report.status} (seed {report.seed})"
    if frame.empty:
        return header + "\n"
    return header + "\n" + frame.to_string(index=False) + "\n"


def _drift(expected: Any, actual: Any, tolerance: float, path: str, out: List[str]) -> None:
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            out.append(path)
            return
        for key, inner in expected.items():
            _drift(inner, actual.get(key), tolerance, f"{path}.{key}", out)
        return
    if isinstance(expected, list):
        if not isinstance(actual, list) or len(actual) != len(expected):
            out.append(path)
            return
        for i, (a, b) in enumerate(zip(expected, actual)):
            _drift(a, b, tolerance, f"{path}[{i}]", out)
        return
    if isinstance(expected, float) or isinstance(actual, float):
        if not isinstance(actual, (int, float)) or isinstance(actual, bool):
            out.append(path)
        elif abs(expected - actual) > tolerance * max(1.0, abs(expected)):
            out.append(path)
        return
    if expected != actual:
        out.append(path)


def compare_golden(report: Report, golden_path: Union[str, Path], tolerance: Optional[float] = None) -> List[str]:
    """
    Compare status and values against a stored fixture.

    Integers and strings must match exactly, floats within the relative
    tolerance; inputs, residuals and metadata are not compared.

    Returns:
        Paths of the drifting entries (empty when the report matches)
    """
    golden = read_json(golden_path)
    if not isinstance(golden, dict) or 'values' not in golden:
        raise InputError(f"golden file {golden_path} has no values section")
    tolerance = report.tolerance if tolerance is None else tolerance
    data = report.to_dict()
    drift: List[str] = []
    if golden.get('status', data['status']) != data['status']:
        drift.append('status')
    _drift(golden['values'], data['values'], tolerance, 'values', drift)
    if drift:
        console.error(f"golden drift against {golden_path}: {', '.join(drift)}")
    else:
        console.success(f"report matches golden file {golden_path}")
    return drift
