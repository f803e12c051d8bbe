"""
Data Service for hoforms.

Reads and writes the JSON files the toolkit exchanges: q-expansions of
modular forms, matrix modules and Fourier-Taylor series. Coefficients are
stored as exact rational strings so a save followed by a load is lossless,
and saving uses one canonical formatting so repeated saves are
byte-identical. Two-column CSV tables (n, a_n) are imported with pandas.
"""
import json
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from app.exceptions import HoformsError, InputError, ParseError
from app.services.forms_service import QExpansion
from app.services.ft_series_service import FTSeries, coerce_coefficient
from app.services.invariants_service import FG_INFINITE, MatrixModule
from utils import console
from utils.exact_linalg import ExactScalar, Matrix

PathLike = Union[str, Path]


# ---------------------------
# raw JSON access
# ---------------------------

def read_json(path: PathLike) -> Any:
    """
    Read one JSON document.

    Raises:
        ParseError: If the file is missing, empty or not valid JSON
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise ParseError(f"empty input file: {path}", line=1)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}", line=exc.lineno) from exc
    console.info(f"Read local data: {path}", icon="📂")
    return data


def dump_canonical(data: Any) -> str:
    """Canonical text form: two-space indent, insertion order, trailing newline."""
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def _write_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        os.makedirs(path.parent, exist_ok=True)
    path.write_text(dump_canonical(data), encoding="utf-8")
    console.info(f"Saved {path}", icon="💾")
    return path


def _line_of(path: Optional[PathLike], key: str) -> Optional[int]:
    """First line mentioning the quoted key, used to point parse errors at a location."""
    if path is None:
        return None
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if f'"{key}"' in line:
            return number
    return None


def _require(data: Dict[str, Any], field: str, kind: type, path: Optional[PathLike] = None) -> Any:
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object", line=1)
    if field not in data:
        raise ParseError(f"missing field: {field}", field=field)
    value = data[field]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"field {field} must be an integer", field=field, line=_line_of(path, field))
    if kind is not int and not isinstance(value, kind):
        raise ParseError(f"field {field} must be of type {kind.__name__}", field=field, line=_line_of(path, field))
    return value


def _exact(value: Any, field: str, path: Optional[PathLike] = None) -> Fraction:
    """Exact rational from a JSON string or integer; floats are rejected as inexact."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError(f"{field} is not an exact rational: {value!r}", field=field, line=_line_of(path, field))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{field} is not an exact rational: {value!r}", field=field,
                         line=_line_of(path, field.split('.')[-1])) from exc


def _scalar_text(c: ExactScalar) -> Union[str, List[str]]:
    return str(c.re) if not c.im else c.to_json()


def _scalar(value: Any, field: str, path: Optional[PathLike] = None) -> ExactScalar:
    if isinstance(value, list):
        if len(value) != 2:
            raise ParseError(f"{field} must be a rational string or a [re, im] pair", field=field)
        return ExactScalar(_exact(value[0], field, path), _exact(value[1], field, path))
    return ExactScalar(_exact(value, field, path), 0)


# ---------------------------
# q-expansions
# ---------------------------

def qexp_to_dict(q: QExpansion) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        'label': q.label,
        'weight': q.weight,
        'level': q.level,
        'coeffs': {str(n): str(a) for n, a in sorted(q.coeffs.items())},
    }
    if q.a0:
        data['a0'] = str(q.a0)
    if not q.cusp:
        data['cusp'] = False
    if q.metadata:
        data['metadata'] = q.metadata
    return data


def qexp_from_dict(data: Any, path: Optional[PathLike] = None) -> QExpansion:
    """
    Validate a q-expansion document.

    Raises:
        ParseError: On a missing or mistyped field or a non-rational coefficient
    """
    label = _require(data, 'label', str, path)
    weight = _require(data, 'weight', int, path)
    level = _require(data, 'level', int, path)
    raw = _require(data, 'coeffs', dict, path)
    coeffs: Dict[int, Fraction] = {}
    for key, value in raw.items():
        try:
            n = int(key)
        except ValueError as exc:
            raise ParseError(f"coefficient index {key!r} is not an integer", field=f"coeffs.{key}",
                             line=_line_of(path, key)) from exc
        if n < 1:
            raise ParseError(f"coefficient index {n} must be >= 1", field=f"coeffs.{key}", line=_line_of(path, key))
        coeffs[n] = _exact(value, f"coeffs.{key}", path)
    a0 = _exact(data.get('a0', '0'), 'a0', path)
    cusp = bool(data.get('cusp', not a0))
    metadata = data.get('metadata', {})
    if not isinstance(metadata, dict):
        raise ParseError("field metadata must be an object", field='metadata', line=_line_of(path, 'metadata'))
    try:
        return QExpansion(weight, level, coeffs, a0, label, cusp, dict(metadata))
    except InputError as exc:
        raise ParseError(exc.message, field='coeffs') from exc


def load_qexp(path: PathLike) -> QExpansion:
    """
    Load a q-expansion file.

    Args:
        path: JSON file with label, weight, level and coeffs fields

    Returns:
        The exact QExpansion

    Raises:
        ParseError: If the file is empty, malformed, or violates the schema
    """
    return qexp_from_dict(read_json(path), path)


def save_qexp(q: QExpansion, path: PathLike) -> Path:
    return _write_json(qexp_to_dict(q), path)


def import_csv(path: PathLike, weight: int, level: int = 1, label: Optional[str] = None) -> QExpansion:
    """
    Import a two-column (n, a_n) table; a header row is skipped when its first cell is not an integer.

    Raises:
        ParseError: On a short row, a bad index or a non-rational coefficient
    """
    path = Path(path)
    if not path.exists() or not path.read_text(encoding="utf-8").strip():
        raise ParseError(f"empty input file: {path}", line=1)
    frame = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True, comment='#')
    if frame.shape[1] < 2:
        raise ParseError("CSV needs two columns (n, a_n)", line=1)
    coeffs: Dict[int, Fraction] = {}
    for row_number, (n_text, a_text) in enumerate(frame.iloc[:, :2].itertuples(index=False), start=1):
        if pd.isna(n_text) or pd.isna(a_text):
            raise ParseError("short CSV row", line=row_number)
        try:
            n = int(str(n_text).strip())
        except ValueError as exc:
            if row_number == 1:
                continue
            raise ParseError(f"index {n_text!r} is not an integer", field='n', line=row_number) from exc
        try:
            coeffs[n] = Fraction(str(a_text).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"coefficient {a_text!r} is not an exact rational", field='a_n', line=row_number) from exc
    a0 = coeffs.pop(0, Fraction(0))
    console.info(f"Imported {len(coeffs)} coefficients from {path}", icon="📂")
    try:
        return QExpansion(weight, level, coeffs, a0, label or path.stem, not a0, {'source': f'csv:{path.name}'})
    except HoformsError as exc:
        raise ParseError(exc.message) from exc


# ---------------------------
# matrix modules
# ---------------------------

def module_to_dict(module: MatrixModule) -> Dict[str, Any]:
    return {
        'label': module.label,
        'dim': module.dim,
        'group_kind': module.group_kind,
        'generators': {name: [[_scalar_text(c) for c in row] for row in m]
                       for name, m in module.generators.items()},
    }


def module_from_dict(data: Any, path: Optional[PathLike] = None) -> MatrixModule:
    dim = _require(data, 'dim', int, path)
    raw = _require(data, 'generators', dict, path)
    generators: Dict[str, Matrix] = {}
    for name, rows in raw.items():
        if not isinstance(rows, list) or any(not isinstance(row, list) for row in rows):
            raise ParseError(f"generator {name} must be a list of rows", field=f"generators.{name}",
                             line=_line_of(path, name))
        generators[name] = tuple(tuple(_scalar(c, f"generators.{name}", path) for c in row) for row in rows)
    kind = data.get('group_kind', FG_INFINITE)
    try:
        return MatrixModule(dim, generators, kind, None, data.get('label', 'module'))
    except InputError as exc:
        raise ParseError(exc.message, field='generators') from exc


def load_module(path: PathLike) -> MatrixModule:
    """
    Load a matrix module file.

    Raises:
        ParseError: If the file is malformed or a generator is not square and invertible
    """
    return module_from_dict(read_json(path), path)


def save_module(module: MatrixModule, path: PathLike) -> Path:
    return _write_json(module_to_dict(module), path)


# ---------------------------
# Fourier-Taylor series
# ---------------------------

def ft_from_dict(data: Any, path: Optional[PathLike] = None) -> FTSeries:
    order = _require(data, 'q', int, path)
    n_min = _require(data, 'n_min', int, path)
    n_max = _require(data, 'n_max', int, path)
    raw = _require(data, 'coeffs', dict, path)
    entries = {}
    for key, row in raw.items():
        if not isinstance(row, list):
            raise ParseError(f"coefficient row {key} must be a list", field=f"coeffs.{key}", line=_line_of(path, key))
        for j, value in enumerate(row):
            try:
                entries[(int(key), j)] = coerce_coefficient(value)
            except (InputError, ValueError) as exc:
                raise ParseError(f"coefficient ({key}, {j}) is not exact: {value!r}", field=f"coeffs.{key}",
                                 line=_line_of(path, key)) from exc
    try:
        return FTSeries.build(order, n_min, n_max, entries, data.get('weight'), data.get('label', ''))
    except InputError as exc:
        raise ParseError(exc.message, field='coeffs') from exc


def load_ft(path: PathLike) -> FTSeries:
    return ft_from_dict(read_json(path), path)


def save_ft(f: FTSeries, path: PathLike) -> Path:
    return _write_json(f.to_dict(), path)
