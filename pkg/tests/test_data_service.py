"""
Tests for reading and writing q-expansions, matrix modules and
Fourier-Taylor series.
"""
import json
import random
import tempfile
import unittest
import sys
from fractions import Fraction
from pathlib import Path

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))

from app.exceptions import ParseError
from app.services.data_service import (
    import_csv, load_ft, load_module, load_qexp, qexp_from_dict, read_json, save_ft, save_qexp,
)
from app.services.forms_service import delta_qexp
from app.services.ft_series_service import random_series
from app.services.invariants_service import invariant_filtration
from config.settings import get_settings
from utils.exact_linalg import ExactScalar


class TestQExpansionFiles(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_save_load_save_is_byte_identical(self):
        first = save_qexp(delta_qexp(15), self.dir / "delta.json")
        loaded = load_qexp(first)
        second = save_qexp(loaded, self.dir / "again.json")
        self.assertEqual(loaded, delta_qexp(15))
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_shipped_delta_file(self):
        form = load_qexp(project_root / 'data' / 'forms' / 'delta.json')
        self.assertEqual(form.weight, 12)
        self.assertEqual(form.coefficient(2), -24)

    def test_missing_weight_names_the_field(self):
        with self.assertRaises(ParseError) as ctx:
            qexp_from_dict({'label': 'x', 'level': 1, 'coeffs': {'1': '1'}})
        self.assertEqual(ctx.exception.field, 'weight')

    def test_rational_strings_are_exact(self):
        form = qexp_from_dict({'label': 'x', 'weight': 2, 'level': 1, 'coeffs': {'1': '1/3', '2': 5}})
        self.assertEqual(form.coefficient(1), Fraction(1, 3))
        self.assertEqual(form.coefficient(2), 5)

    def test_floats_are_rejected(self):
        with self.assertRaises(ParseError):
            qexp_from_dict({'label': 'x', 'weight': 2, 'level': 1, 'coeffs': {'1': 0.5}})

    def test_empty_file_reports_line_one(self):
        path = self.dir / "empty.json"
        path.write_text("")
        with self.assertRaises(ParseError) as ctx:
            read_json(path)
        self.assertEqual(ctx.exception.line, 1)

    def test_invalid_json_reports_line(self):
        path = self.dir / "broken.json"
        path.write_text('{\n  "label": "x",\n  "weight": \n}\n')
        with self.assertRaises(ParseError) as ctx:
            load_qexp(path)
        self.assertEqual(ctx.exception.line, 4)

    def test_missing_file(self):
        with self.assertRaises(ParseError):
            read_json(self.dir / "absent.json")


class TestCsvImport(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_header_and_constant_term(self):
        path = self.dir / "e4.csv"
        path.write_text("n,a_n\n0,1\n1,240\n2,2160\n")
        form = import_csv(path, 4)
        self.assertEqual(form.a0, 1)
        self.assertFalse(form.cusp)
        self.assertEqual(form.coefficient(2), 2160)
        self.assertEqual(form.label, "e4")

    def test_bad_coefficient_reports_row(self):
        path = self.dir / "bad.csv"
        path.write_text("1,1\n2,abc\n")
        with self.assertRaises(ParseError) as ctx:
            import_csv(path, 12)
        self.assertEqual(ctx.exception.line, 2)

    def test_empty_csv(self):
        path = self.dir / "empty.csv"
        path.write_text("\n")
        with self.assertRaises(ParseError):
            import_csv(path, 12)


class TestModulesAndSeries(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_shipped_jordan_module(self):
        module = load_module(project_root / 'data' / 'modules' / 'jordan3.json')
        chain = invariant_filtration(module, 2, get_settings('testing'))
        self.assertEqual([h.dimension for h in chain], [1, 2, 3])

    def test_module_needs_square_generators(self):
        path = self.dir / "bad_module.json"
        path.write_text(json.dumps({'dim': 2, 'generators': {'a': [["1", "0"]]}}))
        with self.assertRaises(ParseError):
            load_module(path)

    def test_series_round_trip(self):
        f = random_series(random.Random(11), 2, 1, 3)
        loaded = load_ft(save_ft(f, self.dir / "series.json"))
        self.assertEqual(loaded.coeffs, f.coeffs)
        self.assertEqual(loaded.order, 2)

    def test_complex_series_coefficients(self):
        path = self.dir / "gaussian.json"
        path.write_text(json.dumps({'q': 0, 'n_min': 1, 'n_max': 1, 'coeffs': {'1': [["1/2", "-1"]]}}))
        self.assertEqual(load_ft(path).coefficient(1, 0), ExactScalar(Fraction(1, 2), -1))


if __name__ == '__main__':
    unittest.main()
