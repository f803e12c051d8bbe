"""
Tests for report building, validation, golden comparison and table rendering.
"""
import json
import tempfile
import unittest
import sys
from fractions import Fraction
from pathlib import Path

import mpmath

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))

from app.exceptions import InputError, NumericError
from app.services.report_service import (
    Report, compare_golden, jsonable, render_json, render_table, report_table, validate_report, write_report,
)
from utils.exact_linalg import ExactScalar


def sample_report() -> Report:
    report = Report('lfun', 'check-fe', 7, 1e-9, {'weight': 12})
    report.value('lambda', mpmath.mpc(1.5, -0.25))
    report.value('count', 3)
    return report


class TestReportStatus(unittest.TestCase):

    def test_status_follows_residuals(self):
        report = sample_report()
        self.assertTrue(report.residual('small', 1e-12))
        self.assertEqual(report.status, 'ok')
        self.assertFalse(report.residual('large', 1e-3))
        self.assertEqual(report.status, 'fail')
        report.error(NumericError("did not converge"))
        self.assertEqual(report.status, 'error')

    def test_boolean_checks(self):
        report = sample_report()
        report.check('holds', True)
        self.assertEqual(report.residuals['holds'], 0.0)
        report.check('broken', False)
        self.assertEqual(report.failures, ['broken'])

    def test_residual_uses_own_tolerance(self):
        report = sample_report()
        self.assertTrue(report.residual('loose', 1e-5, 1e-4))

    def test_exact_values_are_serialized(self):
        self.assertEqual(jsonable(Fraction(1, 3)), '1/3')
        self.assertEqual(jsonable(Fraction(4, 2)), 2)
        self.assertEqual(jsonable(ExactScalar(1, -2)), ['1', '-2'])
        self.assertEqual(jsonable(mpmath.mpf('inf')), 'inf')


class TestValidation(unittest.TestCase):

    def test_rendered_report_has_required_keys(self):
        data = json.loads(render_json(sample_report()))
        for key in ('command', 'verb', 'status', 'seed', 'inputs', 'values', 'residuals', 'tail_bounds',
                    'metadata'):
            self.assertIn(key, data)
        self.assertEqual(data['values']['lambda'], [1.5, -0.25])

    def test_missing_key_is_rejected(self):
        data = sample_report().to_dict()
        del data['residuals']
        with self.assertRaises(InputError):
            validate_report(data)

    def test_unknown_status_is_rejected(self):
        data = sample_report().to_dict()
        data['status'] = 'maybe'
        with self.assertRaises(InputError):
            validate_report(data)


class TestGoldenAndTable(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_report_matches_its_own_file(self):
        path = write_report(sample_report(), self.dir / "report.json")
        self.assertEqual(compare_golden(sample_report(), path), [])

    def test_drift_is_located(self):
        path = write_report(sample_report(), self.dir / "report.json")
        drifted = Report('lfun', 'check-fe', 7, 1e-9, {'weight': 12})
        drifted.value('lambda', mpmath.mpc(1.5, -0.26))
        drifted.value('count', 4)
        self.assertEqual(compare_golden(drifted, path), ['values.lambda[1]', 'values.count'])

    def test_table_rows(self):
        report = sample_report()
        report.residual('fe', 1e-12)
        report.tail('fe', 1e-20)
        frame = report_table(report)
        self.assertEqual(list(frame.columns), ['section', 'name', 'value'])
        self.assertEqual(len(frame), 4)
        self.assertEqual(set(frame['section']), {'values', 'residuals', 'tail_bounds'})
        self.assertTrue(render_table(report).startswith("lfun check-fe: ok (seed 7)"))


if __name__ == '__main__':
    unittest.main()
