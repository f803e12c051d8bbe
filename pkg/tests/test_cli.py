"""
Tests for the command line: argument merging, exit statuses and golden
report comparison.
"""
import io
import json
import tempfile
import unittest
import sys
from pathlib import Path

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))

from app.app_factory import create_app
from app.cli.commands import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, dispatch
from app.cli.run_config import build_run_config


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.app = create_app('testing')
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_cli(self, argv):
        stream = io.StringIO()
        args = self.app.parser.parse_args(argv)
        status = dispatch(args, self.app.settings, stream)
        return status, stream.getvalue()


class TestExitStatus(CliTestCase):

    def test_nonunimodular_matches_golden(self):
        golden = project_root / 'data' / 'golden' / 'hecke_nonunimodular_p3.json'
        status, text = self.run_cli(['hecke', '--check', 'nonunimodular', '--p', '3', '--golden', str(golden),
                                     '--seed', '20240607'])
        self.assertEqual(status, EXIT_OK)
        report = json.loads(text)
        self.assertEqual(report['values'], {'left_count': 3, 'right_count': 1})

    def test_golden_drift_fails(self):
        golden = project_root / 'data' / 'golden' / 'hecke_nonunimodular_p3.json'
        status, _ = self.run_cli(['hecke', '--check', 'nonunimodular', '--p', '2', '--golden', str(golden)])
        self.assertEqual(status, EXIT_FAILURE)

    def test_empty_input_file_is_an_error(self):
        empty = self.dir / "empty.json"
        empty.write_text("")
        status, text = self.run_cli(['forms', 'check-bound', '--f', str(empty)])
        self.assertEqual(status, EXIT_FAILURE)
        report = json.loads(text)
        self.assertEqual(report['status'], 'error')
        self.assertEqual(report['errors'][0]['kind'], 'parse')
        self.assertEqual(report['errors'][0]['diagnostics']['line'], 1)

    def test_missing_verb_is_usage_error(self):
        status, _ = self.run_cli(['lfun'])
        self.assertEqual(status, EXIT_USAGE)

    def test_unknown_verb_from_config_is_usage_error(self):
        config = self.dir / "run.yaml"
        config.write_text("forms:\n  verb: levitate\n")
        status, _ = self.run_cli(['forms', '--config', str(config)])
        self.assertEqual(status, EXIT_USAGE)

    def test_unknown_verb_on_command_line(self):
        self.assertEqual(self.app.run(['forms', 'levitate']), EXIT_USAGE)


class TestCommands(CliTestCase):

    def test_generate_delta(self):
        out = self.dir / "delta.json"
        status, text = self.run_cli(['forms', 'generate', '--form', 'delta', '--n-max', '12', '--out', str(out)])
        self.assertEqual(status, EXIT_OK)
        report = json.loads(text)
        self.assertEqual(report['values']['coefficients']['2'], -24)
        self.assertEqual(report['residuals']['eta_cross_check'], 0.0)
        self.assertTrue(out.exists())

    def test_unimodular_counts(self):
        status, text = self.run_cli(['hecke', '--check', 'unimodular', '--p', '5'])
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(json.loads(text)['values']['left_count'], 6)

    def test_hecke_norm_defaults_to_nonzero_quotient(self):
        for check in ('norm', 'adjoint'):
            with self.subTest(check=check):
                status, text = self.run_cli(['hecke', '--check', check, '--seed', '7'])
                self.assertEqual(status, EXIT_OK)
                report = json.loads(text)
                self.assertGreater(report['values']['quotient_dim'], 0)

    def test_hecke_norm_on_zero_quotient_fails(self):
        status, text = self.run_cli(['hecke', '--check', 'norm', '--q', '1', '--seed', '7'])
        self.assertEqual(status, EXIT_FAILURE)
        self.assertEqual(json.loads(text)['values']['quotient_dim'], 0)

    def test_group_elements_are_parsed_by_their_universe(self):
        status, text = self.run_cli(['hecke', '--check', 'welldef', '--g', '1,0,2,3', '--trials', '10'])
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(json.loads(text)['inputs']['g'], [1, 0, 2, 3])
        for argv in (['hecke', '--check', 'welldef', '--g', '0,0,1,2'],
                     ['hecke', '--check', 'welldef', '--g', '1,a,2,3'],
                     ['hecke', '--check', 'unimodular', '--g', '1,2,2,4'],
                     ['hecke', '--check', 'nonunimodular', '--g', '1,2,3']):
            with self.subTest(argv=argv):
                status, _ = self.run_cli(argv)
                self.assertEqual(status, EXIT_USAGE)

    def test_jordan_filtration(self):
        status, _ = self.run_cli(['invariants', 'stabilize', '--example', 'jordan3', '--q', '3'])
        self.assertEqual(status, EXIT_OK)

    def test_perfectness_of_example_groups(self):
        for example, order, perfect in (('a5-permutation', 60, True), ('s4-permutation', 24, False)):
            with self.subTest(example=example):
                status, text = self.run_cli(['invariants', 'perfect', '--example', example])
                self.assertEqual(status, EXIT_OK)
                report = json.loads(text)
                self.assertEqual(report['metadata']['module']['group_order'], order)
                self.assertEqual(report['values']['perfect'], perfect)

    def test_table_output(self):
        status, text = self.run_cli(['hecke', '--check', 'nonunimodular', '--p', '2', '--output', 'table'])
        self.assertEqual(status, EXIT_OK)
        self.assertTrue(text.startswith("hecke nonunimodular: ok"))

    def test_report_file_is_written(self):
        path = self.dir / "out" / "report.json"
        status, _ = self.run_cli(['hecke', '--check', 'nonunimodular', '--p', '2', '--report', str(path)])
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(json.loads(path.read_text())['verb'], 'nonunimodular')


class TestRunConfig(CliTestCase):

    def write_config(self):
        config = self.dir / "run.yaml"
        config.write_text("tolerance: 1.0e-3\nseed: 99\nforms:\n  verb: generate\n  n_max: 8\n")
        return config

    def test_config_file_supplies_defaults(self):
        args = self.app.parser.parse_args(['forms', '--config', str(self.write_config())])
        cfg = build_run_config(args, self.app.settings)
        self.assertEqual(cfg.verb, 'generate')
        self.assertEqual(cfg.tolerance, 1e-3)
        self.assertEqual(cfg.seed, 99)
        self.assertEqual(cfg.option('n_max'), 8)

    def test_flags_override_config_file(self):
        args = self.app.parser.parse_args(['forms', 'generate', '--config', str(self.write_config()),
                                           '--tolerance', '1e-5', '--n-max', '4'])
        cfg = build_run_config(args, self.app.settings)
        self.assertEqual(cfg.tolerance, 1e-5)
        self.assertEqual(cfg.seed, 99)
        self.assertEqual(cfg.option('n_max'), 4)

    def test_settings_fill_the_rest(self):
        args = self.app.parser.parse_args(['forms', 'generate'])
        cfg = build_run_config(args, self.app.settings)
        self.assertEqual(cfg.tolerance, self.app.settings.DEFAULT_TOLERANCE)
        self.assertEqual(cfg.seed, self.app.settings.SEED)
        self.assertEqual(cfg.output, 'json')


if __name__ == '__main__':
    unittest.main()
