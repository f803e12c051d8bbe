"""
Basic tests for the hoforms application structure
"""
import unittest
import sys
from pathlib import Path

# Add src to path for testing
project_root = Path(__file__).parent.parent
src_path = project_root / 'src'
sys.path.insert(0, str(src_path))


class TestApplicationStructure(unittest.TestCase):
    """Test that the application structure is correct"""

    def test_can_import_app_factory(self):
        """Test that we can import the app factory"""
        try:
            from app.app_factory import create_app
            self.assertTrue(callable(create_app))
        except ImportError as e:
            self.fail(f"Failed to import create_app: {e}")

    def test_can_import_config(self):
        """Test that we can import configuration"""
        try:
            from config.settings import get_settings
            settings = get_settings('testing')
            self.assertIsNotNone(settings)
            self.assertTrue(settings.TESTING)
        except ImportError as e:
            self.fail(f"Failed to import config: {e}")

    def test_unknown_environment_falls_back_to_development(self):
        from config.settings import DevelopmentConfig, get_settings
        self.assertIs(get_settings('no-such-env'), DevelopmentConfig)

    def test_app_has_all_subcommands(self):
        """create_app builds a parser with the six subcommands"""
        from app.app_factory import create_app
        app = create_app('testing')
        self.assertEqual(set(app.subcommands), {'invariants', 'hecke', 'ft', 'lfun', 'conv', 'forms'})

    def test_register_commands_returns_subcommand_names(self):
        """register_commands reports the names it added, in registration order"""
        import argparse
        from app.cli.commands import register_commands
        parser = argparse.ArgumentParser(prog="hoforms")
        names = register_commands(parser)
        self.assertEqual(names, ('invariants', 'hecke', 'ft', 'lfun', 'conv', 'forms'))

    def test_required_directories_exist(self):
        """Test that required directories exist"""
        required_dirs = [
            'src/app',
            'src/app/cli',
            'src/app/groups',
            'src/app/services',
            'src/config',
            'src/utils',
            'data/forms',
            'data/golden',
            'docs',
            'tests'
        ]

        for dir_path in required_dirs:
            full_path = project_root / dir_path
            self.assertTrue(full_path.exists(), f"Required directory {dir_path} does not exist")


if __name__ == '__main__':
    unittest.main()
