"""
Tests for CSV and JSON serialization.
"""

import json
import math
import os
import shutil
import sys
import tempfile
import unittest

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from revival_gravimetry.errors import OutputError
from revival_gravimetry.output import format_number, json_number, render_csv, render_json, write_text


class TestFormatting(unittest.TestCase):
    """Number formatting."""

    def test_float_uses_nine_significant_digits(self):
        """Floats are written as %.8e."""
        self.assertEqual(format_number(6.2481234567e10), '6.24812346e+10')

    def test_integers_and_flags(self):
        """Integers stay integers; booleans are lower-case words."""
        self.assertEqual(format_number(52), '52')
        self.assertEqual(format_number(True), 'true')
        self.assertEqual(format_number(False), 'false')

    def test_infinity(self):
        """An unreachable sensitivity is written as inf."""
        self.assertEqual(format_number(math.inf), 'inf')

    def test_json_rounding(self):
        """JSON numbers are rounded to the same digits; non-finite becomes null."""
        self.assertEqual(json_number(1.0 / 3.0), 0.333333333)
        self.assertIsNone(json_number(math.inf))
        self.assertEqual(json_number(7), 7)


class TestRendering(unittest.TestCase):
    """Tables and documents."""

    def setUp(self):
        """Set up the test environment."""
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        """Clean up the test environment."""
        shutil.rmtree(self.test_dir)

    def test_csv_layout(self):
        """Header first, LF line endings, columns in the given order."""
        text = render_csv(('name', 'value'), [{'value': 1.5, 'name': 'a'}])
        self.assertEqual(text, 'name,value\na,1.50000000e+00\n')

    def test_json_layout(self):
        """Indented, insertion-ordered, newline-terminated, inf as null."""
        text = render_json({'b': 1.0, 'a': math.inf})
        self.assertTrue(text.endswith('}\n'))
        self.assertEqual(list(json.loads(text)), ['b', 'a'])
        self.assertIsNone(json.loads(text)['a'])

    def test_write_creates_directories(self):
        """Missing parent directories are created."""
        path = os.path.join(self.test_dir, 'nested', 'out.csv')
        write_text('x\n', path)
        with open(path) as f:
            self.assertEqual(f.read(), 'x\n')

    def test_write_failure_carries_path(self):
        """An unwritable destination raises OutputError with the path."""
        with self.assertRaises(OutputError) as context:
            write_text('x\n', self.test_dir)
        self.assertEqual(context.exception.path, self.test_dir)


if __name__ == '__main__':
    unittest.main()
