"""
Tests for borel_claims.data.
"""

import numpy as np
from absl.testing import absltest, parameterized

from borel_claims import data
from borel_claims.errors import DomainError, SeverityFormatError


class ParseTest(parameterized.TestCase):
    def test_comments_and_blank_lines(self):
        lines = ["# claim sizes", "", "1 0.25  # small", "  3 0.75", ""]
        self.assertEqual(data.parse_severity_lines(lines), {1: 0.25, 3: 0.75})

    @parameterized.named_parameters(
        ("fields", ["1 0.5", "2"], 2),
        ("size", ["1 0.5", "two 0.5"], 2),
        ("probability", ["# header", "1 half", "2 0.5"], 2),
        ("zero_size", ["0 0.5", "1 0.5"], 1),
        ("negative", ["1 1.5", "2 -0.5"], 2),
        ("not_finite", ["1 nan"], 1),
        ("duplicate", ["1 0.25", "2 0.5", "1 0.25"], 3),
    )
    def test_errors_carry_line_numbers(self, lines, line_number):
        with self.assertRaises(SeverityFormatError) as context:
            data.parse_severity_lines(lines, "claims.txt")
        self.assertEqual(context.exception.line_number, line_number)
        self.assertEqual(context.exception.path, "claims.txt")
        self.assertIn("claims.txt:{}:".format(line_number), str(context.exception))

    def test_unnormalized(self):
        with self.assertRaises(DomainError):
            data.parse_severity_lines(["1 0.5", "2 0.25"])

    def test_empty(self):
        with self.assertRaises(DomainError):
            data.parse_severity_lines(["# nothing here", ""])


class LoadTest(absltest.TestCase):
    def test_load_file(self):
        path = self.create_tempfile(content="1 0.5\n2 0.5\n").full_path
        severity = data.load_severity(path)
        np.testing.assert_array_equal(severity.f, [0.0, 0.5, 0.5])
        self.assertEqual(severity.mean(), 1.5)

    def test_unit_default(self):
        severity = data.load_severity()
        np.testing.assert_array_equal(severity.f, [0.0, 1.0])

    def test_rejects_unnormalized_file(self):
        path = self.create_tempfile(content="1 0.6\n2 0.6\n").full_path
        with self.assertRaises(DomainError):
            data.load_severity(path)


if __name__ == "__main__":
    absltest.main()
