"""
Tests for the command-line front-end: parsing, input loading, reports and exit codes.
"""

import io
import json
import math
import os
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np

from catalog.catalog_manager import CatalogManager
from cli import InputLoader, execute, load_settings, main, parse_command, suggest_verb
from errors import UsageError


def run_cli(*argv):
    """Run main() and return (exit code, stdout)."""
    with patch("sys.stdout", new_callable=io.StringIO) as stdout:
        code = main(list(argv))
    return code, stdout.getvalue()


def verdict_rows(output):
    return dict(line.split("\t", 1) for line in output.splitlines())


class TestParseCommand(unittest.TestCase):
    """Tests for argument validation."""

    def test_norms_command(self):
        """Test a sequence norm command."""
        cmd = parse_command(["norms", "--seq", "s.json", "--p", "2"])
        self.assertEqual(cmd.verb, "norms")
        self.assertEqual(cmd.options["seq"], "s.json")
        self.assertEqual([str(p) for p in cmd.options["p"]], ["2"])
        self.assertEqual(cmd.inputs, ["s.json"])

    def test_defaults(self):
        """Test default exponents, format and seed."""
        cmd = parse_command(["gelfand", "--matrix", "m.json", "--nmax", "64"])
        self.assertEqual(cmd.options["nmax"], 64)
        self.assertEqual(cmd.options["format"], "tsv")
        self.assertEqual(cmd.options["seed"], 0)
        norms = parse_command(["norms", "--matrix", "m.json", "--pairs", "1:2,inf:inf"])
        self.assertEqual([(str(a), str(b)) for a, b in norms.options["pairs"]], [("1", "2"), ("inf", "inf")])

    def test_unknown_verb(self):
        """Test that unknown verbs are refused with a suggestion."""
        with self.assertRaises(UsageError) as context:
            parse_command(["norm", "--seq", "s.json"])
        self.assertIn("did you mean 'norms'", str(context.exception))
        with self.assertRaises(UsageError):
            parse_command(["bogus"])
        self.assertIsNone(suggest_verb("xyzzy"))

    def test_bad_arguments(self):
        """Test missing verbs, missing inputs and malformed exponents."""
        for argv in ([], ["norms"], ["norms", "--seq", "a", "--matrix", "b"], ["norms", "--seq", "a", "--p", "0"],
                     ["norms", "--matrix", "a", "--pairs", "12"], ["gelfand", "--matrix", "a", "--nmax", "x"]):
            with self.assertRaises(UsageError, msg=argv):
                parse_command(argv)


class TestInputLoader(unittest.TestCase):
    """Tests for catalog, inline and file inputs."""

    def setUp(self):
        """Set up a loader and a temporary directory."""
        self.loader = InputLoader(CatalogManager())
        self.directory = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.directory)

    def test_three_sources_agree(self):
        """Test that a catalog entry, its inline JSON and a file give the same matrix."""
        data = self.loader.load("catalog:nilpotent-2", "matrix")
        path = self.directory / "m.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        inline = self.loader.matrix(json.dumps(data))
        self.assertEqual(self.loader.matrix(str(path)).tolist(), inline.tolist())
        self.assertEqual(self.loader.matrix("catalog:nilpotent-2").tolist(), [[0.0, 2.0], [0.0, 0.0]])

    def test_malformed_json(self):
        """Test that the parse position is reported."""
        with self.assertRaises(UsageError) as context:
            self.loader.load('{"rows": [[1, 2]')
        self.assertIn("line 1", str(context.exception))

    def test_missing_file(self):
        """Test an input path that does not exist."""
        with self.assertRaises(UsageError):
            self.loader.load(str(self.directory / "missing.json"))

    def test_shorthand_inputs(self):
        """Test dense lists for sequences, Laurent sequences and subspaces."""
        self.assertEqual(list(self.loader.sequence("[3, 4]").indices), [1, 2])
        self.assertEqual(self.loader.laurent("[1, -0.5]").offset, 0)
        self.assertEqual(self.loader.subspace("[[1, 0, 0]]").dimension, 1)
        self.assertEqual(self.loader.scalar("[0, 1]"), 1j)


class TestMain(unittest.TestCase):
    """Tests for complete command runs."""

    def test_norms_of_inline_sequence(self):
        """Test the l^p norms of (3, 4)."""
        code, output = run_cli("norms", "--seq", "[3, 4]")
        self.assertEqual(code, 0)
        self.assertEqual(output, "p\tnorm\n1\t7.00000000000\n2\t5.00000000000\ninf\t4.00000000000\n")

    def test_norms_json_output(self):
        """Test canonical JSON output from a catalog input."""
        code, output = run_cli("norms", "--seq", "catalog:three-four", "--format", "json")
        self.assertEqual(code, 0)
        payload = json.loads(output)
        self.assertEqual(payload["columns"], ["p", "norm"])
        self.assertEqual(payload["rows"], [[1.0, 7.0], [2.0, 5.0], ["inf", 4.0]])
        self.assertEqual(payload["provenance"]["verb"], "norms")
        self.assertEqual(output, run_cli("norms", "--seq", "catalog:three-four", "--format", "json")[1])

    def test_operator_norms(self):
        """Test the exact operator norms of diag(3, -4)."""
        code, output = run_cli("norms", "--matrix", "catalog:diag-3-neg4")
        self.assertEqual(code, 0)
        lines = output.splitlines()
        self.assertEqual(lines[0], "p_in\tp_out\tnorm\tquality")
        for line in lines[1:]:
            self.assertTrue(line.endswith("\t4.00000000000\texact"), line)

    def test_wiener_inverse(self):
        """Test the inverse of the geometric symbol."""
        code, output = run_cli("wiener", "--invert", "--seq", "catalog:geometric-symbol", "--tol", "1e-10")
        self.assertEqual(code, 0)
        rows = verdict_rows(output)
        self.assertEqual(rows["verdict"], "invertible")
        self.assertAlmostEqual(float(rows["norm1"]), 2.0, delta=1e-8)
        self.assertLessEqual(float(rows["residual"]), 1e-10)

    def test_wiener_not_invertible(self):
        """Test that a vanishing symbol is a numerical failure."""
        with self.assertLogs("cli", level="ERROR"):
            code, _ = run_cli("wiener", "--invert", "--seq", "catalog:vanishing")
        self.assertEqual(code, 3)

    def test_gelfand_of_nilpotent(self):
        """Test that the Gelfand sequence of a nilpotent matrix reaches 0."""
        code, output = run_cli("gelfand", "--matrix", "catalog:nilpotent-2", "--nmax", "8")
        self.assertEqual(code, 0)
        lines = output.splitlines()
        self.assertEqual(lines[0], "n\trho_n\trunning_inf")
        self.assertEqual(lines[1].split("\t")[:2], ["1", "2.00000000000"])
        self.assertEqual([float(line.split("\t")[1]) for line in lines[2:]], [0.0, 0.0, 0.0])

    def test_neumann_from_file(self):
        """Test a Neumann inverse read from a file."""
        directory = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, directory)
        path = directory / "half.json"
        path.write_text(json.dumps({"rows": [[0.5, 0], [0, 0.5]]}), encoding="utf-8")
        code, output = run_cli("neumann", "--matrix", str(path))
        self.assertEqual(code, 0)
        rows = verdict_rows(output)
        self.assertEqual(rows["verdict"], "converged")
        self.assertEqual([round(float(v), 9) for v in rows["inverse[0]"].split(",")], [2.0, 0.0])

    def test_neumann_divergence(self):
        """Test that spectral radius above 1 exits with the numerical code."""
        with self.assertLogs("cli", level="ERROR"):
            code, output = run_cli("neumann", "--matrix", "[[2, 0], [0, 2]]")
        self.assertEqual(code, 3)
        self.assertEqual(output, "")

    def test_holder_and_hull(self):
        """Test a Hoelder table and a hull verdict."""
        code, output = run_cli("holder", "--seq", "[1, 2]", "--weights", "[3, 4]", "--p", "2")
        self.assertEqual(code, 0)
        self.assertEqual(output.splitlines()[1].split("\t")[:3], ["2", "2", "11.0000000000"])
        self.assertTrue(output.rstrip().endswith("true"))

        code, output = run_cli("hull", "--points", "[[0, 0], [1, 0], [0, 1]]", "--point", "[1, 1]")
        self.assertEqual(code, 0)
        self.assertEqual(verdict_rows(output)["verdict"], "outside")

    def test_gauge_and_project(self):
        """Test a gauge value and a projection."""
        self.assertEqual(run_cli("gauge", "--body", "lp-ball 2 2", "--point", "[3, 4]")[1], "value\n5.00000000000\n")
        code, output = run_cli("project", "--subspace", "[[1, 0, 0], [0, 1, 0]]", "--vector", "[1, 2, 3]")
        self.assertEqual(code, 0)
        rows = verdict_rows(output)
        np.testing.assert_allclose([float(v) for v in rows["projection"].split(",")], [1.0, 2.0, 0.0], atol=1e-12)
        self.assertAlmostEqual(float(rows["distance"]), 3.0)

    def test_series_and_seminorm(self):
        """Test a power series summary and a function seminorm."""
        code, output = run_cli("series", "--series", "catalog:one-plus-z-squared", "--circle", "1")
        self.assertEqual(code, 0)
        rows = verdict_rows(output)
        self.assertEqual(rows["radius"], "inf")
        self.assertAlmostEqual(float(rows["circle_sup"]), 2.0)
        self.assertEqual(run_cli("seminorm", "--f", "catalog:tent", "--j", "1")[1], "value\n1.00000000000\n")

    def test_coefficient_list_is_a_polynomial(self):
        """Test that a bare coefficient list is the polynomial it spells out, with radius inf."""
        code, output = run_cli("series", "--series", "[1, 1]")
        self.assertEqual(code, 0)
        self.assertEqual(verdict_rows(output)["radius"], "inf")
        truncated = verdict_rows(run_cli("series", "--series", '{"coeffs": [1, 1]}')[1])
        self.assertEqual(truncated["radius"], "1.00000000000")

    def test_convolve_catalog_functions(self):
        """Test that the convolved box peaks at its width."""
        code, output = run_cli("convolve", "--f", "catalog:box", "--g", "catalog:box")
        self.assertEqual(code, 0)
        rows = [line.split("\t") for line in output.splitlines()[1:]]
        self.assertEqual(len(rows), 17)
        self.assertEqual(max(float(value) for _, value in rows), 1.25)

    def test_input_errors_exit_2(self):
        """Test malformed JSON, unknown verbs, missing files and wrong catalog kinds."""
        for argv in (
            ["norms", "--seq", "[3, 4"],
            ["bogus"],
            ["norms", "--seq", "/nonexistent/tvs-kit/s.json"],
            ["norms", "--seq", "catalog:cosine"],
            ["seminorm", "--f", "catalog:tent", "--j", "9"],
        ):
            with self.assertLogs("cli", level="ERROR"):
                code, output = run_cli(*argv)
            self.assertEqual(code, 2, argv)
            self.assertEqual(output, "")

    def test_precision_setting(self):
        """Test TVS_KIT_PRECISION and the warning for bad values."""
        with patch.dict(os.environ, {"TVS_KIT_PRECISION": "4"}):
            self.assertEqual(run_cli("gauge", "--body", "cube 2", "--point", "[1, 2]")[1], "value\n2.000\n")
        with patch.dict(os.environ, {"TVS_KIT_PRECISION": "abc"}):
            with self.assertLogs("cli", level="WARNING"):
                self.assertEqual(load_settings().precision, 12)

    def test_execute_with_loader(self):
        """Test running a command with an injected loader."""
        cmd = parse_command(["gelfand", "--matrix", "catalog:jordan-half", "--nmax", "64"])
        report = execute(cmd, InputLoader(CatalogManager()))
        self.assertEqual(len(report.rows), 7)
        self.assertTrue(0.5 <= report.rows[-1][2] <= 0.56)
        self.assertFalse(math.isnan(report.rows[0][1]))


def run_unit_tests():
    """Run unit tests."""
    loader = unittest.TestLoader()
    suite = unittest.TestSuite(
        loader.loadTestsFromTestCase(case) for case in (TestParseCommand, TestInputLoader, TestMain)
    )
    unittest.TextTestRunner(verbosity=2).run(suite)


if __name__ == '__main__':
    import argparse

    parser = argparse.ArgumentParser(description='Run command-line tests')
    parser.add_argument('--unit', action='store_true', help='Run unit tests')
    args = parser.parse_args()

    if args.unit:
        run_unit_tests()
    else:
        print("Please specify --unit to run tests")
