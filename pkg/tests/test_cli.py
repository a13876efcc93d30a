"""
Tests for the polymerdyn command-line interface.
"""

import hashlib
import importlib
import io
import json
import math
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

from loguru import logger

import polymerdyn
from polymerdyn.cli import build_parser, configure_logging, main
from polymerdyn.config import WORK_CEILING_ENV
from polymerdyn.graph_core import read_graph
from polymerdyn.models import PottsParams
from polymerdyn.potts import warn_if_out_of_regime


class CLITestCase(unittest.TestCase):
    """Base class writing small graphs to a temporary directory."""

    def setUp(self):
        """Create P3, K2 and K4 edge-list files."""
        self.tmp = tempfile.mkdtemp()
        self.p3 = self._write("p3.txt", "3 2\n0 1\n1 2\n")
        self.k2 = self._write("k2.txt", "2 1\n0 1\n")
        self.k4 = self._write("k4.txt", "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n")

    def tearDown(self):
        """Remove the temporary directory."""
        shutil.rmtree(self.tmp)

    def _write(self, name: str, text: str) -> str:
        path = os.path.join(self.tmp, name)
        with open(path, "w") as f:
            f.write(text)
        return path

    def run_cli(self, *args: str):
        """Run main and return (exit code, stdout)."""
        with patch("sys.stdout", new_callable=io.StringIO) as stdout:
            code = main(list(args))
        return code, stdout.getvalue()

    def run_json(self, *args: str):
        code, out = self.run_cli(*args, "--json", "--quiet")
        return code, json.loads(out) if out.strip() else None


class TestUsage(CLITestCase):
    """Test case for usage errors and the parser."""

    def test_no_command(self):
        """Test that a missing command exits 1."""
        self.assertEqual(self.run_cli()[0], 1)

    def test_unknown_flag(self):
        """Test that an unknown flag exits 1."""
        self.assertEqual(self.run_cli("sample", "--nope")[0], 1)

    def test_verify_without_check(self):
        """Test that verify needs a check name."""
        self.assertEqual(self.run_cli("verify")[0], 1)

    def test_non_positive_counts(self):
        """Test that zero threads, samples or draws exit 1."""
        base = ("sample", "--graph", self.p3, "--q", "3", "--beta", "3", "--eps", "0.1", "--force-out-of-regime")
        self.assertEqual(self.run_json(*base, "--samples", "2", "--threads", "0")[0], 1)
        self.assertEqual(self.run_json(*base, "--samples", "0")[0], 1)
        self.assertEqual(self.run_json(*base, "--threads", "x")[0], 1)
        nu = ("verify", "nu", "--graph", self.p3, "--q", "2", "--beta", "3", "--draws", "-5")
        self.assertEqual(self.run_json(*nu)[0], 1)

    def test_version(self):
        """Test the version flag."""
        code, out = self.run_cli("--version")
        self.assertEqual(code, 0)
        self.assertIn("polymerdyn version", out)

    def test_parser_commands(self):
        """Test that every command is registered."""
        parser = build_parser()
        args = parser.parse_args(["verify", "potts-z", "--graph", "g", "--q", "3", "--beta", "1"])
        self.assertEqual(args.command, "verify")
        self.assertEqual(args.check, "potts-z")


class TestGenAndAudit(CLITestCase):
    """Test case for the gen and audit commands."""

    def test_gen_simple_k4(self):
        """Test generating K4 from (3,3,3,3)."""
        degseq = self._write("x.txt", "3 3 3 3\n")
        out = os.path.join(self.tmp, "g.txt")
        code, payload = self.run_json("gen", "--degseq", degseq, "--simple", "--seed", "1", "--out", out)
        self.assertEqual(code, 0)
        self.assertEqual(payload["schema"], 1)
        self.assertEqual(payload["m"], 6)
        self.assertEqual(read_graph(out).m, 6)
        self.assertFalse(payload["degree_report"]["max_degree_ok"])

    def test_gen_odd_sum(self):
        """Test that an odd degree sum exits 2."""
        degseq = self._write("x.txt", "3 3 3\n")
        self.assertEqual(self.run_json("gen", "--degseq", degseq, "--seed", "1")[0], 2)

    def test_gen_rejection_failure(self):
        """Test that exhausted rejection sampling exits 3."""
        degseq = self._write("x.txt", "2\n")
        code, _ = self.run_json("gen", "--degseq", degseq, "--simple", "--max-attempts", "5", "--seed", "0")
        self.assertEqual(code, 3)

    def test_audit_k4(self):
        """Test an audit that passes."""
        code, payload = self.run_json("audit", "--graph", self.k4, "--alpha", "0.5", "--caps", "2,8")
        self.assertEqual(code, 0)
        self.assertTrue(payload["passed"])
        self.assertEqual(payload["sets_checked"], 10)

    def test_audit_bad_caps(self):
        """Test that malformed caps exit 1."""
        self.assertEqual(self.run_json("audit", "--graph", self.k4, "--alpha", "0.5", "--caps", "2")[0], 1)

    def test_malformed_graph_file(self):
        """Test that a malformed graph file exits 2."""
        bad = self._write("bad.txt", "3 2\n0 1\n")
        self.assertEqual(self.run_json("audit", "--graph", bad, "--alpha", "0.5")[0], 2)

    def test_missing_graph_file(self):
        """Test that a graph path that does not exist exits 2."""
        missing = os.path.join(self.tmp, "nope.txt")
        code, _ = self.run_json("sample", "--graph", missing, "--q", "3", "--beta", "3", "--eps", "0.1")
        self.assertEqual(code, 2)

    def test_undecodable_graph_file(self):
        """Test that a graph file that is not text exits 2."""
        path = os.path.join(self.tmp, "binary.txt")
        with open(path, "wb") as f:
            f.write(b"\xff\xfe\x00\x81 2\n")
        self.assertEqual(self.run_json("audit", "--graph", path, "--alpha", "0.5")[0], 2)

    def test_missing_degree_sequence(self):
        """Test that a degree-sequence path that does not exist exits 2."""
        self.assertEqual(self.run_json("gen", "--degseq", os.path.join(self.tmp, "nope.txt"))[0], 2)


class TestSampleAndCount(CLITestCase):
    """Test case for the sample and count commands."""

    def test_sample_out_of_regime_refused(self):
        """Test that β=3 on P3 needs the force flag."""
        code, _ = self.run_json("sample", "--graph", self.p3, "--q", "3", "--beta", "3", "--eps", "0.1", "--seed", "1")
        self.assertEqual(code, 2)

    def test_sample_forced(self):
        """Test a forced sample and its output fields."""
        code, payload = self.run_json(
            "sample", "--graph", self.p3, "--q", "3", "--beta", "3", "--eps", "0.1",
            "--seed", "1", "--force-out-of-regime",
        )
        self.assertEqual(code, 0)
        self.assertEqual(len(payload["colouring"]), 3)
        self.assertEqual(payload["seed"], 1)
        self.assertIn(payload["dominant_colour"], (0, 1, 2))

    def test_sample_reproducible(self):
        """Test byte-identical output for the same seed."""
        args = (
            "sample", "--graph", self.p3, "--q", "3", "--beta", "3", "--eps", "0.1",
            "--seed", "9", "--force-out-of-regime", "--samples", "4", "--threads", "2", "--json", "--quiet",
        )
        first = self.run_cli(*args)
        second = self.run_cli(*args)
        self.assertEqual(first[0], 0)
        self.assertEqual(first[1], second[1])
        self.assertEqual(len(json.loads(first[1])["samples"]), 4)

    def test_sample_strict_mode(self):
        """Test the strict-budget mode flag."""
        code, payload = self.run_json(
            "sample", "--graph", self.p3, "--q", "3", "--beta", "3", "--eps", "0.1",
            "--seed", "2", "--force-out-of-regime", "--mode", "strict",
        )
        self.assertEqual(code, 0)
        self.assertEqual(len(payload["colouring"]), 3)

    def test_invalid_colour(self):
        """Test that a ground colour >= q exits 2."""
        code, _ = self.run_json(
            "sample", "--graph", self.p3, "--q", "3", "--beta", "3", "--eps", "0.1",
            "--colour", "5", "--force-out-of-regime",
        )
        self.assertEqual(code, 2)

    def test_count_exact(self):
        """Test that count on K2 with small ε is exact."""
        code, payload = self.run_json(
            "count", "--graph", self.k2, "--q", "3", "--beta", "3", "--eps", "0.1",
            "--seed", "0", "--force-out-of-regime",
        )
        self.assertEqual(code, 0)
        self.assertTrue(payload["exact"])
        self.assertAlmostEqual(payload["log_Z"], math.log(3 * math.exp(3) + 6))

    def test_manifest(self):
        """Test that a forced run writes a tainted manifest."""
        path = os.path.join(self.tmp, "manifest.json")
        code, _ = self.run_json(
            "count", "--graph", self.k2, "--q", "3", "--beta", "3", "--eps", "0.1",
            "--seed", "0", "--force-out-of-regime", "--manifest", path,
        )
        self.assertEqual(code, 0)
        with open(path) as f:
            manifest = json.load(f)
        self.assertTrue(manifest["tainted"])
        self.assertEqual(manifest["command"], "count")
        self.assertEqual(manifest["seed"], 0)
        self.assertEqual(len(manifest["outputs_digest"]), 64)
        self.assertIn("numpy", manifest["versions"])

    def test_manifest_on_stderr_by_default(self):
        """Test that a plain sample run writes its manifest to stderr."""
        with patch("sys.stderr", new_callable=io.StringIO) as stderr:
            code, out = self.run_cli(
                "sample", "--graph", self.p3, "--q", "3", "--beta", "3", "--eps", "0.1",
                "--seed", "5", "--force-out-of-regime",
            )
        self.assertEqual(code, 0)
        lines = [line for line in stderr.getvalue().splitlines() if line.startswith("run manifest: ")]
        self.assertEqual(len(lines), 1)
        manifest = json.loads(lines[0][len("run manifest: "):])
        self.assertEqual(manifest["command"], "sample")
        self.assertEqual(manifest["seed"], 5)
        self.assertTrue(manifest["tainted"])
        self.assertEqual(manifest["outputs_digest"], hashlib.sha256(out.rstrip("\n").encode()).hexdigest())


class TestVerify(CLITestCase):
    """Test case for the verify subcommands."""

    def test_subsets(self):
        """Test the subset enumeration check."""
        code, payload = self.run_json("verify", "subsets", "--graph", self.k4, "--budget", "9")
        self.assertEqual(code, 0)
        self.assertTrue(payload["ok"])
        self.assertEqual(payload["count"], payload["brute_force_count"])

    def test_subsets_work_ceiling(self):
        """Test that the work ceiling exits 3."""
        with patch.dict(os.environ, {WORK_CEILING_ENV: "1"}):
            code, _ = self.run_json("verify", "subsets", "--graph", self.k4, "--budget", "12")
        self.assertEqual(code, 3)

    def test_conditions(self):
        """Test the sampling and mixing conditions on P3."""
        code, payload = self.run_json("verify", "conditions", "--graph", self.p3, "--q", "3", "--beta", "3")
        self.assertEqual(code, 0)
        self.assertTrue(payload["sampling"]["holds"])
        self.assertTrue(payload["mixing"]["holds"])

    def test_conditions_fail(self):
        """Test that a failing mixing condition exits 4."""
        code, payload = self.run_json("verify", "conditions", "--graph", self.p3, "--q", "3", "--beta", "0.01")
        self.assertEqual(code, 4)
        self.assertFalse(payload["mixing"]["holds"])

    def test_stationarity(self):
        """Test the stationarity check on P3."""
        code, payload = self.run_json("verify", "stationarity", "--graph", self.p3, "--q", "2", "--beta", "3")
        self.assertEqual(code, 0)
        self.assertLessEqual(payload["stationarity_gap"], 1e-12)

    def test_nu(self):
        """Test the ν_e check and its failure exit code."""
        base = ("verify", "nu", "--graph", self.p3, "--q", "2", "--beta", "3", "--seed", "4", "--draws", "20000")
        code, payload = self.run_json(*base, "--tolerance", "0.03")
        self.assertEqual(code, 0)
        self.assertEqual(set(payload["tv"]), {"0,1", "1,2"})
        self.assertEqual(self.run_json(*base, "--tolerance", "0")[0], 4)

    def test_potts_z(self):
        """Test the bijection identity check."""
        code, payload = self.run_json("verify", "potts-z", "--graph", self.p3, "--q", "3", "--beta", "3")
        self.assertEqual(code, 0)
        self.assertLessEqual(payload["identity_gap"], 1e-9)
        self.assertAlmostEqual(payload["log_Z"], math.log(3 * math.exp(6) + 12 * math.exp(3) + 12))


class TestLogging(unittest.TestCase):
    """Test case for the package logger switch."""

    def setUp(self):
        """Collect polymerdyn records in a list."""
        self.records = []
        self.addCleanup(logger.remove)

    def _capture(self):
        logger.add(lambda message: self.records.append(message.record["message"]), level="WARNING")

    def test_silent_as_a_library(self):
        """Test that importing the package leaves its records disabled."""
        importlib.reload(polymerdyn)
        self._capture()
        warn_if_out_of_regime(PottsParams(q=3, beta=1.0))
        self.assertEqual(self.records, [])

    def test_enabled_by_the_cli(self):
        """Test that configure_logging turns the package records back on."""
        importlib.reload(polymerdyn)
        configure_logging(0, True)
        self._capture()
        warn_if_out_of_regime(PottsParams(q=3, beta=1.0))
        self.assertTrue(any("outside the guaranteed regime" in r for r in self.records))


if __name__ == "__main__":
    unittest.main()
