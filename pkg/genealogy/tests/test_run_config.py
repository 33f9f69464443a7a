"""
Tests for run configuration: precedence of flags, environment, manifest and
settings, manifest parsing and validation.
"""

import os
import tempfile
from pathlib import Path
from unittest import mock

from django.test import SimpleTestCase, override_settings

from vacoal.exceptions import ConfigError
from vacoal.search import PruneOrder, SearchMode

from ..run_config import RunConfig

SETTINGS = {"length": 1600, "blocks": 16, "depth_exp": 14, "seed": 5, "fs": 40, "mode": "dont_care"}


def options(**kwargs):
    """Command options as argparse hands them over: every flag present, unset ones None."""
    base = {name: None for name in RunConfig._converters()}
    base.update(config=None, concept=None, sweep=None)
    base.update(kwargs)
    return base


@override_settings(VACOAL=SETTINGS)
class RunConfigPrecedenceTestCase(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.manifest = Path(self._tmp.name) / "run.env"
        self.manifest.write_text(
            "SEED=11\nFS=25\nMODE=rescue\nRR=0.5\nCONCEPT.math=calculus, geometry\nSWEEP=16:14;32:13\n",
            encoding="utf-8",
        )
        patcher = mock.patch.dict(os.environ, {}, clear=False)
        patcher.start()
        self.addCleanup(patcher.stop)
        os.environ.pop("VACOAL_SEED", None)

    def tearDown(self):
        self._tmp.cleanup()

    def test_settings_supply_defaults(self):
        """Test that Django settings provide the base values."""
        config = RunConfig.resolve(options())
        self.assertEqual((config.length, config.blocks, config.depth_exp, config.seed), (1600, 16, 14, 5))
        self.assertEqual(config.segment_bits, 100)

    def test_manifest_overrides_settings(self):
        """Test that manifest keys take precedence over settings."""
        config = RunConfig.resolve(options(config=str(self.manifest)))
        self.assertEqual((config.seed, config.fs, config.mode, config.rr), (11, 25, "rescue", 0.5))
        self.assertEqual(config.concepts, {"math": ["calculus", "geometry"]})
        self.assertEqual(config.sweep, [(16, 14), (32, 13)])

    def test_environment_seed_overrides_manifest(self):
        """Test that VACOAL_SEED beats the manifest seed."""
        os.environ["VACOAL_SEED"] = "99"
        config = RunConfig.resolve(options(config=str(self.manifest)))
        self.assertEqual(config.seed, 99)
        self.assertEqual(config.fs, 25)

    def test_flags_override_everything(self):
        """Test that command flags beat every other source."""
        os.environ["VACOAL_SEED"] = "99"
        config = RunConfig.resolve(options(config=str(self.manifest), seed=3, fs=7, mode="dont_care"))
        self.assertEqual((config.seed, config.fs, config.mode), (3, 7, "dont_care"))

    def test_concept_and_sweep_flags(self):
        """Test parsing of --concept and --sweep values."""
        config = RunConfig.resolve(
            options(config=str(self.manifest), concept=["bio=botany,zoology"], sweep="64:12")
        )
        self.assertEqual(config.concepts["bio"], ["botany", "zoology"])
        self.assertEqual(config.concepts["math"], ["calculus", "geometry"])
        self.assertEqual(config.sweep, [(64, 12)])

    def test_unknown_manifest_key_is_ignored_with_warning(self):
        """Test that unknown manifest keys are logged and skipped."""
        self.manifest.write_text("COLOUR=blue\n", encoding="utf-8")
        with self.assertLogs("genealogy.run_config", "WARNING"):
            config = RunConfig.resolve(options(config=str(self.manifest)))
        self.assertEqual(config.seed, 5)

    def test_search_config_follows_mode(self):
        rescue = RunConfig.resolve(options(mode="rescue")).search_config()
        self.assertIs(rescue.mode, SearchMode.RESCUE)
        self.assertIs(rescue.prune_order, PruneOrder.LEXICOGRAPHIC)
        dont_care = RunConfig.resolve(options()).search_config()
        self.assertIs(dont_care.prune_order, PruneOrder.DESCENDING_CR2)


@override_settings(VACOAL=SETTINGS)
class RunConfigValidationTestCase(SimpleTestCase):

    def assertRejected(self, **kwargs):
        with self.assertRaises(ConfigError):
            RunConfig.resolve(options(**kwargs))

    def test_length_must_split_into_blocks(self):
        """Test that L must be a multiple of B."""
        self.assertRejected(length=1000, blocks=16)

    def test_length_must_be_byte_aligned(self):
        self.assertRejected(length=1004, blocks=4)

    def test_depth_exponent_range(self):
        """Test that m outside [1, 32] is a ConfigError."""
        self.assertRejected(depth_exp=0)
        self.assertRejected(depth_exp=33)

    def test_rescue_rate_range(self):
        self.assertRejected(rr=1.5)

    def test_search_parameters(self):
        """Test that invalid FS, halt and mode values are ConfigErrors."""
        self.assertRejected(fs=0)
        self.assertRejected(cr2_halt=1.0)
        self.assertRejected(mode="greedy")

    def test_malformed_concept_and_sweep(self):
        self.assertRejected(concept=["nomembers"])
        self.assertRejected(sweep="64-28")
        self.assertRejected(sweep="0:12")

    def test_missing_manifest(self):
        """Test that a missing manifest file is a ConfigError."""
        self.assertRejected(config="/nonexistent/run.env")

    def test_non_numeric_manifest_value(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "run.env"
            path.write_text("FS=many\n", encoding="utf-8")
            self.assertRejected(config=str(path))

    def test_require_names_missing_settings(self):
        """Test that require() names the missing input."""
        config = RunConfig.resolve(options())
        with self.assertRaisesMessage(ConfigError, "edges"):
            config.require("edges")
