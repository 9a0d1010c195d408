import json
import os
import tempfile
from unittest import TestCase, mock

import openpyxl
import pandas as pd

from redent.config import DEFAULT_Q_GRID, OUTPUT_DIR_ENV, PROFILES, SuiteConfig, default_output_dir
from redent.errors import ConfigError
from redent.suite import regenerate, run_suite
from redent.utils import Utils

TEST_CONFIG = os.path.join(os.path.dirname(__file__), "..", "data", "suite.json")


class TestSuiteConfig(TestCase):

    def test_defaults(self):
        cfg = SuiteConfig()
        self.assertEqual(cfg.trials_per_cell, PROFILES["ci"])
        self.assertEqual(cfg.q_grid, DEFAULT_Q_GRID)
        self.assertEqual(cfg.checks, "all")
        self.assertEqual(SuiteConfig(profile="full").trials_per_cell, 1000)
        self.assertIs(cfg.validate(), cfg)
        self.assertIn("'q_grid'", str(cfg))

    def test_unknown_profile(self):
        with self.assertRaises(ConfigError):
            SuiteConfig(profile="nightly")

    def test_from_json(self):
        cfg = SuiteConfig.from_json(TEST_CONFIG)
        self.assertEqual(cfg.dims, [2])
        self.assertEqual(cfg.trials_per_cell, 3)
        self.assertEqual(cfg.checks, ["check_gt_hp", "check_reduced_jensen"])

    def test_flags_win_over_file(self):
        cfg = SuiteConfig.from_json(TEST_CONFIG, trials_per_cell=5, seed=None, dims=[3])
        self.assertEqual(cfg.trials_per_cell, 5)
        self.assertEqual(cfg.dims, [3])
        self.assertEqual(cfg.seed, 11)

    def test_profile_flag_without_trials_in_file(self):
        with tempfile.TemporaryDirectory() as folder:
            path = os.path.join(folder, "c.json")
            with open(path, "w") as file:
                json.dump({"dims": [2]}, file)
            self.assertEqual(SuiteConfig.from_json(path, profile="full").trials_per_cell, 1000)

    def test_bad_files(self):
        with tempfile.TemporaryDirectory() as folder:
            for name, content in (("broken", "{"), ("list", "[1, 2]"), ("unknown", '{"colour": "blue"}')):
                with self.subTest(case=name):
                    path = os.path.join(folder, f"{name}.json")
                    with open(path, "w") as file:
                        file.write(content)
                    with self.assertRaises(ConfigError):
                        SuiteConfig.from_json(path)
            with self.assertRaises(ConfigError):
                SuiteConfig.from_json(os.path.join(folder, "missing.json"))

    def test_validate(self):
        for overrides in (
            {"dims": [0]},
            {"dims": [True]},
            {"trials_per_cell": 0},
            {"p_grid": [0.0]},
            {"q_grid": [-0.5]},
            {"seed": -1},
            {"margin_tol": 0.0},
            {"field": "quaternion"},
            {"spectrum": [2.0, 1.0]},
            {"jobs": 0},
            {"checks": []},
        ):
            with self.subTest(**{k: str(v) for k, v in overrides.items()}):
                with self.assertRaises(ConfigError):
                    SuiteConfig(**overrides).validate()

    def test_output_dir_from_environment(self):
        with mock.patch.dict(os.environ, {OUTPUT_DIR_ENV: "elsewhere"}):
            self.assertEqual(default_output_dir(), "elsewhere")
            self.assertEqual(SuiteConfig().output_path, "elsewhere")
        with mock.patch.dict(os.environ, {OUTPUT_DIR_ENV: ""}):
            self.assertEqual(default_output_dir(), "reports")


class TestReportWriting(TestCase):

    def setUp(self):
        self.folder = tempfile.TemporaryDirectory()
        self.addCleanup(self.folder.cleanup)

    def _run(self, fmt, output_path=None):
        cfg = SuiteConfig.from_json(TEST_CONFIG, format=fmt, output_path=output_path or self.folder.name)
        util = Utils(cfg)
        report = run_suite(cfg)
        return util, report, util.write_report(report)

    def test_json(self):
        _, report, path = self._run("json")
        self.assertTrue(os.path.basename(path).startswith("redent_report_"))
        with open(path, "r") as file:
            data = json.load(file)
        self.assertEqual(data["summary"]["trials"], report.total_trials)
        self.assertEqual(set(data["checks"]), {"check_gt_hp", "check_reduced_jensen"})
        fingerprint = data["checks"]["check_gt_hp"]["min_margin_fingerprint"]
        self.assertTrue(regenerate(fingerprint).report.all_hold)

    def test_explicit_file_and_overwrite_warning(self):
        target = os.path.join(self.folder.name, "nested", "out.json")
        util, _, path = self._run("json", target)
        self.assertEqual(path, target)
        self.assertEqual(util.warnings, [])
        util, _, _ = self._run("json", target)
        self.assertEqual(len(util.warnings), 1)

    def test_csv(self):
        _, report, path = self._run("csv")
        frame = pd.read_csv(path)
        self.assertEqual(len(frame), len(report.cell_rows()))
        self.assertIn("params.p", frame.columns)
        self.assertEqual(int(frame["trials"].sum()), report.total_trials)

    def test_xlsx(self):
        _, report, path = self._run("xlsx")
        workbook = openpyxl.load_workbook(path)
        self.assertEqual(workbook.sheetnames, ["checks", "cells"])
        checks = workbook["checks"]
        self.assertEqual(checks.cell(row=1, column=1).value, "check_id")
        self.assertEqual(checks.max_row, len(report.checks) + 1)

    def test_flatten_dict(self):
        self.assertEqual(Utils.flatten_dict({"a": {"b": 1, "c": {"d": 2}}, "e": 3}), {"a.b": 1, "a.c.d": 2, "e": 3})

    def test_latest_report(self):
        self.assertEqual(Utils.get_latest_report(os.path.join(self.folder.name, "none")), "")
        _, _, path = self._run("json")
        self.assertEqual(Utils.get_latest_report(self.folder.name), path)
