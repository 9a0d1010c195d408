import json
import os
from datetime import datetime

import click
import numpy as np
import openpyxl
import pandas as pd

from redent.config import SuiteConfig
from redent.errors import ReportWriteError
from redent.suite import SuiteReport, Trial

SUMMARY_COLUMNS = [
    "check_id",
    "trials",
    "passes",
    "failures",
    "errors",
    "min_margin",
    "min_relative_margin",
    "min_margin_fingerprint",
    "negative_values",
]


class Utils:

    def __init__(self, config: SuiteConfig):
        self.config = config
        self.warnings: list[str] = []

    def resolve_output_path(self) -> str:
        """A file path for ``config.format``; a directory gets a timestamped file name."""
        out = str(self.config.output_path)
        suffix = f".{self.config.format}"
        if out.endswith(suffix):
            folder = os.path.dirname(out)
            path = out
        else:
            folder = out
            path = os.path.join(out, f"redent_report_{self.get_unique_filename()}{suffix}")
        try:
            if folder:
                os.makedirs(folder, exist_ok=True)
        except OSError as exc:
            raise ReportWriteError(f"cannot create output directory {folder}: {exc}") from exc
        if os.path.exists(path):
            self.warnings.append(f"[redent] overwriting existing report {path}")
        return path

    def write_report(self, report: SuiteReport) -> str:
        path = self.resolve_output_path()
        writers = {"json": self.write_json, "csv": self.write_csv, "xlsx": self.write_to_excel}
        try:
            writers[self.config.format](report, path)
        except OSError as exc:
            raise ReportWriteError(f"cannot write report to {path}: {exc}") from exc
        return path

    @staticmethod
    def write_json(report: SuiteReport, path: str) -> None:
        with open(path, "w") as file:
            json.dump(report.as_dict(), file, indent=2, sort_keys=True)
            file.write("\n")

    @staticmethod
    def cell_frame(report: SuiteReport) -> pd.DataFrame:
        rows = []
        for cell in report.cell_rows():
            flat = Utils.flatten_dict({k: v for k, v in cell.items() if k != "records"})
            flat["failing_fingerprints"] = " | ".join(flat["failing_fingerprints"])
            rows.append(flat)
        return pd.DataFrame(rows)

    @staticmethod
    def summary_frame(report: SuiteReport) -> pd.DataFrame:
        rows = [{"check_id": check_id, **agg} for check_id, agg in report.checks.items()]
        return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)

    def write_csv(self, report: SuiteReport, path: str) -> None:
        self.cell_frame(report).to_csv(path, index=False)

    def write_to_excel(self, report: SuiteReport, path: str) -> None:
        workbook = openpyxl.Workbook()
        summary = workbook.active
        summary.title = "checks"
        self._fill_sheet(summary, self.summary_frame(report))
        self._fill_sheet(workbook.create_sheet("cells"), self.cell_frame(report))
        workbook.save(path)

    @staticmethod
    def _fill_sheet(sheet, frame: pd.DataFrame) -> None:
        headers = list(frame.columns)
        for col, header in enumerate(headers, start=1):
            sheet.cell(row=1, column=col, value=header)
        for row, item in enumerate(frame.to_dict(orient="records"), start=2):
            for col, header in enumerate(headers, start=1):
                value = item.get(header)
                if value is None or value == "" or (isinstance(value, float) and np.isnan(value)):
                    sheet.cell(row=row, column=col, value=None)
                elif isinstance(value, (int, float)):
                    sheet.cell(row=row, column=col, value=value)
                else:
                    sheet.cell(row=row, column=col, value=str(value))

    def echo_failures(self, report: SuiteReport) -> None:
        failing = {check_id: agg for check_id, agg in report.checks.items() if agg["failures"]}
        if not failing:
            return
        click.echo(
            f"\n{report.total_failures} of {report.total_trials} trials failed:",
            err=True,
        )
        for check_id, agg in failing.items():
            self._echo_labelled("Check:", check_id, fg="cyan")
            detail = f"{agg['failures']} of {agg['trials']} trials ({agg['errors']} raised)"
            self._echo_labelled("Failed:", detail, fg="red")
            fingerprints = [fp for cell in agg["cells"] for fp in cell["failing_fingerprints"]]
            if fingerprints:
                self._echo_labelled("First:", fingerprints[0], fg="yellow")
            click.echo("", err=True)

    def _echo_labelled(self, label: str, value: str, *, fg: str) -> None:
        styled_label = click.style(label, fg=fg, bold=True)
        indent = " " * len(label)
        lines = value.splitlines() or [""]
        first, *rest = lines
        click.echo(f"{styled_label} {first}", err=True)
        for line in rest:
            click.echo(f"{indent} {line}", err=True)

    @staticmethod
    def format_trial(trial: Trial, *, show_matrices: bool = False, precision: int = 17) -> str:
        text = json.dumps(trial.report.as_dict(), indent=2, sort_keys=True)
        if not show_matrices:
            return text
        blocks = [text]
        for name, value in trial.matrices.items():
            array = np.asarray(value)
            body = np.array2string(array, precision=precision, max_line_width=160, threshold=array.size + 1)
            blocks.append(f"{name} =\n{body}")
        return "\n\n".join(blocks)

    @staticmethod
    def flatten_dict(d, parent_key="", sep="."):
        items = []
        for k, v in d.items():
            new_key = f"{parent_key}{sep}{k}" if parent_key else k
            if isinstance(v, dict):
                items.extend(Utils.flatten_dict(v, new_key, sep=sep).items())
            else:
                items.append((new_key, v))
        return dict(items)

    @staticmethod
    def get_unique_filename():
        now = datetime.now()
        return now.strftime("%y%m%d%H%M%S")

    @staticmethod
    def get_latest_report(folder, suffix=".json"):
        if not os.path.isdir(folder):
            return ""
        reports = [f for f in os.listdir(folder) if f.endswith(suffix)]
        if not reports:
            return ""

        latest_file = max(reports, key=lambda f: os.path.getmtime(os.path.join(folder, f)))
        return os.path.join(folder, latest_file)
