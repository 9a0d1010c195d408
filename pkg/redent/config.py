import json
import os
import pprint

from redent.errors import ConfigError

DEFAULT_DIMS = [2, 3, 5, 8]
DEFAULT_Q_GRID = [0.3, 0.7, 1.5, 2.0, 2.5]
DEFAULT_P_GRID = [0.5, 1.0, 2.0]
DEFAULT_LAMBDA_GRID = [0.25, 0.5, 0.75]
DEFAULT_SPECTRUM = [0.2, 5.0]
PROFILES = {"ci": 200, "full": 1000}
FORMATS = ("json", "csv", "xlsx")
FIELDS = ("real", "complex")
OUTPUT_DIR_ENV = "REDENT_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "reports"
Q_ONE_GAP = 1e-12


class SuiteConfig:

    def __init__(
        self,
        dims=None,
        trials_per_cell=None,
        q_grid=None,
        p_grid=None,
        lambda_grid=None,
        seed=0,
        margin_tol=1e-8,
        checks="all",
        output_path=None,
        format="json",
        field="complex",
        spectrum=None,
        jobs=1,
        profile="ci",
        verbose_trials=False,
    ):
        if profile not in PROFILES:
            raise ConfigError(f"unknown profile '{profile}', expected one of {sorted(PROFILES)}")
        self.dims = list(dims) if dims is not None else list(DEFAULT_DIMS)
        self.trials_per_cell = trials_per_cell if trials_per_cell is not None else PROFILES[profile]
        self.q_grid = [float(q) for q in q_grid] if q_grid is not None else list(DEFAULT_Q_GRID)
        self.p_grid = [float(p) for p in p_grid] if p_grid is not None else list(DEFAULT_P_GRID)
        self.lambda_grid = (
            [float(v) for v in lambda_grid] if lambda_grid is not None else list(DEFAULT_LAMBDA_GRID)
        )
        self.seed = seed
        self.margin_tol = margin_tol
        self.checks = checks if checks == "all" else list(checks)
        self.output_path = output_path if output_path is not None else default_output_dir()
        self.format = format
        self.field = field
        self.spectrum = [float(v) for v in spectrum] if spectrum is not None else list(DEFAULT_SPECTRUM)
        self.jobs = jobs
        self.profile = profile
        self.verbose_trials = verbose_trials

    @classmethod
    def from_json(cls, file_path, **overrides):
        """Read a config file; keyword ``overrides`` that are not ``None`` win over it."""
        try:
            with open(file_path, "r") as file:
                data = json.load(file)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {file_path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config file {file_path} must hold a JSON object")
        unknown = set(data) - set(cls().as_dict())
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if "profile" in overrides and overrides["profile"] is not None and "trials_per_cell" not in data:
            data["trials_per_cell"] = PROFILES.get(overrides["profile"])
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def validate(self, known_checks=None):
        if not self.dims or any(not isinstance(d, int) or isinstance(d, bool) or d < 1 for d in self.dims):
            raise ConfigError(f"dims must be a non-empty list of positive integers, got {self.dims}")
        if not isinstance(self.trials_per_cell, int) or self.trials_per_cell < 1:
            raise ConfigError(f"trials_per_cell must be at least 1, got {self.trials_per_cell}")
        for name in ("q_grid", "p_grid", "lambda_grid"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if any(abs(q - 1.0) < Q_ONE_GAP for q in self.q_grid):
            raise ConfigError("q_grid must avoid q = 1; classical cells are added by the checks that have them")
        if any(q < 0 for q in self.q_grid):
            raise ConfigError(f"q_grid entries must be non-negative, got {self.q_grid}")
        if any(p <= 0 for p in self.p_grid):
            raise ConfigError(f"p_grid entries must be positive, got {self.p_grid}")
        if any(not 0 < v < 1 for v in self.lambda_grid):
            raise ConfigError(f"lambda_grid entries must lie in (0, 1), got {self.lambda_grid}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit non-negative integer, got {self.seed}")
        if not self.margin_tol > 0:
            raise ConfigError(f"margin_tol must be positive, got {self.margin_tol}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got '{self.format}'")
        if self.field not in FIELDS:
            raise ConfigError(f"field must be one of {FIELDS}, got '{self.field}'")
        if len(self.spectrum) != 2 or not 0 < self.spectrum[0] <= self.spectrum[1]:
            raise ConfigError(f"spectrum must be [lo, hi] with 0 < lo <= hi, got {self.spectrum}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")
        if self.checks != "all":
            if not self.checks:
                raise ConfigError("checks must be 'all' or a non-empty list")
            if known_checks is not None:
                unknown = [c for c in self.checks if c not in known_checks]
                if unknown:
                    raise ConfigError(f"unknown check ids: {', '.join(unknown)}")
        return self

    def as_dict(self):
        return dict(self.__dict__)

    def __str__(self):
        return pprint.pformat(self.__dict__, indent=2)


def default_output_dir():
    return os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR
