from __future__ import annotations

import os
from typing import Any, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .config_text import ConfigText
from .errors import ConfigError

SCENARIOS = ("cross-section", "sweep", "prevalence", "counterexample", "lyapunov", "dimension")

Scenario = Literal["cross-section", "sweep", "prevalence", "counterexample", "lyapunov", "dimension"]
CouplingKind = Literal["zero", "figure1", "trig-random", "cohomologous", "probe", "sin2tanh"]


class ExperimentConfig(BaseModel):
    """
    validated experiment parameters; unknown keys are rejected

    defaults reproduce the small desk-scale runs, the configs under configs/ hold the
    full-size ones
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    schema_version: int
    scenario: Scenario
    alpha: float = 0.4
    beta: float = 0.43
    coupling: CouplingKind = "figure1"
    drive_coupling: Literal["zero", "figure1", "trig-random"] = "zero"
    gtilde: Literal["sin2tanh", "zero"] = "sin2tanh"
    coupling_sigma: float = 0.5
    coupling_max_frequency: int = 4
    samples: int = 200_000
    seed: int = 0
    threads: int = 1
    output_dir: str = "results"
    conjugacy_tolerance: float = 1e-12

    # estimation window, scales 2^-k for k in [window_min_exponent, window_max_exponent]
    window_min_exponent: int = 2
    window_max_exponent: int = 7
    target_pairs: int = 200_000
    dimension_tolerance: float = 0.08
    estimate_information: bool = False
    estimate_pointwise: bool = False
    compare_uncoupled: bool = False

    # cross-section
    cross_section_x: float = 0.3
    cross_section_z: float = 0.6
    window_width: float = 0.02
    min_w_cells: int = 10

    # sweep
    beta_min: float = 0.01
    beta_max: float = 0.49
    beta_steps: int = 49
    sweep_samples: int = 0

    # prevalence
    ensemble_size: int = 10
    pass_fraction: float = 0.9
    include_uncoupled: bool = True
    probe_lambdas: List[float] = [0.0, 0.5, 1.0]

    # counterexample
    telescoping_points: int = 1000
    tolerance_telescoping: float = 1e-10
    gap_margin: float = 0.06

    # lyapunov
    lyapunov_iterations: int = 10_000
    renorm_every: int = 8
    random_triples: int = 0
    exponent_tolerance_nats: float = 1e-6

    # modulus
    modulus_pairs: int = 2000
    modulus_decades: float = 4.0
    modulus_tolerance: float = 0.05
    estimate_modulus: bool = True

    dump_samples: int = 0

    @field_validator("schema_version")
    @classmethod
    def _known_schema(cls, value: int) -> int:
        if value != 1:
            raise ValueError(f"unsupported schema version {value!r}, expected 1")
        return value

    @field_validator("alpha", "beta")
    @classmethod
    def _contraction_range(cls, value: float) -> float:
        if not 0.0 < value < 0.5:
            raise ValueError(f"must lie in (0, 1/2), got {value!r}")
        return value

    @field_validator("samples", "threads", "ensemble_size", "lyapunov_iterations", "renorm_every",
                     "telescoping_points", "beta_steps", "modulus_pairs", "target_pairs")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be positive, got {value!r}")
        return value

    @field_validator("seed", "sweep_samples", "random_triples", "dump_samples")
    @classmethod
    def _nonnegative(cls, value: int) -> int:
        if value < 0:
            raise ValueError(f"must be nonnegative, got {value!r}")
        return value

    @field_validator("probe_lambdas", mode="before")
    @classmethod
    def _split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @model_validator(mode="after")
    def _scenario_requirements(self) -> ExperimentConfig:
        if self.window_max_exponent <= self.window_min_exponent:
            raise ValueError("window_max_exponent must exceed window_min_exponent")
        if not 0.0 < self.window_width <= 1.0:
            raise ValueError("window_width must lie in (0, 1]")
        if not (0.0 <= self.cross_section_x <= 1.0 - self.window_width
                and 0.0 <= self.cross_section_z <= 1.0 - self.window_width):
            raise ValueError("the cross-section window must fit inside [0, 1)")
        if not 0.0 < self.beta_min < self.beta_max < 0.5:
            raise ValueError("need 0 < beta_min < beta_max < 1/2")
        if self.scenario in ("prevalence", "counterexample") and not self.alpha < self.beta:
            raise ValueError(f"the {self.scenario} scenario needs alpha < beta")
        if self.scenario == "prevalence" and self.ensemble_size < 10:
            raise ValueError("the prevalence scenario needs ensemble_size >= 10")
        return self

    def window(self) -> List[float]:
        return [2.0 ** -k for k in range(self.window_min_exponent, self.window_max_exponent + 1)]

    def with_overrides(self, seed: Optional[int] = None, output_dir: Optional[str] = None,
                       threads: Optional[int] = None) -> ExperimentConfig:
        """command-line overrides, validated like the file values"""
        values = self.model_dump()
        if seed is not None:
            values["seed"] = seed
        if output_dir is not None:
            values["output_dir"] = output_dir
        if threads is not None:
            values["threads"] = threads
        return validate_config(values)


def validate_config(values: dict) -> ExperimentConfig:
    """
    Raises:
        ConfigError: listing every invalid field
    """
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                             for err in e.errors())
        raise ConfigError(f"invalid config: {problems}") from e


class ExperimentConfigFile:
    """
    represents a config file on disk

    Attributes:
        path: file system path
        raw_text: file contents once parsed
        values: decoded key/value strings
        config: validated ExperimentConfig
    """

    def __init__(self, path: str) -> None:
        self.path: str = path
        self.raw_text: Optional[str] = None
        self.values: Optional[dict] = None
        self.config: Optional[ExperimentConfig] = None

    def parse(self) -> ExperimentConfig:
        """
        reads, decodes and validates the file

        Raises:
            ConfigError: if the file is missing, malformed or invalid
        """
        if not os.path.isfile(self.path):
            raise ConfigError(f"config file not found: {self.path}")
        with open(self.path, "r", encoding="utf-8") as f:
            self.raw_text = f.read()

        self.values = ConfigText.decode(self.raw_text)
        self.config = validate_config(self.values)
        return self.config
