from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from growthlab.utils.family_loader import family_loader

THEOREM_IDS = ("T21", "C21", "L24", "L23", "IDENT", "T31", "T32", "T33", "T34", "L32",
               "CAUCHY", "T41")


class GridSpec(BaseModel):
    r0: float = Field(..., gt=1)
    q: float = Field(..., gt=1)
    steps: int = Field(..., ge=0, le=10_000)


class FamilySpec(BaseModel):
    name: Optional[str] = None
    parameters: Dict[str, Any] = Field(default_factory=dict)
    coefficient_file: Optional[str] = None

    @model_validator(mode="after")
    def check_source(self) -> "FamilySpec":
        if self.coefficient_file is None and self.name is None:
            raise ValueError("A family needs a generator name or a coefficient file")
        if self.name is not None and self.name not in family_loader.list_available_families():
            raise ValueError(f"Unknown family: '{self.name}'")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: FamilySpec
    dimension: int = Field(..., ge=1, le=8)
    truncation_degree: int = Field(..., ge=4)
    grid: GridSpec
    seed: int = Field(..., ge=0)
    samples: int = Field(default=4096, ge=1)
    points_per_radius: int = Field(default=64, ge=1)
    restarts: int = Field(default=32, ge=1)
    theorems: List[str] = Field(default_factory=list)
    output_dir: str = "out"
    jobs: int = Field(default=1, ge=1)
    trust_decay_ratio: Optional[float] = Field(default=None, gt=0, lt=1)

    # theorem parameters
    index: Optional[List[int]] = None
    index_n: Optional[List[int]] = None
    alpha: float = Field(default=1.5, gt=1)
    epsilon: float = Field(default=0.5, gt=0)
    delta: float = Field(default=0.1, gt=0, lt=0.25)
    linear_form: Optional[List[Any]] = None

    @field_validator("theorems")
    @classmethod
    def check_theorems(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in THEOREM_IDS]
        if unknown:
            raise ValueError(f"Unknown theorem ids {unknown}; expected some of {THEOREM_IDS}")
        return value

    @model_validator(mode="after")
    def check_indices(self) -> "ExperimentConfig":
        for name in ("index", "index_n"):
            value = getattr(self, name)
            if value is not None and (len(value) != self.dimension or min(value) < 0):
                raise ValueError(f"'{name}' must have {self.dimension} non-negative entries")
        return self
