import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


@dataclass
class InequalityRecord:
    """One radius of an inequality check; lhs/rhs are natural logs."""

    radius: float
    lhs_log: float
    rhs_log: float
    satisfied: bool
    trusted: bool = True
    core_log: float = math.nan

    @property
    def margin(self) -> float:
        return self.rhs_log - self.lhs_log


@dataclass
class InequalityReport:
    """Per-radius verification of one inequality and its exceptional set."""

    theorem: str
    records: List[InequalityRecord] = field(default_factory=list)
    empirical_constant: float = math.nan
    seed: Optional[int] = None
    parameters: Dict[str, object] = field(default_factory=dict)
    threshold: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def radii(self) -> Tuple[float, ...]:
        return tuple(record.radius for record in self.records)

    @property
    def checked(self) -> List[InequalityRecord]:
        return [record for record in self.records if record.trusted]

    @property
    def violating_radii(self) -> Tuple[float, ...]:
        return tuple(r.radius for r in self.checked if not r.satisfied)

    @property
    def all_satisfied(self) -> bool:
        return bool(self.checked) and all(r.satisfied for r in self.checked)

    @property
    def grid_log_length(self) -> float:
        if len(self.records) < 2:
            return 0.0
        return math.log(self.records[-1].radius / self.records[0].radius)

    def pass_threshold(self) -> Optional[float]:
        """Smallest checked radius R* with every checked radius >= R* satisfied."""
        threshold = None
        for record in reversed(self.checked):
            if not record.satisfied:
                break
            threshold = record.radius
        return threshold

    @property
    def exceptional_measure(self) -> float:
        """Σ log(r_{k+1}/r_k) over intervals whose left endpoint violates."""
        total = 0.0
        for left, right in zip(self.records, self.records[1:]):
            if left.trusted and not left.satisfied:
                total += math.log(right.radius / left.radius)
        return total

    def to_rows(self) -> List[List]:
        return [
            [self.theorem, r.radius, r.lhs_log, r.rhs_log, r.margin,
             r.satisfied, self.empirical_constant, self.seed]
            for r in self.records
        ]


REPORT_COLUMNS = ["theorem", "r", "lhs_log", "rhs_log", "margin",
                  "satisfied", "empirical_B", "seed"]


@dataclass
class WVRecord:
    """Wiman–Valiron comparison at the torus argmax z_r."""

    radius: float
    phases: Tuple[float, ...]
    condition_ok: bool
    eta: float
    log_f_at_zr: float
    log_M_sphere_sqrtm_r: float
    central_index: int
    delta: float
    valid: bool = True
    trusted: bool = True

    def violates(self, threshold: float) -> bool:
        if not self.trusted:
            return False
        return (not self.valid) or (not self.condition_ok) or not (self.eta <= threshold)

    def to_row(self) -> List:
        return [self.radius, self.condition_ok, self.eta, self.log_f_at_zr,
                self.log_M_sphere_sqrtm_r, self.central_index,
                " ".join(repr(p) for p in self.phases)]


WV_COLUMNS = ["r", "condition_ok", "eta", "log_f_at_zr", "log_M_sphere_sqrtm_r",
              "central_index", "phases"]


@dataclass
class OrderAgreement:
    """The three order (or hyper-order) estimates of one function."""

    via_max_modulus: float
    via_max_term: float
    via_central_index: float

    @property
    def estimates(self) -> Tuple[float, float, float]:
        return (self.via_max_modulus, self.via_max_term, self.via_central_index)

    @property
    def pairwise_differences(self) -> Tuple[float, float, float]:
        a, b, c = self.estimates
        return (abs(a - b), abs(a - c), abs(b - c))

    @property
    def max_difference(self) -> float:
        return max(self.pairwise_differences)


@dataclass
class IdentityCheck:
    """Outcome of the logarithmic-derivative product identities."""

    passed: bool
    max_discrepancy_first: float
    max_discrepancy_second: float
    points_used: int
    tolerance: float

    @property
    def max_discrepancy(self) -> float:
        return max(self.max_discrepancy_first, self.max_discrepancy_second)


@dataclass
class HyperOrderVerdict:
    """Hyper-order of a constructed PDE solution against deg P."""

    estimate: float
    expected: int
    tolerance: float
    lower_chain_bounded: bool
    upper_chain_bounded: bool
    residual: float

    @property
    def passed(self) -> bool:
        return (abs(self.estimate - self.expected) <= self.tolerance
                and self.lower_chain_bounded and self.upper_chain_bounded)


@dataclass
class SmallnessCheck:
    """T(r,Q)/T(r,f) along a grid and whether it trends to 0."""

    radii: Tuple[float, ...]
    ratios: Tuple[float, ...]

    @property
    def identically_zero(self) -> bool:
        return all(ratio == 0 for ratio in self.ratios)

    @property
    def decreasing(self) -> bool:
        """Top-decile mean below bottom-decile mean."""
        finite = [ratio for ratio in self.ratios if math.isfinite(ratio)]
        if len(finite) < 2:
            return False
        decile = max(1, len(finite) // 10)
        return sum(finite[-decile:]) / decile < sum(finite[:decile]) / decile

    @property
    def small(self) -> bool:
        return self.identically_zero or self.decreasing


@dataclass
class Verdict:
    """One theorem's outcome in a run summary."""

    theorem: str
    status: str
    detail: str = ""

    PASS = "PASS"
    PASS_EXCEPTIONAL = "PASS-with-exceptional-set"
    FAIL = "FAIL"
    SKIPPED = "SKIPPED"

    @property
    def failed(self) -> bool:
        return self.status == self.FAIL

    @property
    def line(self) -> str:
        if self.status in (self.PASS_EXCEPTIONAL, self.SKIPPED):
            return f"{self.theorem}: {self.status}({self.detail})"
        if self.detail:
            return f"{self.theorem}: {self.status} ({self.detail})"
        return f"{self.theorem}: {self.status}"


@dataclass
class ExperimentOutcome:
    """Exit status, verdicts and written files of one run."""

    exit_code: int
    verdicts: List[Verdict] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    message: str = ""
