import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from growthlab.commands.schemas import ExperimentConfig
from growthlab.config.settings import settings
from growthlab.entities.growth import RadiusGrid, TrustPolicy
from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.pde import PdeInstance
from growthlab.entities.power_series import PowerSeries
from growthlab.entities.reports import ExperimentOutcome, InequalityReport, Verdict
from growthlab.repositories.coefficient_repository import CoefficientRepository
from growthlab.repositories.report_repository import ReportRepository
from growthlab.services.errors import InfiniteOrderError, InsufficientDataError
from growthlab.services.family_service import FamilyService
from growthlab.services.geometry_sampling import sample_sigma
from growthlab.services.growth_functionals import ProfileOptions, build_profiles
from growthlab.services.logderiv_lab import (
    constant_is_bounded,
    verify_corollary21,
    verify_lemma24,
    verify_logderiv_identities,
    verify_logderiv_lemma,
    verify_theorem21,
)
from growthlab.services.pde_growth_lab import verify_t41
from growthlab.services.series_core import trust_flags
from growthlab.services.wiman_valiron_lab import (
    eta_decay,
    exceptional_set_estimate,
    verify_cauchy_torus,
    verify_lemma32,
    verify_t31,
    verify_t32,
    verify_t33,
    wv_ratio_check,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_UNTRUSTED = 3
EXIT_NUMERIC = 4

IDENTITY_POINTS = 100


class ExperimentService:
    """Service layer running one experiment configuration end to end."""

    def __init__(self):
        self.families = FamilyService()
        self.reports = ReportRepository()

    # ---------------------------------------------------------------- inputs

    def load_function(self, config: ExperimentConfig) -> Tuple[PowerSeries, Optional[PdeInstance]]:
        source = config.family
        if source.coefficient_file is not None:
            series = CoefficientRepository.read(source.coefficient_file)
            if series.dimension != config.dimension:
                raise ValueError(
                    f"Coefficient file has dimension {series.dimension}, config says {config.dimension}")
            return series, None
        if source.name == "pde_solution":
            instance, solution = self.families.build_pde(
                config.dimension, config.truncation_degree, source.parameters)
            return solution, instance
        return self.families.build(source.name, config.dimension, config.truncation_degree,
                                   source.parameters), None

    @staticmethod
    def policy(config: ExperimentConfig) -> TrustPolicy:
        decay = config.trust_decay_ratio or settings.trust_decay_ratio
        return TrustPolicy(margin=settings.trust_margin, decay_ratio=decay)

    @staticmethod
    def grid(config: ExperimentConfig) -> RadiusGrid:
        return RadiusGrid(config.grid.r0, config.grid.q, config.grid.steps)

    # ------------------------------------------------------------------ run

    def run(self, config: ExperimentConfig, theorems: Optional[List[str]] = None,
            write_coefficients: bool = False) -> ExperimentOutcome:
        """Profile the function, run the selected verifications, write every artifact."""
        out = Path(config.output_dir)
        f, instance = self.load_function(config)
        policy, grid = self.policy(config), self.grid(config)
        theorems = config.theorems if theorems is None else theorems
        header = [f"family: {config.family.name or config.family.coefficient_file}",
                  f"dimension: {config.dimension}  truncation: {config.truncation_degree}  "
                  f"seed: {config.seed}"]

        untrusted = [r for r, ok in zip(grid.radii, trust_flags(f, grid.radii, policy)) if not ok]
        if len(untrusted) > settings.untrusted_abort_fraction * len(grid):
            listed = " ".join(repr(r) for r in untrusted)
            message = f"ABORTED: {len(untrusted)} of {len(grid)} radii untrusted: {listed}"
            path = self.reports.write_summary(out / "summary.txt", header + [message])
            logger.warning(message)
            return ExperimentOutcome(EXIT_UNTRUSTED, artifacts=[str(path)], message=message)

        artifacts: List[str] = []
        if write_coefficients:
            artifacts.append(str(CoefficientRepository.write(f, out / "solution.coef")))
            if instance is not None:
                artifacts.append(str(CoefficientRepository.write(instance.P, out / "P.coef")))
                artifacts.append(str(CoefficientRepository.write(instance.Q, out / "Q.coef")))

        options = ProfileOptions(seed=config.seed, count=config.samples, restarts=config.restarts,
                                 with_torus=True, policy=policy)
        profiles = build_profiles(f, grid.radii, options)
        artifacts.append(str(self.reports.write_profiles(out / "growth_profile.csv", profiles)))

        verdicts: List[Verdict] = []
        for theorem in theorems:
            runner = self._runners()[theorem]
            try:
                verdict, path = runner(config, f, instance, grid, policy, out)
            except (InfiniteOrderError, InsufficientDataError) as e:
                verdict, path = Verdict(theorem, Verdict.SKIPPED, str(e)), None
            verdicts.append(verdict)
            if path is not None:
                artifacts.append(str(path))
            logger.info(verdict.line)

        lines = header + [verdict.line for verdict in verdicts]
        artifacts.append(str(self.reports.write_summary(out / "summary.txt", lines)))
        exit_code = EXIT_FAIL if any(v.failed for v in verdicts) else EXIT_OK
        return ExperimentOutcome(exit_code, verdicts, artifacts)

    # -------------------------------------------------------------- verdicts

    @staticmethod
    def _report_verdict(report: InequalityReport) -> Verdict:
        if not report.checked:
            untrusted = " ".join(repr(r) for r in report.radii)
            return Verdict(report.theorem, Verdict.SKIPPED, f"untrusted radii: {untrusted}")
        if report.all_satisfied:
            return Verdict(report.theorem, Verdict.PASS)
        measure = report.exceptional_measure
        if measure <= settings.exceptional_fraction * report.grid_log_length:
            return Verdict(report.theorem, Verdict.PASS_EXCEPTIONAL, f"{measure:.6g}")
        return Verdict(report.theorem, Verdict.FAIL,
                       f"violations at {len(report.violating_radii)} radii, measure {measure:.6g}")

    def _write_report(self, report: InequalityReport, out: Path):
        return self.reports.write_report(out / f"report_{report.theorem}.csv", report)

    def _runners(self) -> Dict[str, Callable]:
        return {
            "T21": self._run_t21, "C21": self._run_c21, "L24": self._run_l24,
            "L23": self._run_l23, "IDENT": self._run_identities, "T31": self._run_t31,
            "T32": self._run_t32, "T33": self._run_t33, "T34": self._run_t34,
            "L32": self._run_l32, "CAUCHY": self._run_cauchy, "T41": self._run_t41,
        }

    @staticmethod
    def _indices(config: ExperimentConfig) -> Tuple[MultiIndex, MultiIndex]:
        m = config.dimension
        I = MultiIndex(config.index) if config.index else MultiIndex.zero(m)
        I_n = MultiIndex(config.index_n) if config.index_n else I + MultiIndex.unit(m, 0)
        return I, I_n

    def _run_t21(self, config, f, instance, grid, policy, out):
        I, I_n = self._indices(config)
        report = verify_theorem21(f, I, I_n, config.alpha, grid, config.points_per_radius,
                                  config.seed, config.samples, policy)
        verdict = self._report_verdict(report)
        if report.checked and not constant_is_bounded(report):
            verdict = Verdict("T21", Verdict.FAIL, f"empirical B grows: {report.empirical_constant:.6g}")
        return verdict, self._write_report(report, out)

    def _run_c21(self, config, f, instance, grid, policy, out):
        I, I_n = self._indices(config)
        report = verify_corollary21(f, I, I_n, config.epsilon, grid, config.points_per_radius,
                                    config.seed, policy=policy)
        return self._report_verdict(report), self._write_report(report, out)

    def _run_l24(self, config, f, instance, grid, policy, out):
        I, _ = self._indices(config)
        report = verify_lemma24(f, I, 0.0, config.alpha, grid, config.seed, config.samples, policy)
        return self._report_verdict(report), self._write_report(report, out)

    def _run_l23(self, config, f, instance, grid, policy, out):
        _, I_n = self._indices(config)
        report = verify_logderiv_lemma(f, I_n, config.epsilon, grid, config.samples,
                                       config.seed, policy)
        return self._report_verdict(report), self._write_report(report, out)

    def _run_identities(self, config, f, instance, grid, policy, out):
        I, _ = self._indices(config)
        points = sample_sigma(config.dimension, 1.0, IDENTITY_POINTS, config.seed).points
        check = verify_logderiv_identities(f, points, I=I)
        path = self.reports.write_table(
            out / "report_IDENT.csv",
            ["max_discrepancy_first", "max_discrepancy_second", "points", "tolerance", "passed"],
            [[check.max_discrepancy_first, check.max_discrepancy_second, check.points_used,
              check.tolerance, check.passed]])
        status = Verdict.PASS if check.passed else Verdict.FAIL
        return Verdict("IDENT", status, "" if check.passed else f"{check.max_discrepancy:.3g}"), path

    def _run_t31(self, config, f, instance, grid, policy, out):
        report = verify_t31(f, grid, config.restarts, config.seed, policy)
        return self._report_verdict(report), self._write_report(report, out)

    def _run_t32(self, config, f, instance, grid, policy, out):
        report = verify_t32(f, grid, config.restarts, config.seed, policy=policy)
        return self._report_verdict(report), self._write_report(report, out)

    def _run_cauchy(self, config, f, instance, grid, policy, out):
        report = verify_cauchy_torus(f, grid, config.restarts, config.seed, policy)
        return self._report_verdict(report), self._write_report(report, out)

    def _run_l32(self, config, f, instance, grid, policy, out):
        report = verify_lemma32(f, grid, config.samples, config.seed, config.restarts, policy)
        return self._report_verdict(report), self._write_report(report, out)

    def _run_t33(self, config, f, instance, grid, policy, out):
        agreement = verify_t33(f, grid, config.restarts, config.seed, policy)
        passed = agreement.max_difference <= settings.order_agreement_tolerance
        path = self.reports.write_table(
            out / "report_T33.csv",
            ["via_max_modulus", "via_max_term", "via_central_index", "max_difference"],
            [list(agreement.estimates) + [agreement.max_difference]])
        detail = "" if passed else f"estimates {agreement.estimates}"
        return Verdict("T33", Verdict.PASS if passed else Verdict.FAIL, detail), path

    def _run_t34(self, config, f, instance, grid, policy, out):
        _, I_n = self._indices(config)
        a = config.linear_form or [1.0] * config.dimension
        records = wv_ratio_check(f, I_n, [complex(*v) if isinstance(v, list) else complex(v) for v in a],
                                 grid, config.delta, config.restarts, config.seed, policy)
        path = self.reports.write_wv_records(out / "report_T34.csv", records)
        top, bottom = eta_decay(records)
        if math.isnan(top):
            return Verdict("T34", Verdict.SKIPPED, "no radius satisfies the hypothesis"), path
        measure = exceptional_set_estimate(records)
        log_length = grid.log_length
        decays = top < settings.eta_threshold and (top < bottom or top == bottom == 0)
        if not decays or measure > settings.exceptional_fraction * log_length:
            return Verdict("T34", Verdict.FAIL, f"eta top {top:.3g} bottom {bottom:.3g}"), path
        if measure > 0:
            return Verdict("T34", Verdict.PASS_EXCEPTIONAL, f"{measure:.6g}"), path
        return Verdict("T34", Verdict.PASS), path

    def _run_t41(self, config, f, instance, grid, policy, out):
        if instance is None:
            return Verdict("T41", Verdict.SKIPPED, "not a PDE instance"), None
        verdict = verify_t41(instance, f, grid, config.seed, count=config.samples, policy=policy)
        path = self.reports.write_table(
            out / "report_T41.csv",
            ["hyper_order", "deg_P", "tolerance", "lower_chain_bounded", "upper_chain_bounded",
             "residual", "passed"],
            [[verdict.estimate, verdict.expected, verdict.tolerance, verdict.lower_chain_bounded,
              verdict.upper_chain_bounded, verdict.residual, verdict.passed]])
        status = Verdict.PASS if verdict.passed else Verdict.FAIL
        return Verdict("T41", status, f"hyper-order {verdict.estimate:.4g} vs {verdict.expected}"), path
