import csv
from pathlib import Path
from typing import Iterable, List, Sequence, Union

from growthlab.entities.growth import PROFILE_COLUMNS, GrowthProfile
from growthlab.entities.reports import (
    REPORT_COLUMNS,
    WV_COLUMNS,
    InequalityReport,
    WVRecord,
)

PathLike = Union[str, Path]


class ReportRepository:
    """CSV and summary writers for experiment artifacts (LF endings, repr floats)."""

    @staticmethod
    def _write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return path

    @staticmethod
    def write_profiles(path: PathLike, profiles: Sequence[GrowthProfile]) -> Path:
        return ReportRepository._write_rows(path, PROFILE_COLUMNS, (p.to_row() for p in profiles))

    @staticmethod
    def write_report(path: PathLike, report: InequalityReport) -> Path:
        return ReportRepository._write_rows(path, REPORT_COLUMNS, report.to_rows())

    @staticmethod
    def write_wv_records(path: PathLike, records: Sequence[WVRecord]) -> Path:
        return ReportRepository._write_rows(path, WV_COLUMNS, (r.to_row() for r in records))

    @staticmethod
    def write_table(path: PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
        return ReportRepository._write_rows(path, header, rows)

    @staticmethod
    def read_rows(path: PathLike) -> List[List[str]]:
        with open(path, "r", encoding="utf-8", newline="") as file:
            return list(csv.reader(file))

    @staticmethod
    def write_summary(path: PathLike, lines: Sequence[str]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write("\n".join(lines) + "\n")
        return path
