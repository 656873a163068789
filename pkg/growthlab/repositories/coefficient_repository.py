from pathlib import Path
from typing import Dict, Iterable, List, Union

from growthlab.entities.multi_index import MultiIndex
from growthlab.entities.power_series import PowerSeries
from growthlab.services.errors import DimensionMismatchError, DuplicateIndexError

PathLike = Union[str, Path]


class CoefficientRepository:
    """
    Plain-text coefficient files.

    Header ``dim m degree D [exact]``, then one term per line as
    ``α_1 … α_m  re  im``; ``#`` starts a comment. Floats are written with
    ``repr`` so reading back gives the same bits.
    """

    @staticmethod
    def format(series: PowerSeries) -> str:
        header = f"dim {series.dimension} degree {series.truncation_degree}"
        if series.exact:
            header += " exact"
        lines: List[str] = [header]
        for index, value in series.terms():
            exponents = " ".join(str(e) for e in index.exponents)
            lines.append(f"{exponents}  {value.real!r}  {value.imag!r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> PowerSeries:
        """Parse the coefficient file format; duplicate indices are an error."""
        rows = CoefficientRepository._content_lines(text.splitlines())
        if not rows:
            raise ValueError("Coefficient file has no header")

        header = rows[0].split()
        if len(header) not in (4, 5) or header[0] != "dim" or header[2] != "degree" \
                or (len(header) == 5 and header[4] != "exact"):
            raise ValueError(f"Malformed header: '{rows[0]}'")
        dimension, degree = int(header[1]), int(header[3])
        exact = len(header) == 5

        coefficients: Dict[MultiIndex, complex] = {}
        for row in rows[1:]:
            fields = row.split()
            if len(fields) != dimension + 2:
                raise DimensionMismatchError(
                    f"Expected {dimension} exponents and 2 floats, got: '{row}'")
            index = MultiIndex(int(e) for e in fields[:dimension])
            if index in coefficients:
                raise DuplicateIndexError(f"Index {index} given more than once")
            coefficients[index] = complex(float(fields[dimension]), float(fields[dimension + 1]))
        return PowerSeries(dimension, coefficients, degree, exact=exact)

    @staticmethod
    def _content_lines(lines: Iterable[str]) -> List[str]:
        content = []
        for line in lines:
            stripped = line.split("#", 1)[0].strip()
            if stripped:
                content.append(stripped)
        return content

    @staticmethod
    def read(path: PathLike) -> PowerSeries:
        with open(path, "r", encoding="utf-8") as file:
            return CoefficientRepository.parse(file.read())

    @staticmethod
    def write(series: PowerSeries, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as file:
            file.write(CoefficientRepository.format(series))
        return path
