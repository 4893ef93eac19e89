"""The bundled toy census: a 5,000-row categorical table with known structure.

A desk-scale stand-in for a real survey extract.  Education depends on age,
income on education, marital status and work class on age, weekly hours on
income; sex and region are independent.  The CSV shipped under ``data/`` is
the exact output of :func:`make_toy_census` with the default seed.
"""

from __future__ import annotations

import csv
import sys
from importlib.resources import files

import numpy as np

TOY_CENSUS_ROWS = 5000
TOY_CENSUS_SEED = 20130613

HEADER = (
    "age_band",
    "sex",
    "education",
    "income_band",
    "marital",
    "region",
    "hours_band",
    "work_class",
)

AGE = ("18-25", "26-35", "36-45", "46-55", "56-65", "66+")
SEX = ("F", "M")
EDUCATION = ("none", "highschool", "some-college", "bachelors", "graduate")
INCOME = ("low", "lower-middle", "upper-middle", "high")
MARITAL = ("never-married", "married", "divorced", "widowed")
REGION = ("gulf", "midwest", "mountain", "northeast", "pacific", "plains", "south", "west")
HOURS = ("part-time", "full-time", "overtime", "irregular")
WORK = ("private", "government", "self-employed", "unemployed", "retired")

_AGE_P = (0.14, 0.20, 0.19, 0.17, 0.15, 0.15)
_SEX_P = (0.51, 0.49)
_REGION_P = (0.11, 0.13, 0.12, 0.13, 0.12, 0.12, 0.14, 0.13)

_EDU_GIVEN_AGE = (
    (0.05, 0.35, 0.40, 0.17, 0.03),
    (0.04, 0.28, 0.28, 0.27, 0.13),
    (0.05, 0.30, 0.27, 0.24, 0.14),
    (0.06, 0.36, 0.26, 0.20, 0.12),
    (0.08, 0.40, 0.24, 0.18, 0.10),
    (0.12, 0.45, 0.22, 0.14, 0.07),
)

_INCOME_GIVEN_EDU = (
    (0.60, 0.28, 0.09, 0.03),
    (0.38, 0.38, 0.18, 0.06),
    (0.22, 0.38, 0.28, 0.12),
    (0.10, 0.26, 0.38, 0.26),
    (0.05, 0.15, 0.35, 0.45),
)

_MARITAL_GIVEN_AGE = (
    (0.80, 0.17, 0.02, 0.01),
    (0.45, 0.47, 0.07, 0.01),
    (0.22, 0.62, 0.14, 0.02),
    (0.13, 0.64, 0.19, 0.04),
    (0.08, 0.62, 0.20, 0.10),
    (0.05, 0.52, 0.16, 0.27),
)

_HOURS_GIVEN_INCOME = (
    (0.38, 0.34, 0.06, 0.22),
    (0.20, 0.55, 0.10, 0.15),
    (0.10, 0.62, 0.18, 0.10),
    (0.06, 0.55, 0.30, 0.09),
)

_WORK_GIVEN_AGE = (
    (0.62, 0.10, 0.05, 0.22, 0.01),
    (0.66, 0.14, 0.09, 0.10, 0.01),
    (0.63, 0.16, 0.12, 0.07, 0.02),
    (0.60, 0.17, 0.13, 0.06, 0.04),
    (0.48, 0.15, 0.12, 0.05, 0.20),
    (0.12, 0.04, 0.07, 0.02, 0.75),
)


def _draw_marginal(probs, n: int, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(probs)
    cum[-1] = np.inf
    return (rng.random(n)[:, None] < cum).argmax(axis=1)


def _draw_conditional(table, parent_codes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cum = np.cumsum(np.asarray(table, dtype=float), axis=1)
    cum[:, -1] = np.inf
    rows = cum[parent_codes]
    return (rng.random(len(parent_codes))[:, None] < rows).argmax(axis=1)


def make_toy_census(
    n: int = TOY_CENSUS_ROWS, seed: int = TOY_CENSUS_SEED
) -> tuple[tuple[str, ...], list[tuple[str, ...]]]:
    """Sample the toy census; returns (header, label rows)."""
    for table in (_EDU_GIVEN_AGE, _INCOME_GIVEN_EDU, _MARITAL_GIVEN_AGE,
                  _HOURS_GIVEN_INCOME, _WORK_GIVEN_AGE):
        for row in table:
            assert abs(sum(row) - 1.0) < 1e-12
    rng = np.random.default_rng(seed)
    age = _draw_marginal(_AGE_P, n, rng)
    sex = _draw_marginal(_SEX_P, n, rng)
    edu = _draw_conditional(_EDU_GIVEN_AGE, age, rng)
    income = _draw_conditional(_INCOME_GIVEN_EDU, edu, rng)
    marital = _draw_conditional(_MARITAL_GIVEN_AGE, age, rng)
    region = _draw_marginal(_REGION_P, n, rng)
    hours = _draw_conditional(_HOURS_GIVEN_INCOME, income, rng)
    work = _draw_conditional(_WORK_GIVEN_AGE, age, rng)
    rows = [
        (
            AGE[age[i]],
            SEX[sex[i]],
            EDUCATION[edu[i]],
            INCOME[income[i]],
            MARITAL[marital[i]],
            REGION[region[i]],
            HOURS[hours[i]],
            WORK[work[i]],
        )
        for i in range(n)
    ]
    return HEADER, rows


def write_toy_census(path) -> None:
    header, rows = make_toy_census()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def toy_census_path() -> str:
    """Filesystem path of the packaged toy census CSV."""
    return str(files("dsynth").joinpath("data/toy_census.csv"))


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "toy_census.csv"
    write_toy_census(target)
    print(f"wrote {TOY_CENSUS_ROWS} rows to {target}")
