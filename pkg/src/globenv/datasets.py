"""Bundled example data.

The growth data are the heights of 54 girls and 39 boys of the Berkeley
Growth Study, measured at 31 ages between 1 and 18 years.  They ship here
as plain CSV; the derived curve-set files hold the girls' heights at the
integer ages 1..18 and the year-to-year height changes.  A small synthetic
two-dimensional image panel is included for examples and tests.
"""

from __future__ import annotations

import csv
from importlib.resources import as_file, files

import numpy as np

from .curves import CurveSet
from .io import read_curve_set

__all__ = [
    "growth_full",
    "growth_curve_sets",
    "growth_heights_at",
    "growth_samples_path",
    "data_path",
    "image_panel",
]


def data_path(name: str):
    """Context manager yielding a real filesystem path to a bundled file."""
    return as_file(files("globenv").joinpath("data", name))


def growth_full() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ages (31,), girls' heights (31, 54) and boys' heights (31, 39)."""
    with data_path("growth_berkeley.csv") as p:
        with open(p, newline="") as fh:
            rows = list(csv.reader(fh))
    header = rows[0]
    body = np.asarray([[float(c) for c in row] for row in rows[1:]])
    girls = [i for i, name in enumerate(header) if name.startswith("girl")]
    boys = [i for i, name in enumerate(header) if name.startswith("boy")]
    return body[:, 0], body[:, girls], body[:, boys]


def growth_curve_sets() -> tuple[CurveSet, CurveSet]:
    """The girls' height curves at ages 1..18 and their yearly changes."""
    with data_path("growth_heights.csv") as p:
        heights = read_curve_set(p)
    with data_path("growth_changes.csv") as p:
        changes = read_curve_set(p)
    return heights, changes


def growth_heights_at(age: float) -> tuple[np.ndarray, np.ndarray]:
    """Girls' and boys' heights at one measurement age."""
    ages, girls, boys = growth_full()
    idx = np.nonzero(ages == float(age))[0]
    if idx.size != 1:
        raise ValueError(f"no measurement at age {age}; ages run {ages.min()}..{ages.max()}")
    return girls[idx[0]], boys[idx[0]]


def growth_samples_path(age: int):
    """Path context for the bundled two-sample file at age 10 or 14."""
    if age not in (10, 14):
        raise ValueError("bundled sample files exist for ages 10 and 14")
    return data_path(f"growth_age{age}.csv")


def image_panel() -> CurveSet:
    """Synthetic 2D curve set: one observed image and simulated noise fields."""
    with data_path("image_panel.csv") as p:
        return read_curve_set(p)
