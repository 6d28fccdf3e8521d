"""Curve sets: collections of discretised functions on a shared argument grid.

A curve set stores ``s`` curves evaluated on the same grid of ``d`` argument
values.  The grid is either one-dimensional (ordered real arguments) or
two-dimensional (pixel centres with widths and heights).  The first
``obs_count`` curves are observed data, the rest are simulations or
permutations.  ``obs_count = 0`` marks a pure sample, ``obs_count = 1`` the
usual Monte Carlo test setting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DimensionMismatchError,
    InconsistentCurveCountError,
    InconsistentObsCountError,
    NonFiniteError,
    TooFewCurvesError,
)

__all__ = [
    "Alternative",
    "ArgGrid",
    "CurveSet",
    "JointInfo",
    "create_curve_set",
    "validate_joint",
]


class Alternative(Enum):
    """Sidedness of extremeness: which deviations count as extreme."""

    TWO_SIDED = "two.sided"
    LESS = "less"
    GREATER = "greater"

    @classmethod
    def coerce(cls, value) -> "Alternative":
        """Accept an Alternative or one of the usual string spellings."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", ".").replace("_", ".")
        aliases = {
            "two.sided": cls.TWO_SIDED,
            "two": cls.TWO_SIDED,
            "both": cls.TWO_SIDED,
            "less": cls.LESS,
            "lower": cls.LESS,
            "greater": cls.GREATER,
            "upper": cls.GREATER,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown alternative: {value!r}") from None


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class ArgGrid:
    """Argument grid of a curve set.

    One-dimensional grids hold strictly increasing argument values.
    Two-dimensional grids hold pixel centres ``(x, y)`` with positive
    ``width`` and ``height`` per pixel.
    """

    values: np.ndarray | None = None
    pixels: np.ndarray | None = None

    def __post_init__(self):
        if (self.values is None) == (self.pixels is None):
            raise ValueError("exactly one of values and pixels must be given")
        if self.values is not None:
            arr = _as_float_array(self.values, "grid values")
            if arr.ndim != 1 or arr.size == 0:
                raise DimensionMismatchError("1D grid must be a non-empty vector")
            if arr.size > 1 and not np.all(np.diff(arr) > 0):
                raise ValueError("1D grid values must be strictly increasing")
            arr.flags.writeable = False
            object.__setattr__(self, "values", arr)
        else:
            arr = _as_float_array(self.pixels, "grid pixels")
            if arr.ndim != 2 or arr.shape[1] != 4 or arr.shape[0] == 0:
                raise DimensionMismatchError("2D grid must be an array of (x, y, width, height) rows")
            if not np.all(arr[:, 2:] > 0):
                raise ValueError("pixel widths and heights must be positive")
            arr.flags.writeable = False
            object.__setattr__(self, "pixels", arr)

    @classmethod
    def one_d(cls, values) -> "ArgGrid":
        return cls(values=np.asarray(values, dtype=float))

    @classmethod
    def two_d(cls, x, y, width, height) -> "ArgGrid":
        cols = [np.asarray(c, dtype=float).ravel() for c in (x, y, width, height)]
        if len({c.size for c in cols}) != 1:
            raise DimensionMismatchError("pixel coordinate vectors must share one length")
        return cls(pixels=np.column_stack(cols))

    @classmethod
    def default(cls, d: int) -> "ArgGrid":
        """Integer grid 1..d, used when arguments carry no meaning of their own."""
        return cls.one_d(np.arange(1.0, d + 1.0))

    @property
    def is_2d(self) -> bool:
        return self.pixels is not None

    @property
    def size(self) -> int:
        return int(self.pixels.shape[0] if self.is_2d else self.values.size)

    def __eq__(self, other):
        if not isinstance(other, ArgGrid):
            return NotImplemented
        if self.is_2d != other.is_2d:
            return False
        if self.is_2d:
            return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))
        return self.values.shape == other.values.shape and bool(np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class CurveSet:
    """``s`` curves on a shared grid, observed curves first.

    Attributes
    ----------
    grid : ArgGrid
        Common argument grid with ``d`` components.
    values : ndarray of shape (s, d)
        One row per curve.
    obs_count : int
        Number of leading rows that are observed data.
    """

    grid: ArgGrid
    values: np.ndarray
    obs_count: int = 0

    def __post_init__(self):
        if not isinstance(self.grid, ArgGrid):
            # accept a plain vector of argument values as a 1D grid
            object.__setattr__(self, "grid", ArgGrid.one_d(self.grid))
        arr = _as_float_array(self.values, "curve values")
        if arr.ndim != 2:
            raise DimensionMismatchError("curve values must form an (s, d) matrix")
        if arr.shape[1] != self.grid.size:
            raise DimensionMismatchError(
                f"curves have {arr.shape[1]} components but the grid has {self.grid.size}"
            )
        if arr.shape[0] < 2:
            raise TooFewCurvesError("a curve set needs at least two curves")
        if not 0 <= self.obs_count <= arr.shape[0]:
            raise ValueError("obs_count must lie in [0, s]")
        arr = arr.copy() if arr.flags.writeable else arr
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def s(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[1])

    @property
    def observed(self) -> np.ndarray:
        return self.values[: self.obs_count]


@dataclass(frozen=True)
class JointInfo:
    """Shape summary of a validated joint collection of curve sets."""

    G: int
    s: int
    d: tuple[int, ...] = field(default_factory=tuple)
    obs_count: int = 0

    @property
    def d_total(self) -> int:
        return int(sum(self.d))


def create_curve_set(grid: ArgGrid, observed=None, simulated=None, *, values=None, obs_count=None) -> CurveSet:
    """Assemble a curve set from observed and simulated curves.

    Parameters
    ----------
    grid : ArgGrid
        Shared argument grid.
    observed : array_like, optional
        A single curve (length ``d``) or a matrix of observed curves.
    simulated : array_like, optional
        Matrix of simulated curves, one row per curve.
    values, obs_count : optional
        Alternatively pass the stacked matrix directly.
    """
    if values is not None:
        return CurveSet(grid, np.asarray(values, dtype=float), int(obs_count or 0))
    blocks = []
    m = 0
    if observed is not None:
        obs = np.asarray(observed, dtype=float)
        if obs.ndim == 1:
            obs = obs[None, :]
        blocks.append(obs)
        m = obs.shape[0]
    if simulated is not None:
        sim = np.asarray(simulated, dtype=float)
        if sim.ndim == 1:
            sim = sim[None, :]
        blocks.append(sim)
    if not blocks:
        raise TooFewCurvesError("no curves given")
    return CurveSet(grid, np.vstack(blocks), m)


def validate_joint(sets) -> JointInfo:
    """Check that curve sets can be combined and summarise their shape.

    All sets must hold the same number of curves and agree on ``obs_count``.
    Component dimensions ``d_j`` may differ.
    """
    sets = list(sets)
    if not sets:
        raise TooFewCurvesError("empty collection of curve sets")
    s = sets[0].s
    obs = sets[0].obs_count
    for cs in sets[1:]:
        if cs.s != s:
            raise InconsistentCurveCountError(f"curve counts differ: {cs.s} vs {s}")
        if cs.obs_count != obs:
            raise InconsistentObsCountError(f"observed counts differ: {cs.obs_count} vs {obs}")
    return JointInfo(G=len(sets), s=s, d=tuple(cs.d for cs in sets), obs_count=obs)
