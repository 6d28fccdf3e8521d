"""Scalar extremeness measures that order the curves of a curve set.

Every measure maps each curve to one number.  The orientation says which end
of the scale is extreme: for rank based measures small values are extreme,
for deviation based measures large values are.

========== ============================================ ================
type       value for curve i                            extreme end
========== ============================================ ================
rank       min_k of the sided pointwise ranks           smaller
erl        fraction of curves whose ascending sorted    smaller
           sided rank vector is strictly lex-smaller
cont       min_k of the sided continuous ranks, / s     smaller
area       rank refined by the average shortfall of     smaller
           the continuous ranks below it, / s
qdir       max_k deviation from the central curve,      larger
           scaled by the directional quantile spread
st         max_k deviation scaled by the pointwise      larger
           standard deviation
unscaled   max_k absolute deviation                     larger
========== ============================================ ================

Lists of curve sets are combined either in one step, concatenating the
components into long vectors, or in two steps, reducing each component to its
own measure first and then applying the one-sided erl measure to the vectors
of component measures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .curves import Alternative, ArgGrid, CurveSet, validate_joint
from .errors import BetaTooSmallError, DegenerateScaleError, DimensionMismatchError, NonFiniteError
from .ranks import continuous_rank_matrix, rank_matrix, side_ranks

__all__ = [
    "MeasureType",
    "Orientation",
    "MeasureSpec",
    "MeasureResult",
    "extreme_rank",
    "erl",
    "cont",
    "area",
    "qdir",
    "st",
    "unscaled",
    "compute_measure",
    "forder",
    "two_step_measure",
    "concatenate_sets",
]


class MeasureType(Enum):
    RANK = "rank"
    ERL = "erl"
    CONT = "cont"
    AREA = "area"
    QDIR = "qdir"
    ST = "st"
    UNSCALED = "unscaled"

    @classmethod
    def coerce(cls, value) -> "MeasureType":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key == "extreme_rank":
            key = "rank"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown measure type: {value!r}") from None


class Orientation(Enum):
    SMALLER_EXTREME = "smaller"
    LARGER_EXTREME = "larger"


#: Measure types whose envelope is built from order statistics or hulls.
RANK_BASED = frozenset({MeasureType.RANK, MeasureType.ERL, MeasureType.CONT, MeasureType.AREA})
#: Measure types whose envelope is built around a central curve with scales.
DEVIATION_BASED = frozenset({MeasureType.QDIR, MeasureType.ST, MeasureType.UNSCALED})


@dataclass(frozen=True)
class MeasureSpec:
    """Choice of measure, sidedness and deviation options.

    Parameters
    ----------
    type : MeasureType or str
        One of the seven measure types.
    alternative : Alternative or str
        Which deviations count as extreme.
    beta_percent : float
        Directional quantile fraction in percent, in (0, 50).  Only used by
        the qdir measure; it must exceed ``100 / s`` for the quantiles to be
        resolvable from ``s`` curves.
    central : array_like, optional
        Central curve for deviation measures.  Defaults to the pointwise
        sample mean over all curves.
    """

    type: MeasureType = MeasureType.ERL
    alternative: Alternative = Alternative.TWO_SIDED
    beta_percent: float = 2.5
    central: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "type", MeasureType.coerce(self.type))
        object.__setattr__(self, "alternative", Alternative.coerce(self.alternative))
        if not 0.0 < self.beta_percent < 50.0:
            raise ValueError("beta_percent must lie in (0, 50)")
        if self.central is not None:
            arr = np.asarray(self.central, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError("central curve contains non-finite values")
            object.__setattr__(self, "central", arr)


@dataclass(frozen=True)
class MeasureResult:
    """Measure values for all curves of a set, observed curves first.

    ``central``, ``scale_low`` and ``scale_up`` are filled for deviation
    based measures and describe the envelope geometry: bounds sit at
    ``central - crit * scale_low`` and ``central + crit * scale_up``.
    """

    values: np.ndarray
    orientation: Orientation
    measure_type: MeasureType
    alternative: Alternative
    central: np.ndarray | None = None
    scale_low: np.ndarray | None = None
    scale_up: np.ndarray | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def s(self) -> int:
        return int(self.values.shape[0])


def _lex_smaller_counts(sorted_rows: np.ndarray) -> np.ndarray:
    """For each row, count rows that are strictly lexicographically smaller."""
    s = sorted_rows.shape[0]
    order = np.lexsort(sorted_rows.T[::-1])
    rows = sorted_rows[order]
    new_group = np.empty(s, dtype=bool)
    new_group[0] = True
    if s > 1:
        new_group[1:] = np.any(rows[1:] != rows[:-1], axis=1)
    starts = np.where(new_group, np.arange(s), 0)
    np.maximum.accumulate(starts, out=starts)
    counts = np.empty(s, dtype=np.intp)
    counts[order] = starts
    return counts


def _erl_values(sided: np.ndarray) -> np.ndarray:
    ordered = np.sort(sided, axis=1)
    return _lex_smaller_counts(ordered) / sided.shape[0]


def extreme_rank(curve_set: CurveSet, alternative=Alternative.TWO_SIDED) -> MeasureResult:
    """Minimum over the grid of the sided pointwise ranks."""
    alt = Alternative.coerce(alternative)
    sided = side_ranks(rank_matrix(curve_set.values), alt)
    return MeasureResult(sided.min(axis=1), Orientation.SMALLER_EXTREME, MeasureType.RANK, alt)


def erl(curve_set: CurveSet, alternative=Alternative.TWO_SIDED) -> MeasureResult:
    """Extreme rank length: breaks extreme-rank ties by comparing the whole
    ascending sorted vector of sided ranks lexicographically."""
    alt = Alternative.coerce(alternative)
    sided = side_ranks(rank_matrix(curve_set.values), alt)
    return MeasureResult(_erl_values(sided), Orientation.SMALLER_EXTREME, MeasureType.ERL, alt)


def _continuous_sided(curve_set: CurveSet, alt: Alternative) -> tuple[np.ndarray, tuple[str, ...]]:
    raw, degenerate = continuous_rank_matrix(curve_set.values)
    warnings = ()
    if degenerate.any():
        warnings = (f"degenerate boundary spacing in {int(degenerate.sum())} column(s), tie-rule fallback used",)
    return side_ranks(raw, alt, continuous=True), warnings


def cont(curve_set: CurveSet, alternative=Alternative.TWO_SIDED) -> MeasureResult:
    """Minimum sided continuous rank over the grid, divided by s."""
    alt = Alternative.coerce(alternative)
    sided, warns = _continuous_sided(curve_set, alt)
    values = sided.min(axis=1) / curve_set.s
    return MeasureResult(values, Orientation.SMALLER_EXTREME, MeasureType.CONT, alt, warnings=warns)


def area(curve_set: CurveSet, alternative=Alternative.TWO_SIDED) -> MeasureResult:
    """Extreme rank refined by the average shortfall of the continuous ranks.

    With extreme rank ``R_i`` and sided continuous ranks ``C_ik``, the value
    is ``(R_i - mean_k((R_i - C_ik) * 1(C_ik < R_i))) / s``.
    """
    alt = Alternative.coerce(alternative)
    R = side_ranks(rank_matrix(curve_set.values), alt).min(axis=1)
    sided, warns = _continuous_sided(curve_set, alt)
    shortfall = R[:, None] - sided
    np.clip(shortfall, 0.0, None, out=shortfall)
    values = (R - shortfall.mean(axis=1)) / curve_set.s
    return MeasureResult(values, Orientation.SMALLER_EXTREME, MeasureType.AREA, alt, warnings=warns)


def _central_curve(curve_set: CurveSet, central) -> np.ndarray:
    if central is None:
        return curve_set.values.mean(axis=0)
    arr = np.asarray(central, dtype=float).ravel()
    if arr.size != curve_set.d:
        raise DimensionMismatchError("central curve length does not match the grid")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("central curve contains non-finite values")
    return arr


def _scale_floor(values: np.ndarray) -> np.ndarray:
    col_range = values.max(axis=0) - values.min(axis=0)
    return 1e-12 * np.maximum(col_range, 1.0)


def _deviation_measure(
    curve_set: CurveSet,
    alt: Alternative,
    t0: np.ndarray,
    scale_low: np.ndarray,
    scale_up: np.ndarray,
    mtype: MeasureType,
) -> MeasureResult:
    V = curve_set.values
    if alt is Alternative.LESS:
        dev = (t0 - V) / scale_low
    elif alt is Alternative.GREATER:
        dev = (V - t0) / scale_up
    else:
        dev = np.where(V >= t0, (V - t0) / scale_up, (t0 - V) / scale_low)
    return MeasureResult(
        dev.max(axis=1),
        Orientation.LARGER_EXTREME,
        mtype,
        alt,
        central=t0,
        scale_low=scale_low,
        scale_up=scale_up,
    )


def qdir(
    curve_set: CurveSet,
    alternative=Alternative.TWO_SIDED,
    beta_percent: float = 2.5,
    central=None,
) -> MeasureResult:
    """Largest deviation from the central curve in units of the directional
    quantile spread, lower and upper deviations scaled separately."""
    alt = Alternative.coerce(alternative)
    if not 0.0 < beta_percent < 50.0:
        raise ValueError("beta_percent must lie in (0, 50)")
    if beta_percent * curve_set.s <= 100.0:
        raise BetaTooSmallError(
            f"beta_percent={beta_percent} cannot be resolved from s={curve_set.s} curves"
        )
    V = curve_set.values
    t0 = _central_curve(curve_set, central)
    beta = beta_percent / 100.0
    q_low = np.quantile(V, beta, axis=0, method="linear")
    q_up = np.quantile(V, 1.0 - beta, axis=0, method="linear")
    scale_low = np.abs(t0 - q_low)
    scale_up = np.abs(q_up - t0)
    floor = _scale_floor(V)
    if np.any(scale_low <= floor) or np.any(scale_up <= floor):
        raise DegenerateScaleError("directional quantile spread vanishes at some grid component")
    return _deviation_measure(curve_set, alt, t0, scale_low, scale_up, MeasureType.QDIR)


def st(curve_set: CurveSet, alternative=Alternative.TWO_SIDED, central=None) -> MeasureResult:
    """Largest deviation from the central curve in pointwise standard
    deviation units."""
    alt = Alternative.coerce(alternative)
    V = curve_set.values
    t0 = _central_curve(curve_set, central)
    sd = V.std(axis=0, ddof=1)
    if np.any(sd <= _scale_floor(V)):
        raise DegenerateScaleError("pointwise standard deviation vanishes at some grid component")
    return _deviation_measure(curve_set, alt, t0, sd, sd, MeasureType.ST)


def unscaled(curve_set: CurveSet, alternative=Alternative.TWO_SIDED, central=None) -> MeasureResult:
    """Largest raw deviation from the central curve."""
    alt = Alternative.coerce(alternative)
    t0 = _central_curve(curve_set, central)
    ones = np.ones(curve_set.d)
    return _deviation_measure(curve_set, alt, t0, ones, ones, MeasureType.UNSCALED)


def compute_measure(curve_set: CurveSet, spec: MeasureSpec) -> MeasureResult:
    """Evaluate the measure described by ``spec`` on one curve set."""
    t = spec.type
    if t is MeasureType.RANK:
        return extreme_rank(curve_set, spec.alternative)
    if t is MeasureType.ERL:
        return erl(curve_set, spec.alternative)
    if t is MeasureType.CONT:
        return cont(curve_set, spec.alternative)
    if t is MeasureType.AREA:
        return area(curve_set, spec.alternative)
    if t is MeasureType.QDIR:
        return qdir(curve_set, spec.alternative, spec.beta_percent, spec.central)
    if t is MeasureType.ST:
        return st(curve_set, spec.alternative, spec.central)
    return unscaled(curve_set, spec.alternative, spec.central)


def concatenate_sets(sets) -> CurveSet:
    """Join the components of a collection into one long-vector curve set."""
    sets = list(sets)
    info = validate_joint(sets)
    values = np.concatenate([cs.values for cs in sets], axis=1)
    return CurveSet(ArgGrid.default(info.d_total), values, info.obs_count)


def two_step_measure(sets, spec: MeasureSpec) -> tuple[MeasureResult, list[MeasureResult]]:
    """Combine components by measuring each separately and applying the
    one-sided erl measure to the vectors of component measures.

    Larger-extreme component measures are negated first so that smaller
    always means more extreme in the second stage.
    """
    sets = list(sets)
    validate_joint(sets)
    parts = [compute_measure(cs, spec) for cs in sets]
    columns = [
        -p.values if p.orientation is Orientation.LARGER_EXTREME else p.values
        for p in parts
    ]
    stage = np.column_stack(columns)
    sided = side_ranks(rank_matrix(stage), Alternative.LESS)
    values = _erl_values(sided)
    warnings = tuple(w for p in parts for w in p.warnings)
    result = MeasureResult(
        values, Orientation.SMALLER_EXTREME, MeasureType.ERL, Alternative.LESS, warnings=warnings
    )
    return result, parts


def forder(sets, spec: MeasureSpec | None = None, nstep: int = 2) -> MeasureResult:
    """Order the curves of one curve set or of a joint collection.

    Parameters
    ----------
    sets : CurveSet or iterable of CurveSet
        A single set, or components measured jointly.
    spec : MeasureSpec, optional
        Measure to use; defaults to the two-sided erl measure.
    nstep : int
        For collections, 1 concatenates components first, 2 combines the
        component measures with a second-stage erl measure.
    """
    if spec is None:
        spec = MeasureSpec()
    if isinstance(sets, CurveSet):
        return compute_measure(sets, spec)
    sets = list(sets)
    if len(sets) == 1:
        return compute_measure(sets[0], spec)
    if nstep == 1:
        return compute_measure(concatenate_sets(sets), spec)
    if nstep != 2:
        raise ValueError("nstep must be 1 or 2")
    return two_step_measure(sets, spec)[0]
