"""Pointwise ranks of curves within a curve set.

For each grid component the ``s`` curve values are ranked from the smallest
(rank 1) to the largest (rank ``s``), ties sharing the average of the ranks
they occupy.  Sided ranks turn small values into small ranks for the chosen
alternative: ``r`` for "less", ``s + 1 - r`` for "greater" and
``min(r, s + 1 - r)`` for the two-sided case.

Continuous ranks refine integer ranks by how far a value sits between its
sorted neighbours.  With sorted column values ``x_[1] <= ... <= x_[s]``, the
continuous rank of the value at sorted position ``i`` is

* ``i - 1 + (x_[i] - x_[i-1]) / (x_[i+1] - x_[i-1])`` for interior positions,
* ``exp(-(x_[2] - x_[1]) / (x_[s] - x_[2]))`` at the lower boundary,
* ``s - exp(-(x_[s] - x_[s-1]) / (x_[s-1] - x_[1]))`` at the upper boundary.

A block of tied values at sorted positions ``i..j`` shares the continuous
rank ``(i + j) / 2 - 1/2``.  When a boundary denominator vanishes without the
boundary value being tied, the tie-rule value (``0.5`` or ``s - 0.5``) is used
and the column is flagged as degenerate.  The sided transform for continuous
ranks uses ``s - c`` in place of ``s + 1 - r``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .curves import Alternative, CurveSet
from .errors import TooFewCurvesError

__all__ = [
    "PointwiseRanks",
    "ContinuousRanks",
    "pointwise_ranks",
    "continuous_ranks",
    "rank_matrix",
    "continuous_rank_matrix",
    "side_ranks",
]


def rank_matrix(values: np.ndarray) -> np.ndarray:
    """Tie-averaged ranks of each column of an (s, d) matrix."""
    return rankdata(values, method="average", axis=0)


def continuous_rank_matrix(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Continuous ranks of each column of an (s, d) matrix.

    Returns the rank matrix and a boolean vector flagging columns where a
    degenerate boundary denominator forced the tie-rule fallback.
    """
    V = np.asarray(values, dtype=float)
    s, d = V.shape
    if s < 3:
        raise TooFewCurvesError("continuous ranks need at least three curves")

    order = np.argsort(V, axis=0, kind="stable")
    XS = np.take_along_axis(V, order, axis=0)
    C = np.empty_like(V)

    # Interior positions, valid wherever the spanning gap is positive.  Tied
    # positions produce a zero denominator here and are overwritten below.
    span = XS[2:] - XS[:-2]
    safe = np.where(span > 0, span, 1.0)
    pos = np.arange(1, s - 1, dtype=float)[:, None]
    C[1:-1] = pos + np.where(span > 0, (XS[1:-1] - XS[:-2]) / safe, 0.0)

    lo_den = XS[-1] - XS[1]
    hi_den = XS[-2] - XS[0]
    lo_deg = (XS[0] < XS[1]) & (lo_den <= 0)
    hi_deg = (XS[-1] > XS[-2]) & (hi_den <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        C[0] = np.where(lo_den > 0, np.exp(-(XS[1] - XS[0]) / np.where(lo_den > 0, lo_den, 1.0)), 0.5)
        C[-1] = np.where(hi_den > 0, s - np.exp(-(XS[-1] - XS[-2]) / np.where(hi_den > 0, hi_den, 1.0)), s - 0.5)

    # Tie blocks share the average of the integer positions they occupy.
    for k in np.nonzero(np.any(XS[1:] == XS[:-1], axis=0))[0]:
        col = XS[:, k]
        i = 0
        while i < s:
            j = i
            while j + 1 < s and col[j + 1] == col[i]:
                j += 1
            if j > i:
                C[i : j + 1, k] = (i + j + 1) / 2.0
            i = j + 1

    out = np.empty_like(V)
    np.put_along_axis(out, order, C, axis=0)
    return out, lo_deg | hi_deg


def side_ranks(raw: np.ndarray, alternative: Alternative, *, continuous: bool = False) -> np.ndarray:
    """Fold raw low-to-high ranks so that small sided rank means extreme."""
    s = raw.shape[0]
    high = s - raw if continuous else s + 1 - raw
    if alternative is Alternative.LESS:
        return raw
    if alternative is Alternative.GREATER:
        return high
    return np.minimum(raw, high)


@dataclass(frozen=True)
class PointwiseRanks:
    """Raw and sided tie-averaged ranks of a curve set."""

    raw: np.ndarray
    sided: np.ndarray
    alternative: Alternative


@dataclass(frozen=True)
class ContinuousRanks:
    """Raw and sided continuous ranks, with degenerate-column flags."""

    raw: np.ndarray
    sided: np.ndarray
    alternative: Alternative
    degenerate_columns: np.ndarray


def pointwise_ranks(curve_set: CurveSet, alternative=Alternative.TWO_SIDED) -> PointwiseRanks:
    """Rank every curve at every grid component.

    Parameters
    ----------
    curve_set : CurveSet
        Curves to rank.
    alternative : Alternative or str
        Which deviations count as extreme.
    """
    alt = Alternative.coerce(alternative)
    raw = rank_matrix(curve_set.values)
    return PointwiseRanks(raw=raw, sided=side_ranks(raw, alt), alternative=alt)


def continuous_ranks(curve_set: CurveSet, alternative=Alternative.TWO_SIDED) -> ContinuousRanks:
    """Continuously interpolated ranks of every curve at every component.

    Needs at least three curves.  Columns that required the degenerate
    boundary fallback are flagged in ``degenerate_columns``.
    """
    alt = Alternative.coerce(alternative)
    raw, degenerate = continuous_rank_matrix(curve_set.values)
    return ContinuousRanks(
        raw=raw,
        sided=side_ranks(raw, alt, continuous=True),
        alternative=alt,
        degenerate_columns=degenerate,
    )
