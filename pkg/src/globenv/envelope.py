"""Global envelopes and Monte Carlo envelope tests.

A global envelope is a pair of bounding curves with simultaneous coverage
over the whole grid.  Every envelope here has an intrinsic graphical
interpretation: with measure values ``M_i`` and critical value ``m_alpha``,
a curve is extreme precisely when its measure is on the extreme side of
``m_alpha``, and that happens precisely when the curve leaves the envelope
somewhere on an informative bound.  The critical value is the largest
measure value (smallest, for larger-extreme measures) whose exclusion
budget ``#{i: M_i more extreme} <= alpha * s`` is respected.

Three constructions cover the seven measure types:

* rank: pointwise order statistics at depth ``l = ceil(m_alpha)``,
* erl, cont, area: the pointwise hull of the selected curves,
* qdir, st, unscaled: central curve plus scaled critical deviations.

Collections of curve sets are combined in one step (concatenation) or two
steps (component measures reduced by a second-stage erl measure); the
two-step combined envelope is the hull of the jointly selected curves in
every component.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .curves import Alternative, ArgGrid, CurveSet, validate_joint
from .errors import AlphaInfeasibleError, AlphaTooExtremeWarning, NoObservedCurveError
from .measures import (
    DEVIATION_BASED,
    MeasureResult,
    MeasureSpec,
    MeasureType,
    Orientation,
    _erl_values,
    compute_measure,
    concatenate_sets,
    two_step_measure,
)
from .ranks import rank_matrix, side_ranks

__all__ = [
    "CriticalValue",
    "GlobalEnvelope",
    "CombinedEnvelope",
    "critical_value",
    "rank_envelope",
    "hull_envelope",
    "parametric_envelope",
    "central_region",
    "global_envelope_test",
    "combined_envelope",
]


class CriticalValue(NamedTuple):
    critical: float
    selection: np.ndarray
    warnings: tuple[str, ...]


def _exclusion_budget(alpha: float, s: int) -> int:
    # floor with a tiny slack so that alpha * s equal to an integer up to
    # floating point noise grants the full integer budget
    return int(np.floor(alpha * s + 1e-9))


def _largest_within_budget(values: np.ndarray, budget: int) -> float:
    """Largest value v among ``values`` with #{values < v} <= budget."""
    u, counts = np.unique(values, return_counts=True)
    below = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return float(u[np.searchsorted(below, budget, side="right") - 1])


def critical_value(measures: MeasureResult, alpha: float) -> CriticalValue:
    """Critical measure value and the selection of non-extreme curves.

    For smaller-extreme measures the critical value is the largest observed
    measure value whose strict-exclusion count stays within ``alpha * s``;
    for larger-extreme measures the rule is mirrored.  The selection holds
    the curves at or inside the critical value.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    M = measures.values
    s = M.shape[0]
    budget = _exclusion_budget(alpha, s)
    if measures.orientation is Orientation.SMALLER_EXTREME:
        crit = _largest_within_budget(M, budget)
        selection = M >= crit
    else:
        crit = -_largest_within_budget(-M, budget)
        selection = M <= crit
    warns = ()
    if selection.all():
        warns = ("the requested level keeps every curve in the central region",)
        _warnings.warn(warns[0], AlphaTooExtremeWarning, stacklevel=2)
    return CriticalValue(crit, selection, warns)


@dataclass(frozen=True)
class GlobalEnvelope:
    """A global envelope with its defining measure and critical value.

    ``uninformative_bound`` marks the bound that is not part of a one-sided
    envelope; it is reported at the pointwise data extreme and exits across
    it do not count.  ``p``, ``p_interval`` and ``mask`` are filled by tests,
    where the first curve of the set is the observed one.
    """

    grid: ArgGrid
    measure_type: MeasureType
    alternative: Alternative
    alpha: float
    critical: float
    lower: np.ndarray
    upper: np.ndarray
    central: np.ndarray
    measures: MeasureResult
    uninformative_bound: str | None = None
    p: float | None = None
    p_interval: tuple[float, float] | None = None
    mask: np.ndarray | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)
    construction: str = "hull"

    def __post_init__(self):
        for name in ("lower", "upper", "central"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr = arr.copy() if arr.flags.writeable else arr
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def coverage(self) -> float:
        return 1.0 - self.alpha

    def outside_mask(self, curve) -> np.ndarray:
        """Where a curve exits the informative bounds (strict exits).

        Parametric envelopes compare scaled deviations against the critical
        value with the same arithmetic that produced the measure, so the
        classification agrees with the measure rule exactly; comparing
        against ``central + critical * scale`` instead can disagree by one
        floating point ulp for a curve sitting exactly on a bound.
        """
        c = np.asarray(curve, dtype=float)
        if self.construction == "parametric":
            m = self.measures
            below = (self.central - c) / m.scale_low > self.critical
            above = (c - self.central) / m.scale_up > self.critical
        else:
            below = c < self.lower
            above = c > self.upper
        if self.uninformative_bound == "upper":
            return below
        if self.uninformative_bound == "lower":
            return above
        return below | above

    def contains(self, curve) -> bool:
        return not bool(self.outside_mask(curve).any())

    def to_dict(self) -> dict:
        out = {
            "type": self.measure_type.value,
            "alternative": self.alternative.value,
            "alpha": self.alpha,
            "critical": self.critical,
            "p": self.p,
        }
        if self.p_interval is not None:
            out["p_interval"] = list(self.p_interval)
        out["grid"] = _grid_dict(self.grid)
        out["central"] = self.central.tolist()
        out["lower"] = self.lower.tolist()
        out["upper"] = self.upper.tolist()
        out["measures"] = self.measures.values.tolist()
        out["mask"] = None if self.mask is None else [bool(v) for v in self.mask]
        if self.uninformative_bound is not None:
            out["uninformative_bound"] = self.uninformative_bound
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


@dataclass(frozen=True)
class CombinedEnvelope:
    """Per-component envelopes built from one joint curve selection."""

    components: tuple[GlobalEnvelope, ...]
    nstep: int
    alpha: float
    critical: float
    measures: MeasureResult
    p: float | None = None
    p_interval: tuple[float, float] | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def coverage(self) -> float:
        return 1.0 - self.alpha

    @property
    def G(self) -> int:
        return len(self.components)

    def outside_mask(self, curves) -> list[np.ndarray]:
        return [env.outside_mask(c) for env, c in zip(self.components, curves)]

    def contains(self, curves) -> bool:
        return all(env.contains(c) for env, c in zip(self.components, curves))

    def to_dict(self) -> dict:
        out = {
            "type": "combined",
            "nstep": self.nstep,
            "alpha": self.alpha,
            "critical": self.critical,
            "p": self.p,
        }
        if self.p_interval is not None:
            out["p_interval"] = list(self.p_interval)
        out["components"] = [env.to_dict() for env in self.components]
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


def _grid_dict(grid: ArgGrid) -> dict:
    if grid.is_2d:
        p = grid.pixels
        return {
            "x": p[:, 0].tolist(),
            "y": p[:, 1].tolist(),
            "width": p[:, 2].tolist(),
            "height": p[:, 3].tolist(),
        }
    return {"r": grid.values.tolist()}


def _uninformative_side(alternative: Alternative) -> str | None:
    if alternative is Alternative.LESS:
        return "upper"
    if alternative is Alternative.GREATER:
        return "lower"
    return None


def _measure_pvalue(values: np.ndarray, orientation: Orientation) -> float:
    obs = values[0]
    if orientation is Orientation.SMALLER_EXTREME:
        return float(np.mean(values <= obs))
    return float(np.mean(values >= obs))


def _rank_p(curve_set: CurveSet, alt: Alternative, R: np.ndarray) -> tuple[float, tuple[float, float]]:
    """Tie-broken p and the p-interval of the extreme rank measure."""
    p_low = float(np.mean(R < R[0]))
    p_upp = float(np.mean(R <= R[0]))
    sided = side_ranks(rank_matrix(curve_set.values), alt)
    E = _erl_values(sided)
    return float(np.mean(E <= E[0])), (p_low, p_upp)


def _hull_bounds(values: np.ndarray, selection: np.ndarray, side: str | None) -> tuple[np.ndarray, np.ndarray]:
    chosen = values[selection]
    lower = chosen.min(axis=0)
    upper = chosen.max(axis=0)
    # the untested bound of a one-sided envelope is the full data extreme
    if side == "upper":
        upper = values.max(axis=0)
    elif side == "lower":
        lower = values.min(axis=0)
    return lower, upper


def _build_envelope(
    curve_set: CurveSet,
    measures: MeasureResult,
    alpha: float,
    *,
    with_p: bool = False,
) -> GlobalEnvelope:
    crit, selection, warns = critical_value(measures, alpha)
    mtype = measures.measure_type
    alt = measures.alternative
    side = _uninformative_side(alt)
    V = curve_set.values
    s = curve_set.s
    p = p_interval = None
    construction = "hull"

    if mtype in DEVIATION_BASED:
        construction = "parametric"
        central = measures.central
        lower = central - crit * measures.scale_low
        upper = central + crit * measures.scale_up
        if side == "upper":
            upper = V.max(axis=0)
        elif side == "lower":
            lower = V.min(axis=0)
    elif mtype is MeasureType.RANK:
        construction = "rank"
        depth = int(np.ceil(crit - 1e-9))
        max_depth = max(1, s // 2)
        if depth > max_depth:
            depth = max_depth
            warns = warns + ("critical rank depth clamped to the median band",)
        depth = max(1, depth)
        ordered = np.sort(V, axis=0)
        lower = ordered[depth - 1]
        upper = ordered[s - depth]
        if side == "upper":
            upper = ordered[-1]
        elif side == "lower":
            lower = ordered[0]
        central = np.median(V, axis=0)
        if with_p:
            p, p_interval = _rank_p(curve_set, alt, measures.values)
    else:
        lower, upper = _hull_bounds(V, selection, side)
        central = np.median(V, axis=0)

    if with_p and p is None:
        p = _measure_pvalue(measures.values, measures.orientation)

    env = GlobalEnvelope(
        grid=curve_set.grid,
        measure_type=mtype,
        alternative=alt,
        alpha=alpha,
        critical=crit,
        lower=lower,
        upper=upper,
        central=central,
        measures=measures,
        uninformative_bound=side,
        p=p,
        p_interval=p_interval,
        warnings=warns + measures.warnings,
        construction=construction,
    )
    if with_p:
        env = replace(env, mask=env.outside_mask(V[0]))
    return env


def rank_envelope(curve_set: CurveSet, alpha: float = 0.05, alternative=Alternative.TWO_SIDED) -> GlobalEnvelope:
    """Global rank envelope from pointwise order statistics.

    When the set carries one observed curve the result also holds the
    p-interval of the extreme rank measure and its erl tie-broken p.
    """
    alt = Alternative.coerce(alternative)
    m = compute_measure(curve_set, MeasureSpec(MeasureType.RANK, alt))
    return _build_envelope(curve_set, m, alpha, with_p=curve_set.obs_count == 1)


def hull_envelope(curve_set: CurveSet, measures: MeasureResult, alpha: float) -> GlobalEnvelope:
    """Envelope as the pointwise hull of the curves selected by the measure."""
    if measures.orientation is not Orientation.SMALLER_EXTREME:
        raise ValueError("hull envelopes need a smaller-extreme measure")
    return _build_envelope(curve_set, measures, alpha)


def parametric_envelope(curve_set: CurveSet, measures: MeasureResult, alpha: float) -> GlobalEnvelope:
    """Envelope around the central curve at the critical scaled deviation."""
    if measures.central is None or measures.scale_low is None:
        raise ValueError("parametric envelopes need a deviation measure with central curve and scales")
    return _build_envelope(curve_set, measures, alpha)


def _combined_core(sets, spec: MeasureSpec, alpha: float, nstep: int, *, with_p: bool) -> CombinedEnvelope:
    sets = list(sets)
    validate_joint(sets)
    if nstep not in (1, 2):
        raise ValueError("nstep must be 1 or 2")

    if len(sets) == 1:
        # degenerate combining: exactly the single-set construction
        single = _build_envelope(sets[0], compute_measure(sets[0], spec), alpha, with_p=with_p)
        return CombinedEnvelope(
            components=(single,),
            nstep=nstep,
            alpha=alpha,
            critical=single.critical,
            measures=single.measures,
            p=single.p,
            p_interval=single.p_interval,
            warnings=single.warnings,
        )

    if nstep == 1:
        joint = concatenate_sets(sets)
        m = compute_measure(joint, spec)
        whole = _build_envelope(joint, m, alpha, with_p=with_p)
        components = []
        start = 0
        for cs in sets:
            stop = start + cs.d
            part_m = m
            if m.central is not None:
                part_m = replace(
                    m,
                    central=m.central[start:stop],
                    scale_low=m.scale_low[start:stop],
                    scale_up=m.scale_up[start:stop],
                )
            comp = GlobalEnvelope(
                grid=cs.grid,
                measure_type=whole.measure_type,
                alternative=whole.alternative,
                alpha=alpha,
                critical=whole.critical,
                lower=whole.lower[start:stop],
                upper=whole.upper[start:stop],
                central=whole.central[start:stop],
                measures=part_m,
                uninformative_bound=whole.uninformative_bound,
                p=whole.p,
                p_interval=whole.p_interval,
                mask=None if whole.mask is None else whole.mask[start:stop],
                warnings=whole.warnings,
                construction=whole.construction,
            )
            components.append(comp)
            start = stop
        return CombinedEnvelope(
            components=tuple(components),
            nstep=1,
            alpha=alpha,
            critical=whole.critical,
            measures=m,
            p=whole.p,
            p_interval=whole.p_interval,
            warnings=whole.warnings,
        )

    stage2, parts = two_step_measure(sets, spec)
    crit, selection, warns = critical_value(stage2, alpha)
    p = _measure_pvalue(stage2.values, stage2.orientation) if with_p else None
    components = []
    for cs, part in zip(sets, parts):
        side = _uninformative_side(part.alternative)
        lower, upper = _hull_bounds(cs.values, selection, side)
        central = part.central if part.central is not None else np.median(cs.values, axis=0)
        comp = GlobalEnvelope(
            grid=cs.grid,
            measure_type=part.measure_type,
            alternative=part.alternative,
            alpha=alpha,
            critical=crit,
            lower=lower,
            upper=upper,
            central=central,
            measures=part,
            uninformative_bound=side,
            p=p,
            mask=None,
            warnings=part.warnings,
        )
        if with_p:
            comp = replace(comp, mask=comp.outside_mask(cs.values[0]))
        components.append(comp)
    return CombinedEnvelope(
        components=tuple(components),
        nstep=2,
        alpha=alpha,
        critical=crit,
        measures=stage2,
        p=p,
        warnings=warns + stage2.warnings,
    )


def central_region(sets, spec: MeasureSpec | None = None, coverage: float = 0.50, nstep: int = 2):
    """Central region of a sample of curves at the given coverage.

    Parameters
    ----------
    sets : CurveSet or iterable of CurveSet
        The sample, as one set or as joint components.
    spec : MeasureSpec, optional
        Measure defining centrality; defaults to the two-sided erl measure.
    coverage : float
        Fraction of curves the region should keep, in (0, 1).
    nstep : int
        Combining mode for collections, see ``forder``.

    Returns
    -------
    GlobalEnvelope or CombinedEnvelope
    """
    if not 0.0 < coverage < 1.0:
        raise ValueError("coverage must lie in (0, 1)")
    if spec is None:
        spec = MeasureSpec()
    alpha = 1.0 - coverage
    if isinstance(sets, CurveSet):
        return _build_envelope(sets, compute_measure(sets, spec), alpha)
    sets = list(sets)
    if len(sets) == 1:
        return _build_envelope(sets[0], compute_measure(sets[0], spec), alpha)
    return _combined_core(sets, spec, alpha, nstep, with_p=False)


def global_envelope_test(sets, spec: MeasureSpec | None = None, alpha: float = 0.05, nstep: int = 2):
    """Monte Carlo global envelope test of an observed curve.

    The first curve of every set must be the single observed one; the rest
    are draws from the null model.  Returns an envelope whose ``p``,
    ``p_interval`` (rank measure only) and ``mask`` describe the test
    outcome; the observed curve leaves the envelope somewhere if and only
    if ``p <= alpha``.
    """
    if spec is None:
        spec = MeasureSpec()
    single = isinstance(sets, CurveSet)
    sets = [sets] if single else list(sets)
    info = validate_joint(sets)
    if info.obs_count != 1:
        raise NoObservedCurveError("an envelope test needs exactly one observed curve per set")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if alpha * info.s < 1.0 - 1e-9:
        raise AlphaInfeasibleError(
            f"alpha={alpha} cannot be resolved with s={info.s} curves; need alpha >= 1/s"
        )
    if len(sets) == 1:
        return _build_envelope(sets[0], compute_measure(sets[0], spec), alpha, with_p=True)
    return _combined_core(sets, spec, alpha, nstep, with_p=True)


def combined_envelope(sets, spec: MeasureSpec | None = None, alpha: float = 0.05, nstep: int = 2) -> CombinedEnvelope:
    """Joint envelope over the components of a collection of curve sets."""
    if spec is None:
        spec = MeasureSpec()
    sets = list(sets)
    info = validate_joint(sets)
    with_p = info.obs_count == 1
    return _combined_core(sets, spec, alpha, nstep, with_p=with_p)
