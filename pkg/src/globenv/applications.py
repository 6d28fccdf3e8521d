"""Ready-made applications: n-sample distribution tests and functional boxplots.

The n-sample test compares the empirical cumulative distribution functions
of two or more samples with a permutation global envelope, so a rejection
shows which argument values drive the difference.  The functional
boxplot generalises the classic boxplot: a central region of the curves,
whiskers at a multiple of its width, and as outliers every curve that
leaves the whiskers anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ArgGrid, CurveSet, create_curve_set
from .envelope import CombinedEnvelope, GlobalEnvelope, central_region, combined_envelope
from .errors import GroupTooSmallError, NonFiniteError
from .ftests import FTestResult
from .measures import MeasureSpec, MeasureType
from .utils import parallel_map

__all__ = ["necdf_test", "FBoxplotResult", "fboxplot"]


def _ecdf_rows(samples: np.ndarray, sizes: np.ndarray, grid: np.ndarray) -> list[np.ndarray]:
    """Right-continuous ecdf of each consecutive block of a pooled vector."""
    out = []
    start = 0
    for n in sizes:
        block = np.sort(samples[start : start + n])
        out.append(np.searchsorted(block, grid, side="right") / n)
        start += n
    return out


def necdf_test(
    samples,
    nsim: int = 999,
    alpha: float = 0.05,
    grid=None,
    spec: MeasureSpec | None = None,
    seed=None,
    threads: int = 1,
) -> FTestResult:
    """Permutation test for equal distributions of two or more samples.

    The statistic is the vector of group empirical distribution functions on
    a common grid; the null replicates permute the pooled values, keeping
    the group sizes.  The grid defaults to the sorted distinct pooled
    values, thinned to 100 equispaced points over the pooled range when
    there are more.

    Parameters
    ----------
    samples : sequence of array_like
        Two or more samples of real values, possibly of different sizes.
    nsim : int
        Number of permutations.
    alpha : float
        Test size.
    grid : array_like, optional
        Evaluation points for the ecdfs.
    spec : MeasureSpec, optional
        Measure for the combined envelope; defaults to two-sided erl.
    """
    groups = [np.asarray(g, dtype=float).ravel() for g in samples]
    if len(groups) < 2:
        raise GroupTooSmallError("need at least two samples")
    for g in groups:
        if g.size < 1:
            raise GroupTooSmallError("every sample needs at least one value")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError("samples contain non-finite values")
    if spec is None:
        spec = MeasureSpec()
    pooled = np.concatenate(groups)
    sizes = np.array([g.size for g in groups])
    if grid is None:
        grid = np.unique(pooled)
        if grid.size > 100:
            grid = np.linspace(pooled.min(), pooled.max(), 100)
    else:
        grid = np.asarray(grid, dtype=float).ravel()
    arg = ArgGrid.one_d(grid)

    obs = _ecdf_rows(pooled, sizes, grid)
    streams = np.random.SeedSequence(seed).spawn(nsim)

    def replicate(i: int) -> list[np.ndarray]:
        rng = np.random.default_rng(streams[i])
        return _ecdf_rows(pooled[rng.permutation(pooled.size)], sizes, grid)

    reps = parallel_map(replicate, nsim, threads)
    comp_sets = [
        create_curve_set(arg, observed=obs[c], simulated=np.stack([r[c] for r in reps]))
        for c in range(len(groups))
    ]
    env = combined_envelope(comp_sets, spec, alpha, nstep=1)
    return FTestResult(
        test="necdf",
        statistic=tuple(obs),
        labels=tuple(f"group_{c + 1}" for c in range(len(groups))),
        envelope=env,
        p=env.p,
    )


@dataclass(frozen=True)
class FBoxplotResult:
    """Functional boxplot: central region, whiskers and outliers.

    Whiskers sit ``factor`` times the pointwise width of the central region
    beyond its bounds; a curve is an outlier when it leaves the whiskers at
    any grid position of any component.  Whisker arrays come as one tuple
    entry per component.
    """

    central: GlobalEnvelope | CombinedEnvelope
    whisker_lower: tuple[np.ndarray, ...]
    whisker_upper: tuple[np.ndarray, ...]
    outlier_indices: np.ndarray
    factor: float

    @property
    def coverage(self) -> float:
        return self.central.coverage

    def to_dict(self) -> dict:
        return {
            "type": "fboxplot",
            "factor": self.factor,
            "coverage": self.coverage,
            "outliers": self.outlier_indices.tolist(),
            "whisker_lower": [w.tolist() for w in self.whisker_lower],
            "whisker_upper": [w.tolist() for w in self.whisker_upper],
            "central": self.central.to_dict(),
        }


def fboxplot(
    sets,
    spec: MeasureSpec | None = None,
    coverage: float = 0.5,
    factor: float = 1.5,
    nstep: int = 2,
) -> FBoxplotResult:
    """Functional boxplot of one curve set or of joint components.

    Parameters
    ----------
    sets : CurveSet or iterable of CurveSet
        The sample of curves.
    spec : MeasureSpec, optional
        Measure defining the central region; defaults to the two-sided
        area measure.
    coverage : float
        Coverage of the central region, 0.5 for the functional analogue of
        the interquartile box.
    factor : float
        Whisker distance in units of the central region width.
    """
    if factor < 0:
        raise ValueError("factor must be non-negative")
    if spec is None:
        spec = MeasureSpec(MeasureType.AREA)
    region = central_region(sets, spec, coverage=coverage, nstep=nstep)
    if isinstance(region, CombinedEnvelope):
        envs = region.components
    else:
        envs = (region,)
    set_list = [sets] if isinstance(sets, CurveSet) else list(sets)

    lows, upps = [], []
    outside = None
    for env, cs in zip(envs, set_list):
        width = env.upper - env.lower
        lo = env.lower - factor * width
        up = env.upper + factor * width
        lows.append(lo)
        upps.append(up)
        exits = ((cs.values < lo) | (cs.values > up)).any(axis=1)
        outside = exits if outside is None else (outside | exits)

    return FBoxplotResult(
        central=region,
        whisker_lower=tuple(lows),
        whisker_upper=tuple(upps),
        outlier_indices=np.nonzero(outside)[0],
        factor=factor,
    )
