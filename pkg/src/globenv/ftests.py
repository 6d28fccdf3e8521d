"""Permutation tests for functional one-way ANOVA and general linear models.

Graph variants test the group means or model coefficients directly, so a
rejection points at the groups and grid positions responsible.  Rank (frank)
variants test the pointwise F statistic with a one-sided envelope.  Null
replicates come from permuting the curves among the groups, or, with
nuisance factors, from the Freedman-Lane scheme: permuted residuals of the
reduced model added back to its fitted values.

Categorical effects are reported under the sum-to-zero convention: the model
is fitted with unconstrained group (or cell) indicator columns, nuisance
columns that the indicators already span are dropped, and the fitted
coefficients of the tested block are centered.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .curves import Alternative, CurveSet, create_curve_set
from .envelope import CombinedEnvelope, GlobalEnvelope, combined_envelope, global_envelope_test
from .errors import (
    DegenerateDataError,
    DimensionMismatchError,
    EmptyGroupError,
    GroupTooSmallError,
    NonFiniteError,
    RankDeficientError,
    UnknownTermError,
)
from .measures import MeasureSpec, MeasureType
from .utils import parallel_map

__all__ = [
    "Factor",
    "FactorTable",
    "DesignPair",
    "FTestResult",
    "build_design",
    "freedman_lane_permute",
    "scale_unequal_variances",
    "rwise_F_oneway",
    "graph_fanova",
    "frank_fanova",
    "graph_flm",
    "frank_flm",
]

#: Value reported where a zero within-group variance makes F blow up.
F_SENTINEL = 1e300


@dataclass(frozen=True)
class Factor:
    """One explanatory variable: continuous values or categorical codes."""

    name: str
    values: np.ndarray
    levels: tuple[str, ...] | None = None

    def __post_init__(self):
        arr = np.asarray(self.values)
        if self.levels is None:
            arr = arr.astype(float)
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError(f"factor {self.name!r} contains non-finite values")
        else:
            arr = arr.astype(np.intp)
            if arr.size and (arr.min() < 0 or arr.max() >= len(self.levels)):
                raise ValueError(f"factor {self.name!r} has out-of-range level codes")
        object.__setattr__(self, "values", arr)

    @property
    def is_categorical(self) -> bool:
        return self.levels is not None

    @property
    def n_levels(self) -> int:
        return 0 if self.levels is None else len(self.levels)


@dataclass(frozen=True)
class FactorTable:
    """Named factors observed on the same subjects."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("a factor table needs at least one factor")
        n = factors[0].values.shape[0]
        for f in factors:
            if f.values.shape[0] != n:
                raise DimensionMismatchError("factors disagree on the number of subjects")
        object.__setattr__(self, "factors", factors)

    @property
    def n(self) -> int:
        return int(self.factors[0].values.shape[0])

    def __getitem__(self, name: str) -> Factor:
        for f in self.factors:
            if f.name == name:
                return f
        raise UnknownTermError(f"unknown factor {name!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    @classmethod
    def from_mapping(cls, mapping) -> "FactorTable":
        """Build a table from name -> values; non-numeric columns become
        categorical with alphabetically sorted levels."""
        factors = []
        for name, column in mapping.items():
            arr = np.asarray(column)
            numeric = arr.dtype.kind in "fiub"
            if numeric:
                factors.append(Factor(name, arr.astype(float)))
            else:
                labels = np.asarray([str(v) for v in arr])
                levels, codes = np.unique(labels, return_inverse=True)
                factors.append(Factor(name, codes, tuple(levels)))
        return cls(tuple(factors))


def _parse_terms(formula: str) -> list[tuple[str, ...]]:
    rhs = formula.split("~")[-1]
    terms: list[tuple[str, ...]] = []
    for raw in rhs.split("+"):
        text = raw.strip()
        if not text or text == "1":
            continue
        parts = tuple(p.strip() for p in text.split(":"))
        if any(not p for p in parts) or len(parts) > 2:
            raise UnknownTermError(f"malformed term {text!r}")
        key = tuple(sorted(parts)) if len(parts) > 1 else parts
        if key not in terms:
            terms.append(key)
    return terms


def _indicators(codes: np.ndarray, J: int) -> np.ndarray:
    out = np.zeros((codes.shape[0], J))
    out[np.arange(codes.shape[0]), codes] = 1.0
    return out


def _nuisance_columns(table: FactorTable, term: tuple[str, ...]) -> np.ndarray:
    """Full-rank encoding of a nuisance term, reference level dropped."""
    blocks = []
    for name in term:
        f = table[name]
        if f.is_categorical:
            blocks.append(_indicators(f.values, f.n_levels)[:, 1:])
        else:
            blocks.append(f.values[:, None])
    if len(blocks) == 1:
        return blocks[0]
    a, b = blocks
    return (a[:, :, None] * b[:, None, :]).reshape(table.n, -1)


def _tested_columns(table: FactorTable, term: tuple[str, ...]):
    """Group-mean style encoding of a tested term.

    Returns the columns, the component labels and whether the fitted
    coefficients are to be centered to sum to zero.
    """
    facs = [table[name] for name in term]
    cats = [f for f in facs if f.is_categorical]
    conts = [f for f in facs if not f.is_categorical]
    if len(cats) == 0:
        col = conts[0].values[:, None] if len(conts) == 1 else (conts[0].values * conts[1].values)[:, None]
        return col, (":".join(f.name for f in facs),), False
    if len(cats) == 1 and not conts:
        f = cats[0]
        cols = _indicators(f.values, f.n_levels)
        labels = tuple(f"{f.name}:{lev}" for lev in f.levels)
    elif len(cats) == 2:
        a, b = cats
        cells = a.values * b.n_levels + b.values
        cols = _indicators(cells, a.n_levels * b.n_levels)
        labels = tuple(f"{a.name}:{la}.{b.name}:{lb}" for la in a.levels for lb in b.levels)
    else:
        f, x = cats[0], conts[0]
        cols = _indicators(f.values, f.n_levels) * x.values[:, None]
        labels = tuple(f"{x.name}:{f.name}:{lev}" for lev in f.levels)
    if len(cats) >= 1 and not conts:
        counts = cols.sum(axis=0)
        if np.any(counts == 0):
            raise EmptyGroupError("a tested group or cell has no members")
    return cols, labels, True


def _orthonormal_add(basis: list[np.ndarray], col: np.ndarray, tol: float = 1e-8) -> bool:
    """Add a column to an orthonormal basis; False if it is dependent."""
    r = col.astype(float, copy=True)
    scale = np.linalg.norm(r)
    for _ in range(2):
        for q in basis:
            r -= q * (q @ r)
    nrm = np.linalg.norm(r)
    if scale == 0 or nrm <= tol * scale:
        return False
    basis.append(r / nrm)
    return True


@dataclass(frozen=True)
class DesignPair:
    """Reduced (nuisance) and full fit designs for one tested hypothesis.

    ``full`` starts with the tested columns; nuisance columns that the
    tested block already spans are left out, so ``full`` has full column
    rank while spanning the union of both models.
    """

    full: np.ndarray
    reduced: np.ndarray
    tested_columns: np.ndarray
    tested_labels: tuple[str, ...]
    center_blocks: tuple[tuple[int, int], ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return int(self.full.shape[0])

    @property
    def p_full(self) -> int:
        return int(self.full.shape[1])

    @property
    def p_reduced(self) -> int:
        return int(self.reduced.shape[1])


def build_design(table: FactorTable, formula_full: str, formula_reduced: str) -> DesignPair:
    """Encode the full and reduced model design matrices.

    The reduced model always contains an intercept.  Tested categorical
    terms enter as group or cell indicator blocks whose coefficients are
    centered after fitting; tested continuous terms enter as single
    columns.  Terms may be factor names or two-factor interactions ``A:B``.
    """
    full_terms = _parse_terms(formula_full)
    red_terms = _parse_terms(formula_reduced)
    for term in set(full_terms) | set(red_terms):
        for name in term:
            table[name]
    if not set(red_terms) <= set(full_terms):
        raise UnknownTermError("the reduced model is not nested in the full model")
    tested_terms = [t for t in full_terms if t not in set(red_terms)]
    if not tested_terms:
        raise UnknownTermError("full and reduced formulas describe the same model")

    n = table.n
    reduced_cols = [np.ones((n, 1))]
    for term in red_terms:
        reduced_cols.append(_nuisance_columns(table, term))
    reduced = np.hstack(reduced_cols)

    basis: list[np.ndarray] = []
    for j in range(reduced.shape[1]):
        if not _orthonormal_add(basis, reduced[:, j]):
            raise RankDeficientError("the reduced design does not have full column rank")

    tested_blocks = []
    labels: list[str] = []
    center_blocks: list[tuple[int, int]] = []
    start = 0
    for term in tested_terms:
        cols, term_labels, center = _tested_columns(table, term)
        tested_blocks.append(cols)
        labels.extend(term_labels)
        if center:
            center_blocks.append((start, start + cols.shape[1]))
        start += cols.shape[1]
    tested = np.hstack(tested_blocks)

    basis = []
    for j in range(tested.shape[1]):
        if not _orthonormal_add(basis, tested[:, j]):
            raise RankDeficientError("the tested columns are collinear")
    kept = []
    for j in range(reduced.shape[1]):
        if _orthonormal_add(basis, reduced[:, j]):
            kept.append(j)
    full = np.hstack([tested, reduced[:, kept]]) if kept else tested

    return DesignPair(
        full=full,
        reduced=reduced,
        tested_columns=np.arange(tested.shape[1]),
        tested_labels=tuple(labels),
        center_blocks=tuple(center_blocks),
    )


def freedman_lane_permute(Y: np.ndarray, reduced: np.ndarray, permutation: np.ndarray) -> np.ndarray:
    """Fitted values of the reduced model plus permuted residuals.

    Evaluated as Y[perm] + (fitted - fitted[perm]) so that the identity
    permutation returns Y bitwise; fitted + (Y - fitted)[perm] loses ulps.
    """
    Q, _ = np.linalg.qr(reduced)
    fitted = Q @ (Q.T @ Y)
    return Y[permutation] + (fitted - fitted[permutation])


def scale_unequal_variances(values: np.ndarray, codes: np.ndarray, J: int) -> np.ndarray:
    """Rescale each group to the pooled pointwise standard deviation.

    Group curves are shifted to their group mean, scaled by the ratio of the
    overall to the group standard deviation, and shifted back, so that
    afterwards every group has the pooled spread at every grid position.
    """
    Y = np.asarray(values, dtype=float)
    sd_all = Y.std(axis=0, ddof=1)
    out = np.empty_like(Y)
    for j in range(J):
        rows = codes == j
        if rows.sum() < 2:
            raise GroupTooSmallError("variance scaling needs at least two curves per group")
        mean_j = Y[rows].mean(axis=0)
        sd_j = Y[rows].std(axis=0, ddof=1)
        if np.any(sd_j == 0):
            raise DegenerateDataError("a group has zero variance at some grid position")
        out[rows] = (Y[rows] - mean_j) / sd_j * sd_all + mean_j
    return out


def rwise_F_oneway(values: np.ndarray, codes: np.ndarray, J: int) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise one-way F statistic.

    Returns the F curve and a flag vector marking positions where the
    within-group variance is zero; there F is the sentinel ``1e300`` when
    the between-group variance is positive, and 0 when it also vanishes.
    """
    Y = np.asarray(values, dtype=float)
    n = Y.shape[0]
    grand = Y.mean(axis=0)
    ssb = np.zeros(Y.shape[1])
    ssw = np.zeros(Y.shape[1])
    for j in range(J):
        rows = codes == j
        nj = int(rows.sum())
        mean_j = Y[rows].mean(axis=0)
        ssb += nj * (mean_j - grand) ** 2
        ssw += ((Y[rows] - mean_j) ** 2).sum(axis=0)
    flags = ssw == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        F = (ssb / (J - 1)) / (ssw / (n - J))
    F = np.where(flags, np.where(ssb > 0, F_SENTINEL, 0.0), F)
    return F, flags


@dataclass(frozen=True)
class FTestResult:
    """Observed statistic components, their joint envelope and the p-value."""

    test: str
    statistic: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    envelope: GlobalEnvelope | CombinedEnvelope
    p: float
    sigma2: np.ndarray | None = None
    sentinel_columns: np.ndarray | None = None

    @property
    def masks(self) -> list[np.ndarray]:
        if isinstance(self.envelope, CombinedEnvelope):
            return [c.mask for c in self.envelope.components]
        return [self.envelope.mask]

    def to_dict(self) -> dict:
        out = {
            "test": self.test,
            "p": self.p,
            "labels": list(self.labels),
            "envelope": self.envelope.to_dict(),
        }
        if self.sigma2 is not None:
            out["sigma2"] = self.sigma2.tolist()
        if self.sentinel_columns is not None:
            out["sentinel_columns"] = [bool(v) for v in self.sentinel_columns]
        return out


def _group_codes(groups) -> tuple[np.ndarray, tuple[str, ...]]:
    labels = np.asarray([str(g) for g in np.asarray(groups).ravel()])
    levels, codes = np.unique(labels, return_inverse=True)
    if len(levels) < 2:
        raise EmptyGroupError("need at least two groups")
    return codes, tuple(levels)


def _permutations(seed, nsim: int, n: int) -> list[np.ndarray]:
    """One permutation per replicate from spawned streams, never the identity."""
    identity = np.arange(n)
    perms = []
    for ss in np.random.SeedSequence(seed).spawn(nsim):
        rng = np.random.default_rng(ss)
        p = rng.permutation(n)
        while np.array_equal(p, identity):
            p = rng.permutation(n)
        perms.append(p)
    return perms


def _pair_indices(k: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(k) for b in range(a + 1, k)]


def graph_fanova(
    curve_set: CurveSet,
    groups,
    nsim: int = 999,
    alpha: float = 0.05,
    contrasts: bool = False,
    variances: str = "equal",
    spec: MeasureSpec | None = None,
    seed=None,
    threads: int = 1,
) -> FTestResult:
    """Permutation one-way functional ANOVA on group means.

    The statistic is the vector of group mean curves, or of pairwise group
    differences with ``contrasts=True``.  With ``variances="unequal"`` the
    curves are rescaled to the pooled pointwise spread first.  The envelope
    combines the components by concatenation (one step).
    """
    if spec is None:
        spec = MeasureSpec()
    codes, levels = _group_codes(groups)
    J = len(levels)
    Y = curve_set.values
    if codes.shape[0] != curve_set.s:
        raise DimensionMismatchError("group labels do not match the number of curves")
    if variances == "unequal":
        Y = scale_unequal_variances(Y, codes, J)
    elif variances != "equal":
        raise ValueError("variances must be 'equal' or 'unequal'")

    group_rows = [np.nonzero(codes == j)[0] for j in range(J)]

    def stat(data: np.ndarray) -> np.ndarray:
        means = np.stack([data[rows].mean(axis=0) for rows in group_rows])
        if not contrasts:
            return means
        return np.stack([means[a] - means[b] for a, b in _pair_indices(J)])

    obs = stat(Y)
    perms = _permutations(seed, nsim, curve_set.s)
    reps = parallel_map(lambda i: stat(Y[perms[i]]), nsim, threads)

    if contrasts:
        labels = tuple(f"{levels[a]}-{levels[b]}" for a, b in _pair_indices(J))
    else:
        labels = levels
    comp_sets = [
        create_curve_set(
            curve_set.grid,
            observed=obs[c],
            simulated=np.stack([r[c] for r in reps]),
        )
        for c in range(obs.shape[0])
    ]
    env = combined_envelope(comp_sets, spec, alpha, nstep=1)
    return FTestResult(
        test="graph_fanova",
        statistic=tuple(obs),
        labels=labels,
        envelope=env,
        p=env.p,
    )


def frank_fanova(
    curve_set: CurveSet,
    groups,
    nsim: int = 999,
    alpha: float = 0.05,
    variances: str = "equal",
    spec: MeasureSpec | None = None,
    seed=None,
    threads: int = 1,
) -> FTestResult:
    """Permutation one-way functional ANOVA on the pointwise F statistic."""
    codes, levels = _group_codes(groups)
    J = len(levels)
    Y = curve_set.values
    if codes.shape[0] != curve_set.s:
        raise DimensionMismatchError("group labels do not match the number of curves")
    for j in range(J):
        if (codes == j).sum() < 2:
            raise GroupTooSmallError("the F statistic needs at least two curves per group")
    if variances == "unequal":
        Y = scale_unequal_variances(Y, codes, J)
    elif variances != "equal":
        raise ValueError("variances must be 'equal' or 'unequal'")

    spec = _one_sided_spec(spec)
    F_obs, flags = rwise_F_oneway(Y, codes, J)
    perms = _permutations(seed, nsim, curve_set.s)
    reps = parallel_map(lambda i: rwise_F_oneway(Y[perms[i]], codes, J)[0], nsim, threads)
    stat_set = create_curve_set(curve_set.grid, observed=F_obs, simulated=np.stack(reps))
    env = global_envelope_test(stat_set, spec, alpha)
    return FTestResult(
        test="frank_fanova",
        statistic=(F_obs,),
        labels=("F",),
        envelope=env,
        p=env.p,
        sentinel_columns=flags,
    )


def _one_sided_spec(spec: MeasureSpec | None) -> MeasureSpec:
    """Rank tests look only at large statistic values."""
    if spec is None:
        return MeasureSpec(MeasureType.ERL, Alternative.GREATER)
    return MeasureSpec(spec.type, Alternative.GREATER, spec.beta_percent, spec.central)


def _validate_glm_inputs(curve_set: CurveSet, table: FactorTable):
    if table.n != curve_set.s:
        raise DimensionMismatchError("factor table does not match the number of curves")


def _fit_tested(design: DesignPair, Rf: np.ndarray, QfT_Y: np.ndarray) -> np.ndarray:
    beta = solve_triangular(Rf, QfT_Y)
    stat = beta[design.tested_columns]
    for start, stop in design.center_blocks:
        stat[start:stop] -= stat[start:stop].mean(axis=0)
    return stat


def graph_flm(
    curve_set: CurveSet,
    factors: FactorTable,
    formula_full: str,
    formula_reduced: str,
    nsim: int = 999,
    alpha: float = 0.05,
    contrasts: bool = False,
    spec: MeasureSpec | None = None,
    seed=None,
    threads: int = 1,
) -> FTestResult:
    """Freedman-Lane permutation test of GLM coefficient curves.

    The tested coefficients of the full model, centered per categorical
    block, form the statistic components.  ``contrasts=True`` replaces a
    single tested categorical block by all pairwise coefficient differences.
    """
    if spec is None:
        spec = MeasureSpec()
    _validate_glm_inputs(curve_set, factors)
    design = build_design(factors, formula_full, formula_reduced)
    Y = curve_set.values.astype(float)
    n = design.n
    if n <= design.p_full:
        raise DegenerateDataError("no residual degrees of freedom in the full model")

    pair_list = None
    if contrasts:
        if len(design.center_blocks) != 1 or design.center_blocks[0] != (0, len(design.tested_labels)):
            raise ValueError("contrasts need a single tested categorical term")
        pair_list = _pair_indices(len(design.tested_labels))

    Qf, Rf = np.linalg.qr(design.full)
    Qr, _ = np.linalg.qr(design.reduced)
    fitted = Qr @ (Qr.T @ Y)

    def stat_of(data: np.ndarray) -> np.ndarray:
        stat = _fit_tested(design, Rf, Qf.T @ data)
        if pair_list is not None:
            stat = np.stack([stat[a] - stat[b] for a, b in pair_list])
        return stat

    obs = stat_of(Y)
    perms = _permutations(seed, nsim, n)
    reps = parallel_map(lambda i: stat_of(Y[perms[i]] + (fitted - fitted[perms[i]])), nsim, threads)

    if pair_list is not None:
        short = [lab.split(":", 1)[1] for lab in design.tested_labels]
        labels = tuple(f"{short[a]}-{short[b]}" for a, b in pair_list)
    else:
        labels = design.tested_labels
    comp_sets = [
        create_curve_set(
            curve_set.grid,
            observed=obs[c],
            simulated=np.stack([r[c] for r in reps]),
        )
        for c in range(obs.shape[0])
    ]
    env = combined_envelope(comp_sets, spec, alpha, nstep=1)
    rss_full = np.maximum(((Y - Qf @ (Qf.T @ Y)) ** 2).sum(axis=0), 0.0)
    return FTestResult(
        test="graph_flm",
        statistic=tuple(obs),
        labels=labels,
        envelope=env,
        p=env.p,
        sigma2=rss_full / (n - design.p_full),
    )


def frank_flm(
    curve_set: CurveSet,
    factors: FactorTable,
    formula_full: str,
    formula_reduced: str,
    nsim: int = 999,
    alpha: float = 0.05,
    spec: MeasureSpec | None = None,
    seed=None,
    threads: int = 1,
) -> FTestResult:
    """Freedman-Lane permutation test of the GLM F statistic curve."""
    _validate_glm_inputs(curve_set, factors)
    design = build_design(factors, formula_full, formula_reduced)
    Y = curve_set.values.astype(float)
    n = design.n
    df1 = design.p_full - design.p_reduced
    df2 = n - design.p_full
    if df1 <= 0:
        raise RankDeficientError("the tested columns add nothing beyond the reduced model")
    if df2 <= 0:
        raise DegenerateDataError("no residual degrees of freedom in the full model")

    spec = _one_sided_spec(spec)
    Qf, _ = np.linalg.qr(design.full)
    Qr, _ = np.linalg.qr(design.reduced)
    fitted = Qr @ (Qr.T @ Y)

    def F_of(data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        total = (data * data).sum(axis=0)
        rss_red = np.maximum(total - (np.square(Qr.T @ data)).sum(axis=0), 0.0)
        rss_full = np.maximum(total - (np.square(Qf.T @ data)).sum(axis=0), 0.0)
        flags = rss_full == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            F = ((rss_red - rss_full) / df1) / (rss_full / df2)
        F = np.where(flags, np.where(rss_red > 0, F_SENTINEL, 0.0), F)
        return F, flags

    F_obs, flags = F_of(Y)
    perms = _permutations(seed, nsim, n)
    reps = parallel_map(lambda i: F_of(Y[perms[i]] + (fitted - fitted[perms[i]]))[0], nsim, threads)
    stat_set = create_curve_set(curve_set.grid, observed=F_obs, simulated=np.stack(reps))
    env = global_envelope_test(stat_set, spec, alpha)
    rss_full = np.maximum((Y * Y).sum(axis=0) - (np.square(Qf.T @ Y)).sum(axis=0), 0.0)
    return FTestResult(
        test="frank_flm",
        statistic=(F_obs,),
        labels=("F",),
        envelope=env,
        p=env.p,
        sigma2=rss_full / df2,
        sentinel_columns=flags,
    )
