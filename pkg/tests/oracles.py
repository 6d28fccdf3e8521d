"""Slow direct-from-definition evaluators used to cross-check the library.

Everything here is written from the formulas alone: explicit loops over
plain Python lists, no numpy, no code shared with the package.  Clarity
over speed.
"""

import math


def midranks(column):
    """Tie-averaged ranks, 1-based, smallest value gets the smallest rank."""
    out = []
    for v in column:
        less = sum(1 for u in column if u < v)
        equal = sum(1 for u in column if u == v)
        out.append(less + (equal + 1) / 2.0)
    return out


def continuous_column(column):
    """Continuous ranks of one column; returns (ranks, degenerate_flag)."""
    s = len(column)
    order = sorted(range(s), key=lambda i: column[i])
    xs = [column[i] for i in order]
    ranks = [0.0] * s
    degenerate = False

    blocks = []
    i = 0
    while i < s:
        j = i
        while j + 1 < s and xs[j + 1] == xs[i]:
            j += 1
        blocks.append((i, j))
        i = j + 1

    for (i, j) in blocks:
        if j > i:
            value = (i + 1 + j + 1) / 2.0 - 0.5
        elif i == 0:
            den = xs[s - 1] - xs[1]
            if den > 0:
                value = math.exp(-(xs[1] - xs[0]) / den)
            else:
                value = 0.5
                degenerate = True
        elif i == s - 1:
            den = xs[s - 2] - xs[0]
            if den > 0:
                value = s - math.exp(-(xs[s - 1] - xs[s - 2]) / den)
            else:
                value = s - 0.5
                degenerate = True
        else:
            value = i + (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1])
        for pos in range(i, j + 1):
            ranks[pos] = value

    out = [0.0] * s
    for pos, idx in enumerate(order):
        out[idx] = ranks[pos]
    return out, degenerate


def sided_value(r, s, alternative, continuous=False):
    high = (s - r) if continuous else (s + 1 - r)
    if alternative == "less":
        return r
    if alternative == "greater":
        return high
    return min(r, high)


def _columns(values):
    s, d = len(values), len(values[0])
    return [[values[i][k] for i in range(s)] for k in range(d)]


def sided_rank_rows(values, alternative):
    s = len(values)
    cols = [midranks(c) for c in _columns(values)]
    return [[sided_value(cols[k][i], s, alternative) for k in range(len(cols))]
            for i in range(s)]


def sided_cont_rows(values, alternative):
    s = len(values)
    cols = [continuous_column(c)[0] for c in _columns(values)]
    return [[sided_value(cols[k][i], s, alternative, continuous=True)
             for k in range(len(cols))] for i in range(s)]


def o_rank(values, alternative="two.sided"):
    return [min(row) for row in sided_rank_rows(values, alternative)]


def _lex_strictly_smaller(a, b):
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return False


def o_erl(values, alternative="two.sided"):
    s = len(values)
    rows = [sorted(r) for r in sided_rank_rows(values, alternative)]
    return [sum(1 for j in range(s) if _lex_strictly_smaller(rows[j], rows[i])) / s
            for i in range(s)]


def o_cont(values, alternative="two.sided"):
    s = len(values)
    return [min(row) / s for row in sided_cont_rows(values, alternative)]


def o_area(values, alternative="two.sided"):
    s = len(values)
    R = o_rank(values, alternative)
    C = sided_cont_rows(values, alternative)
    out = []
    for i in range(s):
        shortfall = [R[i] - c for c in C[i] if c < R[i]]
        out.append((R[i] - sum(shortfall) / len(C[i])) / s)
    return out


def quantile(column, p):
    """Order-statistic interpolation at index h = (s-1) p + 1."""
    xs = sorted(column)
    s = len(xs)
    h = (s - 1) * p + 1
    lo = int(math.floor(h))
    lo = min(max(lo, 1), s)
    hi = min(lo + 1, s)
    frac = h - lo
    return xs[lo - 1] + frac * (xs[hi - 1] - xs[lo - 1])


def _central(values, central):
    if central is not None:
        return list(central)
    s, d = len(values), len(values[0])
    return [sum(values[i][k] for i in range(s)) / s for k in range(d)]


def _deviations(values, t0, scale_low, scale_up, alternative):
    out = []
    for row in values:
        devs = []
        for k, v in enumerate(row):
            if alternative == "less":
                devs.append((t0[k] - v) / scale_low[k])
            elif alternative == "greater":
                devs.append((v - t0[k]) / scale_up[k])
            elif v >= t0[k]:
                devs.append((v - t0[k]) / scale_up[k])
            else:
                devs.append((t0[k] - v) / scale_low[k])
        out.append(max(devs))
    return out


def o_qdir(values, alternative="two.sided", beta_percent=2.5, central=None):
    t0 = _central(values, central)
    beta = beta_percent / 100.0
    cols = _columns(values)
    scale_low = [abs(t0[k] - quantile(c, beta)) for k, c in enumerate(cols)]
    scale_up = [abs(quantile(c, 1.0 - beta) - t0[k]) for k, c in enumerate(cols)]
    return _deviations(values, t0, scale_low, scale_up, alternative)


def o_st(values, alternative="two.sided", central=None):
    t0 = _central(values, central)
    cols = _columns(values)
    sds = []
    for c in cols:
        m = sum(c) / len(c)
        sds.append(math.sqrt(sum((v - m) ** 2 for v in c) / (len(c) - 1)))
    return _deviations(values, t0, sds, sds, alternative)


def o_unscaled(values, alternative="two.sided", central=None):
    t0 = _central(values, central)
    ones = [1.0] * len(t0)
    return _deviations(values, t0, ones, ones, alternative)


def o_measure(name, values, alternative="two.sided", beta_percent=2.5, central=None):
    if name == "rank":
        return o_rank(values, alternative)
    if name == "erl":
        return o_erl(values, alternative)
    if name == "cont":
        return o_cont(values, alternative)
    if name == "area":
        return o_area(values, alternative)
    if name == "qdir":
        return o_qdir(values, alternative, beta_percent, central)
    if name == "st":
        return o_st(values, alternative, central)
    if name == "unscaled":
        return o_unscaled(values, alternative, central)
    raise ValueError(name)


def o_ecdf(sample, grid):
    """Right-closed empirical cdf of one sample on a grid."""
    n = len(sample)
    return [sum(1 for v in sample if v <= r) / n for r in grid]


def o_oneway_F(columns_by_group):
    """Classical one-way F for one grid component.

    ``columns_by_group`` is a list of J lists of values.
    """
    J = len(columns_by_group)
    n = sum(len(g) for g in columns_by_group)
    grand = sum(sum(g) for g in columns_by_group) / n
    ssb = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in columns_by_group)
    ssw = sum(sum((v - sum(g) / len(g)) ** 2 for v in g) for g in columns_by_group)
    return (ssb / (J - 1)) / (ssw / (n - J))
