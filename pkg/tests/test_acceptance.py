"""End-to-end acceptance checks.

One test per shipped guarantee.  Each prints a single
``[acceptance] <name>: PASS/FAIL`` line (run with ``pytest -s`` to see them
all) and asserts both the substantive condition and the runtime budget.
All random fixtures run from frozen seeds, so reruns are reproducible.
"""

import json
import time

import numpy as np
import pytest
from scipy.stats import binom

from globenv import cli, io
from globenv.composite import gaussian_ecdf_test
from globenv.curves import ArgGrid, CurveSet, create_curve_set
from globenv.datasets import data_path, growth_curve_sets, growth_samples_path
from globenv.envelope import central_region, critical_value, global_envelope_test, rank_envelope
from globenv.ftests import FactorTable, frank_flm, graph_flm, rwise_F_oneway
from globenv.applications import fboxplot, necdf_test
from globenv.measures import MeasureSpec, Orientation, area, cont, compute_measure, forder

from conftest import rand_set
from oracles import o_measure

ALTS = ("two.sided", "less", "greater")
TYPES = ("rank", "erl", "cont", "area", "qdir", "st", "unscaled")


def _spec(mtype, alt="two.sided", beta=25.0):
    if mtype == "qdir":
        return MeasureSpec(mtype, alt, beta_percent=beta)
    return MeasureSpec(mtype, alt)


def _verdict(name, ok, t0, limit, detail=""):
    elapsed = time.perf_counter() - t0
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    extra = f" [{detail}]" if detail else ""
    print(f"[acceptance] {name}: {status} ({elapsed:.1f}s / {limit:.0f}s){extra}")
    assert ok, f"{name}{extra}"
    assert in_time, f"{name}: {elapsed:.1f}s exceeds the {limit:.0f}s budget"


def _leading(sets, n=10):
    m = forder(sets, MeasureSpec("area"))
    if m.orientation is Orientation.SMALLER_EXTREME:
        idx = np.argsort(m.values, kind="stable")
    else:
        idx = np.argsort(-m.values, kind="stable")
    return tuple(int(i) + 1 for i in idx[:n])


def test_growth_orderings():
    t0 = time.perf_counter()
    heights, changes = growth_curve_sets()
    ok = (
        _leading(heights) == (8, 13, 29, 48, 42, 25, 7, 38, 18, 40)
        and _leading(changes) == (15, 7, 3, 8, 25, 52, 19, 16, 24, 5)
        and _leading([heights, changes]) == (8, 15, 7, 13, 3, 29, 48, 25, 42, 52)
    )
    _verdict("growth orderings", ok, t0, 1.0)


def test_growth_boxplot_outlier():
    t0 = time.perf_counter()
    heights, changes = growth_curve_sets()
    res = fboxplot([heights, changes], coverage=0.5, factor=1.5)
    tallest = int(np.argmax(heights.values.max(axis=1)))
    flagged = [int(i) for i in res.outlier_indices]
    change = changes.values[14]
    exits_changes = bool(
        ((change < res.whisker_lower[1]) | (change > res.whisker_upper[1])).any()
    )
    ok = flagged == [14] and exits_changes and tallest != 14
    _verdict("growth fboxplot outlier", ok, t0, 1.0,
             f"flagged={flagged} tallest={tallest}")


def test_necdf_growth_across_seeds():
    t0 = time.perf_counter()
    with growth_samples_path(10) as p:
        age10, _ = io.read_samples(p)
    with growth_samples_path(14) as p:
        age14, _ = io.read_samples(p)
    hits = 0
    for seed in range(100):
        p10 = necdf_test(age10, nsim=1999, seed=seed).p
        p14 = necdf_test(age14, nsim=1999, seed=seed).p
        hits += int(p10 > 0.05 and p14 <= 0.05)
    _verdict("necdf on growth", hits >= 95, t0, 30.0, f"hits={hits}/100")


@pytest.mark.filterwarnings("ignore::globenv.errors.AlphaTooExtremeWarning")
def test_igi_exactness_at_scale():
    # classification must follow the measure-threshold rule with no tolerance
    t0 = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([20260823, 4]))
    bad = 0
    for _ in range(200):
        s = int(rng.integers(20, 201))
        d = int(rng.integers(1, 101))
        cs = rand_set(rng, s, d)
        alt = ALTS[int(rng.integers(3))]
        alpha = float(rng.uniform(0.05, 0.45))
        for mtype in TYPES:
            spec = _spec(mtype, alt)
            m = compute_measure(cs, spec)
            env = central_region(cs, spec, coverage=1.0 - alpha)
            if m.orientation is Orientation.SMALLER_EXTREME:
                extreme = m.values < env.critical
            else:
                extreme = m.values > env.critical
            outside = np.fromiter(
                (not env.contains(c) for c in cs.values), bool, cs.s
            )
            bad += int(np.count_nonzero(outside != extreme))
    _verdict("inside/outside exactness", bad == 0, t0, 60.0, f"discrepancies={bad}")


def test_measures_match_direct_formulas():
    t0 = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([20260823, 5]))
    worst = 0.0
    for _ in range(1000):
        cs = rand_set(rng, int(rng.integers(3, 7)), int(rng.integers(1, 4)))
        alt = ALTS[int(rng.integers(3))]
        for mtype in TYPES:
            # a high directional quantile keeps qdir defined down to s=3
            lib = compute_measure(cs, _spec(mtype, alt, beta=40.0)).values
            orc = np.asarray(
                o_measure(mtype, cs.values.tolist(), alt, beta_percent=40.0)
            )
            err = np.max(np.abs(lib - orc) / np.maximum(1.0, np.abs(orc)))
            worst = max(worst, float(err))
    _verdict("oracle equivalence", worst <= 1e-12, t0, 30.0, f"worst={worst:.2e}")


def test_erl_type_i_error():
    t0 = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([20260823, 6]))
    grid = ArgGrid.default(50)
    rejections = 0
    for _ in range(1000):
        cs = CurveSet(grid, rng.normal(size=(1000, 50)), 1)
        res = global_envelope_test(cs, MeasureSpec("erl"), alpha=0.05)
        rejections += int(res.p <= 0.05)
    rate = rejections / 1000.0
    _verdict("erl type I error", 0.033 <= rate <= 0.069, t0, 600.0, f"rate={rate:.3f}")


@pytest.mark.filterwarnings("ignore::globenv.errors.AlphaTooExtremeWarning")
def test_envelope_nesting_exact():
    t0 = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([20260823, 7]))
    specs = [_spec(t) for t in TYPES] + [MeasureSpec("erl", "less"), MeasureSpec("st", "greater")]
    ok = True
    for _ in range(50):
        cs = rand_set(rng, int(rng.integers(30, 121)), int(rng.integers(1, 20)))
        for spec in specs:
            wide = central_region(cs, spec, coverage=0.95)
            narrow = central_region(cs, spec, coverage=0.90)
            ok = ok and bool(
                np.all(wide.lower <= narrow.lower) and np.all(narrow.upper <= wide.upper)
            )
    _verdict("envelope nesting", ok, t0, 10.0)


def test_composite_size_and_power():
    t0 = time.perf_counter()
    rejections = 0
    for rep in range(500):
        data = np.random.default_rng([20260823, 8, rep]).normal(size=100)
        res = gaussian_ecdf_test(data, s=199, s2=199, seed=[20260823, 88, rep])
        rejections += int(res.p <= 0.05)
    rate = rejections / 500.0

    power_hits = 0
    for run in range(40):
        data = np.random.default_rng(5000 + run).lognormal(size=115)
        res = gaussian_ecdf_test(data, s=199, s2=199, seed=6000 + run)
        power_hits += int(res.p <= 0.05)

    ok = 0.026 <= rate <= 0.078 and power_hits >= 38
    _verdict("composite size and power", ok, t0, 1200.0,
             f"size={rate:.3f} power={power_hits}/40")


def test_freedman_lane_recovery_and_size():
    t0 = time.perf_counter()
    # planted block effect on a 20x20 image, signal three noise sd high
    rng = np.random.default_rng(2)
    side, n = 20, 40
    xx, yy = np.meshgrid(np.arange(side, dtype=float), np.arange(side, dtype=float),
                         indexing="ij")
    ones = np.ones(side * side)
    grid = ArgGrid.two_d(xx.ravel(), yy.ravel(), ones, ones)
    truth = np.zeros((side, side), dtype=bool)
    truth[6:14, 6:14] = True
    truth = truth.ravel()
    Y = rng.normal(size=(n, side * side))
    Y[n // 2:, truth] += 3.0
    table = FactorTable.from_mapping({"g": ["a"] * (n // 2) + ["b"] * (n // 2)})
    res = graph_flm(CurveSet(grid, Y, 0), table, "Y ~ g", "Y ~ 1",
                    nsim=999, seed=3, contrasts=True)
    detected = res.masks[0]
    jaccard = (detected & truth).sum() / (detected | truth).sum()

    # size of the group test when only the continuous covariate matters
    data_rng = np.random.default_rng(np.random.SeedSequence([20260823, 9]))
    n2, d2 = 60, 25
    labels = ["a"] * 30 + ["b"] * 30
    slope = np.linspace(0.5, 1.0, d2)
    rejections = 0
    for rep in range(200):
        x = data_rng.normal(size=n2)
        Y2 = data_rng.normal(size=(n2, d2)) + np.outer(x, slope)
        table2 = FactorTable.from_mapping({"g": labels, "x": x})
        null = graph_flm(CurveSet(ArgGrid.default(d2), Y2, 0), table2,
                         "Y ~ g + x", "Y ~ x", nsim=499, seed=[20260823, 9, rep])
        rejections += int(null.p <= 0.05)
    lo = int(binom.ppf(0.0005, 200, 0.05))
    hi = int(binom.ppf(0.9995, 200, 0.05))
    ok = jaccard >= 0.5 and lo <= rejections <= hi
    _verdict("freedman-lane glm", ok, t0, 600.0,
             f"jaccard={jaccard:.3f} size={rejections}/200 in [{lo},{hi}]")


@pytest.mark.filterwarnings("ignore::globenv.errors.AlphaTooExtremeWarning")
def test_statistic_equivalences():
    t0 = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([20260823, 10]))

    # rank-F permutation test statistic == pointwise one-way F
    worst_f = 0.0
    for trial in range(50):
        J = int(rng.integers(2, 5))
        d = int(rng.integers(2, 12))
        Y = rng.normal(size=(6 * J, d))
        cs = create_curve_set(np.arange(1.0, d + 1), simulated=Y)
        table = FactorTable.from_mapping({"g": np.repeat([f"g{j}" for j in range(J)], 6)})
        res = frank_flm(cs, table, "Y ~ g", "Y ~ 1", nsim=19, seed=trial)
        F, _ = rwise_F_oneway(Y, np.repeat(np.arange(J), 6), J)
        err = np.max(np.abs(res.statistic[0] - F) / np.maximum(1.0, np.abs(F)))
        worst_f = max(worst_f, float(err))

    # with one argument position the area measure degenerates to cont
    worst_a = 0.0
    for _ in range(50):
        cs = rand_set(rng, int(rng.integers(4, 40)), 1)
        alt = ALTS[int(rng.integers(3))]
        a = area(cs, alt).values
        c = cont(cs, alt).values
        err = np.max(np.abs(a - c) / np.maximum(1.0, np.abs(c)))
        worst_a = max(worst_a, float(err))

    # order-statistic rank band and the hull of kept curves classify alike
    # when the pointwise values are free of ties
    agree = True
    for _ in range(30):
        cs = rand_set(rng, int(rng.integers(15, 60)), int(rng.integers(1, 10)))
        for alt in ALTS:
            alpha = float(rng.uniform(0.05, 0.3))
            env = rank_envelope(cs, alpha, alt)
            m = compute_measure(cs, MeasureSpec("rank", alt))
            _, selection, _ = critical_value(m, alpha)
            V = cs.values
            kept = V[selection]
            lower = V.min(axis=0) if alt == "greater" else kept.min(axis=0)
            upper = V.max(axis=0) if alt == "less" else kept.max(axis=0)
            from_rank = np.fromiter((not env.contains(c) for c in V), bool, cs.s)
            from_hull = np.fromiter(
                (bool(((c < lower) | (c > upper)).any()) for c in V), bool, cs.s
            )
            agree = agree and bool(np.array_equal(from_rank, from_hull))

    ok = worst_f <= 1e-8 and worst_a <= 1e-12 and agree
    _verdict("statistic equivalences", ok, t0, 10.0,
             f"F={worst_f:.2e} area={worst_a:.2e} rank-hull={'ok' if agree else 'off'}")


def _bytes_of(args, path):
    assert cli.main(args + ["--json", str(path)]) == 0
    return path.read_bytes()


def test_cli_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    Y = rng.normal(size=(20, 8))
    Y[10:] += 1.5
    cs = create_curve_set(np.arange(1.0, 9.0), simulated=Y)
    io.write_curve_set(cs, tmp_path / "c.csv")
    (tmp_path / "g.csv").write_text("group\n" + "a\n" * 10 + "b\n" * 10)
    (tmp_path / "f.csv").write_text("g,x\n" + "a,1.0\n" * 10 + "b,2.0\n" * 10)
    stage_rng = np.random.default_rng(5)
    stages = tmp_path / "stages"
    stages.mkdir()
    for k in range(25):
        st = create_curve_set(np.arange(1.0, 6.0), observed=stage_rng.normal(size=5),
                              simulated=stage_rng.normal(size=(40, 5)))
        io.write_curve_set(st, stages / f"stage_{k:02d}.csv")
    with data_path("image_panel.csv") as p:
        panel = str(p)
    with growth_samples_path(10) as p:
        age10 = str(p)
    with data_path("growth_heights.csv") as p:
        heights = str(p)
    with data_path("growth_changes.csv") as p:
        changes = str(p)

    threaded = [
        ["fanova", str(tmp_path / "c.csv"), str(tmp_path / "g.csv"),
         "--nsim", "99", "--seed", "4", "--contrasts"],
        ["flm", str(tmp_path / "c.csv"), str(tmp_path / "f.csv"),
         "--full", "Y ~ g", "--reduced", "Y ~ 1", "--nsim", "99", "--seed", "4"],
        ["necdf", age10, "--nsim", "199", "--seed", "9"],
    ]
    plain = [
        ["order", heights, changes, "--type", "area"],
        ["envelope-test", panel],
        ["fboxplot", heights, changes],
        ["composite", str(stages)],
        ["demo-polynomial", "--n", "40", "--nsim", "199", "--seed", "1"],
        ["demo-normality", "--n", "60", "--s", "49", "--seed", "2"],
    ]

    ok = True
    for base in threaded:
        runs = [
            _bytes_of(base + ["--threads", t], tmp_path / f"t{t}.json")
            for t in ("1", "2", "4")
        ]
        ok = ok and runs[0] == runs[1] == runs[2] and json.loads(runs[0])
    for base in plain:
        first = _bytes_of(base, tmp_path / "r1.json")
        second = _bytes_of(base, tmp_path / "r2.json")
        ok = ok and first == second and json.loads(first)
    capsys.readouterr()
    _verdict("cli determinism", bool(ok), t0, 30.0)
