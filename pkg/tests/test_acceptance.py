"""Acceptance criteria, one test per criterion.

Each test enforces the stated tolerance and runtime budget and prints one
PASS/FAIL line (run with `pytest tests/test_acceptance.py -s` to see them
all). Real-market data is proprietary, so every criterion runs on synthetic
fixtures with exact or statistical oracles.
"""

import contextlib
import datetime as dt
import math
import time

import numpy as np
import pytest
from scipy import stats

from collectivity import corr, lppl, rpa, spectral, synthetic, weierstrass
from collectivity.cli import main


@contextlib.contextmanager
def criterion(number: int, description: str, budget_seconds: float):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[acceptance] criterion {number} FAIL: {description}")
        raise
    elapsed = time.monotonic() - start
    if elapsed >= budget_seconds:
        print(f"[acceptance] criterion {number} FAIL: {description} "
              f"(runtime {elapsed:.1f}s over budget {budget_seconds}s)")
        pytest.fail(f"criterion {number} exceeded runtime budget")
    print(f"[acceptance] criterion {number} PASS ({elapsed:.1f}s): {description}")


def test_criterion_1_trace_conservation():
    with criterion(1, "eigenvalues of 1000 random 30x30 windows sum to N within 1e-9", 30.0):
        n, t = 30, 30
        for seed in range(1000):
            panel = synthetic.random_panel(n, t, seed)
            spectrum = spectral.eigendecompose(corr.correlation_matrix(panel))
            assert abs(float(spectrum.eigenvalues.sum()) - n) < 1e-9


def test_criterion_2_rpa_oracle():
    with criterion(2, "numeric vs analytic collective-state solutions for 100 random models", 10.0):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            size = int(rng.integers(2, 101))
            model = rpa.SchematicRpaModel(
                epsilon=float(rng.normal()),
                kappa=float(rng.normal()),
                d=rng.normal(size=size),
            )
            numeric = rpa.solve_numeric(model)
            analytic = rpa.solve_analytic(model)
            assert np.max(np.abs(np.sort(numeric.energies) - np.sort(analytic.energies))) < 1e-9
            assert np.max(
                np.abs(np.sort(numeric.strengths) - np.sort(analytic.strengths))
            ) < 1e-9
            assert abs(numeric.strengths.sum() - model.total_strength) < 1e-10
            assert abs(analytic.strengths.sum() - model.total_strength) < 1e-10


def test_criterion_3_collectivity_gap():
    with criterion(3, "one-factor dominance >= 0.5 at factor share >= 0.5; "
                      "noise-only spectra stay under twice the bulk edge", 10.0):
        n = 30
        for share in (0.5, 0.7):
            for seed in (1, 2, 3):
                panel = synthetic.one_factor_panel(n, 2000, share, seed=seed)
                spectrum = spectral.eigendecompose(corr.correlation_matrix(panel))
                metrics = spectral.collectivity_metrics(spectrum)
                assert metrics.dominance >= 0.5, (share, seed, metrics.dominance)
        t = 30
        bulk_edge_bound = 2.0 * (1.0 + math.sqrt(n / t)) ** 2
        for seed in (10, 11, 12, 13, 14):
            panel = synthetic.one_factor_panel(n, t, 0.0, seed=seed)
            spectrum = spectral.eigendecompose(corr.correlation_matrix(panel))
            assert spectrum.eigenvalues[0] < bulk_edge_bound


def test_criterion_4_time_zone_merge(tmp_path):
    with criterion(4, "one-day shift at least doubles the cross-market gap ratio "
                      "in >= 19/20 seeds", 30.0):
        def gap_ratio(trace_path):
            lines = trace_path.read_text().splitlines()
            header = lines[0].split("\t")
            return float(lines[1].split("\t")[header.index("gap_ratio")])

        successes = 0
        for seed in range(20):
            work = tmp_path / f"seed{seed}"
            work.mkdir()
            panel_a, panel_b = synthetic.lagged_copy_markets(8, 60, 0.2, seed=seed)
            file_a, file_b = work / "a.csv", work / "b.csv"
            synthetic.write_price_csv(file_a, synthetic.prices_from_returns(panel_a))
            synthetic.write_price_csv(file_b, synthetic.prices_from_returns(panel_b))
            gaps = {}
            for shift in (0, 1):
                out = work / f"shift{shift}"
                rc = main(["global-spectrum", "--input-a", str(file_a),
                           "--input-b", str(file_b), "--shift-days", str(shift),
                           "--window-length", "59", "--out-dir", str(out)])
                assert rc == 0
                gaps[shift] = gap_ratio(out / "global_trace.tsv")
            if gaps[1] >= 2.0 * gaps[0]:
                successes += 1
        assert successes >= 19, f"only {successes}/20 seeds doubled the gap ratio"


def test_criterion_5_lppl_recovery():
    with criterion(5, "log-periodic fit recovers t_c within 1% of span and lambda "
                      "within 5% noise-free; median lambda in [1.9, 2.1] at 1% noise", 120.0):
        truth = lppl.LogPeriodicModel(tc=1000.0, alpha=0.5, lam=2.0, phi=1.0, a=2.0, b=0.3)
        t = np.linspace(0.0, 900.0, 500)
        clean = lppl.evaluate_model(truth, t)
        span = float(t[-1] - t[0])

        result = lppl.fit_model(t, clean)   # default grids
        assert abs(result.model.tc - truth.tc) < 0.01 * span
        assert abs(result.model.lam - truth.lam) / truth.lam < 0.05
        assert result.sse / result.n_points < 1e-6

        lams = []
        noise_scale = 0.01 * float(np.std(clean))
        for seed in range(20):
            rng = np.random.default_rng(seed)
            noisy = clean + noise_scale * rng.standard_normal(len(t))
            lams.append(lppl.fit_model(t, noisy).model.lam)
        median = float(np.median(lams))
        assert 1.9 <= median <= 2.1, f"median lambda {median}"


def test_criterion_6_extrema_progression():
    with criterion(6, "spacing ratios of exact log-periodic extrema match lambda "
                      "to 1e-3 * lambda", 5.0):
        for lam in (2.0, 3.0):
            model = lppl.LogPeriodicModel(
                tc=0.0, alpha=0.0, lam=lam, phi=1.0, a=1.0, b=0.4,
                direction="antibubble",
            )
            x = np.logspace(0.0, 2.5, 6000)
            values = lppl.evaluate_model(model, x)
            progression = lppl.extrema_progression(x, values, tc=0.0, direction="antibubble")
            assert len(progression.ratios) >= 3
            assert np.all(np.abs(progression.ratios - lam) < 1e-3 * lam)


def test_criterion_7_weierstrass_self_similarity():
    with criterion(7, "p(0) = 1/2 to 1e-12, renewal residual < 1e-11 on 3 decades, "
                      "scale ratio recovered within 2% of b", 30.0):
        for b, m in ((2.0, 4.0), (3.0, 9.0)):
            params = weierstrass.WeierstrassParams(a=1.0, b=b, m=m, truncation_tol=1e-12)
            assert abs(weierstrass.weierstrass_p(0.0, params).value - 0.5) < 1e-12
            grid = np.logspace(-1.5, 1.7, 400)
            assert weierstrass.renewal_residual(params, grid) < 1e-11
            analysis = weierstrass.analyze_self_similarity(params, grid)
            assert abs(analysis.lambda_estimate - b) / b < 0.02


def test_criterion_8_walk_statistics():
    with criterion(8, "chi-square of simulated step exponents vs the geometric mass "
                      "passes at the 1% level over 1e6 steps", 10.0):
        params = weierstrass.WeierstrassParams(b=2.0, m=4.0)
        n = 1_000_000
        walk = weierstrass.simulate_walk(params, n, seed=2718)
        top = int(walk.exponents.max())
        observed = np.bincount(walk.exponents, minlength=top + 1).astype(float)
        expected = params.step_probability(np.arange(top + 1)) * n
        while expected[-1] < 5.0 and len(expected) > 2:
            expected[-2] += expected[-1]
            observed[-2] += observed[-1]
            expected = expected[:-1]
            observed = observed[:-1]
        expected[-1] += n - expected.sum()
        statistic = float(np.sum((observed - expected) ** 2 / expected))
        threshold = stats.chi2.ppf(0.99, df=len(expected) - 1)
        assert statistic < threshold, f"chi2 {statistic:.2f} >= {threshold:.2f}"


def test_criterion_9_determinism(tmp_path):
    with criterion(9, "every subcommand is byte-identical across reruns with the "
                      "same config and seed", 60.0):
        panel = synthetic.one_factor_panel(6, 45, 0.5, seed=77)
        prices = tmp_path / "prices.csv"
        synthetic.write_price_csv(prices, synthetic.prices_from_returns(panel))
        panel_a, panel_b = synthetic.lagged_copy_markets(4, 40, 0.2, seed=78)
        file_a, file_b = tmp_path / "a.csv", tmp_path / "b.csv"
        synthetic.write_price_csv(file_a, synthetic.prices_from_returns(panel_a))
        synthetic.write_price_csv(file_b, synthetic.prices_from_returns(panel_b))

        truth = lppl.LogPeriodicModel(tc=90.0, alpha=0.5, lam=2.0, phi=0.5, a=1.0, b=0.2)
        t = np.arange(0.0, 80.0, 1.0)
        origin = dt.date(2015, 1, 1)
        series = tmp_path / "series.csv"
        with open(series, "w") as fh:
            fh.write("date,price\n")
            for ti, vi in zip(t, np.exp(lppl.evaluate_model(truth, t))):
                fh.write(f"{(origin + dt.timedelta(days=int(ti))).isoformat()},{float(vi)!r}\n")

        trace_dir = tmp_path / "trace-src"
        assert main(["spectrum", "--input", str(prices), "--window-length", "5",
                     "--out-dir", str(trace_dir)]) == 0

        invocations = {
            "returns": ["returns", "--input", str(prices)],
            "corr": ["corr", "--input", str(prices)],
            "spectrum": ["spectrum", "--input", str(prices), "--window-length", "30"],
            "global-spectrum": ["global-spectrum", "--input-a", str(file_a),
                                "--input-b", str(file_b), "--shift-days", "1",
                                "--window-length", "39"],
            "lppl-fit": ["lppl-fit", "--input", str(series), "--tc-nodes", "20",
                         "--lam-nodes", "5", "--alpha-nodes", "5"],
            "extrema": ["extrema", "--input", str(series), "--t-c", "90"],
            "weierstrass-eval": ["weierstrass-eval", "--k-points", "50"],
            "weierstrass-walk": ["weierstrass-walk", "--steps", "500", "--seed", "3"],
            "rpa-demo": ["rpa-demo"],
            "spacing-stats": ["spacing-stats", "--input",
                              str(trace_dir / "spectrum_trace.tsv"), "--degree", "2"],
        }
        for name, args in invocations.items():
            contents = []
            for tag in ("one", "two"):
                out = tmp_path / f"{name}-{tag}"
                rc = main(args + ["--out-dir", str(out)])
                assert rc == 0, name
                contents.append({p.name: p.read_bytes() for p in out.iterdir()})
            assert contents[0] == contents[1], f"{name} output differs between runs"
