"""Synthetic market fixtures with known ground truth, for tests and demos.

Everything is driven by an explicit seed through numpy's PCG64 generator,
so fixtures are reproducible by construction.
"""

from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path
from typing import Sequence

import numpy as np

from .marketdata import PriceSeries, ReturnPanel


def business_dates(start: dt.date, count: int) -> list[dt.date]:
    """The next `count` weekdays from `start` (inclusive if it is one)."""
    out: list[dt.date] = []
    day = start
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day)
        day += dt.timedelta(days=1)
    return out


def random_panel(
    n_assets: int,
    n_dates: int,
    seed: int,
    start: dt.date = dt.date(2000, 1, 3),
) -> ReturnPanel:
    """Panel of iid standard-normal returns: no collective structure at all."""
    rng = np.random.default_rng(seed)
    assets = [f"A{i:02d}" for i in range(n_assets)]
    return ReturnPanel(assets, business_dates(start, n_dates), rng.standard_normal((n_assets, n_dates)), 1)


def one_factor_panel(
    n_assets: int,
    n_dates: int,
    factor_share: float,
    seed: int,
    start: dt.date = dt.date(2000, 1, 3),
    loading_ramp: np.ndarray | None = None,
) -> ReturnPanel:
    """One-factor market r_i(t) = beta(t) * f(t) + noise with unit total variance.

    factor_share is the variance fraction carried by the common factor, so
    the population cross-correlation between any two assets equals it. An
    optional loading_ramp (length n_dates, multiplying beta over time) makes
    the collectivity grow or shrink through the sample.
    """
    if not 0.0 <= factor_share < 1.0:
        raise ValueError(f"factor_share must be in [0, 1), got {factor_share}")
    rng = np.random.default_rng(seed)
    assets = [f"A{i:02d}" for i in range(n_assets)]
    beta = np.sqrt(factor_share)
    sigma = np.sqrt(1.0 - factor_share)
    factor = rng.standard_normal(n_dates)
    noise = rng.standard_normal((n_assets, n_dates))
    ramp = np.ones(n_dates) if loading_ramp is None else np.asarray(loading_ramp, dtype=float)
    returns = beta * ramp[None, :] * factor[None, :] + sigma * noise
    return ReturnPanel(assets, business_dates(start, n_dates), returns, 1)


def lagged_copy_markets(
    n_assets: int,
    n_dates: int,
    noise_share: float,
    seed: int,
    factor_share: float = 0.5,
    start: dt.date = dt.date(2000, 1, 3),
) -> tuple[ReturnPanel, ReturnPanel]:
    """Two one-factor markets where B echoes A one trading day later.

    Market A is a one-factor market; market B's return on day t is
    sqrt(1 - noise_share) * A(t-1) + sqrt(noise_share) * fresh noise. With a
    one-day shift applied to A the combined panel carries a single common
    factor; without it the two markets look independent.
    """
    if not 0.0 <= noise_share < 1.0:
        raise ValueError(f"noise_share must be in [0, 1), got {noise_share}")
    rng = np.random.default_rng(seed)
    dates = business_dates(start, n_dates + 1)
    beta = np.sqrt(factor_share)
    sigma = np.sqrt(1.0 - factor_share)
    factor = rng.standard_normal(n_dates + 1)
    noise_a = rng.standard_normal((n_assets, n_dates + 1))
    returns_a = beta * factor[None, :] + sigma * noise_a
    echo = np.sqrt(1.0 - noise_share)
    fresh = np.sqrt(noise_share)
    returns_b = echo * returns_a[:, :-1] + fresh * rng.standard_normal((n_assets, n_dates))

    panel_a = ReturnPanel(
        [f"A{i:02d}" for i in range(n_assets)], dates[1:], returns_a[:, 1:], 1
    )
    panel_b = ReturnPanel(
        [f"B{i:02d}" for i in range(n_assets)], dates[1:], returns_b, 1
    )
    return panel_a, panel_b


def goe_matrix(n: int, seed: int) -> np.ndarray:
    """Random real-symmetric matrix with independent Gaussian entries (GOE-type)."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, n))
    return (raw + raw.T) / np.sqrt(2.0 * n)


def prices_from_returns(panel: ReturnPanel, initial: float = 100.0) -> list[PriceSeries]:
    """Invert the log-return construction: the return labelled t moves the price
    from t to the next trading day, so one trailing date is appended and
    recomputing tau=1 returns reproduces the panel, labels included."""
    last = panel.dates[-1] + dt.timedelta(days=1)
    while last.weekday() >= 5:
        last += dt.timedelta(days=1)
    dates = list(panel.dates) + [last]
    out = []
    for i, asset in enumerate(panel.assets):
        prices = initial * np.exp(np.concatenate([[0.0], np.cumsum(panel.returns[i])]))
        out.append(PriceSeries(asset, dates, prices))
    return out


def write_price_csv(path: str | Path, series: Sequence[PriceSeries], delimiter: str = ",") -> None:
    """Write price series in the loader's input format (date, asset, price)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(["date", "asset", "price"])
        for s in series:
            for day, price in zip(s.dates, s.prices):
                writer.writerow([day.isoformat(), s.asset_id, repr(float(price))])
