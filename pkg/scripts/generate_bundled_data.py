#!/usr/bin/env python3
"""Regenerate the CSVs bundled under src/smartdca/data.

The appreciating sample is synthetic (seeded geometric random walk with
upward drift); it stands in for real market feeds so that examples, tests
and docs run offline with documented provenance. Output is deterministic:
re-running this script reproduces the files byte for byte.
"""

from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path

import numpy as np

from smartdca.marketdata import PriceSeries, write_csv

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "smartdca" / "data"

SEED = 20180101
START = date(2018, 1, 1)
YEARS = 6
START_PRICE = 100.0
ANNUAL_DRIFT = 0.25
ANNUAL_VOL = 0.45
DAYS_PER_YEAR = 365


def make_appreciating_daily() -> PriceSeries:
    n = YEARS * DAYS_PER_YEAR
    rng = np.random.default_rng(SEED)
    dt = 1.0 / DAYS_PER_YEAR
    steps = (ANNUAL_DRIFT - 0.5 * ANNUAL_VOL**2) * dt + ANNUAL_VOL * np.sqrt(dt) * rng.standard_normal(n - 1)
    log_prices = np.concatenate([[np.log(START_PRICE)], np.log(START_PRICE) + np.cumsum(steps)])
    prices = np.round(np.exp(log_prices), 6)
    timestamps = tuple(START + timedelta(days=i) for i in range(n))
    return PriceSeries(timestamps, prices)


def make_gas_example() -> PriceSeries:
    return PriceSeries((date(2020, 1, 1), date(2020, 2, 1)), np.asarray([0.5, 1.5]))


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    series = make_appreciating_daily()
    write_csv(series, DATA_DIR / "sample_appreciating_daily.csv")
    write_csv(make_gas_example(), DATA_DIR / "gas_example.csv")
    ratio = series.last_price / series.first_price
    print(f"sample_appreciating_daily.csv: {len(series)} rows, "
          f"{series.timestamps[0]}..{series.timestamps[-1]}, growth x{ratio:.2f}")
    print("gas_example.csv: 2 rows")


if __name__ == "__main__":
    main()
