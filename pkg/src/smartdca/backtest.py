"""Run strategies over price series and report price-per-unit and ROI.

A run walks the scheduled buying events, asks the strategy for the cash to
invest at each price, and accumulates a ledger. The headline figures:

    mu   = c_tot / q_tot     mean price paid per unit of asset
    roi  = (q_tot * p_last - c_tot) / c_tot

ROI marks the accumulated position to market at the final series price; no
sale, fees or slippage are modeled. Totals use math.fsum (compensated), so
ledger drift is below 1e-12 relative even over millions of entries. A run
that never acquires anything (bounded modulators can drive every cash
amount to zero on extreme prices) reports status "no-purchase" instead of
dividing by zero.

SIG_PLUS strategies are recalibrated once per calendar year from the
previous year's prices; the first year has no predecessor and is calibrated
on its own window (the one documented look-ahead).

A single run is sequential (ledger order matters for reproducibility);
independent runs over different strategies or windows are safe to execute
in parallel, and all reports are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, InvestmentCapError
from .marketdata import BuySchedule, PriceSeries, calendar_year_groups, full_schedule, iter_windows
from .modulators import calibrate_sig_plus
from .strategy import StrategySpec, investment_amounts, resolve_ref_price

STATUS_OK = "ok"
STATUS_NO_PURCHASE = "no-purchase"
STATUS_ERROR = "error"


@dataclass(frozen=True)
class LedgerEntry:
    timestamp: object
    price: float
    cash: float
    quantity: float


@dataclass(frozen=True)
class Ledger:
    entries: tuple
    c_tot: float
    q_tot: float


@dataclass(frozen=True)
class BacktestReport:
    spec: StrategySpec
    status: str
    mu: float | None
    q_tot: float
    c_tot: float
    roi: float | None
    final_price: float
    ref_price: float
    ledger: Ledger | None = None
    window_start: object = None
    window_end: object = None
    windows: tuple = ()

    @property
    def label(self) -> str:
        return self.spec.label


def _sig_plus_cash(series: PriceSeries, idx: np.ndarray, spec: StrategySpec) -> np.ndarray:
    if spec.modulator is not None:
        return investment_amounts(spec, series.prices[idx], 1.0)
    groups = calendar_year_groups(series)
    cash = np.empty(idx.size, dtype=float)
    for gi, (_, a, b) in enumerate(groups):
        mask = (idx >= a) & (idx < b)
        if not np.any(mask):
            continue
        pa, pb = (groups[gi - 1][1], groups[gi - 1][2]) if gi > 0 else (a, b)
        mod = calibrate_sig_plus(series.prices[pa:pb])
        try:
            cash[mask] = investment_amounts(spec.with_modulator(mod), series.prices[idx[mask]], 1.0)
        except InvestmentCapError as exc:
            if getattr(exc, "index", None) is not None:
                exc.index = int(np.nonzero(mask)[0][exc.index])
            raise
    return cash


def run(
    series: PriceSeries,
    schedule: BuySchedule,
    spec: StrategySpec,
    *,
    keep_ledger: bool = True,
) -> BacktestReport:
    """Execute one strategy over the scheduled events of a series."""
    idx = np.asarray(schedule.indices, dtype=int)
    if idx[-1] >= len(series):
        raise DomainError(f"schedule index {idx[-1]} out of range for series of length {len(series)}")
    ref = resolve_ref_price(spec, series)
    prices = series.prices[idx]
    try:
        if spec.variant == "SIG_PLUS":
            cash = _sig_plus_cash(series, idx, spec)
        else:
            cash = investment_amounts(spec, prices, ref)
    except InvestmentCapError as exc:
        i = getattr(exc, "index", None)
        ts = series.timestamps[idx[i]] if i is not None else "?"
        raise InvestmentCapError(f"run aborted at {ts}: {exc}") from exc
    quantity = cash / prices

    ledger = None
    if keep_ledger:
        entries = tuple(
            LedgerEntry(series.timestamps[j], float(p), float(c), float(q))
            for j, p, c, q in zip(idx, prices, cash, quantity)
        )
        ledger = Ledger(entries, math.fsum(cash), math.fsum(quantity))
        c_tot, q_tot = ledger.c_tot, ledger.q_tot
    else:
        c_tot, q_tot = math.fsum(cash), math.fsum(quantity)

    final_price = series.last_price
    if q_tot == 0.0:
        return BacktestReport(
            spec, STATUS_NO_PURCHASE, None, q_tot, c_tot, None, final_price, ref, ledger
        )
    mu = c_tot / q_tot
    roi = (q_tot * final_price - c_tot) / c_tot
    return BacktestReport(spec, STATUS_OK, mu, q_tot, c_tot, roi, final_price, ref, ledger)


def sliding_windows(series: PriceSeries, spec: StrategySpec, window_len, step) -> list:
    """Independent per-window runs, buying at every point of each window.

    The reference price is re-resolved inside each window (so first-price
    policies use the window's own first price), simulating one independent
    investor per window.
    """
    reports = []
    for start, end, a, b in iter_windows(series, window_len, step):
        sub = series.slice_range(a, b)
        rep = run(sub, full_schedule(sub), spec, keep_ledger=False)
        reports.append(replace(rep, window_start=start, window_end=end))
    return reports


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    variant: str
    rho: float
    modulator: str
    status: str
    mu: float | None = None
    q_tot: float | None = None
    c_tot: float | None = None
    roi: float | None = None
    final_price: float | None = None
    error: str | None = None


def compare(series: PriceSeries, schedule: BuySchedule, specs) -> list:
    """One row per strategy, in the given order; failures flagged, not dropped."""
    specs = list(specs)
    if not specs:
        raise DomainError("compare needs at least one strategy")
    rows = []
    for spec in specs:
        mod_name = spec.modulator.name if spec.modulator is not None else "sig+"
        try:
            rep = run(series, schedule, spec, keep_ledger=False)
        except Exception as exc:  # noqa: BLE001 - failed rows are reported, not raised
            rows.append(
                ComparisonRow(spec.label, spec.variant, spec.rho, mod_name, STATUS_ERROR, error=str(exc))
            )
            continue
        rows.append(
            ComparisonRow(
                spec.label,
                spec.variant,
                spec.rho,
                mod_name,
                rep.status,
                mu=rep.mu,
                q_tot=rep.q_tot,
                c_tot=rep.c_tot,
                roi=rep.roi,
                final_price=rep.final_price,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# Serialization (12 significant digits on numeric fields)


def round_sig(v, digits: int = 12):
    if v is None:
        return None
    return float(f"{float(v):.{digits}g}")


def spec_to_dict(spec: StrategySpec) -> dict:
    mod = spec.modulator
    mod_dict = None
    if mod is not None:
        mod_dict = {"name": mod.name}
        if mod.kind == "adaptive_sigmoid":
            mod_dict["x0"] = round_sig(mod.x0)
            mod_dict["lambda"] = round_sig(mod.lam)
    return {
        "variant": spec.variant,
        "rho": round_sig(spec.rho),
        "base_cost": round_sig(spec.base_cost),
        "ref_price": round_sig(spec.ref_price) if spec.ref_price is not None else None,
        "modulator": mod_dict,
        "label": spec.label,
    }


def _ts_str(ts):
    if ts is None:
        return None
    return ts.isoformat() if hasattr(ts, "isoformat") else int(ts)


def report_to_dict(report: BacktestReport) -> dict:
    d = {
        "strategy": spec_to_dict(report.spec),
        "status": report.status,
        "mu": round_sig(report.mu),
        "q_tot": round_sig(report.q_tot),
        "c_tot": round_sig(report.c_tot),
        "roi": round_sig(report.roi),
        "final_price": round_sig(report.final_price),
        "ref_price": round_sig(report.ref_price),
    }
    if report.window_start is not None:
        d["window_start"] = _ts_str(report.window_start)
        d["window_end"] = _ts_str(report.window_end)
    d["windows"] = [report_to_dict(w) for w in report.windows] if report.windows else []
    return d


def comparison_to_dicts(rows) -> list:
    out = []
    for r in rows:
        out.append(
            {
                "strategy": r.label,
                "variant": r.variant,
                "rho": round_sig(r.rho),
                "modulator": r.modulator,
                "status": r.status,
                "mu": round_sig(r.mu),
                "q_tot": round_sig(r.q_tot),
                "c_tot": round_sig(r.c_tot),
                "roi": round_sig(r.roi),
                "final_price": round_sig(r.final_price),
                "error": r.error,
            }
        )
    return out
