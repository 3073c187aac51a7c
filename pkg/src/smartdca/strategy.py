"""The recurring-investment strategy family.

Each member decides how much cash to put in at a buying event with price p,
given a base cost c_b, a reference price p_r and an exponent rho:

    RI          c_b * (p / p_r)          fixed *quantity* c_b / p_r per event
    DCA         c_b                      fixed cash per event
    RHO         c_b * (p_r / p)^rho      unbounded price-adaptive cash
    F_RHO_OUT   c_b * f(p_r / p)^rho     modulated, power outside f
    F_RHO_IN    c_b * f((p_r / p)^rho)   modulated, power inside f
    SIG_PLUS    c_b * f(1 / p)^rho       f = adaptive sigmoid calibrated on
                                         past inverse prices (p_r folded in)

RI and DCA are the rho = -1 and rho = 0 members of the RHO family and are
canonicalized to exactly those parameters, so they run through the same
code path bit for bit. With a bounded modulator (range in (0, 1]) and
rho >= 0 the cash is capped at c_b per event.

Cash is computed in the log domain. When an unbounded variant asks for more
than ``cash_cap_ratio * c_b`` (default 1e12) the computation aborts with
InvestmentCapError instead of silently saturating: the blow-up on very low
prices is a real phenomenon the caller must see.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, InvestmentCapError
from .marketdata import PriceSeries
from .modulators import IDENTITY, Modulator

VARIANTS = ("RI", "DCA", "RHO", "F_RHO_IN", "F_RHO_OUT", "SIG_PLUS")

DEFAULT_CASH_CAP_RATIO = 1e12


def _fmt(x: float) -> str:
    return f"{x:g}"


@dataclass(frozen=True)
class StrategySpec:
    """Immutable description of one strategy-family member.

    ``ref_price`` None means "use the first price of the series". SIG_PLUS
    folds the reference into its calibrated sigmoid (the modulator sees raw
    inverse prices), so it only accepts ref_price None or 1.0. A SIG_PLUS
    spec with ``modulator`` None is calibrated per calendar year by the
    backtest engine; give an explicit adaptive sigmoid to pin it instead.
    """

    variant: str
    rho: float = 1.0
    base_cost: float = 1.0
    ref_price: float | None = None
    modulator: Modulator | None = None
    cash_cap_ratio: float = DEFAULT_CASH_CAP_RATIO

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown strategy variant {self.variant!r}; expected one of {VARIANTS}")
        if not (math.isfinite(self.base_cost) and self.base_cost > 0):
            raise DomainError(f"base_cost must be a positive finite number, got {self.base_cost}")
        if self.ref_price is not None and not (math.isfinite(self.ref_price) and self.ref_price > 0):
            raise DomainError(f"ref_price must be positive and finite, got {self.ref_price}")
        if not math.isfinite(self.rho):
            raise DomainError(f"rho must be finite, got {self.rho}")
        if not (math.isfinite(self.cash_cap_ratio) and self.cash_cap_ratio > 1):
            raise DomainError(f"cash_cap_ratio must be > 1, got {self.cash_cap_ratio}")

        # Deterministic canonicalization of the degenerate members.
        if self.variant == "RI":
            object.__setattr__(self, "rho", -1.0)
        elif self.variant == "DCA":
            object.__setattr__(self, "rho", 0.0)
        if self.variant in ("RI", "DCA", "RHO"):
            if self.modulator is not None and not self.modulator.is_identity:
                raise DomainError(
                    f"variant {self.variant} uses the identity modulator; "
                    "use F_RHO_OUT or F_RHO_IN for modulated strategies"
                )
            object.__setattr__(self, "modulator", IDENTITY)
        elif self.variant in ("F_RHO_IN", "F_RHO_OUT"):
            if self.modulator is None:
                object.__setattr__(self, "modulator", IDENTITY)
        else:  # SIG_PLUS
            if self.modulator is not None and self.modulator.kind != "adaptive_sigmoid":
                raise DomainError("SIG_PLUS requires an adaptive_sigmoid modulator (or None to auto-calibrate)")
            if self.ref_price is not None and self.ref_price != 1.0:
                raise DomainError(
                    "SIG_PLUS folds the reference price into the calibrated sigmoid; "
                    "leave ref_price unset (or 1.0)"
                )
            object.__setattr__(self, "ref_price", 1.0)

    @property
    def label(self) -> str:
        if self.variant in ("RI", "DCA"):
            return self.variant
        if self.variant == "RHO":
            return f"RHO(rho={_fmt(self.rho)})"
        if self.variant == "SIG_PLUS":
            return f"SIG_PLUS(rho={_fmt(self.rho)})"
        return f"{self.variant}({self.modulator.name},rho={_fmt(self.rho)})"

    @property
    def sort_key(self) -> tuple:
        return (self.variant, self.rho, self.modulator.name if self.modulator else "")

    def with_modulator(self, modulator: Modulator) -> "StrategySpec":
        return replace(self, modulator=modulator)


@dataclass(frozen=True)
class BuyOrder:
    """One executed buy: quantity is cash / price, exactly."""

    cash: float
    quantity: float
    price: float


def resolve_ref_price(spec: StrategySpec, series: PriceSeries) -> float:
    """Configured fixed reference, or the first price of the series."""
    if spec.ref_price is not None:
        return float(spec.ref_price)
    return series.first_price


def investment_amounts(spec: StrategySpec, prices, ref_price: float) -> np.ndarray:
    """Vectorized cash amounts for one strategy over an array of prices."""
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1:
        raise DomainError("prices must be one-dimensional")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise DomainError("prices must be positive and finite")
    if not (math.isfinite(ref_price) and ref_price > 0):
        raise DomainError(f"reference price must be positive and finite, got {ref_price}")

    log_p = np.log(p)
    mod = spec.modulator
    if spec.variant in ("RI", "DCA", "RHO"):
        t = spec.rho * (math.log(ref_price) - log_p)
    elif spec.variant == "F_RHO_OUT":
        t = spec.rho * mod.log_eval_from_log(math.log(ref_price) - log_p)
    elif spec.variant == "F_RHO_IN":
        t = mod.log_eval_from_log(spec.rho * (math.log(ref_price) - log_p))
    else:  # SIG_PLUS: modulator consumes raw inverse prices
        if mod is None:
            raise DomainError("SIG_PLUS needs a calibrated modulator; run it through backtest.run or calibrate first")
        t = spec.rho * mod.log_eval_from_log(-log_p)

    t = np.atleast_1d(t)
    cap_log = math.log(spec.cash_cap_ratio)
    if np.any(t > cap_log):
        i = int(np.argmax(t > cap_log))
        err = InvestmentCapError(
            f"{spec.label} requests cash ratio exp({t[i]:.3f}) > cap {spec.cash_cap_ratio:g} "
            f"at price {p[i]!r}"
        )
        err.index = i
        raise err
    return spec.base_cost * np.exp(t)


def investment_amount(spec: StrategySpec, price: float, ref_price: float) -> float:
    """Cash to invest at one buying event."""
    return float(investment_amounts(spec, np.asarray([price], dtype=float), ref_price)[0])


def make_order(spec: StrategySpec, price: float, ref_price: float) -> BuyOrder:
    cash = investment_amount(spec, price, ref_price)
    return BuyOrder(cash=cash, quantity=cash / float(price), price=float(price))
