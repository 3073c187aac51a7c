"""Pydantic request/response models for the HTTP service.

The wire format is deliberately plain: a price series travels inline as
parallel timestamp/price lists (axis "date" uses ISO strings, axis "tick"
integers), strategies as small parameter objects, and every response is a
flat JSON document the CLI can write to disk unchanged.
"""

from __future__ import annotations

from datetime import date
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from ..errors import ConfigError
from ..marketdata import PriceSeries
from ..modulators import Modulator, from_name
from ..strategy import DEFAULT_CASH_CAP_RATIO, StrategySpec
from ..proofs import DEFAULT_SEED


class ModulatorModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str = "identity"
    x0: Optional[float] = None
    lam: Optional[float] = Field(default=None, alias="lambda")

    def to_modulator(self) -> Modulator:
        return from_name(self.name, x0=self.x0, lam=self.lam)


def _parse_modulator(value) -> Modulator | None:
    if value is None:
        return None
    if isinstance(value, str):
        return from_name(value)
    if isinstance(value, ModulatorModel):
        return value.to_modulator()
    if isinstance(value, dict):
        return ModulatorModel.model_validate(value).to_modulator()
    raise ConfigError(f"cannot interpret modulator spec {value!r}")


class StrategyModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    variant: str
    rho: float = 1.0
    base_cost: float = 1.0
    ref_price: Optional[float] = None
    modulator: Union[ModulatorModel, str, None] = None
    cash_cap_ratio: float = DEFAULT_CASH_CAP_RATIO

    def to_spec(self) -> StrategySpec:
        return StrategySpec(
            variant=self.variant,
            rho=self.rho,
            base_cost=self.base_cost,
            ref_price=self.ref_price,
            modulator=_parse_modulator(self.modulator),
            cash_cap_ratio=self.cash_cap_ratio,
        )


class SeriesModel(BaseModel):
    axis: Literal["date", "tick"]
    timestamps: list
    prices: list[float]

    @classmethod
    def from_series(cls, series: PriceSeries) -> "SeriesModel":
        if series.is_dated:
            ts = [t.isoformat() for t in series.timestamps]
            return cls(axis="date", timestamps=ts, prices=[float(p) for p in series.prices])
        return cls(axis="tick", timestamps=[int(t) for t in series.timestamps],
                   prices=[float(p) for p in series.prices])

    def to_series(self) -> PriceSeries:
        if self.axis == "date":
            ts = tuple(date.fromisoformat(str(t)) for t in self.timestamps)
        else:
            ts = tuple(int(t) for t in self.timestamps)
        return PriceSeries(ts, self.prices)


class WindowsModel(BaseModel):
    length: Union[int, str]
    step: Union[int, str]


# --- backtest / compare -----------------------------------------------------


class BacktestRequest(BaseModel):
    series: SeriesModel
    schedule_every: int = 1
    strategies: list[StrategyModel]
    windows: Optional[WindowsModel] = None


class StrategyInfo(BaseModel):
    variant: str
    rho: Optional[float] = None
    base_cost: Optional[float] = None
    ref_price: Optional[float] = None
    modulator: Optional[dict] = None
    label: str


class WindowReportModel(BaseModel):
    window_start: Union[int, str, None] = None
    window_end: Union[int, str, None] = None
    status: str
    mu: Optional[float] = None
    q_tot: Optional[float] = None
    c_tot: Optional[float] = None
    roi: Optional[float] = None
    final_price: Optional[float] = None
    ref_price: Optional[float] = None


class ReportModel(BaseModel):
    strategy: StrategyInfo
    status: str
    mu: Optional[float] = None
    q_tot: Optional[float] = None
    c_tot: Optional[float] = None
    roi: Optional[float] = None
    final_price: Optional[float] = None
    ref_price: Optional[float] = None
    error: Optional[str] = None
    windows: list[WindowReportModel] = []


class ComparisonRowModel(BaseModel):
    strategy: str
    variant: str
    rho: Optional[float] = None
    modulator: str
    status: str
    mu: Optional[float] = None
    q_tot: Optional[float] = None
    c_tot: Optional[float] = None
    roi: Optional[float] = None
    final_price: Optional[float] = None
    error: Optional[str] = None


class BacktestResponse(BaseModel):
    reports: list[ReportModel]
    comparison: list[ComparisonRowModel]


class CompareRequest(BaseModel):
    series: SeriesModel
    schedule_every: int = 1
    strategies: list[StrategyModel]


class CompareResponse(BaseModel):
    comparison: list[ComparisonRowModel]


# --- simulate ----------------------------------------------------------------


class SimulateRequest(BaseModel):
    n: int = 100
    lo: float = 0.0
    hi: float = 2.0
    seed: int = DEFAULT_SEED
    rho_grid: list[float] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    modulators: list[str] = ["tanh", "sigmoid", "sin1"]
    base_cost: float = 1.0
    ref_price: float = 1.0


class SimPointModel(BaseModel):
    rho: float
    variant: str
    f: str
    status: str
    mu: Optional[float] = None
    max_single_investment: Optional[float] = None
    c_tot: Optional[float] = None
    q_tot: Optional[float] = None
    error: Optional[str] = None


class CashPointModel(BaseModel):
    rho: float
    variant: str
    f: str
    tick: int
    price: float
    cash: float


class SimulateResponse(BaseModel):
    rng: str
    seed: int
    n: int
    lo: float
    hi: float
    points: list[SimPointModel]
    cash: list[CashPointModel]


# --- verify ------------------------------------------------------------------


class VerifyRequest(BaseModel):
    seed: int = DEFAULT_SEED
    rel_tolerance: float = 1e-9
    fd_tolerance: float = 1e-7
    cs_vectors: int = 100_000
    chain_series: int = 1000
    fd_vectors: int = 200
    inject_fault: bool = False


class VerifyCheckModel(BaseModel):
    name: str
    holds: bool
    cases: int
    violations: list[dict] = []
    worst_slack: Optional[float] = None
    notes: str = ""
    elapsed_s: float


class VerifyResponse(BaseModel):
    rng: str
    seed: int
    rel_tolerance: float
    fd_tolerance: float
    fault_injected: bool
    all_hold: bool
    checks: list[VerifyCheckModel]


# --- calibrate ---------------------------------------------------------------


class CalibrateRequest(BaseModel):
    series: SeriesModel
    start: Optional[str] = None
    end: Optional[str] = None


class CalibrationRowModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    window: str
    start: Union[int, str]
    end: Union[int, str]
    n_prices: int
    x0: float
    lam: float = Field(alias="lambda")
    floored: bool


class CalibrateResponse(BaseModel):
    windows: list[CalibrationRowModel]
