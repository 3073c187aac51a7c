"""FastAPI application exposing the library over HTTP.

Endpoints (all POST bodies/responses are the models in schemas.py):

    GET  /health      liveness + version
    POST /backtest    run strategies over a series, optional window reports
    POST /compare     comparison table only
    POST /simulate    seeded uniform-price simulation across a rho grid
    POST /verify      run the inequality/theorem suites
    POST /calibrate   adaptive-sigmoid calibration per calendar-year window

Package errors map to HTTP 422 with a body naming the exception class, so
thin clients can re-raise the right error type.
"""

from __future__ import annotations

from dataclasses import replace
from datetime import date

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__, backtest, proofs
from ..errors import ConfigError, DomainError, SmartDcaError
from ..marketdata import RNG_ALGORITHM, calendar_year_groups, schedule_every, synth_uniform
from ..modulators import calibrate_sig_plus, sig_plus_lambda_floored
from ..strategy import StrategySpec
from . import schemas as S


def _strategy_info(spec: StrategySpec) -> dict:
    return backtest.spec_to_dict(spec)


def _report_model(rep: backtest.BacktestReport) -> dict:
    d = backtest.report_to_dict(rep)
    d["strategy"] = _strategy_info(rep.spec)
    return d


def _error_report(spec: StrategySpec, exc: Exception) -> dict:
    return {
        "strategy": _strategy_info(spec),
        "status": backtest.STATUS_ERROR,
        "error": str(exc),
        "windows": [],
    }


def create_app() -> FastAPI:
    app = FastAPI(title="smartdca", version=__version__)

    @app.exception_handler(SmartDcaError)
    async def _package_error(request, exc: SmartDcaError):
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/backtest", response_model=S.BacktestResponse)
    def run_backtest(req: S.BacktestRequest):
        if not req.strategies:
            raise ConfigError("at least one strategy is required")
        series = req.series.to_series()
        specs = [m.to_spec() for m in req.strategies]
        schedule = schedule_every(series, req.schedule_every)
        reports = []
        for spec in specs:
            try:
                rep = backtest.run(series, schedule, spec)
                if req.windows is not None:
                    wins = backtest.sliding_windows(series, spec, req.windows.length, req.windows.step)
                    rep = replace(rep, windows=tuple(wins))
                reports.append(_report_model(rep))
            except SmartDcaError as exc:
                reports.append(_error_report(spec, exc))
        comparison = backtest.comparison_to_dicts(backtest.compare(series, schedule, specs))
        return {"reports": reports, "comparison": comparison}

    @app.post("/compare", response_model=S.CompareResponse)
    def run_compare(req: S.CompareRequest):
        if not req.strategies:
            raise ConfigError("at least one strategy is required")
        series = req.series.to_series()
        specs = [m.to_spec() for m in req.strategies]
        schedule = schedule_every(series, req.schedule_every)
        return {"comparison": backtest.comparison_to_dicts(backtest.compare(series, schedule, specs))}

    @app.post("/simulate", response_model=S.SimulateResponse)
    def run_simulate(req: S.SimulateRequest):
        series = synth_uniform(req.n, req.lo, req.hi, req.seed)
        schedule = schedule_every(series, 1)
        combos = [("DCA", "identity", 0.0, StrategySpec("DCA", base_cost=req.base_cost, ref_price=req.ref_price))]
        for rho in req.rho_grid:
            combos.append(
                ("RHO", "identity", rho,
                 StrategySpec("RHO", rho=rho, base_cost=req.base_cost, ref_price=req.ref_price))
            )
        for name in req.modulators:
            for variant in ("F_RHO_IN", "F_RHO_OUT"):
                for rho in req.rho_grid:
                    combos.append(
                        (variant, name, rho,
                         StrategySpec(variant, rho=rho, base_cost=req.base_cost,
                                      ref_price=req.ref_price,
                                      modulator=S.ModulatorModel(name=name).to_modulator()))
                    )
        points, cash_rows = [], []
        for variant, f_name, rho, spec in combos:
            try:
                rep = backtest.run(series, schedule, spec)
            except SmartDcaError as exc:
                points.append({"rho": rho, "variant": variant, "f": f_name,
                               "status": backtest.STATUS_ERROR, "error": str(exc)})
                continue
            max_cash = max(e.cash for e in rep.ledger.entries)
            points.append(
                {
                    "rho": rho,
                    "variant": variant,
                    "f": f_name,
                    "status": rep.status,
                    "mu": backtest.round_sig(rep.mu),
                    "max_single_investment": backtest.round_sig(max_cash),
                    "c_tot": backtest.round_sig(rep.c_tot),
                    "q_tot": backtest.round_sig(rep.q_tot),
                }
            )
            for entry in rep.ledger.entries:
                cash_rows.append(
                    {
                        "rho": rho,
                        "variant": variant,
                        "f": f_name,
                        "tick": int(entry.timestamp),
                        "price": backtest.round_sig(entry.price),
                        "cash": backtest.round_sig(entry.cash),
                    }
                )
        return {
            "rng": RNG_ALGORITHM,
            "seed": req.seed,
            "n": req.n,
            "lo": req.lo,
            "hi": req.hi,
            "points": points,
            "cash": cash_rows,
        }

    @app.post("/verify", response_model=S.VerifyResponse)
    def run_verify(req: S.VerifyRequest):
        return proofs.run_verification(
            req.seed,
            rel_tol=req.rel_tolerance,
            fd_tol=req.fd_tolerance,
            n_cs_vectors=req.cs_vectors,
            n_chain_series=req.chain_series,
            n_fd_vectors=req.fd_vectors,
            inject_fault=req.inject_fault,
        )

    @app.post("/calibrate", response_model=S.CalibrateResponse)
    def run_calibrate(req: S.CalibrateRequest):
        series = req.series.to_series()
        rows = []

        def calibrate_window(label, a, b):
            window = series.prices[a:b]
            if window.size == 0:
                raise DomainError(f"calibration window {label} contains no prices")
            mod = calibrate_sig_plus(window)
            ts = series.timestamps
            rows.append(
                {
                    "window": label,
                    "start": ts[a].isoformat() if series.is_dated else int(ts[a]),
                    "end": ts[b - 1].isoformat() if series.is_dated else int(ts[b - 1]),
                    "n_prices": int(window.size),
                    "x0": backtest.round_sig(mod.x0),
                    "lambda": backtest.round_sig(mod.lam),
                    "floored": sig_plus_lambda_floored(window),
                }
            )

        if req.start is not None or req.end is not None:
            if req.start is None or req.end is None:
                raise ConfigError("an explicit calibration window needs both start and end")
            if not series.is_dated:
                raise ConfigError("explicit calibration windows require a dated series")
            lo, hi = date.fromisoformat(req.start), date.fromisoformat(req.end)
            idx = [i for i, t in enumerate(series.timestamps) if lo <= t < hi]
            if not idx:
                raise DomainError(f"calibration window [{req.start}, {req.end}) contains no prices")
            calibrate_window(f"{req.start}..{req.end}", idx[0], idx[-1] + 1)
        else:
            for label, a, b in calendar_year_groups(series):
                calibrate_window(label, a, b)
        return {"windows": rows}

    return app


app = create_app()
