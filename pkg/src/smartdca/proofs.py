"""Executable checks for every ordering claim the strategy family rests on.

This is the oracle layer: each function here evaluates an inequality or
closed form by direct, independent arithmetic (plain summation, finite
differences, deterministic grid search) and reports the outcome as an
InequalityReport. The test suite and the ``verify`` command are built on
top of these, so a regression in the means or backtest modules shows up as
a violated inequality with a concrete witness.

The claims covered:

- two-buy closed forms: mu_RI = (p1+p2)/2, mu_DCA = 2 p1 p2 / (p1+p2),
  mu_smart = p1 p2 (p1+p2) / (p1^2+p2^2), with mu_RI >= mu_DCA >= mu_smart
  (equality iff p1 = p2, since the gap carries a (p1-p2)^2 factor).
- the two-price family mu_n = p1 p2 (p1^n + p2^n) / (p1^(n+1) + p2^(n+1)),
  non-increasing in n.
- the Cauchy-Schwarz bound m * sum(1/p^2) >= (sum 1/p)^2 behind the
  m-buy superiority of the price-ratio strategy.
- monotonicity in rho of the out-variant generalized means (and of -mu),
  via central finite differences plus the analytic pair-summand sign.
- the known non-monotonicity of the in-variant: a deterministic grid
  search produces sample vectors below e^(-1/rho) on which it decreases.
- the full mu ordering chain mu(RI) >= mu(DCA) >= mu(rho) >= min(p).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import backtest, means
from .errors import ConfigError, CounterexampleNotFound, DomainError
from .marketdata import RNG_ALGORITHM, PriceSeries, full_schedule
from .modulators import IDENTITY, SIGMOID, Modulator, from_name
from .strategy import StrategySpec

DEFAULT_SEED = 978355
FD_STEP = 1e-4
FD_TOLERANCE = 1e-7
REL_TOLERANCE = 1e-9
MAX_GRID_SPACING = 0.5
# "Strictly negative" for finite differences: central differences with step
# 1e-4 on log-domain sums carry ~1e-13 absolute noise, so anything below
# this is a real decrease, not rounding.
STRICT_NEGATIVE_FD = -1e-10


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of one lhs >= rhs check; holds iff slack >= -tolerance."""

    label: str
    holds: bool
    lhs: float
    rhs: float
    slack: float
    tolerance: float
    witness: object = None


def _report(label: str, lhs: float, rhs: float, rel_tol: float, witness=None) -> InequalityReport:
    slack = lhs - rhs
    tol = rel_tol * max(abs(lhs), abs(rhs), 1e-300)
    return InequalityReport(label, bool(slack >= -tol), float(lhs), float(rhs), float(slack), tol, witness)


def _positive_pair(p1: float, p2: float) -> tuple[float, float]:
    for p in (p1, p2):
        if not (math.isfinite(p) and p > 0):
            raise DomainError(f"prices must be positive and finite, got {p}")
    return float(p1), float(p2)


def two_buy_closed_forms(p1: float, p2: float) -> tuple[float, float, float]:
    """(mu_RI, mu_DCA, mu_smart) for two buys at prices p1, p2.

    Always mu_RI >= mu_DCA >= mu_smart; all three coincide when p1 = p2.
    """
    p1, p2 = _positive_pair(p1, p2)
    mu_ri = (p1 + p2) / 2.0
    mu_dca = 2.0 * p1 * p2 / (p1 + p2)
    mu_smart = p1 * p2 * (p1 + p2) / (p1 * p1 + p2 * p2)
    return mu_ri, mu_dca, mu_smart


def mu_n_closed_form(p1: float, p2: float, n: float) -> float:
    """Two-price family mu_n = p1 p2 (p1^n + p2^n) / (p1^(n+1) + p2^(n+1)).

    mu_0 is the harmonic mean, mu_1 the two-buy smart value; the family is
    non-increasing in n. Scaled so moderate |n| never overflows.
    """
    p1, p2 = _positive_pair(p1, p2)
    if not math.isfinite(n):
        raise DomainError(f"order n must be finite, got {n}")
    s = max(p1, p2) if n >= 0 else min(p1, p2)
    a, b = p1 / s, p2 / s
    return (p1 * p2 / s) * (a**n + b**n) / (a ** (n + 1) + b ** (n + 1))


def cauchy_schwarz_check(prices, rel_tol: float = REL_TOLERANCE) -> InequalityReport:
    """Check m * sum(1/p^2) >= (sum 1/p)^2 by direct compensated summation.

    Both sides are computed on inverse prices normalized by their maximum
    (the inequality is scale-invariant), which makes the constant-vector
    equality case exact: slack is 0.0 bit for bit.
    """
    p = means.as_sample_vector(prices)
    y = 1.0 / p
    z = y / np.max(y)
    m = z.size
    lhs = m * math.fsum((z * z).tolist())
    rhs = math.fsum(z.tolist()) ** 2
    return _report("cauchy-schwarz", lhs, rhs, rel_tol, witness=p)


def _mean_grid(mean_kind: str, x, rhos, f: Modulator, xi: float, g) -> np.ndarray:
    if mean_kind == "lehmer":
        return means.lehmer_mean_grid(x, rhos)
    if mean_kind == "out":
        return means.quasi_lehmer_out_grid(x, rhos, f)
    if mean_kind == "in":
        return means.quasi_lehmer_in_grid(x, rhos, f)
    if mean_kind == "moment":
        return means.quasi_lehmer_moment_grid(x, rhos, xi, f)
    if mean_kind == "expectation":
        return np.asarray([means.quasi_lehmer_expectation(x, r, g, f) for r in rhos])
    raise DomainError(f"unknown mean kind {mean_kind!r}")


def _pair_summand_floor(mean_kind: str, x: np.ndarray, f: Modulator, rho: float, xi: float, g) -> float:
    """Smallest pair summand f(xi)^rho f(xj)^rho (vi - vj)(log f(xi) - log f(xj)).

    The sign is carried entirely by (vi - vj)(log f(xi) - log f(xj)); the
    f^rho factors are positive, so one representative rho suffices.
    """
    log_f = np.atleast_1d(f.log_eval_from_log(np.log(x)))
    if mean_kind == "moment":
        v = x**xi
    elif mean_kind == "expectation":
        v = np.asarray(g(x), dtype=float)
    else:
        v = x
    w = np.exp(rho * (log_f - np.max(log_f)))  # positive, overflow-safe
    dv = v[:, None] - v[None, :]
    dlf = log_f[:, None] - log_f[None, :]
    summands = (w[:, None] * w[None, :]) * dv * dlf
    iu = np.triu_indices(x.size, k=1)
    return float(np.min(summands[iu])) if iu[0].size else 0.0


def finite_difference_monotonicity(
    mean_kind: str,
    x,
    f: Modulator,
    rho_grid,
    *,
    step: float = FD_STEP,
    tolerance: float = FD_TOLERANCE,
    xi: float = 1.0,
    g=None,
) -> list:
    """Central finite differences d/drho of a mean across a rho grid.

    Returns one report per grid point (derivative >= -tolerance), plus one
    pair-summand sign report for the out-like kinds. The grid must be
    ascending with spacing <= 0.5 so that non-monotone dips between points
    cannot be skipped.
    """
    grid = np.asarray(rho_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or not np.all(np.isfinite(grid)):
        raise ConfigError("rho grid must be a non-empty finite 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("rho grid must be strictly ascending")
    if grid.size > 1 and float(np.max(np.diff(grid))) > MAX_GRID_SPACING:
        raise ConfigError(f"rho grid too coarse: spacing must be <= {MAX_GRID_SPACING}")
    xv = means.as_sample_vector(x)

    evals = np.concatenate([grid - step, grid + step])
    vals = _mean_grid(mean_kind, xv, evals, f, xi, g)
    deriv = (vals[grid.size :] - vals[: grid.size]) / (2.0 * step)

    reports = [
        InequalityReport(
            f"fd[{mean_kind}]@rho={r:g}",
            bool(d >= -tolerance),
            float(d),
            0.0,
            float(d),
            tolerance,
            witness=xv,
        )
        for r, d in zip(grid, deriv)
    ]
    if mean_kind in ("lehmer", "out", "moment", "expectation"):
        floor = _pair_summand_floor(mean_kind, xv, f if mean_kind != "lehmer" else IDENTITY,
                                    float(grid[grid.size // 2]), xi, g)
        reports.append(
            InequalityReport(
                f"pair-summand[{mean_kind}]",
                bool(floor >= -tolerance),
                floor,
                0.0,
                floor,
                tolerance,
                witness=xv,
            )
        )
    return reports


def find_in_counterexample(rho: float) -> np.ndarray:
    """Deterministic witness that the in-variant mean is not monotonic.

    Grid-searches 2-element vectors with every value below e^(-1/rho)
    (capped at 0.6) under a sigmoid modulator, and returns the first pair
    whose in-variant mean strictly decreases somewhere on [rho, rho + 1].
    Exhausting the grid raises CounterexampleNotFound: that would mean the
    mean implementation is broken, because below that threshold the
    derivative is provably negative.
    """
    if not (math.isfinite(rho) and rho > 0):
        raise DomainError(f"rho must be positive and finite, got {rho}")
    bound = math.exp(-1.0 / rho)
    lo, hi = max(0.01, 0.02 * bound), min(0.6, 0.98 * bound)
    if not lo < hi:
        lo, hi = 0.1 * bound, 0.98 * bound
    candidates = np.linspace(lo, hi, 13)
    rho_steps = np.arange(rho, rho + 1.0 + 1e-9, 0.01)
    for i, a in enumerate(candidates):
        for b in candidates[i + 1 :]:
            vals = means.quasi_lehmer_in_grid([a, b], rho_steps, SIGMOID)
            drops = np.diff(vals) < -1e-12 * vals[:-1]
            if np.any(drops):
                return np.asarray([a, b])
    raise CounterexampleNotFound(
        f"no decreasing in-variant witness below e^(-1/{rho:g}) = {bound:.6g}; "
        "this indicates a defect in the mean evaluation"
    )


def ordering_chain_check(
    series: PriceSeries,
    rho_list,
    f: Modulator | None = None,
    variant: str = "identity",
    *,
    rel_tol: float = REL_TOLERANCE,
    base_cost: float = 1.0,
    ref_price: float | None = None,
    cash_cap_ratio: float = 1e12,
) -> list:
    """mu must be non-increasing along an ascending rho list, ending >= min price."""
    rhos = [float(r) for r in rho_list]
    if any(a >= b for a, b in zip(rhos, rhos[1:])):
        raise DomainError("rho list must be strictly ascending")
    if variant == "identity":
        specs = [StrategySpec("RHO", rho=r, base_cost=base_cost, ref_price=ref_price,
                              cash_cap_ratio=cash_cap_ratio) for r in rhos]
    elif variant in ("out", "in"):
        kind = "F_RHO_OUT" if variant == "out" else "F_RHO_IN"
        specs = [StrategySpec(kind, rho=r, base_cost=base_cost, ref_price=ref_price,
                              modulator=f, cash_cap_ratio=cash_cap_ratio) for r in rhos]
    else:
        raise DomainError(f"variant must be identity, out or in, got {variant!r}")

    schedule = full_schedule(series)
    mus = [backtest.run(series, schedule, s, keep_ledger=False).mu for s in specs]
    prices = series.prices
    reports = [
        _report(f"mu[rho={ra:g}]>=mu[rho={rb:g}]", ma, mb, rel_tol, witness=prices)
        for (ra, ma), (rb, mb) in zip(zip(rhos, mus), zip(rhos[1:], mus[1:]))
    ]
    reports.append(
        _report(f"mu[rho={rhos[-1]:g}]>=min(p)", mus[-1], float(np.min(prices)), rel_tol, witness=prices)
    )
    return reports


# ---------------------------------------------------------------------------
# Verification suites (the `verify` command)


def _witness_brief(w) -> object:
    if w is None:
        return None
    arr = np.atleast_1d(np.asarray(w, dtype=float))
    vals = [backtest.round_sig(v, 8) for v in arr[:8].tolist()]
    return {"length": int(arr.size), "head": vals}


def _check_result(name: str, reports: list, started: float, notes: str = "") -> dict:
    violations = [r for r in reports if not r.holds]
    worst = min(reports, key=lambda r: r.slack) if reports else None
    return {
        "name": name,
        "holds": not violations,
        "cases": len(reports),
        "violations": [
            {
                "label": r.label,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "slack": r.slack,
                "tolerance": r.tolerance,
                "witness": _witness_brief(r.witness),
            }
            for r in violations[:5]
        ],
        "worst_slack": worst.slack if worst else None,
        "notes": notes,
        "elapsed_s": round(time.perf_counter() - started, 3),
    }


def _random_series(rng, min_len=2, max_len=500, lo=0.05, hi=20.0) -> PriceSeries:
    n = int(rng.integers(min_len, max_len + 1))
    prices = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
    return PriceSeries(tuple(range(1, n + 1)), prices)


def _check_two_buy(rng, rel_tol) -> list:
    reports = []
    mu_ri, mu_dca, mu_smart = two_buy_closed_forms(0.5, 1.5)
    for name, got, want in (("ri", mu_ri, 1.0), ("dca", mu_dca, 0.75), ("smart", mu_smart, 0.6)):
        err = abs(got - want)
        reports.append(InequalityReport(f"two-buy gas {name}", err <= 1e-12, -err, -1e-12, 1e-12 - err, 1e-12, (0.5, 1.5)))
    pairs = np.exp(rng.uniform(math.log(1e-3), math.log(1e3), (200, 2)))
    for p1, p2 in pairs:
        mu_ri, mu_dca, mu_smart = two_buy_closed_forms(p1, p2)
        reports.append(_report("two-buy ri>=dca", mu_ri, mu_dca, rel_tol, (p1, p2)))
        reports.append(_report("two-buy dca>=smart", mu_dca, mu_smart, rel_tol, (p1, p2)))
        series = PriceSeries((1, 2), np.asarray([p1, p2]))
        sched = full_schedule(series)
        for variant, r, want in (("RI", -1.0, mu_ri), ("DCA", 0.0, mu_dca), ("RHO", 1.0, mu_smart)):
            got = backtest.run(series, sched, StrategySpec(variant, rho=r), keep_ledger=False).mu
            rel = abs(got - want) / want
            reports.append(
                InequalityReport(f"two-buy backtest {variant}", rel <= 1e-12, -rel, -1e-12, 1e-12 - rel, 1e-12, (p1, p2))
            )
    return reports


def _check_mu_n(rng, rel_tol) -> list:
    reports = []
    pairs = np.exp(rng.uniform(math.log(0.05), math.log(20.0), (100, 2)))
    n_grid = np.arange(0.0, 6.5, 0.5)
    for p1, p2 in pairs:
        vals = [mu_n_closed_form(p1, p2, n) for n in n_grid]
        for (na, va), (nb, vb) in zip(zip(n_grid, vals), zip(n_grid[1:], vals[1:])):
            reports.append(_report(f"mu_{na:g}>=mu_{nb:g}", va, vb, rel_tol, (p1, p2)))
        series = PriceSeries((1, 2), np.asarray([p1, p2]))
        sched = full_schedule(series)
        for n in (0.0, 1.0, 3.0):
            got = backtest.run(series, sched, StrategySpec("RHO", rho=n, ref_price=p1), keep_ledger=False).mu
            want = mu_n_closed_form(p1, p2, n)
            rel = abs(got - want) / want
            reports.append(
                InequalityReport(f"mu_n backtest n={n:g}", rel <= 1e-12, -rel, -1e-12, 1e-12 - rel, 1e-12, (p1, p2))
            )
    return reports


def _check_cauchy_schwarz(rng, n_vectors: int, rel_tol, inject_fault=False) -> list:
    reports = []
    lengths = rng.integers(1, 101, n_vectors)
    for i, m in enumerate(lengths):
        p = np.exp(rng.uniform(math.log(1e-4), math.log(1e4), int(m)))
        rep = cauchy_schwarz_check(p, rel_tol)
        if inject_fault and i == 0:
            # Harness self-test: flip the sign of the first slack.
            rep = InequalityReport(rep.label + " [fault-injected]", rep.slack < 0,
                                   -rep.lhs, -rep.rhs, -rep.slack, rep.tolerance, rep.witness)
        reports.append(rep)
    for m in (1, 3, 50):
        p = np.full(m, float(rng.uniform(0.1, 10.0)))
        rep = cauchy_schwarz_check(p, rel_tol)
        exact = abs(rep.slack) < 1e-12
        reports.append(InequalityReport(f"cs-equality m={m}", rep.holds and exact,
                                        rep.lhs, rep.rhs, rep.slack, 1e-12, p))
    return reports


def _check_ordering_chain_identity(rng, n_series: int, rel_tol) -> list:
    reports = []
    for _ in range(n_series):
        series = _random_series(rng)
        reports.extend(ordering_chain_check(series, [-1.0, 0.0, 1.0, 2.0, 3.0], rel_tol=rel_tol))
    return reports


def _check_ordering_chain_out(rng, n_series: int, rel_tol) -> list:
    reports = []
    mods = [from_name(n) for n in ("tanh", "sigmoid", "sin1")]
    for _ in range(n_series):
        series = _random_series(rng, max_len=100)
        for mod in mods:
            reports.extend(ordering_chain_check(series, [0.0, 1.0, 2.0], f=mod, variant="out", rel_tol=rel_tol))
    return reports


def _check_out_fd(rng, n_vectors: int, fd_tol) -> list:
    reports = []
    grid = np.arange(-1.0, 5.0 + 1e-9, 0.25)
    mods = [from_name(n) for n in ("tanh", "sigmoid", "sin1")]
    for _ in range(n_vectors):
        x = np.exp(rng.uniform(math.log(0.05), math.log(20.0), int(rng.integers(2, 30))))
        for mod in mods:
            reports.extend(finite_difference_monotonicity("out", x, mod, grid, tolerance=fd_tol))
    return reports


def _check_in_counterexample(fd_tol) -> list:
    reports = []
    for rho in (1.0, 2.0, 3.0, 5.0):
        try:
            witness = find_in_counterexample(rho)
        except CounterexampleNotFound as exc:
            reports.append(InequalityReport(f"in-witness rho={rho:g}", False, 0.0, 0.0, -1.0, 0.0, str(exc)))
            continue
        bound = math.exp(-1.0 / rho)
        below = bool(np.all(witness < bound))
        fd = finite_difference_monotonicity("in", witness, SIGMOID, np.arange(rho, rho + 1.01, 0.25), tolerance=fd_tol)
        has_negative = any(r.lhs < STRICT_NEGATIVE_FD for r in fd)
        ok = below and has_negative
        worst = min(r.lhs for r in fd)
        reports.append(
            InequalityReport(f"in-witness rho={rho:g}", ok, -worst, 0.0, -worst, -STRICT_NEGATIVE_FD, witness)
        )
    return reports


def _check_lehmer_limit(rng, rel_tol_limit=1e-6) -> list:
    """Both rho -> inf limits: L -> max needs a max/second gap >= 1.5 and the
    mu -> min consequence needs the same gap at the *minimum* price (the
    ratio vector peaks at p_r / min p)."""
    reports = []
    for _ in range(50):
        x = np.exp(rng.uniform(math.log(1.5), math.log(2.5), int(rng.integers(2, 20))))
        x = np.concatenate([x, [1.0, float(np.max(x)) * 1.6]])
        rng.shuffle(x)
        top = float(np.max(x))
        rel = abs(means.lehmer_mean(x, 60.0) - top) / top
        reports.append(InequalityReport("lehmer limit rho=60", rel < rel_tol_limit, -rel,
                                        -rel_tol_limit, rel_tol_limit - rel, rel_tol_limit, x))
        series = PriceSeries(tuple(range(1, x.size + 1)), x)
        spec = StrategySpec("RHO", rho=60.0, cash_cap_ratio=1e300)
        mu = backtest.run(series, full_schedule(series), spec, keep_ledger=False).mu
        lowest = float(np.min(x))
        rel = abs(mu - lowest) / lowest
        reports.append(InequalityReport("mu limit rho=60", rel < rel_tol_limit, -rel,
                                        -rel_tol_limit, rel_tol_limit - rel, rel_tol_limit, x))
    return reports


def _check_mean_identities(rng) -> list:
    """Backtest mu against p_r / L_(rho+1)(r) (and the out-variant analogue)."""
    reports = []
    mods = [from_name(n) for n in ("tanh", "sigmoid", "sin1")]
    for _ in range(100):
        series = _random_series(rng, max_len=200)
        ref = series.first_price
        r = ref / series.prices
        sched = full_schedule(series)
        for rho in (-1.0, 0.0, 1.0, 2.0, 3.0):
            mu = backtest.run(series, sched, StrategySpec("RHO", rho=rho), keep_ledger=False).mu
            want = ref / means.lehmer_mean(r, rho + 1.0)
            rel = abs(mu - want) / want
            reports.append(InequalityReport(f"lehmer identity rho={rho:g}", rel < 1e-9,
                                            -rel, -1e-9, 1e-9 - rel, 1e-9, series.prices))
        for mod in mods:
            for rho in (0.5, 1.0, 2.0):
                spec = StrategySpec("F_RHO_OUT", rho=rho, modulator=mod)
                mu = backtest.run(series, sched, spec, keep_ledger=False).mu
                want = ref / means.quasi_lehmer_out(r, rho, mod)
                rel = abs(mu - want) / want
                reports.append(InequalityReport(f"out identity {mod.name} rho={rho:g}", rel < 1e-9,
                                                -rel, -1e-9, 1e-9 - rel, 1e-9, series.prices))
    return reports


def run_verification(
    seed: int = DEFAULT_SEED,
    *,
    rel_tol: float = REL_TOLERANCE,
    fd_tol: float = FD_TOLERANCE,
    n_cs_vectors: int = 100_000,
    n_chain_series: int = 1000,
    n_fd_vectors: int = 200,
    inject_fault: bool = False,
) -> dict:
    """Run every theorem suite and return a machine-readable verdict."""
    checks = []
    suite = [
        ("two_buy_closed_forms", lambda rng: _check_two_buy(rng, rel_tol)),
        ("mu_n_family", lambda rng: _check_mu_n(rng, rel_tol)),
        ("cauchy_schwarz", lambda rng: _check_cauchy_schwarz(rng, n_cs_vectors, rel_tol, inject_fault)),
        ("ordering_chain_identity", lambda rng: _check_ordering_chain_identity(rng, n_chain_series, rel_tol)),
        ("ordering_chain_out", lambda rng: _check_ordering_chain_out(rng, max(1, n_chain_series // 5), rel_tol)),
        ("out_monotonicity_fd", lambda rng: _check_out_fd(rng, n_fd_vectors, fd_tol)),
        ("in_counterexample", lambda rng: _check_in_counterexample(fd_tol)),
        ("lehmer_limit", lambda rng: _check_lehmer_limit(rng)),
        ("mean_identities", lambda rng: _check_mean_identities(rng)),
    ]
    for i, (name, fn) in enumerate(suite):
        started = time.perf_counter()
        rng = np.random.default_rng([int(seed), i])
        reports = fn(rng)
        checks.append(_check_result(name, reports, started))
    return {
        "rng": RNG_ALGORITHM,
        "seed": int(seed),
        "rel_tolerance": rel_tol,
        "fd_tolerance": fd_tol,
        "fault_injected": bool(inject_fault),
        "all_hold": all(c["holds"] for c in checks),
        "checks": checks,
    }
