"""Command-line client for the smartdca service.

Subcommands: backtest, simulate, verify, calibrate, compare. Each reads a
YAML config (see README for the schema), sends one request to the service
(in-process by default, or --server URL), and writes the response to files
under the output directory. Flags override config values.

Exit codes:
    0  success
    1  usage or configuration error
    2  data error (missing/invalid price file)
    3  verification failure (a theorem check did not hold)
    4  partial failure (some strategies errored; outputs still written)
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from pathlib import Path

import yaml

from .errors import ConfigError, CounterexampleNotFound, DataError, DomainError, SmartDcaError
from .marketdata import RNG_ALGORITHM, load_csv, synth_uniform
from .proofs import DEFAULT_SEED
from .service.client import ServiceClient
from .service.schemas import SeriesModel

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_VERIFY = 3
EXIT_PARTIAL = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header, rows, meta: str | None = None) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        if meta:
            fh.write(f"# {meta}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9.+-]+", "_", label).strip("_")


def _load_config(args) -> dict:
    if not args.config:
        return {}
    path = Path(args.config)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    return cfg


def _seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg.get("seed", DEFAULT_SEED))


def _out_dir(args, cfg) -> Path:
    out = args.out or cfg.get("output", {}).get("dir", "out")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _series_payload(cfg: dict, seed: int) -> dict:
    data = cfg.get("data")
    if not isinstance(data, dict) or not data:
        raise ConfigError("config needs a 'data' section with either 'csv' or 'synthetic'")
    if "csv" in data:
        series = load_csv(data["csv"])
    elif "synthetic" in data:
        syn = data["synthetic"] or {}
        series = synth_uniform(
            int(syn.get("n", 100)), float(syn.get("lo", 0.0)), float(syn.get("hi", 2.0)), seed
        )
    else:
        raise ConfigError("data section must contain 'csv' or 'synthetic'")
    return SeriesModel.from_series(series).model_dump()


def _strategies(cfg: dict) -> list:
    strategies = cfg.get("strategies")
    if not strategies:
        raise ConfigError("config needs a non-empty 'strategies' list")
    if not isinstance(strategies, list):
        raise ConfigError("'strategies' must be a list of strategy mappings")
    return strategies


_COMPARISON_HEADER = (
    "strategy", "variant", "rho", "modulator", "status",
    "mu", "q_tot", "c_tot", "roi", "final_price", "error",
)


def _comparison_rows(comparison) -> list:
    return [[r.get(k) for k in _COMPARISON_HEADER] for r in comparison]


def _print_comparison(comparison) -> None:
    widths = [max(len(h), 14) for h in _COMPARISON_HEADER[:10]]
    print("  ".join(h.ljust(w) for h, w in zip(_COMPARISON_HEADER[:10], widths)))
    for r in comparison:
        cells = [_fmt(r.get(k)) for k in _COMPARISON_HEADER[:10]]
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
        if r.get("error"):
            print(f"    error: {r['error']}")


def cmd_backtest(args, client: ServiceClient) -> int:
    cfg = _load_config(args)
    seed = _seed(args, cfg)
    out = _out_dir(args, cfg)
    payload = {
        "series": _series_payload(cfg, seed),
        "schedule_every": int(cfg.get("schedule", {}).get("every", 1)),
        "strategies": _strategies(cfg),
    }
    if cfg.get("windows"):
        payload["windows"] = cfg["windows"]
    print(f"rng={RNG_ALGORITHM} seed={seed} out={out}")
    resp = client.post("/backtest", payload)
    for report in resp["reports"]:
        name = _safe_name(report["strategy"]["label"])
        _write_json(out / f"report_{name}.json", {"rng": RNG_ALGORITHM, "seed": seed, **report})
    _write_json(out / "comparison.json", {"rng": RNG_ALGORITHM, "seed": seed, "comparison": resp["comparison"]})
    _write_csv(out / "comparison.csv", _COMPARISON_HEADER, _comparison_rows(resp["comparison"]))
    _print_comparison(resp["comparison"])
    failed = [r for r in resp["comparison"] if r["status"] == "error"]
    failed += [r for r in resp["reports"] if r["status"] == "error"]
    if failed:
        print(f"{len(failed)} strategy run(s) failed; see comparison output")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_compare(args, client: ServiceClient) -> int:
    cfg = _load_config(args)
    seed = _seed(args, cfg)
    out = _out_dir(args, cfg)
    payload = {
        "series": _series_payload(cfg, seed),
        "schedule_every": int(cfg.get("schedule", {}).get("every", 1)),
        "strategies": _strategies(cfg),
    }
    print(f"rng={RNG_ALGORITHM} seed={seed} out={out}")
    resp = client.post("/compare", payload)
    _write_json(out / "comparison.json", {"rng": RNG_ALGORITHM, "seed": seed, "comparison": resp["comparison"]})
    _write_csv(out / "comparison.csv", _COMPARISON_HEADER, _comparison_rows(resp["comparison"]))
    _print_comparison(resp["comparison"])
    if any(r["status"] == "error" for r in resp["comparison"]):
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_simulate(args, client: ServiceClient) -> int:
    cfg = _load_config(args)
    seed = _seed(args, cfg)
    out = _out_dir(args, cfg)
    sim = dict(cfg.get("simulate") or {})
    payload = {
        "n": int(args.n if args.n is not None else sim.get("n", 100)),
        "lo": float(sim.get("lo", 0.0)),
        "hi": float(sim.get("hi", 2.0)),
        "seed": seed,
        "base_cost": float(sim.get("base_cost", 1.0)),
        "ref_price": float(sim.get("ref_price", 1.0)),
    }
    if sim.get("rho_grid"):
        payload["rho_grid"] = [float(r) for r in sim["rho_grid"]]
    if sim.get("modulators"):
        payload["modulators"] = [str(m) for m in sim["modulators"]]
    print(f"rng={RNG_ALGORITHM} seed={seed} out={out}")
    resp = client.post("/simulate", payload)
    meta = f"rng={resp['rng']} seed={resp['seed']} n={resp['n']} lo={_fmt(resp['lo'])} hi={_fmt(resp['hi'])}"
    _write_csv(
        out / "simulate_mu.csv",
        ("rho", "variant", "f", "status", "mu", "max_single_investment"),
        [
            [p["rho"], p["variant"], p["f"], p["status"], p.get("mu"), p.get("max_single_investment")]
            for p in resp["points"]
        ],
        meta=meta,
    )
    _write_csv(
        out / "simulate_cash.csv",
        ("rho", "variant", "f", "tick", "price", "cash"),
        [[c["rho"], c["variant"], c["f"], c["tick"], c["price"], c["cash"]] for c in resp["cash"]],
        meta=meta,
    )
    _write_json(out / "simulate.json", resp)
    dca_mu = next(p["mu"] for p in resp["points"] if p["variant"] == "DCA")
    print(f"DCA baseline mu={_fmt(dca_mu)}; {len(resp['points'])} strategy points written")
    if any(p["status"] == "error" for p in resp["points"]):
        print("some simulation points failed (investment cap); see simulate_mu.csv")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_verify(args, client: ServiceClient) -> int:
    cfg = _load_config(args)
    seed = _seed(args, cfg)
    out = _out_dir(args, cfg)
    vcfg = dict(cfg.get("verify") or {})
    payload = {
        "seed": seed,
        "cs_vectors": int(vcfg.get("cs_vectors", 100_000)),
        "chain_series": int(vcfg.get("chain_series", 1000)),
        "fd_vectors": int(vcfg.get("fd_vectors", 200)),
        "inject_fault": bool(args.inject_fault),
    }
    if args.tolerance is not None:
        payload["rel_tolerance"] = args.tolerance
    elif "rel_tolerance" in vcfg:
        payload["rel_tolerance"] = float(vcfg["rel_tolerance"])
    if "fd_tolerance" in vcfg:
        payload["fd_tolerance"] = float(vcfg["fd_tolerance"])
    print(f"rng={RNG_ALGORITHM} seed={seed} out={out}")
    resp = client.post("/verify", payload)
    _write_json(out / "verdicts.json", resp)
    for check in resp["checks"]:
        status = "PASS" if check["holds"] else "FAIL"
        print(f"{status} {check['name']}: {check['cases']} cases in {check['elapsed_s']}s")
        for v in check["violations"]:
            print(f"    violated {v['label']}: lhs={_fmt(v['lhs'])} rhs={_fmt(v['rhs'])} "
                  f"slack={_fmt(v['slack'])} witness={v['witness']}")
    if not resp["all_hold"]:
        print("verification FAILED")
        return EXIT_VERIFY
    print("verification passed")
    return EXIT_OK


def cmd_calibrate(args, client: ServiceClient) -> int:
    cfg = _load_config(args)
    seed = _seed(args, cfg)
    out = _out_dir(args, cfg)
    payload = {"series": _series_payload(cfg, seed)}
    cal = cfg.get("calibrate") or {}
    if cal.get("start") or cal.get("end"):
        payload["start"] = str(cal.get("start")) if cal.get("start") else None
        payload["end"] = str(cal.get("end")) if cal.get("end") else None
    print(f"rng={RNG_ALGORITHM} seed={seed} out={out}")
    resp = client.post("/calibrate", payload)
    _write_json(out / "calibration.json", resp)
    for row in resp["windows"]:
        flag = " (lambda floored)" if row["floored"] else ""
        print(f"window {row['window']}: x0={_fmt(row['x0'])} lambda={_fmt(row['lambda'])}"
              f" over {row['n_prices']} prices{flag}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="smartdca", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("backtest", cmd_backtest),
        ("simulate", cmd_simulate),
        ("verify", cmd_verify),
        ("calibrate", cmd_calibrate),
        ("compare", cmd_compare),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--seed", type=int, help="root RNG seed (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--tolerance", type=float, help="relative tolerance for verification checks")
        p.add_argument("--server", help="remote service URL (default: in-process)")
        if name == "simulate":
            p.add_argument("--n", type=int, help="number of simulated prices")
        if name == "verify":
            p.add_argument("--inject-fault", action="store_true",
                           help="self-test: flip one inequality so the harness must fail")
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with ServiceClient(args.server) as client:
            return args.handler(args, client)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CounterexampleNotFound as exc:
        print(f"verification error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SmartDcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
