"""Command-line front door: forecast, evaluate, synth, serve."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import data_io
from .accrual import fit_accrual
from .activation import estimate_profiles
from .domain import ForecastSummary
from .evaluate import score_prediction, summarize_rows
from .simulate import forecast, summarize_forecast

__all__ = ["run_cli", "main"]


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _fmt(value: Optional[float], digits: int = 2) -> str:
    if value is None:
        return "Inf"
    return f"{value:.{digits}f}"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enrollcast",
        description="Study-level clinical-trial enrollment forecasting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_forecast = sub.add_parser(
        "forecast", help="fit history, simulate a scenario, write forecast.json"
    )
    p_forecast.add_argument("--studies", required=True, help="studies.csv path")
    p_forecast.add_argument("--site-groups", required=True, help="study_site_groups.csv path")
    p_forecast.add_argument("--activations", required=True, help="activations.csv path")
    p_forecast.add_argument("--scenario", required=True, help="scenario.json path")
    p_forecast.add_argument("--out", required=True, help="forecast.json output path")
    p_forecast.add_argument("--seed", type=int, default=None,
                            help="scenario seed (overrides any seed in scenario.json)")
    p_forecast.add_argument("--threads", type=int, default=1,
                            help="worker threads; results identical for any value")

    p_eval = sub.add_parser("evaluate", help="score a predictions CSV against actuals")
    p_eval.add_argument("--predictions", required=True,
                        help="CSV: study_id,actual_months,predicted_months,pi_low,pi_high")
    p_eval.add_argument("--out", required=True, help="summary metrics JSON output path")

    p_synth = sub.add_parser("synth", help="generate a synthetic history with known truth")
    p_synth.add_argument("--config", required=True, help="generator config JSON path")
    p_synth.add_argument("--out-dir", required=True, help="directory for the CSV bank")

    p_serve = sub.add_parser("serve", help="serve the forecast HTTP API")
    p_serve.add_argument("--studies", required=True)
    p_serve.add_argument("--site-groups", required=True)
    p_serve.add_argument("--activations", required=True)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--cors-origin", action="append", default=[],
                         help="allowed CORS origin for the UI (repeatable)")
    p_serve.add_argument("--ui-dir", default=None,
                         help="optional directory of static UI files to serve at /")
    return parser


def _print_forecast_table(summary: ForecastSummary, mode: str, replicates: int) -> None:
    pi_pct = round(summary.pi_level * 100)
    print(f"enrollment forecast  ({mode} mode, {replicates} replicates)")
    print(f"  point prediction (median LSFD)  {_fmt(summary.point_months)} months")
    print(f"  {pi_pct}% PI                          "
          f"({_fmt(summary.pi_low_months)}, {_fmt(summary.pi_high_months)}) months")
    print(f"  FSFD                            {_fmt(summary.fsfd_point)} months  "
          f"({_fmt(summary.fsfd_pi_low)}, {_fmt(summary.fsfd_pi_high)})")
    print(f"  censored fraction               {summary.censored_fraction:.3f}")


def _cmd_forecast(args: argparse.Namespace) -> int:
    with open(args.scenario, encoding="utf-8") as handle:
        payload = json.load(handle)
    if args.seed is not None:
        payload["seed"] = args.seed
    if "seed" not in payload or payload["seed"] is None:
        raise ValueError(
            "no seed: provide --seed or a seed field in the scenario "
            "(time-based seeding is never used)"
        )
    scenario = data_io.scenario_from_dict(payload)

    studies = data_io.load_historical_studies(args.studies, args.site_groups)
    records = data_io.load_activation_records(args.activations)
    _log(f"loaded {len(studies)} historical studies, "
         f"{len(records)} activation records")

    model = fit_accrual(studies)
    _log(f"accrual fit: psm={model.psm:.4f}  dispersion={model.dispersion:.3f}  "
         f"intercept_se={model.intercept_se:.4f}  (S={model.n_studies_fit})")
    profiles = estimate_profiles(records)

    replicates, _ = forecast(scenario, profiles, model, n_threads=args.threads)
    summary = summarize_forecast(replicates, scenario.pi_level)

    data_io.dump_json(data_io.summary_to_dict(summary), args.out)
    _print_forecast_table(summary, scenario.mode, scenario.replicates)
    _log(f"wrote {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    path = Path(args.predictions)
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        required = {"study_id", "actual_months", "predicted_months", "pi_low", "pi_high"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise data_io.DataError(
                f"{path}: header must contain {', '.join(sorted(required))}"
            )
        for record in reader:
            try:
                rows.append(score_prediction(
                    record["study_id"],
                    float(record["actual_months"]),
                    float(record["predicted_months"]),
                    float(record["pi_low"]),
                    float(record["pi_high"]),
                ))
            except (TypeError, ValueError) as exc:
                raise data_io.DataError(
                    f"{path}, line {reader.line_num}: {exc}"
                ) from None
    if not rows:
        raise data_io.DataError(f"{path}: no prediction rows")

    metrics = summarize_rows(rows)
    data_io.dump_json(data_io.metrics_to_dict(metrics), args.out)

    print(f"{'study':<12}{'actual':>8}{'pred':>8}{'error':>8}"
          f"{'PI':>16}{'in PI':>7}{'±1':>5}{'±2':>5}{'±3':>5}")
    for row in rows:
        yn = lambda b: "YES" if b else "NO"
        print(f"{row.study_id:<12}{row.actual_months:>8.1f}{row.predicted_months:>8.1f}"
              f"{row.prediction_error:>8.1f}"
              f"{'(' + _fmt(row.pi_low, 1) + ',' + _fmt(row.pi_high, 1) + ')':>16}"
              f"{yn(row.within_pi):>7}{yn(row.within_1mo):>5}"
              f"{yn(row.within_2mo):>5}{yn(row.within_3mo):>5}")
    print()
    print(f"PI length median {metrics.pi_length_median:.2f}  "
          f"prediction error median {metrics.prediction_error_median:.2f}")
    print(f"coverage: PI {metrics.coverage_pi:.0%}  ±1mo {metrics.coverage_1mo:.0%}  "
          f"±2mo {metrics.coverage_2mo:.0%}  ±3mo {metrics.coverage_3mo:.0%}")
    _log(f"wrote {args.out}")
    return 0


def _parse_synth_config(payload: dict) -> data_io.SyntheticConfig:
    if "seed" not in payload or payload["seed"] is None:
        raise ValueError("no seed in generator config (time-based seeding is never used)")
    countries = tuple(
        data_io.CountrySpec(
            name=c["name"],
            t_mean=c["t_mean"],
            gap_mean=c["gap_mean"],
            n_sites_range=tuple(c["n_sites_range"]),
        )
        for c in payload["countries"]
    )
    return data_io.SyntheticConfig(
        n_studies=payload["n_studies"],
        true_psm=payload["true_psm"],
        overdispersion=payload.get("overdispersion", 1.0),
        countries=countries,
        duration_range=tuple(payload["duration_range"]),
        seed=payload["seed"],
        t_jitter=payload.get("t_jitter", 0.25),
        gap_jitter=payload.get("gap_jitter", 0.25),
    )


def _cmd_synth(args: argparse.Namespace) -> int:
    with open(args.config, encoding="utf-8") as handle:
        payload = json.load(handle)
    try:
        config = _parse_synth_config(payload)
    except KeyError as exc:
        raise ValueError(f"generator config missing field {exc}") from None

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    studies, records, truth = data_io.generate_synthetic_history(config)
    data_io.write_historical_studies(
        studies, out_dir / "studies.csv", out_dir / "study_site_groups.csv"
    )
    data_io.write_activation_records(records, out_dir / "activations.csv")
    data_io.dump_json(
        {
            "true_psm": truth.true_psm,
            "overdispersion": truth.overdispersion,
            "countries": [
                {"name": n, "t_mean": t, "gap_mean": g} for n, t, g in truth.countries
            ],
        },
        out_dir / "truth.json",
    )
    _log(f"wrote {len(studies)} studies and {len(records)} activation records to {out_dir}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    state = ServiceState()
    state.load_files(args.studies, args.site_groups, args.activations)
    _log(f"history loaded: psm={state.model.psm:.4f}, "
         f"{len(state.profiles)} country profiles")
    app = create_app(state, cors_origins=args.cors_origin, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def run_cli(argv: Sequence[str]) -> int:
    """Dispatch one CLI invocation; returns the process exit status."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "forecast": _cmd_forecast,
        "evaluate": _cmd_evaluate,
        "synth": _cmd_synth,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        _log(f"error: {exc}")
        return 1


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
