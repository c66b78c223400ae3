"""HTTP/JSON service exposing the forecasting pipeline to the scenario UI.

History is loaded and fitted once at startup; request handling is stateless
over that immutable fitted state, and every forecast runs entirely from the
scenario's seed, so identical requests return byte-identical bodies.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

from fastapi import FastAPI, Request, Response

from . import data_io
from .accrual import fit_accrual
from .activation import estimate_profiles
from .domain import AccrualModel, ActivationRecord, CountryActivationProfile, HistoricalStudy
from .simulate import forecast, summarize_forecast

__all__ = ["ServiceState", "create_app"]


class ServiceState:
    """Fitted history shared (read-only) across request handlers."""

    def __init__(self) -> None:
        self.model: Optional[AccrualModel] = None
        self.profiles: Optional[list[CountryActivationProfile]] = None

    @property
    def loaded(self) -> bool:
        return self.model is not None and self.profiles is not None

    def load(self, studies: Sequence[HistoricalStudy],
             records: Sequence[ActivationRecord]) -> None:
        model = fit_accrual(studies)
        profiles = estimate_profiles(records)
        self.model = model
        self.profiles = profiles

    def load_files(self, studies_path: str | Path, site_groups_path: str | Path,
                   activations_path: str | Path) -> None:
        self.load(
            data_io.load_historical_studies(studies_path, site_groups_path),
            data_io.load_activation_records(activations_path),
        )


def _json_response(payload: dict, status_code: int = 200) -> Response:
    # explicit dumps keeps bodies byte-identical across identical requests
    return Response(
        content=json.dumps(payload, sort_keys=True),
        status_code=status_code,
        media_type="application/json",
    )


def _error(status_code: int, field: str, message: str, **extra) -> Response:
    return _json_response(
        {"error": {"field": field, "message": message}, **extra}, status_code
    )


def create_app(state: Optional[ServiceState] = None,
               cors_origins: Sequence[str] = (),
               ui_dir: Optional[str] = None) -> FastAPI:
    """Build the service app around a (possibly not yet loaded) state."""
    if state is None:
        state = ServiceState()
    app = FastAPI(title="enrollcast", docs_url=None, redoc_url=None)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def _not_ready() -> Response:
        return _error(503, "service", "history not loaded yet")

    @app.get("/healthz")
    def healthz() -> Response:
        if not state.loaded:
            return _not_ready()
        return _json_response({"status": "ok"})

    @app.get("/api/countries")
    def countries() -> Response:
        if not state.loaded:
            return _not_ready()
        payload = [
            {
                "country": p.country,
                "t_hat": p.t_hat,
                "gap_hat": p.gap_hat,
                "n_studies": p.n_studies,
            }
            for p in sorted(state.profiles, key=lambda p: p.country)
        ]
        return _json_response({"countries": payload})

    @app.get("/api/accrual-model")
    def accrual_model() -> Response:
        if not state.loaded:
            return _not_ready()
        m = state.model
        return _json_response({
            "intercept": m.intercept,
            "intercept_se": m.intercept_se,
            "dispersion": m.dispersion,
            "psm": m.psm,
            "n_studies_fit": m.n_studies_fit,
        })

    @app.post("/api/forecast")
    async def run_forecast(request: Request) -> Response:
        if not state.loaded:
            return _not_ready()
        try:
            body = await request.json()
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error(400, "body", "request body is not valid JSON")
        try:
            scenario = data_io.scenario_from_dict(body)
        except data_io.FieldError as exc:
            return _error(400, exc.field, str(exc))

        known = {p.country for p in state.profiles}
        unknown = [c for c, _ in scenario.countries if c not in known]
        if unknown:
            return _error(400, "countries",
                          f"unknown countries: {', '.join(unknown)}")

        replicates, _ = forecast(scenario, state.profiles, state.model)
        summary = summarize_forecast(replicates, scenario.pi_level)
        payload = data_io.summary_to_dict(summary)
        if summary.censored_fraction > 0.5:
            return _error(
                422, "forecast",
                "majority of replicates censored at the horizon; "
                "point prediction unavailable",
                censored_fraction=summary.censored_fraction,
                summary=payload,
            )
        return _json_response(payload)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
