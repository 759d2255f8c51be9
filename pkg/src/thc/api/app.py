"""HTTP surface over a snapshot store.

Every GET is a pure projection of the current snapshot; what-if requests
recompute on private copies and never mutate served state.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from .. import analytics
from ..catalog import UnknownKpiError, ValidationError, WeightOverlay, catalog_to_dict
from ..periods import PeriodError, next_period, parse_period
from ..scoring import UnmappedOmError, build_heatmap
from ..snapshot import Snapshot, SnapshotStore, whatif_scores
from .schemas import (
    AccountsResponse,
    BenchmarkModel,
    CorrelationModel,
    CorrelationsResponse,
    ForecastModel,
    HeatmapNodeModel,
    KpiScoreModel,
    WhatIfRequest,
    WhatIfResponse,
)


def _check_period(period: str) -> str:
    try:
        parse_period(period)
    except PeriodError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return period


def _get_snapshot(store: SnapshotStore) -> Snapshot:
    try:
        return store.get()
    except LookupError as exc:
        raise HTTPException(status_code=503, detail=str(exc)) from exc


def _require(snapshot: Snapshot, *, account: str | None = None,
             kpi: str | None = None, period: str | None = None) -> None:
    try:
        if account is not None:
            snapshot.require_account(account)
        if kpi is not None:
            snapshot.catalog.get_kpi(kpi)
        if period is not None:
            snapshot.require_period(period)
    except (LookupError, UnknownKpiError) as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc


def create_app(store: SnapshotStore) -> FastAPI:
    app = FastAPI(title="thc", description="IT health scoring service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/catalog")
    def get_catalog() -> dict:
        return catalog_to_dict(_get_snapshot(store).catalog)

    @app.get("/accounts", response_model=AccountsResponse)
    def get_accounts() -> AccountsResponse:
        return AccountsResponse(accounts=_get_snapshot(store).accounts)

    @app.get("/accounts/{account_id}/heatmap", response_model=HeatmapNodeModel)
    def get_heatmap(account_id: str, period: str = Query(...)) -> HeatmapNodeModel:
        snapshot = _get_snapshot(store)
        _check_period(period)
        _require(snapshot, account=account_id, period=period)
        tree = build_heatmap(
            account_id,
            period,
            snapshot.catalog,
            snapshot.kpi_scores_for(account_id, period),
            snapshot.normalized_for(account_id, period),
        )
        return HeatmapNodeModel.from_node(tree)

    @app.get("/accounts/{account_id}/kpis", response_model=list[KpiScoreModel])
    def get_kpi_scores(account_id: str, period: str = Query(...)) -> list[KpiScoreModel]:
        snapshot = _get_snapshot(store)
        _check_period(period)
        _require(snapshot, account=account_id, period=period)
        scores = snapshot.kpi_scores_for(account_id, period)
        return [KpiScoreModel.from_score(scores[k]) for k in sorted(scores)]

    @app.get("/kpis/{kpi_id}/benchmark", response_model=BenchmarkModel)
    def get_benchmark(
        kpi_id: str, account: str = Query(...), period: str = Query(...)
    ) -> BenchmarkModel:
        snapshot = _get_snapshot(store)
        _check_period(period)
        _require(snapshot, account=account, kpi=kpi_id, period=period)
        scores = {
            acct: score.value
            for acct in snapshot.accounts
            if (score := snapshot.kpi_scores_for(acct, period).get(kpi_id)) is not None
        }
        try:
            stats = analytics.benchmark(kpi_id, period, account, scores)
        except (analytics.EmptyCohortError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return BenchmarkModel.from_stats(stats, account)

    @app.get("/kpis/{kpi_id}/forecast", response_model=ForecastModel)
    def get_forecast(
        kpi_id: str,
        account: str = Query(...),
        method: analytics.ForecastMethod = Query(analytics.ForecastMethod.MA),
        window: int = Query(analytics.DEFAULT_MA_WINDOW, ge=1),
        order: int = Query(analytics.DEFAULT_AR_ORDER, ge=1),
        alpha: float = Query(analytics.DEFAULT_ES_ALPHA, gt=0, le=1),
    ) -> ForecastModel:
        snapshot = _get_snapshot(store)
        _require(snapshot, account=account, kpi=kpi_id)
        if not snapshot.periods:
            raise HTTPException(status_code=400, detail="snapshot has no scored months")
        try:
            series = analytics.impute(snapshot.series(kpi_id, account))
            predictor = analytics.make_forecaster(
                method, window=window, order=order, alpha=alpha)
            predicted = predictor(series.values)
        except (analytics.AllMissingError, analytics.InsufficientHistoryError,
                analytics.InvalidAlphaError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            mae = analytics.backtest(series, method, window=window, order=order, alpha=alpha)
        except analytics.InsufficientHistoryError:
            mae = None
        result = analytics.ForecastResult(
            kpi_id=kpi_id,
            account_id=account,
            method=method,
            horizon_period=next_period(snapshot.periods[-1]),
            predicted=predicted,
            backtest_mae=mae,
        )
        return ForecastModel.from_result(result)

    @app.get("/accounts/{account_id}/correlations", response_model=CorrelationsResponse)
    def get_correlations(
        account_id: str,
        mode: analytics.CorrelationMode = Query(analytics.CorrelationMode.R_SQUARED),
        window: int = Query(analytics.DEFAULT_CORRELATION_WINDOW, ge=2),
    ) -> CorrelationsResponse:
        snapshot = _get_snapshot(store)
        _require(snapshot, account=account_id)
        kpi_ids = sorted(k.kpi_id for k in snapshot.catalog.kpis)
        histories: dict[str, list[float]] = {}
        for kpi_id in kpi_ids:
            try:
                values = analytics.impute(snapshot.series(kpi_id, account_id)).values
            except analytics.AllMissingError:
                continue
            histories[kpi_id] = values[-window:]
        results: list[CorrelationModel] = []
        available = [k for k in kpi_ids if k in histories]
        for i, kpi_a in enumerate(available):
            for kpi_b in available[i + 1:]:
                try:
                    result = analytics.correlation_score(
                        histories[kpi_a], histories[kpi_b], mode,
                        kpi_a=kpi_a, kpi_b=kpi_b)
                except (analytics.DegenerateSeriesError, analytics.LengthMismatchError):
                    continue
                results.append(CorrelationModel.from_result(result))
        return CorrelationsResponse(
            account_id=account_id, mode=mode, window=window, correlations=results)

    @app.post("/whatif", response_model=WhatIfResponse)
    def post_whatif(request: WhatIfRequest) -> WhatIfResponse:
        snapshot = _get_snapshot(store)
        _check_period(request.period)
        _require(snapshot, account=request.account_id, kpi=request.overlay.kpi_id,
                 period=request.period)
        overlay = WeightOverlay(request.overlay.kpi_id, dict(request.overlay.weights))
        try:
            scores = whatif_scores(snapshot, request.account_id, request.period, overlay)
        except ValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except UnmappedOmError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return WhatIfResponse(
            account_id=request.account_id,
            period=request.period,
            catalog_version=snapshot.catalog.version + 1,
            scores=[KpiScoreModel.from_score(s) for s in scores],
        )

    return app
