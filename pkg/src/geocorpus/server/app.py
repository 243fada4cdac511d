"""Read-only HTTP JSON API over a processed store.

The store snapshot is loaded (and integrity-checked) once at startup;
every endpoint is a pure function of (snapshot, query params), so
identical requests return identical bytes.  Reprocessing happens through
the CLI, never over HTTP.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import density as density_mod
from .. import stats as stats_mod
from ..annotate import DEFAULT_THRESHOLD_KM2, IntegrityError
from ..geo import RoI, default_roi, roi_from_file
from ..store import StoreSnapshot, load_snapshot
from .schemas import CorrelationOut, ScatterRow, StoreInfoOut, WhatIfOut

KINDS = ("bbox", "pbbox")
SCATTER_ROW_CAP = 50_000  # hard cap instead of pagination


def _bad_request(code: str, message: str) -> HTTPException:
    return HTTPException(status_code=400, detail={"code": code, "message": message})


def create_app(
    store_path: str | Path,
    roi_path: Optional[str | Path] = None,
    threshold_km2: float = DEFAULT_THRESHOLD_KM2,
    cors_origins: Sequence[str] = ("*",),
    snapshot: Optional[StoreSnapshot] = None,
    roi: Optional[RoI] = None,
) -> FastAPI:
    """Build the API over one immutable snapshot (reload requires restart)."""
    if snapshot is None:
        snapshot = load_snapshot(store_path)
    if roi is None:
        roi = roi_from_file(roi_path) if roi_path else default_roi()

    app = FastAPI(title="geocorpus", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "bad_request", "message": str(exc.errors())}},
        )

    @app.exception_handler(IntegrityError)
    async def _on_integrity_error(request: Request, exc: IntegrityError):
        return JSONResponse(
            status_code=500,
            content={"error": {"code": "store_integrity", "message": str(exc)}},
        )

    def _check_kind(kind: str) -> str:
        if kind not in KINDS:
            raise _bad_request("unknown_kind", f"kind must be one of {KINDS}, got {kind!r}")
        return kind

    def _check_threshold(threshold: float) -> float:
        if not threshold > 0:
            raise _bad_request("bad_threshold", f"threshold must be > 0, got {threshold}")
        return threshold

    @app.get("/info", response_model=StoreInfoOut)
    def info():
        return StoreInfoOut(
            tweets=len(snapshot.tweets),
            annotations=snapshot.annotation_count,
            places=len(snapshot.places),
            threshold_km2=threshold_km2,
        )

    @app.get("/scatter", response_model=list[ScatterRow])
    def scatter(kind: str = Query(...)):
        _check_kind(kind)
        rows = stats_mod.place_frequencies(snapshot.annotations, snapshot.places, kind)
        return stats_mod.scatter_rows(rows[:SCATTER_ROW_CAP])

    @app.get("/correlation", response_model=CorrelationOut)
    def correlation(kind: str = Query(...), use_log: bool = Query(True)):
        _check_kind(kind)
        rows = stats_mod.place_frequencies(snapshot.annotations, snapshot.places, kind)
        try:
            report = stats_mod.correlate_loglog(rows, use_log=use_log)
        except stats_mod.StatsError as e:
            raise _bad_request("undefined_statistic", str(e))
        return report.to_json()

    @app.get("/sunburst")
    def sunburst(threshold: float = Query(DEFAULT_THRESHOLD_KM2)):
        _check_threshold(threshold)
        cross = stats_mod.cross_distribution(
            snapshot.annotations, snapshot.places, snapshot.tweets, threshold
        )
        return {
            sub: dict(sorted(cross[sub].items())) for sub in sorted(cross)
        }

    @app.get("/whatif", response_model=WhatIfOut)
    def whatif(threshold: float = Query(...)):
        if threshold < 0:  # 0 is the valid degenerate sweep endpoint
            raise _bad_request("bad_threshold", f"threshold must be >= 0, got {threshold}")
        try:
            result = stats_mod.threshold_whatif(snapshot.annotations, snapshot.places, threshold)
        except stats_mod.StatsError as e:
            raise _bad_request("undefined_statistic", str(e))
        return result.to_json()

    @app.get("/density")
    def density(
        cell: float = Query(density_mod.DEFAULT_CELL_DEG),
        keywords: Optional[str] = Query(None),
        subtypes: str = Query("geotag,s_bbox"),
        threshold: float = Query(DEFAULT_THRESHOLD_KM2),
    ):
        _check_threshold(threshold)
        if cell <= 0:
            raise _bad_request("bad_cell", f"cell must be > 0, got {cell}")
        subtype_list = tuple(s for s in subtypes.split(",") if s)
        if not subtype_list or set(subtype_list) - set(density_mod.GRID_SUBTYPES):
            raise _bad_request(
                "bad_subtypes",
                f"subtypes must be a nonempty subset of {density_mod.GRID_SUBTYPES}",
            )
        tweet_ids = None
        if keywords:
            words = [w for w in keywords.split(",") if w.strip()]
            if not words:
                raise _bad_request("bad_keywords", "keywords given but empty")
            tweet_ids = density_mod.keyword_filter(snapshot.tweets.values(), words)
        grid = density_mod.density_grid(
            snapshot.annotations, snapshot.places, roi,
            cell_deg=cell, subtypes=subtype_list,
            threshold_km2=threshold, tweet_ids=tweet_ids,
        )
        return density_mod.grid_to_geojson(grid)

    return app
