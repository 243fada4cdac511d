"""Pydantic request/response models for the read-only analysis API."""
from __future__ import annotations

from pydantic import BaseModel, Field


class ScatterRow(BaseModel):
    place_id: str
    name: str
    surface_km2: float
    count: int


class CorrelationOut(BaseModel):
    pearson_r: float
    pearson_p: float
    kendall_tau: float
    kendall_p: float
    n: int
    zero_surface_excluded: int


class WhatIfOut(BaseModel):
    retained_small_annotations: int
    retained_places: int
    usable_fraction: float


class StoreInfoOut(BaseModel):
    tweets: int
    annotations: int
    places: int
    threshold_km2: float


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorOut(BaseModel):
    error: ErrorBody = Field(description="machine-readable failure code plus context")
