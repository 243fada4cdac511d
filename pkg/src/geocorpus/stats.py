"""Surface/frequency statistics over the annotation store.

Correlations are computed on log10-transformed (surface, count) pairs:
both quantities are roughly exponentially distributed, so the log-log
plane is where the linear association lives.  Pearson's two-sided p comes
from the Student-t transform evaluated through a regularized incomplete
beta (continued fraction); Kendall's tau-b uses merge-sort inversion
counting with the tie-adjusted normal approximation for its p.
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .annotate import Annotation, IntegrityError, PlaceDoc, classify_specificity, SUBTYPES
from .geo import bbox_surface_km2

USABLE_SUBTYPES = ("geotag", "s_bbox", "s_pbbox")


class StatsError(ValueError):
    pass


class InsufficientDataError(StatsError):
    """Fewer than three usable pairs."""


class UndefinedCorrelationError(StatsError):
    """An input axis is constant; correlation is undefined."""


class UndefinedStatError(StatsError):
    """Ratio over an empty distribution."""


@dataclass(frozen=True)
class PlaceFrequency:
    place_id: str
    name: str
    surface_km2: float
    count: int


@dataclass(frozen=True)
class CorrelationReport:
    pearson_r: float
    pearson_p: float
    kendall_tau: float
    kendall_p: float
    n: int
    zero_surface_excluded: int = 0

    def to_json(self) -> dict:
        return {
            "pearson_r": self.pearson_r,
            "pearson_p": self.pearson_p,
            "kendall_tau": self.kendall_tau,
            "kendall_p": self.kendall_p,
            "n": self.n,
            "zero_surface_excluded": self.zero_surface_excluded,
        }


def place_frequencies(
    annotations: Iterable[Annotation],
    places: Mapping[str, PlaceDoc],
    kind: str,
) -> list[PlaceFrequency]:
    """One row per distinct place referenced by annotations of ``kind``."""
    if kind not in ("bbox", "pbbox"):
        raise StatsError(f"kind must be bbox or pbbox, got {kind!r}")
    counts: Counter = Counter()
    for a in annotations:
        if a.kind == kind:
            if a.place_id not in places:
                raise IntegrityError(f"unknown place {a.place_id}")
            counts[a.place_id] += 1
    rows = [
        PlaceFrequency(
            place_id=pid,
            name=places[pid].name,
            surface_km2=bbox_surface_km2(places[pid].bbox),
            count=c,
        )
        for pid, c in counts.items()
    ]
    rows.sort(key=lambda r: r.place_id)
    return rows


# --------------------------------------------------------------------------
# Numerics


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: int) -> float:
    """P(|T_df| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)."""
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def _normal_two_sided_p(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def pearson(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Pearson r and its two-sided p via the Student-t transform."""
    n = len(x)
    if n < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {n}")
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxx = math.fsum((xi - mx) ** 2 for xi in x)
    syy = math.fsum((yi - my) ** 2 for yi in y)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("constant input")
    sxy = math.fsum((xi - mx) * (yi - my) for xi, yi in zip(x, y))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    df = n - 2
    t = r * math.sqrt(df / (1.0 - r * r))
    return r, student_t_two_sided_p(t, df)


def _merge_count(values: list[float]) -> int:
    """Inversions in ``values`` counted by merge sort (mutates its copy)."""
    work = list(values)
    buf = [0.0] * len(work)
    inversions = 0
    width = 1
    n = len(work)
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if work[j] < work[i]:
                    inversions += mid - i
                    buf[k] = work[j]
                    j += 1
                else:
                    buf[k] = work[i]
                    i += 1
                k += 1
            buf[k:hi] = work[i:mid] if i < mid else work[j:hi]
            work[lo:hi] = buf[lo:hi]
        width *= 2
    return inversions


def _tie_runs(sorted_values: Sequence) -> list[int]:
    runs, run = [], 1
    for prev, cur in zip(sorted_values, sorted_values[1:]):
        if cur == prev:
            run += 1
        else:
            if run > 1:
                runs.append(run)
            run = 1
    if run > 1:
        runs.append(run)
    return runs


def kendall(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Kendall tau-b and its tie-adjusted asymptotic two-sided p.

    O(n log n): sort by (x, y), count discordant pairs as y-inversions.
    """
    n = len(x)
    if n < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {n}")
    pairs = sorted(zip(x, y))
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]

    x_runs = _tie_runs(xs)
    joint_runs = _tie_runs(pairs)
    y_runs = _tie_runs(sorted(ys))

    n0 = n * (n - 1) // 2
    n1 = sum(t * (t - 1) // 2 for t in x_runs)
    n2 = sum(u * (u - 1) // 2 for u in y_runs)
    n3 = sum(b * (b - 1) // 2 for b in joint_runs)
    if n1 == n0 or n2 == n0:
        raise UndefinedCorrelationError("constant input")

    discordant = _merge_count(ys)
    con_minus_dis = n0 - n1 - n2 + n3 - 2 * discordant
    tau = con_minus_dis / math.sqrt((n0 - n1) * (n0 - n2))
    tau = max(-1.0, min(1.0, tau))

    m = n * (n - 1)
    vt = sum(t * (t - 1) * (2 * t + 5) for t in x_runs)
    vu = sum(u * (u - 1) * (2 * u + 5) for u in y_runs)
    v1 = sum(t * (t - 1) for t in x_runs) * sum(u * (u - 1) for u in y_runs)
    v2 = sum(t * (t - 1) * (t - 2) for t in x_runs) * sum(u * (u - 1) * (u - 2) for u in y_runs)
    var = ((m * (2 * n + 5) - vt - vu) / 18.0
           + v1 / (2.0 * m)
           + v2 / (9.0 * m * (n - 2)))
    if var <= 0.0:
        raise UndefinedCorrelationError("degenerate tie structure")
    z = con_minus_dis / math.sqrt(var)
    return tau, _normal_two_sided_p(z)


def correlate_loglog(pf: Sequence[PlaceFrequency], use_log: bool = True) -> CorrelationReport:
    """Correlation between place surface and frequency.

    Degenerate zero-surface boxes cannot be log-transformed; they are
    excluded and counted on the report.
    """
    if use_log:
        usable = [row for row in pf if row.surface_km2 > 0.0]
        excluded = len(pf) - len(usable)
        x = [math.log10(row.surface_km2) for row in usable]
        y = [math.log10(row.count) for row in usable]
    else:
        usable = list(pf)
        excluded = 0
        x = [row.surface_km2 for row in usable]
        y = [float(row.count) for row in usable]
    if len(usable) < 3:
        raise InsufficientDataError(f"need at least 3 places, got {len(usable)}")
    r, rp = pearson(x, y)
    tau, taup = kendall(x, y)
    return CorrelationReport(
        pearson_r=r, pearson_p=rp, kendall_tau=tau, kendall_p=taup,
        n=len(usable), zero_surface_excluded=excluded,
    )


# --------------------------------------------------------------------------
# Cross distribution and threshold sweeps


def cross_distribution(
    annotations: Iterable[Annotation],
    places: Mapping[str, PlaceDoc],
    tweets: Mapping,
    threshold_km2: float,
) -> dict[str, dict[str, int]]:
    """Counts of (subtype x source label); every annotation counted once."""
    cross: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for a in annotations:
        tweet = tweets.get(a.tweet_id)
        if tweet is None:
            raise IntegrityError(f"annotation references unknown tweet {a.tweet_id}")
        subtype = classify_specificity(a, places, threshold_km2)
        cross[subtype][tweet.source_label] += 1
    return {sub: dict(sources) for sub, sources in cross.items()}


def cross_total(cross: Mapping[str, Mapping[str, int]]) -> int:
    return sum(c for sources in cross.values() for c in sources.values())


def usable_fraction(cross: Mapping[str, Mapping[str, int]]) -> float:
    """Share of annotations precise enough for mapping: geotag + small boxes."""
    total = cross_total(cross)
    if total == 0:
        raise UndefinedStatError("empty distribution")
    usable = sum(
        c for sub in USABLE_SUBTYPES for c in cross.get(sub, {}).values()
    )
    return usable / total


@dataclass(frozen=True)
class WhatIfResult:
    retained_small_annotations: int
    retained_places: int
    usable_fraction: float

    def to_json(self) -> dict:
        return {
            "retained_small_annotations": self.retained_small_annotations,
            "retained_places": self.retained_places,
            "usable_fraction": self.usable_fraction,
        }


def threshold_whatif(
    annotations: Sequence[Annotation],
    places: Mapping[str, PlaceDoc],
    threshold_km2: float,
) -> WhatIfResult:
    """Re-run the specificity split at an alternative threshold.

    ``retained_small_annotations`` counts the box annotations that classify
    small; geotags are unaffected by the threshold but still count toward
    the usable fraction.  threshold 0 is the degenerate sweep endpoint
    (no box is small); surfaces exactly at the threshold classify large,
    matching classify_specificity.
    """
    if threshold_km2 < 0:
        raise StatsError(f"threshold must be >= 0, got {threshold_km2}")
    if not annotations:
        raise UndefinedStatError("empty annotation set")
    small = 0
    geotags = 0
    retained_place_ids = set()
    for a in annotations:
        if a.kind == "geotag":
            geotags += 1
        elif bbox_surface_km2(places[a.place_id].bbox) < threshold_km2:
            small += 1
            retained_place_ids.add(a.place_id)
    return WhatIfResult(
        retained_small_annotations=small,
        retained_places=len(retained_place_ids),
        usable_fraction=(small + geotags) / len(annotations),
    )


# --------------------------------------------------------------------------
# Exports


def scatter_rows(pf: Sequence[PlaceFrequency]) -> list[dict]:
    return [
        {"place_id": r.place_id, "name": r.name, "surface_km2": r.surface_km2, "count": r.count}
        for r in pf
    ]


def scatter_csv(pf: Sequence[PlaceFrequency]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["place_id", "name", "surface_km2", "count"])
    for r in pf:
        writer.writerow([r.place_id, r.name, repr(r.surface_km2), r.count])
    return buf.getvalue()
