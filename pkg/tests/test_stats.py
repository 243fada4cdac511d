import math
import random
from collections import Counter

import numpy as np
import pytest
import scipy.stats

from geocorpus.annotate import Annotation, PlaceDoc
from geocorpus.geo import BBox, GeoPoint, bbox_surface_km2
from geocorpus.stats import (
    CorrelationReport,
    InsufficientDataError,
    PlaceFrequency,
    UndefinedCorrelationError,
    UndefinedStatError,
    correlate_loglog,
    cross_distribution,
    kendall,
    pearson,
    place_frequencies,
    regularized_incomplete_beta,
    scatter_csv,
    threshold_whatif,
    usable_fraction,
)


# --------------------------------------------------------------------------
# Oracles


def pearson_bruteforce(x, y):
    """Plain covariance-definition Pearson, no shortcuts."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y)) / n
    sx = math.sqrt(sum((a - mx) ** 2 for a in x) / n)
    sy = math.sqrt(sum((b - my) ** 2 for b in y) / n)
    return cov / (sx * sy)


def kendall_bruteforce(x, y):
    """O(n^2) concordant/discordant pair count with tau-b tie correction."""
    n = len(x)
    concordant = discordant = 0
    ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (x[i] > x[j]) - (x[i] < x[j])
            dy = (y[i] > y[j]) - (y[i] < y[j])
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx == dy:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x - _joint(x, y)) * (n0 - ties_y - _joint(x, y)))
    return (concordant - discordant) / denom


def _joint(x, y):
    counts = Counter(zip(x, y))
    return sum(c * (c - 1) // 2 for c in counts.values())


def random_dataset(rng, n):
    """Surface/count-like pairs in log space, with ties from integer counts."""
    x = [round(rng.uniform(0, 5), rng.choice([1, 2, 6])) for _ in range(n)]
    y = [float(rng.randint(1, 30)) for _ in range(n)]
    return x, y


# --------------------------------------------------------------------------
# place_frequencies


def make_place(pid, surface_factor=1.0):
    w = -95.5
    s = 29.5
    side = 0.1 * surface_factor
    return PlaceDoc(pid, f"place {pid}", BBox(w, s, w + side, s + side), "tweet-place")


def test_place_frequencies_empty():
    assert place_frequencies([], {}, "bbox") == []


def test_place_frequencies_counts_annotations():
    places = {"p1": make_place("p1")}
    annotations = [Annotation(str(i), "bbox", place_id="p1") for i in range(3)]
    rows = place_frequencies(annotations, places, "bbox")
    assert len(rows) == 1
    assert rows[0].count == 3
    assert rows[0].name == "place p1"


def test_place_frequencies_matches_recount_oracle():
    rng = random.Random(31)
    places = {f"p{i}": make_place(f"p{i}", rng.uniform(0.5, 3)) for i in range(40)}
    annotations = []
    for i in range(2000):
        kind = rng.choice(["bbox", "pbbox", "geotag"])
        if kind == "geotag":
            annotations.append(Annotation(str(i), "geotag", point=GeoPoint(0, 0)))
        else:
            annotations.append(Annotation(str(i), kind, place_id=f"p{rng.randrange(40)}"))
    for kind in ("bbox", "pbbox"):
        rows = place_frequencies(annotations, places, kind)
        expected = Counter(a.place_id for a in annotations if a.kind == kind)
        assert {(r.place_id, r.count) for r in rows} == set(expected.items())


# --------------------------------------------------------------------------
# correlation numerics


def test_perfect_positive_correlation_is_exactly_one():
    pf = [
        PlaceFrequency(f"p{k}", f"place {k}", 10.0 ** k, 10 ** k)
        for k in range(1, 6)
    ]
    report = correlate_loglog(pf)
    assert report.pearson_r == 1.0
    assert report.kendall_tau == 1.0
    assert report.pearson_p == 0.0


def test_perfect_negative_correlation_is_exactly_minus_one():
    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    y = [5.0, 4.0, 3.0, 2.0, 1.0]
    r, _ = pearson(x, y)
    tau, _ = kendall(x, y)
    assert r == -1.0
    assert tau == -1.0


def test_random_datasets_match_oracles():
    rng = random.Random(57)
    for trial in range(20):
        n = rng.randint(10, 200)
        x, y = random_dataset(rng, n)
        r, rp = pearson(x, y)
        tau, taup = kendall(x, y)

        assert r == pytest.approx(pearson_bruteforce(x, y), abs=1e-9)
        assert tau == pytest.approx(kendall_bruteforce(x, y), abs=1e-12)

        ref_r, ref_rp = scipy.stats.pearsonr(x, y)
        assert r == pytest.approx(ref_r, abs=1e-9)
        assert rp == pytest.approx(ref_rp, abs=1e-6)

        ref = scipy.stats.kendalltau(x, y, variant="b", method="asymptotic")
        assert tau == pytest.approx(ref.statistic, abs=1e-12)
        assert taup == pytest.approx(ref.pvalue, abs=1e-6)


def test_incomplete_beta_against_scipy():
    import scipy.special
    rng = random.Random(5)
    for _ in range(200):
        a = rng.uniform(0.5, 50)
        b = rng.uniform(0.5, 50)
        x = rng.random()
        assert regularized_incomplete_beta(a, b, x) == pytest.approx(
            float(scipy.special.betainc(a, b, x)), abs=1e-12
        )


def test_affine_and_monotone_invariance():
    rng = random.Random(77)
    x, y = random_dataset(rng, 120)
    r0, _ = pearson(x, y)
    tau0, _ = kendall(x, y)
    # strictly increasing affine map leaves Pearson r unchanged
    r1, _ = pearson([3.0 * v + 7.0 for v in x], [0.5 * v - 2.0 for v in y])
    assert r1 == pytest.approx(r0, abs=1e-12)
    # any strictly monotone map leaves tau unchanged
    tau1, _ = kendall([math.exp(v) for v in x], [v ** 3 for v in y])
    assert tau1 == pytest.approx(tau0, abs=1e-12)


def test_insufficient_and_degenerate_inputs():
    with pytest.raises(InsufficientDataError):
        pearson([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(UndefinedCorrelationError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(UndefinedCorrelationError):
        kendall([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(InsufficientDataError):
        correlate_loglog([PlaceFrequency("p", "p", 1.0, 1)])


def test_zero_surface_places_excluded_and_counted():
    pf = [PlaceFrequency(f"p{k}", "", 10.0 ** k, 2 ** k) for k in range(1, 6)]
    pf.append(PlaceFrequency("degenerate", "", 0.0, 7))
    report = correlate_loglog(pf)
    assert report.n == 5
    assert report.zero_surface_excluded == 1


# --------------------------------------------------------------------------
# cross distribution / usable fraction / what-if


class FakeTweet:
    def __init__(self, source):
        self.source_label = source


def test_cross_distribution_empty():
    assert cross_distribution([], {}, {}, 350.0) == {}


def test_cross_distribution_single_geotag():
    annotations = [Annotation("1", "geotag", point=GeoPoint(0, 0))]
    cross = cross_distribution(annotations, {}, {"1": FakeTweet("Instagram")}, 350.0)
    assert cross == {"geotag": {"Instagram": 1}}


def test_cross_totals_conserved_under_repartition():
    rng = random.Random(3)
    places = {"small": make_place("small", 0.5), "big": make_place("big", 40.0)}
    annotations = []
    tweets = {}
    for i in range(500):
        tid = str(i)
        tweets[tid] = FakeTweet(rng.choice(["A", "B", "C"]))
        kind = rng.choice(["geotag", "bbox", "pbbox"])
        if kind == "geotag":
            annotations.append(Annotation(tid, kind, point=GeoPoint(0, 0)))
        else:
            annotations.append(Annotation(tid, kind, place_id=rng.choice(["small", "big"])))
    cross = cross_distribution(annotations, places, tweets, 350.0)
    total = sum(c for sub in cross.values() for c in sub.values())
    assert total == len(annotations)
    shuffled = annotations[:]
    rng.shuffle(shuffled)
    assert cross_distribution(shuffled, places, tweets, 350.0) == cross


def test_usable_fraction_arithmetic():
    assert usable_fraction({"geotag": {"A": 4}}) == 1.0
    assert usable_fraction({"geotag": {"A": 1}, "l_bbox": {"A": 3}}) == 0.25
    with pytest.raises(UndefinedStatError):
        usable_fraction({})


def _whatif_store(rng, n_places=30, n_annotations=400):
    places = {f"p{i}": make_place(f"p{i}", rng.uniform(0.05, 30)) for i in range(n_places)}
    annotations = []
    for i in range(n_annotations):
        kind = rng.choice(["geotag", "bbox", "pbbox"])
        if kind == "geotag":
            annotations.append(Annotation(str(i), kind, point=GeoPoint(0, 0)))
        else:
            annotations.append(Annotation(str(i), kind, place_id=f"p{rng.randrange(n_places)}"))
    return annotations, places


def test_whatif_degenerate_thresholds():
    rng = random.Random(11)
    annotations, places = _whatif_store(rng)
    n_boxes = sum(1 for a in annotations if a.kind != "geotag")
    n_geotags = len(annotations) - n_boxes
    all_small = threshold_whatif(annotations, places, math.inf)
    assert all_small.retained_small_annotations == n_boxes
    none_small = threshold_whatif(annotations, places, 0.0)
    assert none_small.retained_small_annotations == 0
    assert none_small.usable_fraction == n_geotags / len(annotations)


def test_whatif_matches_bruteforce_recount_and_is_monotone():
    rng = random.Random(13)
    annotations, places = _whatif_store(rng)
    surfaces = {pid: bbox_surface_km2(p.bbox) for pid, p in places.items()}
    previous_retained = -1
    for threshold in sorted(rng.uniform(0.01, 5000) for _ in range(50)):
        result = threshold_whatif(annotations, places, threshold)
        small = [a for a in annotations if a.kind != "geotag" and surfaces[a.place_id] < threshold]
        geotags = sum(1 for a in annotations if a.kind == "geotag")
        assert result.retained_small_annotations == len(small)
        assert result.retained_places == len({a.place_id for a in small})
        assert result.usable_fraction == (len(small) + geotags) / len(annotations)
        assert result.retained_small_annotations >= previous_retained
        previous_retained = result.retained_small_annotations


def test_scatter_csv_shape():
    pf = [PlaceFrequency("p1", "name, with comma", 12.5, 3)]
    text = scatter_csv(pf)
    lines = text.strip().split("\r\n")
    assert lines[0] == "place_id,name,surface_km2,count"
    assert lines[1] == 'p1,"name, with comma",12.5,3'
