"""Pool-based active-learning harness for three-class flood relevance.

A one-vs-rest linear classifier (hinge loss, seeded SGD) is retrained after
every labeling batch; three selection strategies are provided: uniform
random, least-confidence uncertainty sampling, and a simplified
cluster-based stand-in for hierarchical sampling.  Strategies only ever see
the pool; held-out test labels stay with the harness.
"""
from __future__ import annotations

import csv
import io
import math
import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

CLASSES = ("NonRelevant", "PositiveIndication", "NegativeIndication")

DEFAULT_EPOCHS = 30
DEFAULT_LEARNING_RATE = 0.05
DEFAULT_REGULARIZATION = 1e-4

PAPER_TRAIN_SIZE = 316
PAPER_TEST_SIZE = 105


class DegenerateDataError(ValueError):
    """Training set has fewer than two distinct classes."""


class RequestError(ValueError):
    """Selection request cannot be satisfied (e.g. k exceeds the pool)."""


@dataclass(frozen=True)
class LabeledSample:
    tweet_id: str
    vector: np.ndarray
    label: str


@dataclass
class LinearModel:
    classes: tuple
    weights: np.ndarray   # (n_classes, dim)
    bias: np.ndarray      # (n_classes,)
    epochs: int
    learning_rate: float
    regularization: float
    seed: int


def train_ovr(
    samples: Sequence[LabeledSample],
    epochs: int = DEFAULT_EPOCHS,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    regularization: float = DEFAULT_REGULARIZATION,
    seed: int = 0,
) -> LinearModel:
    """Hinge-loss one-vs-rest SGD with a seeded, fixed shuffle order."""
    if not samples:
        raise DegenerateDataError("no training samples")
    present = sorted({s.label for s in samples})
    if len(present) < 2:
        raise DegenerateDataError(f"need >= 2 classes, got {present}")
    classes = tuple(present)
    x = np.stack([s.vector for s in samples]).astype(np.float64)
    n, dim = x.shape
    targets = np.full((n, len(classes)), -1.0)
    index_of = {c: i for i, c in enumerate(classes)}
    for row, s in enumerate(samples):
        targets[row, index_of[s.label]] = 1.0

    weights = np.zeros((len(classes), dim))
    bias = np.zeros(len(classes))
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        for i in rng.permutation(n):
            xi = x[i]
            yi = targets[i]
            margins = yi * (weights @ xi + bias)
            weights *= 1.0 - learning_rate * regularization
            hinge = margins < 1.0
            if hinge.any():
                weights[hinge] += learning_rate * np.outer(yi[hinge], xi)
                bias[hinge] += learning_rate * yi[hinge]
    return LinearModel(
        classes=classes, weights=weights, bias=bias,
        epochs=epochs, learning_rate=learning_rate,
        regularization=regularization, seed=seed,
    )


def decision_values(model: LinearModel, vector: np.ndarray) -> np.ndarray:
    return model.weights @ np.asarray(vector, dtype=np.float64) + model.bias


def predict(model: LinearModel, vector: np.ndarray) -> tuple[str, float]:
    """Argmax class plus its softmax weight over the decision values."""
    scores = decision_values(model, vector)
    best = int(np.argmax(scores))
    shifted = np.exp(scores - scores[best])
    confidence = float(1.0 / shifted.sum())
    return model.classes[best], confidence


# --------------------------------------------------------------------------
# Selection strategies


def select_random(pool_ids: Sequence[str], k: int, seed) -> list[str]:
    """k ids uniformly without replacement; independent of input order."""
    ids = sorted(pool_ids)
    if k > len(ids):
        raise RequestError(f"k={k} exceeds pool size {len(ids)}")
    return random.Random(seed).sample(ids, k)


def select_uncertainty(pool: Mapping[str, np.ndarray], model: LinearModel, k: int) -> list[str]:
    """The k pool items the model is least confident about, id-tie-broken."""
    if k > len(pool):
        raise RequestError(f"k={k} exceeds pool size {len(pool)}")
    ranked = sorted((predict(model, vec)[1], tweet_id) for tweet_id, vec in pool.items())
    return [tweet_id for _, tweet_id in ranked[:k]]


def _kmeans(points: np.ndarray, n_clusters: int, rng: random.Random, iterations: int = 10) -> np.ndarray:
    """Seeded k-means++ with a fixed iteration budget; returns assignments."""
    n = len(points)
    centroid_idx = [rng.randrange(n)]
    for _ in range(n_clusters - 1):
        d2 = np.min(
            [np.sum((points - points[i]) ** 2, axis=1) for i in centroid_idx], axis=0
        )
        total = float(d2.sum())
        if total == 0.0:
            centroid_idx.append(rng.randrange(n))
            continue
        r = rng.random() * total
        centroid_idx.append(int(np.searchsorted(np.cumsum(d2), r)))
    centroids = points[centroid_idx].copy()
    assignments = np.zeros(n, dtype=np.int64)
    for _ in range(iterations):
        dists = np.linalg.norm(points[:, None, :] - centroids[None, :, :], axis=2)
        assignments = np.argmin(dists, axis=1)
        for c in range(n_clusters):
            members = points[assignments == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    return assignments


def select_hierarchical(
    pool: Mapping[str, np.ndarray],
    known_labels: Mapping[str, str],
    k: int,
    seed,
) -> list[str]:
    """Cluster-guided sampling (simplified hierarchical stand-in).

    Partitions the pool into ~sqrt(|pool|) k-means clusters and allocates
    the batch over clusters whose known labels are mixed or absent,
    proportionally to their unlabeled size (largest-remainder), emitting
    round-robin so early picks spread across clusters.  Falls back to
    label-pure clusters only when the impure ones run dry.
    """
    items = sorted(pool.items())
    unlabeled = [tweet_id for tweet_id, _ in items if tweet_id not in known_labels]
    if k > len(unlabeled):
        raise RequestError(f"k={k} exceeds unlabeled pool size {len(unlabeled)}")
    if k == 0:
        return []
    points = np.stack([vec for _, vec in items]).astype(np.float64)
    n_clusters = max(1, int(math.sqrt(len(items))))
    rng = random.Random(seed)
    assignments = _kmeans(points, n_clusters, rng)

    clusters: dict[int, list[int]] = {}
    for row, c in enumerate(assignments):
        clusters.setdefault(int(c), []).append(row)

    candidates = []  # (impure, unlabeled ids ordered by centroid distance)
    for c, rows in sorted(clusters.items()):
        member_ids = [items[r][0] for r in rows]
        labels = {known_labels[m] for m in member_ids if m in known_labels}
        free = [m for m in member_ids if m not in known_labels]
        if not free:
            continue
        impure = len(labels) != 1  # absent (0 labels) or mixed (>1)
        centroid = points[rows].mean(axis=0)
        by_distance = sorted(
            free,
            key=lambda tid: (float(np.linalg.norm(pool[tid] - centroid)), tid),
        )
        candidates.append((impure, by_distance))

    preferred = [ids for impure, ids in candidates if impure]
    fallback = [ids for impure, ids in candidates if not impure]

    def allocate(groups: list[list[str]], budget: int) -> list[int]:
        sizes = [len(g) for g in groups]
        capacity = sum(sizes)
        take = min(budget, capacity)
        if take == 0:
            return [0] * len(groups)
        quotas = [take * s / capacity for s in sizes]
        alloc = [min(int(q), s) for q, s in zip(quotas, sizes)]
        remainders = sorted(
            range(len(groups)),
            key=lambda i: (-(quotas[i] - int(quotas[i])), -sizes[i], i),
        )
        i = 0
        while sum(alloc) < take:
            g = remainders[i % len(groups)]
            if alloc[g] < sizes[g]:
                alloc[g] += 1
            i += 1
        return alloc

    selected: list[str] = []
    for groups in (preferred, fallback):
        remaining = k - len(selected)
        if remaining <= 0:
            break
        order = sorted(range(len(groups)), key=lambda i: (-len(groups[i]), i))
        alloc = allocate(groups, remaining)
        cursor = [0] * len(groups)
        while len(selected) < k and any(cursor[i] < alloc[i] for i in order):
            for i in order:
                if cursor[i] < alloc[i]:
                    selected.append(groups[i][cursor[i]])
                    cursor[i] += 1
                    if len(selected) == k:
                        break
    return selected


# --------------------------------------------------------------------------
# Precision harness


def macro_precision(
    y_true: Sequence[str],
    y_pred: Sequence[str],
    classes: Sequence[str] = CLASSES,
) -> tuple[float, dict[str, float]]:
    """Unweighted mean of per-class precision.

    A class never predicted gets precision 0 (flagged with a warning)
    rather than silently inflating the average.
    """
    per_class = {}
    for c in classes:
        predicted = [t for t, p in zip(y_true, y_pred) if p == c]
        if not predicted:
            warnings.warn(f"class {c!r} absent from predictions; precision counted as 0")
            per_class[c] = 0.0
        else:
            per_class[c] = sum(1 for t in predicted if t == c) / len(predicted)
    return sum(per_class.values()) / len(classes), per_class


def _constant_model(label: str, dim: int) -> LinearModel:
    return LinearModel(
        classes=(label,), weights=np.zeros((1, dim)), bias=np.zeros(1),
        epochs=0, learning_rate=0.0, regularization=0.0, seed=0,
    )


@dataclass(frozen=True)
class CurvePoint:
    n_labeled: int
    macro_precision: float
    per_class: dict


def run_curve(
    train_pool: Sequence[LabeledSample],
    test_set: Sequence[LabeledSample],
    strategy: str,
    batch_size: int,
    budget: int,
    seed: int = 0,
    epochs: int = DEFAULT_EPOCHS,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    regularization: float = DEFAULT_REGULARIZATION,
) -> list[CurvePoint]:
    """Select, reveal, retrain, evaluate; one curve point per batch.

    The pool's labels are revealed only as the strategy selects them; the
    model always retrains from scratch on the id-sorted revealed samples,
    so an exhausted budget reproduces full-pool training exactly.
    """
    if strategy not in ("random", "uncertainty", "hierarchical"):
        raise RequestError(f"unknown strategy {strategy!r}")
    if batch_size < 1:
        raise RequestError(f"batch_size must be >= 1, got {batch_size}")
    by_id = {s.tweet_id: s for s in train_pool}
    if budget > len(by_id):
        warnings.warn(f"budget {budget} exceeds pool size {len(by_id)}; clipping")
        budget = len(by_id)
    vectors = {tweet_id: s.vector for tweet_id, s in by_id.items()}
    dim = len(next(iter(vectors.values()))) if vectors else 0

    revealed: dict[str, str] = {}
    model: Optional[LinearModel] = None
    curve: list[CurvePoint] = []
    iteration = 0
    while len(revealed) < budget:
        k = min(batch_size, budget - len(revealed))
        unlabeled = {tid: v for tid, v in vectors.items() if tid not in revealed}
        step_seed = f"{seed}:{iteration}"
        if strategy == "uncertainty" and model is not None:
            batch = select_uncertainty(unlabeled, model, k)
        elif strategy == "hierarchical":
            batch = select_hierarchical(vectors, revealed, k, step_seed)
        else:
            # random, and the bootstrap batch for uncertainty
            batch = select_random(list(unlabeled), k, step_seed)
        for tweet_id in batch:
            revealed[tweet_id] = by_id[tweet_id].label

        train_samples = [by_id[tid] for tid in sorted(revealed)]
        distinct = {s.label for s in train_samples}
        if len(distinct) >= 2:
            model = train_ovr(
                train_samples, epochs=epochs, learning_rate=learning_rate,
                regularization=regularization, seed=seed,
            )
        else:
            model = _constant_model(next(iter(distinct)), dim)

        y_true = [s.label for s in test_set]
        y_pred = [predict(model, s.vector)[0] for s in test_set]
        macro, per_class = macro_precision(y_true, y_pred)
        curve.append(CurvePoint(len(revealed), macro, per_class))
        iteration += 1
    return curve


def curve_to_csv(curve: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n_labeled", "macro_precision", "p_nonrel", "p_pos", "p_neg"])
    for point in curve:
        writer.writerow([
            point.n_labeled,
            repr(point.macro_precision),
            repr(point.per_class.get("NonRelevant", 0.0)),
            repr(point.per_class.get("PositiveIndication", 0.0)),
            repr(point.per_class.get("NegativeIndication", 0.0)),
        ])
    return buf.getvalue()


# --------------------------------------------------------------------------
# File formats


def load_labels(path: str | Path) -> dict[str, str]:
    """CSV ``tweet_id,label`` (header row optional)."""
    labels: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "tweet_id":
                continue
            tweet_id, label = row[0].strip(), row[1].strip()
            if label not in CLASSES:
                raise ValueError(f"unknown class label {label!r} for tweet {tweet_id}")
            labels[tweet_id] = label
    return labels


def split_train_test(
    samples: Sequence[LabeledSample],
    seed: int = 0,
    train_size: Optional[int] = None,
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Seeded shuffle split; defaults mirror the 316/105 reference layout."""
    ordered = sorted(samples, key=lambda s: s.tweet_id)
    random.Random(f"split-{seed}").shuffle(ordered)
    if train_size is None:
        train_size = round(len(ordered) * PAPER_TRAIN_SIZE / (PAPER_TRAIN_SIZE + PAPER_TEST_SIZE))
    return list(ordered[:train_size]), list(ordered[train_size:])
