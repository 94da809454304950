"""Domain-classifier drift score backed by a seeded greedy decision tree.

Rows from both splits are labelled by origin (train=0, test=1); a shallow
binary tree with Gini splits is fit on a stratified 70% sample and its AUC on
the 30% holdout is mapped to drift = max(0, 2*AUC - 1). No external learner:
the tree is implemented here so the check is deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..model import ColumnKind
from .stats import InsufficientData, auc_roc

MIN_ROWS = 20
MAX_CATEGORIES = 32
MIN_GAIN = 1e-12


@dataclass
class _Node:
    prob: float
    feature: str | None = None
    threshold: float | None = None
    subset: frozenset | None = None
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class _FeatureData:
    name: str
    kind: ColumnKind
    numeric: np.ndarray | None = None
    codes: np.ndarray | None = None  # -1 marks null or a non-top category
    code_values: tuple | None = None


def domain_classifier_drift(
    train: Any, test: Any, seed: int, max_depth: int = 3
) -> tuple[float, list[tuple[str, float]]]:
    """Drift score in [0, 1] plus features ranked by total Gini gain."""
    if train.schema.to_dict() != test.schema.to_dict():
        raise ValueError("train and test must share a schema")
    n_train, n_test = train.row_count, test.row_count
    total = n_train + n_test
    if n_train == 0 or n_test == 0 or total < MIN_ROWS:
        raise InsufficientData(f"need at least {MIN_ROWS} rows across both splits")

    features = _prepare_features(train, test)
    if not features:
        raise InsufficientData("no numeric or categorical features")
    y = np.concatenate([np.zeros(n_train), np.ones(n_test)])

    rng = np.random.default_rng(seed)
    fit_idx, holdout_idx = _stratified_split(y, rng, fit_fraction=0.7)
    if len(set(y[fit_idx])) < 2 or len(set(y[holdout_idx])) < 2:
        raise InsufficientData("origin classes collapse under the 70/30 split")

    gains: dict[str, float] = {}
    root = _grow(features, y, fit_idx, depth=0, max_depth=max_depth, n_fit=fit_idx.size, gains=gains)
    probs = _predict(root, features, holdout_idx)
    auc = auc_roc(probs, y[holdout_idx])
    drift = max(0.0, 2.0 * auc - 1.0)
    ranked = sorted(gains.items(), key=lambda item: (-item[1], item[0]))
    return float(drift), ranked


def _prepare_features(train: Any, test: Any) -> list[_FeatureData]:
    features = []
    for spec in train.schema.feature_columns():
        if spec.kind is ColumnKind.NUMERIC:
            values = np.concatenate([train.numeric(spec.name), test.numeric(spec.name)])
            features.append(_FeatureData(spec.name, spec.kind, numeric=values))
        elif spec.kind is ColumnKind.CATEGORICAL:
            combined = list(train.strings(spec.name)) + list(test.strings(spec.name))
            counts: dict[str, int] = {}
            for v in combined:
                if v is not None:
                    counts[v] = counts.get(v, 0) + 1
            top = sorted(counts, key=lambda c: (-counts[c], c))[:MAX_CATEGORIES]
            index = {c: i for i, c in enumerate(top)}
            codes = np.fromiter(
                (index.get(v, -1) if v is not None else -1 for v in combined),
                dtype=np.int64,
                count=len(combined),
            )
            features.append(_FeatureData(spec.name, spec.kind, codes=codes, code_values=tuple(top)))
    return features


def _stratified_split(y: np.ndarray, rng: np.random.Generator, fit_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    fit_parts, holdout_parts = [], []
    for cls in (0.0, 1.0):
        idx = np.flatnonzero(y == cls)
        perm = rng.permutation(idx)
        cut = int(round(fit_fraction * perm.size))
        fit_parts.append(perm[:cut])
        holdout_parts.append(perm[cut:])
    return np.sort(np.concatenate(fit_parts)), np.sort(np.concatenate(holdout_parts))


def _gini(pos: np.ndarray | float, n: np.ndarray | float) -> np.ndarray | float:
    p = pos / n
    return 2.0 * p * (1.0 - p)


def _grow(
    features: list[_FeatureData],
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    max_depth: int,
    n_fit: int,
    gains: dict[str, float],
) -> _Node:
    labels = y[idx]
    n = idx.size
    pos = float(labels.sum())
    prob = pos / n
    node = _Node(prob=prob)
    if depth >= max_depth or n < 2 or pos == 0.0 or pos == n:
        return node

    parent_impurity = _gini(pos, float(n))
    best_gain = MIN_GAIN
    best: tuple[str, float | None, frozenset | None, np.ndarray] | None = None

    for feat in features:
        found = _best_split(feat, idx, labels, pos, parent_impurity)
        if found is not None and found[0] > best_gain:
            best_gain, threshold, subset, left_mask = found
            best = (feat.name, threshold, subset, left_mask)

    if best is None:
        return node
    name, threshold, subset, left_mask = best
    gains[name] = gains.get(name, 0.0) + (n / n_fit) * best_gain
    node.feature = name
    node.threshold = threshold
    node.subset = subset
    node.left = _grow(features, y, idx[left_mask], depth + 1, max_depth, n_fit, gains)
    node.right = _grow(features, y, idx[~left_mask], depth + 1, max_depth, n_fit, gains)
    return node


def _best_split(
    feat: _FeatureData,
    idx: np.ndarray,
    labels: np.ndarray,
    pos_total: float,
    parent_impurity: float,
) -> tuple[float, float | None, frozenset | None, np.ndarray] | None:
    n = idx.size
    if feat.numeric is not None:
        values = feat.numeric[idx]
        present = ~np.isnan(values)
        if present.sum() < 2:
            return None
        order = np.argsort(values[present], kind="stable")
        sorted_vals = values[present][order]
        sorted_labels = labels[present][order]
        m = sorted_vals.size
        cum_pos = np.cumsum(sorted_labels)
        left_n = np.arange(1, m, dtype=np.float64)
        left_pos = cum_pos[:-1]
        right_n = n - left_n  # rows with NaN always fall right
        right_pos = pos_total - left_pos
        weighted = (left_n * _gini(left_pos, left_n) + right_n * _gini(right_pos, right_n)) / n
        valid = sorted_vals[1:] != sorted_vals[:-1]
        if not valid.any():
            return None
        gain = np.where(valid, parent_impurity - weighted, -np.inf)
        best_i = int(np.argmax(gain))
        if gain[best_i] <= 0:
            return None
        threshold = float(0.5 * (sorted_vals[best_i] + sorted_vals[best_i + 1]))
        left_mask = values <= threshold  # NaN compares False
        if not left_mask.any() or left_mask.all():
            return None
        return float(gain[best_i]), threshold, None, left_mask

    codes = feat.codes[idx]
    shifted = codes + 1  # bucket 0 collects null / non-top categories
    k = len(feat.code_values) + 1
    counts = np.bincount(shifted, minlength=k).astype(np.float64)
    pos_counts = np.bincount(shifted, weights=labels, minlength=k)
    cat_ids = np.flatnonzero(counts[1:] > 0)  # real categories present at node
    if cat_ids.size < 1:
        return None
    rates = pos_counts[cat_ids + 1] / counts[cat_ids + 1]
    order = cat_ids[np.lexsort((cat_ids, rates))]
    # Candidate left subsets are prefixes of categories ordered by origin
    # rate; the null bucket always falls right, so the full prefix is valid
    # whenever that bucket is non-empty.
    left_n = np.cumsum(counts[order + 1])
    left_pos = np.cumsum(pos_counts[order + 1])
    right_n = n - left_n
    right_pos = pos_total - left_pos
    usable = (left_n > 0) & (right_n > 0)
    if not usable.any():
        return None
    weighted = (left_n * _gini(left_pos, np.maximum(left_n, 1)) + right_n * _gini(right_pos, np.maximum(right_n, 1))) / n
    gain = np.where(usable, parent_impurity - weighted, -np.inf)
    best_i = int(np.argmax(gain))
    if gain[best_i] <= 0:
        return None
    chosen = order[: best_i + 1]
    subset = frozenset(feat.code_values[c] for c in chosen)
    left_mask = np.isin(codes, chosen)
    return float(gain[best_i]), None, subset, left_mask


def _predict(root: _Node, features: list[_FeatureData], idx: np.ndarray) -> np.ndarray:
    by_name = {f.name: f for f in features}
    probs = np.empty(idx.size, dtype=np.float64)

    def walk(node: _Node, mask: np.ndarray) -> None:
        if not mask.any():
            return
        if node.is_leaf:
            probs[mask] = node.prob
            return
        feat = by_name[node.feature]
        if feat.numeric is not None:
            go_left = feat.numeric[idx] <= node.threshold
        else:
            values = feat.codes[idx]
            chosen = [i for i, v in enumerate(feat.code_values) if v in node.subset]
            go_left = np.isin(values, chosen)
        walk(node.left, mask & go_left)
        walk(node.right, mask & ~go_left)

    walk(root, np.ones(idx.size, dtype=bool))
    return probs
