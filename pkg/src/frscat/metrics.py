"""Gland-segmentation scoring: object matching, F1, object-level Dice and
Hausdorff, and rank aggregation across methods.

Instance masks are 2D integer arrays: 0 is background, any positive value
is an object id (ids need not be contiguous).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from . import kernels

__all__ = [
    "SCORE_COLUMNS",
    "MatchTable",
    "RankRow",
    "match_objects",
    "f1_score",
    "dice",
    "object_dice",
    "hausdorff",
    "object_hausdorff",
    "rank_aggregate",
    "aggregate_ranks",
    "evaluate_masks",
]

SCORE_COLUMNS = ("f1_a", "f1_b", "dice_a", "dice_b", "haus_a", "haus_b")
_ASCENDING = (False, False, False, False, True, True)
_TEST_A = (0, 2, 4)
_TEST_B = (1, 3, 5)


def _check_pair(seg, gt):
    seg = np.asarray(seg)
    gt = np.asarray(gt)
    if seg.ndim != 2 or seg.shape != gt.shape:
        raise ValueError(f"mask dimension mismatch: {seg.shape} vs {gt.shape}")
    if (seg.size and seg.min() < 0) or (gt.size and gt.min() < 0):
        raise ValueError("instance masks must be nonnegative")
    return seg, gt


class _Overlap:
    """Object ids, areas and the pairwise overlap table of two masks."""

    def __init__(self, seg, gt):
        seg, gt = _check_pair(seg, gt)
        self.shape = seg.shape
        self.seg_ids, seg_c = np.unique(seg, return_inverse=True)
        self.gt_ids, gt_c = np.unique(gt, return_inverse=True)
        # compact codes with background fixed at 0
        if self.seg_ids.size and self.seg_ids[0] != 0:
            self.seg_ids = np.concatenate([[0], self.seg_ids])
            seg_c = seg_c + 1
        if self.gt_ids.size and self.gt_ids[0] != 0:
            self.gt_ids = np.concatenate([[0], self.gt_ids])
            gt_c = gt_c + 1
        self.seg_code = seg_c.reshape(seg.shape)
        self.gt_code = gt_c.reshape(gt.shape)
        ns, ng = len(self.seg_ids) - 1, len(self.gt_ids) - 1
        table = kernels.contingency(self.seg_code, self.gt_code, ns, ng)
        self.table = table[1:, 1:]
        self.seg_area = table[1:, :].sum(axis=1)
        self.gt_area = table[:, 1:].sum(axis=0)

    @property
    def n_seg(self) -> int:
        return len(self.seg_area)

    @property
    def n_gt(self) -> int:
        return len(self.gt_area)

    def best_gt(self, i: int) -> int:
        """Index of the gt object overlapping seg object ``i`` most, or -1."""
        return _best(self.table[i], self.gt_area)

    def best_seg(self, g: int) -> int:
        return _best(self.table[:, g], self.seg_area)

    def seg_pixels(self, i: int) -> np.ndarray:
        return self.seg_code == i + 1

    def gt_pixels(self, g: int) -> np.ndarray:
        return self.gt_code == g + 1


def _best(row: np.ndarray, areas: np.ndarray) -> int:
    if row.size == 0 or row.max() == 0:
        return -1
    # max overlap, then smallest partner, then lowest id: independent of id order
    # except for exact (overlap, area) ties
    cand = np.flatnonzero(row == row.max())
    return int(cand[np.argmin(areas[cand])])


@dataclass
class MatchTable:
    """``pairs`` holds (segmented id, matched gt id or None, overlap / |seg|)."""

    pairs: list[tuple[int, int | None, float]]
    tp: int
    fp: int
    fn: int


def match_objects(seg, gt) -> MatchTable:
    """Detection matching: a segmented object is a true positive when more
    than half of its area lies in the ground-truth object it overlaps most.
    Ground-truth objects claimed by no true positive are false negatives.
    """
    ov = _Overlap(seg, gt)
    pairs = []
    tp = 0
    detected = set()
    for i in range(ov.n_seg):
        g = ov.best_gt(i)
        sid = int(ov.seg_ids[i + 1])
        if g < 0:
            pairs.append((sid, None, 0.0))
            continue
        frac = ov.table[i, g] / ov.seg_area[i]
        pairs.append((sid, int(ov.gt_ids[g + 1]), float(frac)))
        if frac > 0.5:
            tp += 1
            detected.add(g)
    return MatchTable(pairs, tp, ov.n_seg - tp, ov.n_gt - len(detected))


def f1_score(table: MatchTable) -> tuple[float, float, float]:
    """(precision, recall, F1); any 0/0 is taken as 0."""
    tp, fp, fn = table.tp, table.fp, table.fn
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def dice(a, b) -> float:
    """Dice index of two boolean pixel sets; 1 when both are empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def object_dice(seg, gt) -> float:
    """Area-weighted Dice over segmented objects and over ground-truth
    objects, each paired with its maximal-overlap counterpart."""
    ov = _Overlap(seg, gt)
    if ov.n_seg == 0 and ov.n_gt == 0:
        return 1.0
    return float(0.5 * (_dice_sum(ov, seg_side=True) + _dice_sum(ov, seg_side=False)))


def _dice_sum(ov: _Overlap, seg_side: bool) -> float:
    areas = ov.seg_area if seg_side else ov.gt_area
    if areas.size == 0:
        return 0.0
    total = 0.0
    for i in range(len(areas)):
        if seg_side:
            g = ov.best_gt(i)
            d = 0.0 if g < 0 else 2.0 * ov.table[i, g] / (ov.seg_area[i] + ov.gt_area[g])
        else:
            s = ov.best_seg(i)
            d = 0.0 if s < 0 else 2.0 * ov.table[s, i] / (ov.seg_area[s] + ov.gt_area[i])
        total += areas[i] * d
    return total / areas.sum()


def _points(mask: np.ndarray) -> np.ndarray:
    return np.argwhere(mask).astype(np.float64)


def _boundary(mask: np.ndarray) -> np.ndarray:
    """Pixels of ``mask`` with at least one 4-neighbor outside it."""
    p = np.pad(mask, 1, constant_values=False)
    interior = p[1:-1, 1:-1] & p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    return mask & ~interior


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    # nearest pixel of b from outside b always lies on b's boundary
    outside = a & ~b
    if not outside.any():
        return 0.0
    return kernels.directed_hausdorff(_points(outside), _points(_boundary(b)))


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between boolean pixel sets (pixel units)."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"pixel set shapes differ: {a.shape} vs {b.shape}")
    if not a.any() or not b.any():
        raise ValueError("Hausdorff distance is undefined for an empty pixel set")
    return max(_directed(a, b), _directed(b, a))


def object_hausdorff(seg, gt) -> float:
    """Area-weighted Hausdorff distance with the pairing of :func:`object_dice`.

    Objects without any overlapping partner cost the image diagonal.  With
    one mask empty and the other not, the result is the diagonal; with both
    empty it is 0.
    """
    ov = _Overlap(seg, gt)
    diag = math.hypot(*ov.shape)
    if ov.n_seg == 0 and ov.n_gt == 0:
        return 0.0
    if ov.n_seg == 0 or ov.n_gt == 0:
        return diag
    cache: dict[tuple[int, int], float] = {}

    def h(i, g):
        if (i, g) not in cache:
            cache[(i, g)] = hausdorff(ov.seg_pixels(i), ov.gt_pixels(g))
        return cache[(i, g)]

    seg_sum = 0.0
    for i in range(ov.n_seg):
        g = ov.best_gt(i)
        seg_sum += ov.seg_area[i] * (diag if g < 0 else h(i, g))
    gt_sum = 0.0
    for g in range(ov.n_gt):
        i = ov.best_seg(g)
        gt_sum += ov.gt_area[g] * (diag if i < 0 else h(i, g))
    return float(0.5 * (seg_sum / ov.seg_area.sum() + gt_sum / ov.gt_area.sum()))


def evaluate_masks(seg, gt) -> dict:
    table = match_objects(seg, gt)
    p, r, f1 = f1_score(table)
    return {
        "tp": table.tp,
        "fp": table.fp,
        "fn": table.fn,
        "precision": float(p),
        "recall": float(r),
        "f1": float(f1),
        "object_dice": float(object_dice(seg, gt)),
        "object_hausdorff": float(object_hausdorff(seg, gt)),
    }


@dataclass
class RankRow:
    method: str
    ranks: tuple[float, ...]
    rank_sum: float
    weighted_rank_sum: float


def aggregate_ranks(ranks) -> list[RankRow]:
    """Rank sum and weighted rank sum (3/4 test A + 1/4 test B) from
    per-column ranks, given as ``{method: (six ranks)}`` or pairs."""
    items = list(ranks.items()) if isinstance(ranks, dict) else list(ranks)
    out = []
    for name, rk in items:
        rk = tuple(float(v) for v in rk)
        if len(rk) != 6:
            raise ValueError(f"{name}: expected 6 ranks in order {SCORE_COLUMNS}, got {len(rk)}")
        a = sum(rk[i] for i in _TEST_A)
        b = sum(rk[i] for i in _TEST_B)
        out.append(RankRow(str(name), rk, a + b, 0.75 * a + 0.25 * b))
    return out


def rank_aggregate(scores, ties: str = "average", ranked: bool = False) -> list[RankRow]:
    """Rank methods per column (Hausdorff ascending, the rest descending)
    and aggregate.  ``ties`` is a :func:`scipy.stats.rankdata` method;
    the default gives tied methods their mean rank.

    With ``ranked`` the six columns already hold ranks and are summed as given.
    """
    items = list(scores.items()) if isinstance(scores, dict) else list(scores)
    if not items:
        raise ValueError("need at least one method")
    if ranked:
        return aggregate_ranks(items)
    names = [str(n) for n, _ in items]
    mat = np.array([[float(v) for v in s] for _, s in items], dtype=np.float64)
    if mat.shape[1] != 6:
        raise ValueError(f"expected 6 score columns {SCORE_COLUMNS}, got {mat.shape[1]}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("scores must be finite")
    cols = [rankdata(mat[:, c] if asc else -mat[:, c], method=ties) for c, asc in enumerate(_ASCENDING)]
    ranks = np.column_stack(cols)
    return aggregate_ranks(list(zip(names, ranks)))
