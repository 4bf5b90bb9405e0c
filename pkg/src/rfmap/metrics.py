"""Evaluation suite over binary maps and their boundary point sets.

Per-map scalars: IoU, precision, recall on pixels; Hausdorff and Chamfer
distances in meters over boundary point sets. Boundary sets are the
centers of pixel edges separating building from non-building (or from the
map border): dense sampling keeps Chamfer stable and lets an O(n^2)
brute-force oracle check the accelerated nearest-neighbor path bit for bit.

Degenerate conventions (documented rather than NaN): both maps empty ->
ratios 1.0 and distances 0; exactly one boundary set empty -> distances
fall back to the map diagonal; an empty prediction against a non-empty
truth scores precision 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatchError
from .geometry import Point2
from .grids import BinaryMap, GridSpec, require_same_shape


def iou(a: BinaryMap, b: BinaryMap) -> float:
    require_same_shape(a, b)
    inter = int((a.bits & b.bits).sum())
    union = int((a.bits | b.bits).sum())
    if union == 0:
        return 1.0
    return inter / union


def precision_recall(gt: BinaryMap, pred: BinaryMap) -> tuple[float, float]:
    require_same_shape(gt, pred)
    inter = int((gt.bits & pred.bits).sum())
    n_pred = pred.count()
    n_gt = gt.count()
    precision = 1.0 if n_gt == 0 else 0.0
    if n_pred > 0:
        precision = inter / n_pred
    recall = 1.0 if n_pred == 0 else 0.0
    if n_gt > 0:
        recall = inter / n_gt
    return precision, recall


@dataclass(frozen=True, eq=False)
class BoundaryPointSet:
    """Boundary-edge centers in pixel units, with the grid for meters."""

    points_px: np.ndarray  # (n, 2) float64, columns (x, y)
    grid: GridSpec

    def __post_init__(self):
        pts = np.asarray(self.points_px, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "points_px", pts)

    def __len__(self) -> int:
        return int(self.points_px.shape[0])

    def points_m(self) -> list[Point2]:
        mpp = self.grid.meters_per_px
        return [Point2(float(x) * mpp, float(y) * mpp) for x, y in self.points_px]


def extract_boundary(bmap: BinaryMap, grid: GridSpec) -> BoundaryPointSet:
    """Centers of pixel edges separating 1 from 0 or from the map border."""
    b = bmap.bits
    h, w = b.shape
    padded = np.zeros((h + 2, w + 2), bool)
    padded[1:-1, 1:-1] = b
    pieces = []
    # vertical edges (between horizontally adjacent cells, including border)
    vdiff = padded[1:-1, 1:] != padded[1:-1, :-1]
    rr, cc = np.nonzero(vdiff)
    pieces.append(np.stack([cc.astype(np.float64), rr + 0.5], axis=1))
    # horizontal edges
    hdiff = padded[1:, 1:-1] != padded[:-1, 1:-1]
    rr, cc = np.nonzero(hdiff)
    pieces.append(np.stack([cc + 0.5, rr.astype(np.float64)], axis=1))
    pts = np.concatenate(pieces, axis=0)
    return BoundaryPointSet(points_px=pts, grid=grid)


class BucketIndex:
    """Uniform-grid nearest-neighbor index over a fixed 2D point set.

    Distances are computed with the plain ``dx*dx + dy*dy`` formula, so the
    returned minima are bitwise identical to a brute-force scan using the
    same expression.
    """

    def __init__(self, pts: np.ndarray):
        pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
        if pts.shape[0] == 0:
            raise ValueError("cannot index an empty point set")
        self.pts = pts
        n = pts.shape[0]
        x0, y0 = pts.min(axis=0)
        x1, y1 = pts.max(axis=0)
        span = max(x1 - x0, y1 - y0)
        g = max(1, min(int(math.sqrt(n)), 256))
        self.cell = span / g if span > 0 else 1.0
        self.x0, self.y0 = float(x0), float(y0)
        ix = np.clip(((pts[:, 0] - self.x0) / self.cell).astype(np.int64), 0, g - 1)
        iy = np.clip(((pts[:, 1] - self.y0) / self.cell).astype(np.int64), 0, g - 1)
        self.g = g
        cid = iy * g + ix
        order = np.argsort(cid, kind="stable")
        self.sorted_pts = pts[order]
        counts = np.bincount(cid, minlength=g * g)
        self.starts = np.zeros(g * g + 1, np.int64)
        np.cumsum(counts, out=self.starts[1:])

    def _gather(self, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Flat candidate point indices for each cell id, with repeat map."""
        offs = self.starts[cells]
        cnts = self.starts[cells + 1] - offs
        total = int(cnts.sum())
        if total == 0:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        rep = np.repeat(np.arange(cells.shape[0]), cnts)
        within = np.arange(total) - np.repeat(np.cumsum(cnts) - cnts, cnts)
        return np.repeat(offs, cnts) + within, rep

    def min_sq_dist(self, queries: np.ndarray) -> np.ndarray:
        """Exact squared distance from each query to its nearest point."""
        q = np.asarray(queries, dtype=np.float64).reshape(-1, 2)
        nq = q.shape[0]
        best = np.full(nq, np.inf)
        if nq == 0:
            return best
        g, cell = self.g, self.cell
        qix = np.clip(((q[:, 0] - self.x0) / cell).astype(np.int64), 0, g - 1)
        qiy = np.clip(((q[:, 1] - self.y0) / cell).astype(np.int64), 0, g - 1)
        active = np.arange(nq)
        r = 0
        while active.size:
            # cells on the Chebyshev ring of radius r around each query cell
            if r == 0:
                ring = [(0, 0)]
            else:
                ring = [(dx, -r) for dx in range(-r, r + 1)]
                ring += [(dx, r) for dx in range(-r, r + 1)]
                ring += [(-r, dy) for dy in range(-r + 1, r)]
                ring += [(r, dy) for dy in range(-r + 1, r)]
            for dx, dy in ring:
                cx = qix[active] + dx
                cy = qiy[active] + dy
                ok = (cx >= 0) & (cx < g) & (cy >= 0) & (cy < g)
                if not ok.any():
                    continue
                rows = active[ok]
                flat, rep = self._gather(cy[ok] * g + cx[ok])
                if flat.size == 0:
                    continue
                cand = self.sorted_pts[flat]
                qq = q[rows[rep]]
                ddx = qq[:, 0] - cand[:, 0]
                ddy = qq[:, 1] - cand[:, 1]
                d2 = ddx * ddx + ddy * ddy
                np.minimum.at(best, rows[rep], d2)
            r += 1
            # a point in ring r lies at least (r - 1) * cell away
            lb = max(0.0, (r - 1) * cell)
            active = active[lb * lb <= best[active]]
            if r > 2 * g + 2:
                break
        return best


def _directed_sq_dists(a_px: np.ndarray, b_px: np.ndarray) -> np.ndarray:
    return BucketIndex(b_px).min_sq_dist(a_px)


def hausdorff_points(
    a_px: np.ndarray,
    b_px: np.ndarray,
    mpp: float = 1.0,
    empty_value: float = 0.0,
) -> float:
    """Symmetric Hausdorff distance between raw point arrays, in meters."""
    na, nb = len(a_px), len(b_px)
    if na == 0 and nb == 0:
        return 0.0
    if na == 0 or nb == 0:
        return empty_value
    d_ab = _directed_sq_dists(a_px, b_px)
    d_ba = _directed_sq_dists(b_px, a_px)
    return math.sqrt(max(float(d_ab.max()), float(d_ba.max()))) * mpp


def chamfer_points(
    a_px: np.ndarray,
    b_px: np.ndarray,
    mpp: float = 1.0,
    empty_value: float = 0.0,
) -> float:
    """Mean of the two directed average nearest-point distances, in meters."""
    na, nb = len(a_px), len(b_px)
    if na == 0 and nb == 0:
        return 0.0
    if na == 0 or nb == 0:
        return empty_value
    d_ab = np.sqrt(_directed_sq_dists(a_px, b_px))
    d_ba = np.sqrt(_directed_sq_dists(b_px, a_px))
    return 0.5 * (float(d_ab.mean()) + float(d_ba.mean())) * mpp


def _check_grids(p1: BoundaryPointSet, p2: BoundaryPointSet) -> GridSpec:
    if p1.grid != p2.grid:
        raise DimensionMismatchError("boundary sets come from different grids")
    return p1.grid


def hausdorff(p1: BoundaryPointSet, p2: BoundaryPointSet) -> float:
    grid = _check_grids(p1, p2)
    return hausdorff_points(
        p1.points_px,
        p2.points_px,
        mpp=grid.meters_per_px,
        empty_value=grid.diagonal_m,
    )


def chamfer(p1: BoundaryPointSet, p2: BoundaryPointSet) -> float:
    grid = _check_grids(p1, p2)
    return chamfer_points(
        p1.points_px,
        p2.points_px,
        mpp=grid.meters_per_px,
        empty_value=grid.diagonal_m,
    )


# --- reports ---------------------------------------------------------------


@dataclass(frozen=True)
class MapScores:
    iou: float
    precision: float
    recall: float
    hausdorff_m: float
    chamfer_m: float

    def to_dict(self) -> dict:
        return {
            "iou": self.iou,
            "precision": self.precision,
            "recall": self.recall,
            "hausdorff_m": self.hausdorff_m,
            "chamfer_m": self.chamfer_m,
        }


@dataclass(frozen=True)
class EvalReport:
    per_map: dict[str, MapScores]
    mean: MapScores
    n_maps: int

    def to_dict(self) -> dict:
        return {
            "n_maps": self.n_maps,
            "mean": self.mean.to_dict(),
            "per_map": {k: v.to_dict() for k, v in self.per_map.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def to_table(self) -> str:
        cols = ["Recall", "Precision", "IoU", "Hausdorff (m)", "Chamfer (m)"]
        name_w = max([len("mean")] + [len(k) for k in self.per_map]) + 2
        header = "map".ljust(name_w) + "".join(c.rjust(15) for c in cols)
        lines = [header]

        def row(name: str, s: MapScores) -> str:
            vals = [s.recall, s.precision, s.iou, s.hausdorff_m, s.chamfer_m]
            return name.ljust(name_w) + "".join(f"{v:15.4f}" for v in vals)

        for k in sorted(self.per_map):
            lines.append(row(k, self.per_map[k]))
        lines.append(row("mean", self.mean))
        return "\n".join(lines)


def score_map(gt: BinaryMap, pred: BinaryMap, grid: GridSpec) -> MapScores:
    p, r = precision_recall(gt, pred)
    bg = extract_boundary(gt, grid)
    bp = extract_boundary(pred, grid)
    return MapScores(
        iou=iou(gt, pred),
        precision=p,
        recall=r,
        hausdorff_m=hausdorff(bg, bp),
        chamfer_m=chamfer(bg, bp),
    )


def evaluate_maps(
    gt_by_id: Mapping[str, BinaryMap],
    pred_by_id: Mapping[str, BinaryMap],
    side_m: float,
) -> EvalReport:
    """Score every id present in both mappings; ids are processed sorted."""
    ids = sorted(set(gt_by_id) & set(pred_by_id))
    if not ids:
        raise ValueError("no common scene ids between ground truth and predictions")
    per_map: dict[str, MapScores] = {}
    for sid in ids:
        gt, pred = gt_by_id[sid], pred_by_id[sid]
        try:
            require_same_shape(gt, pred)
        except DimensionMismatchError as e:
            raise DimensionMismatchError(f"{sid}: {e}") from e
        grid = GridSpec(gt.w, gt.h, side_m)
        per_map[sid] = score_map(gt, pred, grid)
    n = len(ids)
    mean = MapScores(
        iou=sum(per_map[i].iou for i in ids) / n,
        precision=sum(per_map[i].precision for i in ids) / n,
        recall=sum(per_map[i].recall for i in ids) / n,
        hausdorff_m=sum(per_map[i].hausdorff_m for i in ids) / n,
        chamfer_m=sum(per_map[i].chamfer_m for i in ids) / n,
    )
    return EvalReport(per_map=per_map, mean=mean, n_maps=n)


# --- overlay rendering -----------------------------------------------------

COLOR_TRUE_POSITIVE = (255, 255, 255)
COLOR_FALSE_NEGATIVE = (128, 128, 128)  # missed building pixels
COLOR_FALSE_POSITIVE = (139, 0, 0)  # dark red
COLOR_TRUE_NEGATIVE = (0, 0, 0)
COLOR_BS_CROSS = (255, 165, 0)  # orange
COLOR_UE_CROSS = (0, 0, 255)  # blue
_CROSS_ARM_PX = 2


def render_overlay(
    gt: BinaryMap,
    pred: BinaryMap,
    ues: Sequence[Point2],
    bss: Sequence[Point2],
    grid: GridSpec,
) -> np.ndarray:
    """Confusion overlay as an (h, w, 3) uint8 image with device crosses."""
    require_same_shape(gt, pred)
    h, w = gt.bits.shape
    img = np.zeros((h, w, 3), np.uint8)
    img[gt.bits & pred.bits] = COLOR_TRUE_POSITIVE
    img[gt.bits & ~pred.bits] = COLOR_FALSE_NEGATIVE
    img[~gt.bits & pred.bits] = COLOR_FALSE_POSITIVE

    def cross(p: Point2, color) -> None:
        mpp = grid.meters_per_px
        c = min(w - 1, max(0, int(p.x / mpp)))
        r = min(h - 1, max(0, int(p.y / mpp)))
        for d in range(-_CROSS_ARM_PX, _CROSS_ARM_PX + 1):
            if 0 <= r + d < h:
                img[r + d, c] = color
            if 0 <= c + d < w:
                img[r, c + d] = color

    for p in ues:
        cross(p, COLOR_UE_CROSS)
    for p in bss:
        cross(p, COLOR_BS_CROSS)
    return img
