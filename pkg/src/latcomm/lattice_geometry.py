"""Exact 2-D lattice geometry for upper-triangular bases.

The lattice is spanned by the columns of ``[[1, rho*cos(theta)],
[0, rho*sin(theta)]]``.  The module provides Babai (nearest-plane) rounding,
exact closest-point search, the Voronoi cell of the origin via half-plane
clipping, and the seven-rectangle refinement of the Babai cell together with
the two-round message statistics it induces.

Geometry of the refinement, writing c = rho*cos(theta), h = rho*sin(theta):
the Babai cell of the origin is [-1/2, 1/2] x [-h/2, h/2], and for
0 < c < 1 and rho > cos(theta) the Voronoi boundary enters it as four
straight segments, one per corner.  The corner neighbors are the lattice
points (c, h), (c-1, h) and their negatives; the segments meet the vertical
cell edges at height y_c = (rho^2 - c) / (2h) and the horizontal edges at
abscissae c/2 and (1-c)/2 (up to sign).  Column cuts at +-min(c, 1-c)/2 and
row cuts at +-y_c then tile the cell into seven rectangles: the middle
column, plus three rows in each outer column, of which exactly the two
corner-adjacent rows are crossed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .partition_core import Rect, entropy_bits

__all__ = [
    "Lattice2D",
    "Point2",
    "Segment",
    "ConvexPolygon",
    "SubdivisionCell",
    "BabaiSubdivision",
    "RoundRates",
    "UnsupportedGeometryError",
    "generator_matrix",
    "babai_cell",
    "nearest_plane_point",
    "voronoi_cell",
    "nearest_lattice_point",
    "babai_subdivision",
    "round_rates",
    "crossed_cell_mass",
    "simulate_round_count",
    "subdivision_to_json",
]

_GEOM_TOL = 1e-12
_AREA_TOL = 1e-9


class UnsupportedGeometryError(ValueError):
    """Voronoi/Babai configuration outside the supported corner-cut topology."""


class Point2(NamedTuple):
    x1: float
    x2: float


class Segment(NamedTuple):
    a: Point2
    b: Point2


@dataclass(frozen=True)
class Lattice2D:
    """Lattice parameters: basis-length ratio rho > 0, angle 0 < theta <= pi/2."""

    rho: float
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and self.rho > 0.0):
            raise ValueError(f"rho must be positive, got {self.rho!r}")
        if not (0.0 < self.theta <= math.pi / 2.0):
            raise ValueError(f"theta must lie in (0, pi/2], got {self.theta!r}")
        if math.sin(self.theta) <= 0.0:
            raise ValueError("degenerate lattice: sin(theta) <= 0")

    @property
    def c(self) -> float:
        """Horizontal component rho*cos(theta) of the second basis vector."""
        return self.rho * math.cos(self.theta)

    @property
    def h(self) -> float:
        """Vertical component rho*sin(theta); equals det(V)."""
        return self.rho * math.sin(self.theta)

    def point(self, n1: int, n2: int) -> Point2:
        return Point2(n1 + n2 * self.c, n2 * self.h)


def generator_matrix(lat: Lattice2D) -> np.ndarray:
    """Upper-triangular generator with columns (1,0) and (rho cos, rho sin)."""
    return np.array([[1.0, lat.c], [0.0, lat.h]])


def babai_cell(lat: Lattice2D) -> Rect:
    """Nearest-plane cell of the origin: [-1/2, 1/2] x [-h/2, h/2]."""
    half_h = lat.h / 2.0
    return Rect(-0.5, 0.5, -half_h, half_h)


def nearest_plane_point(
    lat: Lattice2D, x: Point2 | tuple[float, float]
) -> tuple[tuple[int, int], Point2]:
    """Babai rounding: second coordinate first, then the first.

    Ties on cell faces break toward the even integer (round-half-to-even).
    Returns the integer basis coefficients and the lattice point itself.
    """
    x1, x2 = x
    b2 = round(x2 / lat.h)
    b1 = round(x1 - b2 * lat.c)
    return (b1, b2), lat.point(b1, b2)


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with vertices in counterclockwise order."""

    vertices: tuple[Point2, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "vertices", tuple(Point2(float(a), float(b)) for a, b in self.vertices)
        )
        if len(self.vertices) < 3:
            raise ValueError("polygon needs at least three vertices")

    def area(self) -> float:
        verts = self.vertices
        total = 0.0
        for (ax, ay), (bx, by) in zip(verts, verts[1:] + verts[:1]):
            total += ax * by - bx * ay
        return 0.5 * total

    def contains(self, p: Point2 | tuple[float, float], tol: float = 1e-9) -> bool:
        px, py = p
        verts = self.vertices
        for (ax, ay), (bx, by) in zip(verts, verts[1:] + verts[:1]):
            if (bx - ax) * (py - ay) - (by - ay) * (px - ax) < -tol:
                return False
        return True

    def is_centrally_symmetric(self, tol: float = 1e-9) -> bool:
        n = len(self.vertices)
        if n % 2:
            return False
        half = n // 2
        return all(
            abs(self.vertices[i].x1 + self.vertices[i + half].x1) <= tol
            and abs(self.vertices[i].x2 + self.vertices[i + half].x2) <= tol
            for i in range(half)
        )


def _clip_halfplane(
    pts: list[tuple[float, float]], a: float, b: float, rhs: float, eps: float
) -> list[tuple[float, float]]:
    # Keep the side a*x + b*y <= rhs (Sutherland-Hodgman step).
    out: list[tuple[float, float]] = []
    n = len(pts)
    for i in range(n):
        px, py = pts[i]
        qx, qy = pts[(i + 1) % n]
        dp = a * px + b * py - rhs
        dq = a * qx + b * qy - rhs
        if dp <= eps:
            out.append((px, py))
        if (dp < -eps and dq > eps) or (dp > eps and dq < -eps):
            t = dp / (dp - dq)
            out.append((px + t * (qx - px), py + t * (qy - py)))
    return out


def voronoi_cell(lat: Lattice2D) -> ConvexPolygon:
    """Voronoi cell of the origin as a half-plane intersection.

    Clips against the bisectors of every nonzero lattice point with basis
    coefficients in [-2, 2]^2, which covers the relevant vectors of any
    basis satisfying rho >= cos(theta).  The result is validated against the
    exact cell area det(V) = rho*sin(theta) and fails loudly otherwise.
    """
    if math.sin(lat.theta) <= 0.0:
        raise ValueError("degenerate lattice: sin(theta) <= 0")
    bound = 1.0 + lat.rho + lat.h
    pts = [(-bound, -bound), (bound, -bound), (bound, bound), (-bound, bound)]
    for c1 in range(-2, 3):
        for c2 in range(-2, 3):
            if c1 == 0 and c2 == 0:
                continue
            lx, ly = lat.point(c1, c2)
            norm2 = lx * lx + ly * ly
            eps = _GEOM_TOL * (1.0 + norm2)
            pts = _clip_halfplane(pts, lx, ly, norm2 / 2.0, eps)
    pts = _dedupe_ring(pts, tol=1e-9 * (1.0 + lat.rho))
    poly = ConvexPolygon(tuple(Point2(*p) for p in _canonical_ring(pts)))
    if abs(poly.area() - lat.h) > _AREA_TOL:
        raise UnsupportedGeometryError(
            "half-plane intersection over coefficients [-2,2]^2 does not close "
            f"the Voronoi cell for rho={lat.rho}, theta={lat.theta}"
        )
    return poly


def _dedupe_ring(pts: list[tuple[float, float]], tol: float) -> list[tuple[float, float]]:
    uniq: list[tuple[float, float]] = []
    for p in pts:
        if not uniq or (abs(p[0] - uniq[-1][0]) > tol or abs(p[1] - uniq[-1][1]) > tol):
            uniq.append(p)
    if len(uniq) > 1 and abs(uniq[0][0] - uniq[-1][0]) <= tol and abs(uniq[0][1] - uniq[-1][1]) <= tol:
        uniq.pop()
    # Drop collinear middle vertices left over from touching constraints.
    out: list[tuple[float, float]] = []
    n = len(uniq)
    for i in range(n):
        ax, ay = uniq[i - 1]
        bx, by = uniq[i]
        cx, cy = uniq[(i + 1) % n]
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if abs(cross) > tol * tol:
            out.append((bx, by))
    return out


def _canonical_ring(pts: list[tuple[float, float]]) -> list[tuple[float, float]]:
    # Counterclockwise, starting from the lexicographically smallest vertex.
    area2 = 0.0
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        area2 += ax * by - bx * ay
    if area2 < 0.0:
        pts = pts[::-1]
    start = min(range(len(pts)), key=lambda i: pts[i])
    return pts[start:] + pts[:start]


def nearest_lattice_point(lat: Lattice2D, x: Point2 | tuple[float, float]) -> Point2:
    """Exact closest lattice point via the Babai point plus a 3x3 candidate scan.

    The scan covers all Voronoi-relevant neighbors whenever
    rho >= cos(theta).  Distance ties break toward the lexicographically
    smallest coefficient pair.
    """
    x1, x2 = x
    (b1, b2), _ = nearest_plane_point(lat, (x1, x2))
    best: Optional[tuple[float, int, int]] = None
    best_pt = None
    for d2 in (-1, 0, 1):
        for d1 in (-1, 0, 1):
            n1, n2 = b1 + d1, b2 + d2
            px = n1 + n2 * lat.c
            py = n2 * lat.h
            key = ((x1 - px) ** 2 + (x2 - py) ** 2, n1, n2)
            if best is None or key < best:
                best = key
                best_pt = Point2(px, py)
    assert best_pt is not None
    return best_pt


@dataclass(frozen=True)
class SubdivisionCell:
    rect: Rect
    error_free: bool
    crossing_segment: Optional[Segment] = None
    neighbor: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        if self.error_free and self.crossing_segment is not None:
            raise ValueError("error-free cell cannot carry a crossing segment")
        if not self.error_free and self.crossing_segment is None:
            raise ValueError("crossed cell needs its crossing segment")


@dataclass(frozen=True)
class BabaiSubdivision:
    """Rectangular refinement of the Babai cell against the Voronoi boundary."""

    lattice: Lattice2D
    babai_cell: Rect
    cells: tuple[SubdivisionCell, ...]

    @property
    def degenerate(self) -> bool:
        return len(self.cells) == 1


def babai_subdivision(lat: Lattice2D) -> BabaiSubdivision:
    """Seven-rectangle refinement of the Babai cell (degenerate: one cell).

    For theta = pi/2 the Voronoi and Babai cells coincide and a single
    error-free cell is returned.  Outside the supported corner-cut topology
    (requires cos(theta) < rho and rho*cos(theta) < 1) the construction
    raises :class:`UnsupportedGeometryError` rather than guessing.
    """
    c, h = lat.c, lat.h
    cell = babai_cell(lat)
    if c <= _GEOM_TOL * lat.rho:
        return BabaiSubdivision(lat, cell, (SubdivisionCell(cell, True),))
    if c >= 1.0 - _GEOM_TOL:
        raise UnsupportedGeometryError(
            f"rho*cos(theta) = {c} >= 1: Babai cell is not refined by corner cuts"
        )
    if lat.rho - math.cos(lat.theta) <= _GEOM_TOL * max(1.0, lat.rho):
        raise UnsupportedGeometryError(
            f"rho = {lat.rho} <= cos(theta): basis too skewed for the corner-cut topology"
        )

    m = 0.5 * min(c, 1.0 - c)
    y_c = (lat.rho * lat.rho - c) / (2.0 * h)
    top = h / 2.0

    seg_ur = Segment(Point2(c / 2.0, top), Point2(0.5, y_c))
    seg_ul = Segment(Point2(-0.5, y_c), Point2(-(1.0 - c) / 2.0, top))
    seg_ll = Segment(Point2(-c / 2.0, -top), Point2(-0.5, -y_c))
    seg_lr = Segment(Point2(0.5, -y_c), Point2((1.0 - c) / 2.0, -top))

    cells = (
        SubdivisionCell(Rect(-m, m, -top, top), True),
        SubdivisionCell(Rect(-0.5, -m, y_c, top), False, seg_ul, (-1, 1)),
        SubdivisionCell(Rect(-0.5, -m, -y_c, y_c), True),
        SubdivisionCell(Rect(-0.5, -m, -top, -y_c), False, seg_ll, (0, -1)),
        SubdivisionCell(Rect(m, 0.5, y_c, top), False, seg_ur, (0, 1)),
        SubdivisionCell(Rect(m, 0.5, -y_c, y_c), True),
        SubdivisionCell(Rect(m, 0.5, -top, -y_c), False, seg_lr, (1, -1)),
    )
    return BabaiSubdivision(lat, cell, cells)


@dataclass(frozen=True)
class RoundRates:
    """Message statistics of the two-round refinement.

    Q is the round-1 column distribution (left, middle, right) with Q0 the
    error-free middle column; P is the conditional row distribution within an
    outer column (top, middle, bottom) with P0 the error-free middle row.
    """

    Q: tuple[float, ...]
    P: tuple[float, ...]
    Q0: float
    P0: float
    R_bar: float
    N_bar: float

    def __post_init__(self) -> None:
        for vec in (self.Q, self.P):
            if abs(math.fsum(vec) - 1.0) > 1e-12:
                raise ValueError(f"distribution {vec} does not sum to 1")
            if any(v < 0.0 or v > 1.0 for v in vec):
                raise ValueError(f"distribution {vec} has components outside [0,1]")
        expected_r = entropy_bits(self.Q) + (1.0 - self.Q0) * entropy_bits(self.P) + 4.0 * (
            1.0 - self.P0
        ) * (1.0 - self.Q0)
        expected_n = 1.0 + 2.0 * (1.0 - self.P0) * (1.0 - self.Q0)
        if abs(expected_r - self.R_bar) > 1e-12 or abs(expected_n - self.N_bar) > 1e-12:
            raise ValueError("rate fields inconsistent with (Q, P, Q0, P0)")


def round_rates(sub: BabaiSubdivision) -> RoundRates:
    """Column/row message distributions and the average rate and round count."""
    if sub.degenerate:
        return RoundRates((1.0,), (1.0,), 1.0, 1.0, 0.0, 1.0)
    h = sub.lattice.h
    middle = sub.cells[0].rect
    left_col = sub.cells[1].rect
    q_mid = middle.width  # Babai cell width is 1
    q_outer = left_col.width
    Q = (q_outer, q_mid, q_outer)

    rows = [c.rect for c in sub.cells[1:4]]  # top, middle, bottom of one column
    P = tuple(r.height / h for r in rows)
    Q0 = Q[1]
    P0 = P[1]
    r_bar = entropy_bits(Q) + (1.0 - Q0) * entropy_bits(P) + 4.0 * (1.0 - P0) * (1.0 - Q0)
    n_bar = 1.0 + 2.0 * (1.0 - P0) * (1.0 - Q0)
    return RoundRates(Q, P, Q0, P0, r_bar, n_bar)


def crossed_cell_mass(sub: BabaiSubdivision) -> float:
    """Total probability of the non-error-free cells under the uniform measure."""
    area = sub.babai_cell.area
    return math.fsum(c.rect.area for c in sub.cells if not c.error_free) / area


def simulate_round_count(sub: BabaiSubdivision, samples: int, seed: int) -> float:
    """Monte Carlo mean round count of the two-phase refinement protocol.

    Round 1 locates the subdivision cell.  A crossed cell triggers bit
    exchange on the cell-normalized coordinates, which runs for a further
    Geometric(1/2) number of rounds.  Deterministic for a fixed seed.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    cell = sub.babai_cell
    xs = rng.random(samples) * cell.width + cell.x_lo
    ys = rng.random(samples) * cell.height + cell.y_lo
    rounds = np.ones(samples, dtype=np.int64)
    for sc in sub.cells:
        if sc.error_free:
            continue
        r = sc.rect
        mask = (xs >= r.x_lo) & (xs < r.x_hi) & (ys >= r.y_lo) & (ys < r.y_hi)
        if not mask.any():
            continue
        u1 = (xs[mask] - r.x_lo) / r.width
        u2 = (ys[mask] - r.y_lo) / r.height
        extra = np.zeros(u1.shape, dtype=np.int64)
        active = np.ones(u1.shape, dtype=bool)
        for _ in range(60):  # residual probability 2^-60: negligible
            if not active.any():
                break
            extra[active] += 1
            b1 = u1[active] >= 0.5
            b2 = u2[active] >= 0.5
            u1[active] = np.where(b1, 2.0 * u1[active] - 1.0, 2.0 * u1[active])
            u2[active] = np.where(b2, 2.0 * u2[active] - 1.0, 2.0 * u2[active])
            still = np.zeros(u1.shape, dtype=bool)
            still[active] = b1 == b2
            active = still
        idx = np.flatnonzero(mask)
        rounds[idx] += extra
    return float(rounds.sum()) / samples


def subdivision_to_json(sub: BabaiSubdivision) -> dict:
    """JSON-ready description: babai_cell extents plus per-cell rect/flag/prob."""
    area = sub.babai_cell.area
    return {
        "babai_cell": sub.babai_cell.as_list(),
        "cells": [
            {
                "rect": c.rect.as_list(),
                "error_free": c.error_free,
                "prob": c.rect.area / area,
            }
            for c in sub.cells
        ],
    }
