"""Planar immersed polylines in the disk with holes.

Everything here is exact: vertex coordinates are ints or Fractions and all
predicates are signs of determinants.  Loops are realized from a fixed
template (one U-turn around the hole per letter, joined by horizontal hubs
above the holes) with a seeded choice of lane offsets and heights, so that
independent realizations of the same class differ combinatorially.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import cyclic_canonical, free_reduce
from .surface import FramedClass, SurfaceModel


class GeometryError(ValueError):
    pass


class NonGenericError(GeometryError):
    pass


Point = tuple


@dataclass(frozen=True)
class Polyline:
    points: tuple
    closed: bool = True

    def __post_init__(self):
        pts = tuple((p[0], p[1]) for p in self.points)
        object.__setattr__(self, "points", pts)
        m = len(pts)
        if m < 2:
            raise GeometryError("polyline needs at least two points")
        last = m if self.closed else m - 1
        for i in range(last):
            if pts[i] == pts[(i + 1) % m]:
                raise GeometryError(f"repeated consecutive vertex {pts[i]}")

    def segments(self) -> list[tuple[Point, Point]]:
        pts = self.points
        m = len(pts)
        last = m if self.closed else m - 1
        return [(pts[i], pts[(i + 1) % m]) for i in range(last)]

    def dump(self) -> str:
        """Plain-text vertex list, one ``x y`` pair per line."""
        return "\n".join(f"{float(x)!r} {float(y)!r}" for x, y in self.points) + "\n"


@dataclass(frozen=True)
class IntersectionPoint:
    loc: Point
    seg1: int
    t1: Fraction
    seg2: int
    t2: Fraction
    sign: int  # sign det(tangent of first strand, tangent of second strand)

    @property
    def pos1(self):
        return (self.seg1, self.t1)

    @property
    def pos2(self):
        return (self.seg2, self.t2)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _sgn(v) -> int:
    return (v > 0) - (v < 0)


def _half(d) -> int:
    x, y = d
    return 0 if (y > 0 or (y == 0 and x > 0)) else 1


def _angle_less(a, b) -> bool:
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha < hb
    return _cross(a[0], a[1], b[0], b[1]) > 0


def corner_wrap(d1, d2) -> int:
    """Signed count of passes through the +x direction when turning d1 -> d2 by less than pi."""
    c = _cross(d1[0], d1[1], d2[0], d2[1])
    if c > 0:
        return 1 if _angle_less(d2, d1) else 0
    if c < 0:
        return -1 if _angle_less(d1, d2) else 0
    if d1[0] * d2[0] + d1[1] * d2[1] < 0:
        raise NonGenericError("cusp: polyline reverses direction")
    return 0


def _dir(seg):
    (x0, y0), (x1, y1) = seg
    return (x1 - x0, y1 - y0)


def turning_number(p: Polyline) -> int:
    if not p.closed:
        raise GeometryError("turning number needs a closed polyline")
    segs = p.segments()
    dirs = [_dir(s) for s in segs]
    return sum(corner_wrap(dirs[i - 1], dirs[i]) for i in range(len(dirs)))


def _bbox_candidates(segs_a, segs_b, same: bool):
    a = np.array([[float(min(p[0], q[0])), float(max(p[0], q[0])), float(min(p[1], q[1])), float(max(p[1], q[1]))]
                  for p, q in segs_a])
    b = a if same else np.array(
        [[float(min(p[0], q[0])), float(max(p[0], q[0])), float(min(p[1], q[1])), float(max(p[1], q[1]))]
         for p, q in segs_b])
    tol = 1e-9 * (1.0 + max(np.abs(a).max(), np.abs(b).max()))
    hit = (
        (a[:, None, 0] <= b[None, :, 1] + tol)
        & (b[None, :, 0] <= a[:, None, 1] + tol)
        & (a[:, None, 2] <= b[None, :, 3] + tol)
        & (b[None, :, 2] <= a[:, None, 3] + tol)
    )
    if same:
        hit = np.triu(hit, k=1)
    return zip(*np.nonzero(hit))


def _segment_hit(s1, s2):
    """Exact transverse crossing of two segments: (t1, t2, point) or None.

    Touching at endpoints or collinear overlap raises NonGenericError.
    """
    (px, py), (qx, qy) = s1
    (rx, ry), (sx, sy) = s2
    dx1, dy1 = qx - px, qy - py
    dx2, dy2 = sx - rx, sy - ry
    den = _cross(dx1, dy1, dx2, dy2)
    ex, ey = rx - px, ry - py
    if den == 0:
        if _cross(ex, ey, dx1, dy1) != 0:
            return None
        # collinear: any shared point is degenerate
        L = dx1 * dx1 + dy1 * dy1
        u0 = ex * dx1 + ey * dy1
        u1 = (sx - px) * dx1 + (sy - py) * dy1
        if max(u0, u1) >= 0 and min(u0, u1) <= L:
            raise NonGenericError(f"collinear overlap between {s1} and {s2}")
        return None
    tn = _cross(ex, ey, dx2, dy2)
    un = _cross(ex, ey, dx1, dy1)
    if den < 0:
        den, tn, un = -den, -tn, -un
    if tn < 0 or tn > den or un < 0 or un > den:
        return None
    if tn == 0 or tn == den or un == 0 or un == den:
        raise NonGenericError(f"intersection at a vertex between {s1} and {s2}")
    t = Fraction(tn, den)
    u = Fraction(un, den)
    loc = (px + t * dx1, py + t * dy1)
    if loc[0].denominator == 1:
        loc = (int(loc[0]), loc[1])
    if loc[1].denominator == 1:
        loc = (loc[0], int(loc[1]))
    return t, u, loc, _sgn(_cross(dx1, dy1, dx2, dy2))


def self_intersections(p: Polyline) -> list[IntersectionPoint]:
    segs = p.segments()
    m = len(segs)
    out = []
    for i, j in _bbox_candidates(segs, segs, True):
        i, j = int(i), int(j)
        adjacent = j == i + 1 or (p.closed and i == 0 and j == m - 1)
        if adjacent:
            # adjacent segments share exactly one vertex unless they fold back
            da, db = _dir(segs[i]), _dir(segs[j])
            if _cross(*da, *db) == 0 and da[0] * db[0] + da[1] * db[1] < 0:
                raise NonGenericError("cusp: adjacent segments fold back")
            continue
        hit = _segment_hit(segs[i], segs[j])
        if hit:
            t, u, loc, s = hit
            out.append(IntersectionPoint(loc, i, t, j, u, s))
    out.sort(key=lambda q: (q.pos1, q.pos2))
    return out


def pair_intersections(a: Polyline, b: Polyline) -> list[IntersectionPoint]:
    sa, sb = a.segments(), b.segments()
    out = []
    for i, j in _bbox_candidates(sa, sb, False):
        hit = _segment_hit(sa[int(i)], sb[int(j)])
        if hit:
            t, u, loc, s = hit
            out.append(IntersectionPoint(loc, int(i), t, int(j), u, s))
    out.sort(key=lambda q: (q.pos1, q.pos2))
    return out


def gate_events(p: Polyline, surface: SurfaceModel) -> list[tuple]:
    """Signed gate crossings ``((seg, t), letter)`` in order along the curve."""
    gates = surface.gates
    out = []
    for k, ((x0, y0), (x1, y1)) in enumerate(p.segments()):
        lo, hi = (x0, x1) if x0 <= x1 else (x1, x0)
        for gi in range(bisect.bisect_left(gates, lo), bisect.bisect_right(gates, hi)):
            g = gates[gi]
            if x0 == x1:
                if min(y0, y1) < 0 or max(y0, y1) < 0:
                    raise NonGenericError(f"segment runs along gate {gi + 1}")
                continue
            t = Fraction(g - x0, x1 - x0)
            y = y0 + t * (y1 - y0)
            if y == 0:
                raise NonGenericError(f"segment passes through hole {gi + 1}")
            if y > 0:
                continue
            if t == 0 or t == 1:
                raise NonGenericError(f"vertex on gate {gi + 1}")
            out.append(((k, t), (gi + 1) if x1 > x0 else -(gi + 1)))
    out.sort(key=lambda e: e[0])
    return out


def trace_word(p: Polyline, surface: SurfaceModel) -> tuple:
    letters = free_reduce(l for _, l in gate_events(p, surface))
    return cyclic_canonical(letters) if p.closed else letters


def class_of(p: Polyline, surface: SurfaceModel) -> FramedClass:
    return FramedClass(trace_word(p, surface), turning_number(p))


# ---------------------------------------------------------------------------
# cut-and-paste on explicit polylines


def _loop_from(p: Polyline, seg: int, loc: Point) -> list:
    """Vertices of a closed polyline traversed once starting (and ending) at ``loc`` on ``seg``."""
    pts = p.points
    m = len(pts)
    return [loc] + [pts[(seg + 1 + k) % m] for k in range(m)]


def split_self(a: Polyline, q: IntersectionPoint) -> tuple[Polyline, Polyline]:
    """The two sub-loops at a self-crossing: first passage to second, then the rest."""
    if not a.closed:
        raise GeometryError("split needs a closed polyline")
    i, j = q.seg1, q.seg2
    segs = a.segments()
    hit = _segment_hit(segs[i], segs[j]) if 0 <= i < len(segs) and 0 <= j < len(segs) else None
    if not hit or hit[2] != q.loc:
        raise GeometryError("not a self-intersection of this polyline")
    pts = a.points
    m = len(pts)
    first = [q.loc] + [pts[k] for k in range(i + 1, j + 1)]
    second = [q.loc] + [pts[k % m] for k in range(j + 1, m + i + 1)]
    return Polyline(first), Polyline(second)


def smooth_pair(a: Polyline, b: Polyline, q: IntersectionPoint) -> Polyline:
    """Oriented smoothing at an a-b crossing: all of a from q, then all of b from q."""
    sa, sb = a.segments(), b.segments()
    if not (0 <= q.seg1 < len(sa) and 0 <= q.seg2 < len(sb)):
        raise GeometryError("not an a-b intersection")
    hit = _segment_hit(sa[q.seg1], sb[q.seg2])
    if not hit or hit[2] != q.loc:
        raise GeometryError("not an a-b intersection")
    va = _loop_from(a, q.seg1, q.loc)
    vb = _loop_from(b, q.seg2, q.loc)
    return Polyline(va + vb)


def insert_at(based: Polyline, loop: Polyline, q: IntersectionPoint) -> Polyline:
    """Based path rerouted through ``loop`` at q (q.seg1 on loop, q.seg2 on the path)."""
    pts = based.points
    j = q.seg2
    return Polyline(list(pts[: j + 1]) + _loop_from(loop, q.seg1, q.loc) + list(pts[j + 1:]), closed=False)


# ---------------------------------------------------------------------------
# prefix data for fast class extraction


class Trace:
    """Corner-wrap prefix sums and gate events of a polyline, for O(word) cut-and-paste."""

    def __init__(self, p: Polyline, surface: SurfaceModel):
        self.poly = p
        segs = p.segments()
        self.dirs = [_dir(s) for s in segs]
        m = len(segs)
        # prefix[v] = sum of corner wraps at vertices 1..v (vertex v joins seg v-1 and seg v)
        self.prefix = [0] * (m + 1)
        for v in range(1, m):
            self.prefix[v] = self.prefix[v - 1] + corner_wrap(self.dirs[v - 1], self.dirs[v])
        if p.closed:
            self.total = self.prefix[m - 1] + corner_wrap(self.dirs[m - 1], self.dirs[0])
        else:
            self.total = None
        events = gate_events(p, surface)
        self.positions = [e[0] for e in events]
        self.letters = [e[1] for e in events]

    def letters_between(self, lo, hi) -> list:
        """Letters strictly between positions lo < hi."""
        a = bisect.bisect_right(self.positions, lo)
        b = bisect.bisect_left(self.positions, hi)
        return self.letters[a:b]

    def letters_cyclic_from(self, pos) -> list:
        a = bisect.bisect_right(self.positions, pos)
        return self.letters[a:] + self.letters[:a]

    def wraps_between(self, i: int, j: int) -> int:
        """Corner wraps at vertices i+1..j."""
        return self.prefix[j] - self.prefix[i]


# ---------------------------------------------------------------------------
# realizations

UNIT = 100_000  # lane offsets and heights are drawn in multiples of this scale
LANE_LO, LANE_HI = UNIT, 45 * UNIT // 10
HUB_LO, HUB_HI = UNIT, 9 * UNIT
TOP_HUB = 12 * UNIT
BASE_X = -30 * UNIT
BASE_TOP = 30 * UNIT


def _kink_points(start: Point, forward: tuple, u: int, positive: bool, along: int) -> list:
    fx, fy = forward
    lx, ly = -fy, fx
    s = 1 if positive else -1
    pattern = [(4, 0), (4, 2), (2, 2), (2, -1), (6, -1), (6, 0)]
    return [
        (start[0] + (along + a * u) * fx + s * b * u * lx, start[1] + (along + a * u) * fy + s * b * u * ly)
        for a, b in pattern
    ]


def _with_kinks(points: list, seg: int, k: int, rng: random.Random, closed: bool) -> list:
    """Insert |k| kinks (sign of k) into axis-parallel segment ``seg``."""
    if k == 0:
        return points
    m = len(points)
    p0, p1 = points[seg], points[(seg + 1) % m]
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    if dx and dy:
        raise GeometryError("kinks only go on axis-parallel segments")
    length = abs(dx) + abs(dy)
    forward = (_sgn(dx), _sgn(dy))
    count = abs(k)
    u = min(UNIT // 10, length // (16 * (count + 1)))
    if u < 2:
        raise NonGenericError("segment too short for kinks")
    u += rng.randrange(max(1, u // 7))
    offset = length // 4 + rng.randrange(max(1, length // 8))
    extra = []
    for q in range(count):
        extra += _kink_points(p0, forward, u, k > 0, offset + q * 8 * u)
    return points[: seg + 1] + extra + points[seg + 1:]


def _letter_coords(word: Sequence[int], surface: SurfaceModel, rng: random.Random):
    coords = []
    for a in word:
        g = surface.hole(abs(a))[0]
        xl = g - rng.randrange(LANE_LO, LANE_HI)
        xr = g + rng.randrange(LANE_LO, LANE_HI)
        yb = -rng.randrange(LANE_LO, 2 * LANE_HI)
        entry, exit_ = (xl, xr) if a > 0 else (xr, xl)
        coords.append((entry, exit_, yb))
    return coords


def _template_loop(word: Sequence[int], surface: SurfaceModel, rng: random.Random) -> tuple[list, int]:
    """Unkinked closed template and the index of its kink segment."""
    if not word:
        x0 = -rng.randrange(2 * UNIT, 5 * UNIT)
        x1 = x0 + rng.randrange(UNIT, 2 * UNIT)
        y0 = rng.randrange(HUB_LO, HUB_HI // 2)
        y1 = y0 + rng.randrange(UNIT, 2 * UNIT)
        return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)], 2
    m = len(word)
    coords = _letter_coords(word, surface, rng)
    heights = [rng.randrange(HUB_LO, HUB_HI) for _ in range(m - 1)] + [TOP_HUB + rng.randrange(UNIT)]
    pts = []
    for j, (entry, exit_, yb) in enumerate(coords):
        top_in = heights[j - 1]
        pts += [(entry, top_in), (entry, yb), (exit_, yb), (exit_, heights[j])]
    return pts, len(pts) - 1


def _salted_rng(salt, *key) -> random.Random:
    return random.Random(repr((salt,) + key))


def realize(c: FramedClass, surface: SurfaceModel, salt=0, retries: int = 25) -> Polyline:
    """A generic immersed representative of the framed class.

    The cyclic word is started at a salt-chosen letter, the template's lanes
    and hub heights are drawn from the salt, and rot0 - taut kinks are added
    on the top hub.
    """
    word = c.word
    if any(abs(a) > surface.n for a in word):
        raise GeometryError(f"word {word} uses a generator beyond {surface.n}")
    last = None
    for attempt in range(retries):
        rng = _salted_rng(salt, attempt, word, c.rot0, surface.n)
        start = rng.randrange(len(word)) if word else 0
        rotated = word[start:] + word[:start]
        pts, kseg = _template_loop(rotated, surface, rng)
        try:
            base = Polyline(pts)
            k = c.rot0 - turning_number(base)
            poly = Polyline(_with_kinks(pts, kseg, k, rng, True))
            if turning_number(poly) != c.rot0:
                raise GeometryError(f"kink insertion failed for {c}")
            self_intersections(poly)
            gate_events(poly, surface)
            return poly
        except NonGenericError as e:
            last = e
    raise GeometryError(f"could not place {c} in generic position: {last}")


@lru_cache(maxsize=None)
def taut_rot(word: tuple, n: int) -> int:
    """Turning number of the unkinked template for a cyclic word."""
    word = cyclic_canonical(word)
    pts, _ = _template_loop(word, SurfaceModel(n), random.Random(0))
    return turning_number(Polyline(pts))


def based_rotation(p: Polyline) -> int:
    """Rotation of a based path: turning of the path capped above the basepoint, minus 1."""
    if p.closed:
        raise GeometryError("based rotation needs an open path")
    (xs, ys), (xe, ye) = p.points[0], p.points[-1]
    cap_y = max(ys, ye) + UNIT
    capped = list(p.points) + [(xe, cap_y), (xs, cap_y)]
    return turning_number(Polyline(capped)) - 1


def realize_based(word: Sequence[int], rot: int | None, surface: SurfaceModel, salt=0, retries: int = 25) -> Polyline:
    """Immersed path from the outer-boundary basepoint (heading down) back to it (heading up).

    With ``rot=None`` the unkinked template is returned.
    """
    word = free_reduce(word)
    last = None
    for attempt in range(retries):
        rng = _salted_rng(salt, "based", attempt, word, rot, surface.n)
        m = len(word)
        coords = _letter_coords(word, surface, rng)
        heights = [rng.randrange(HUB_LO, HUB_HI) for _ in range(m + 1)]
        x1 = BASE_X + rng.randrange(UNIT // 10, UNIT)
        pts = [(BASE_X, BASE_TOP), (BASE_X, heights[0])]
        for j, (entry, exit_, yb) in enumerate(coords):
            pts += [(entry, heights[j]), (entry, yb), (exit_, yb), (exit_, heights[j + 1])]
        pts += [(x1, heights[m]), (x1, BASE_TOP)]
        try:
            poly = Polyline(pts, closed=False)
            if rot is not None:
                k = rot - based_rotation(poly)
                poly = Polyline(_with_kinks(list(pts), 0, k, rng, False), closed=False)
            self_intersections(poly)
            gate_events(poly, surface)
            return poly
        except NonGenericError as e:
            last = e
    raise GeometryError(f"could not place based word {word} in generic position: {last}")


def random_generic_loop(rng: random.Random, surface: SurfaceModel, vertices: int = 8, retries: int = 50) -> Polyline:
    """A random closed polygon with rational vertices, in generic position."""
    span = (surface.n + 1) * surface.spacing
    for _ in range(retries):
        pts = [
            (Fraction(rng.randrange(0, span * 8), 8), Fraction(rng.randrange(-span * 4, span * 4), 8))
            for _ in range(vertices)
        ]
        try:
            p = Polyline(pts)
            turning_number(p)
            self_intersections(p)
            gate_events(p, surface)
            for h in range(1, surface.n + 1):
                _check_hole(p, surface.hole(h))
            return p
        except (NonGenericError, GeometryError):
            continue
    raise GeometryError("could not draw a generic random loop")


def _check_hole(p: Polyline, hole: Point) -> None:
    hx, hy = hole
    for (x0, y0), (x1, y1) in p.segments():
        if _cross(x1 - x0, y1 - y0, hx - x0, hy - y0) == 0 and min(x0, x1) <= hx <= max(x0, x1) and min(y0, y1) <= hy <= max(y0, y1):
            raise NonGenericError("polyline passes through a hole")
