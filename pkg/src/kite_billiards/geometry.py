"""Kites, unfolding and beams of parallel billiard trajectories.

A kite is a triangle glued to its mirror image along one side.  It is stored
with the main diagonal on the x axis: the alpha vertex at the origin, the beta
vertex at (D, 0), and vertices listed counter-clockwise as
``[alpha vertex, lower apex, beta vertex, upper apex]``.  Side ``i`` runs from
vertex ``i`` to vertex ``i + 1``.

Directions are CircleAngle values in turns, measured in the base kite frame.
The unfolded picture starts with copy 0 equal to the base kite.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .numtheory import CircleAngle

TOL_VERTEX = 1e-12
TOL_ANG = 1e-9
MIN_ANGLE = 1e-9
REORTHO_EVERY = 1024
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Triangle:
    """Angles in radians at vertices 0 and 1; the third is implied."""

    angle_a: float
    angle_b: float

    def __post_init__(self):
        a, b = self.angle_a, self.angle_b
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError("triangle angles must be finite")
        if min(a, b, math.pi - a - b) < MIN_ANGLE:
            raise DomainError(f"degenerate triangle: angles {a!r}, {b!r}, {math.pi - a - b!r}")

    @property
    def angle_c(self) -> float:
        return math.pi - self.angle_a - self.angle_b

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.angle_a, self.angle_b, self.angle_c)

    def area(self) -> float:
        """Area after scaling the side opposite vertex 2 to length 1."""
        a, b, c = self.angles
        return 0.5 * math.sin(a) * math.sin(b) / math.sin(c)


@dataclass(frozen=True, eq=False)
class Kite:
    vertices: np.ndarray
    alpha: float
    beta: float
    apex: float

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.apex, self.beta, self.apex)

    @property
    def main_diagonal(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices[0], self.vertices[2]

    @property
    def diameter(self) -> float:
        v = self.vertices
        return max(float(np.hypot(*(v[i] - v[j]))) for i in range(4) for j in range(i))

    @property
    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    @property
    def perimeter(self) -> float:
        return float(sum(self.side_length(i) for i in range(4)))

    @property
    def min_angle(self) -> float:
        return min(self.angles)

    @property
    def is_convex(self) -> bool:
        return max(self.angles) < math.pi

    def side(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices[i % 4], self.vertices[(i + 1) % 4]

    def side_length(self, i: int) -> float:
        a, b = self.side(i)
        return float(np.hypot(*(b - a)))

    def inward_normal(self, i: int) -> np.ndarray:
        a, b = self.side(i)
        d = (b - a) / self.side_length(i)
        return np.array([-d[1], d[0]])

    def point_on_side(self, i: int, s: float) -> np.ndarray:
        a, b = self.side(i)
        return a + s * (b - a)

    def alpha_turns(self) -> CircleAngle:
        return CircleAngle.from_radians(self.alpha)

    def beta_turns(self) -> CircleAngle:
        return CircleAngle.from_radians(self.beta)

    def to_dict(self) -> dict:
        return {"vertices": [[float(x), float(y)] for x, y in self.vertices],
                "alpha": self.alpha, "beta": self.beta, "apex": self.apex}

    @classmethod
    def from_dict(cls, d: dict) -> "Kite":
        return cls(np.array(d["vertices"], dtype=float), d["alpha"], d["beta"], d["apex"])


def kite_from_triangle(t: Triangle, reflecting_side: int = 2) -> Kite:
    """Glue ``t`` to its mirror image across ``reflecting_side``.

    Side i is opposite vertex i.  The kite angles at the ends of the main
    diagonal are twice the triangle angles there; the smaller one is alpha.
    The result is scaled to diameter 1.
    """
    if reflecting_side not in (0, 1, 2):
        raise DomainError(f"reflecting side must be 0, 1 or 2, got {reflecting_side!r}")
    ang = t.angles
    ends = [i for i in range(3) if i != reflecting_side]
    apex = ang[reflecting_side]
    half_p, half_q = sorted((ang[ends[0]], ang[ends[1]]))
    # law of sines with the diagonal of length 1: |PR| = sin(Q)/sin(R)
    pr = math.sin(half_q) / math.sin(apex)
    rx, ry = pr * math.cos(half_p), pr * math.sin(half_p)
    v = np.array([[0.0, 0.0], [rx, -ry], [1.0, 0.0], [rx, ry]])
    k = Kite(v, 2.0 * half_p, 2.0 * half_q, apex)
    v = v / k.diameter
    k = Kite(v, 2.0 * half_p, 2.0 * half_q, apex)
    if k.min_angle < MIN_ANGLE:
        raise DomainError("degenerate kite")
    return k


# ray casting in plain floats; these loops run millions of times


def _side_table(kite: Kite):
    v = [(float(x), float(y)) for x, y in kite.vertices]
    out = []
    for i in range(4):
        ax, ay = v[i]
        bx, by = v[(i + 1) % 4]
        ex, ey = bx - ax, by - ay
        ln = math.hypot(ex, ey)
        out.append((ax, ay, ex, ey, ln))
    return out


def _cast(sides, px, py, dx, dy, exclude):
    """Nearest side hit by p + t d, t > 0: (t, side, s) or None."""
    best = None
    for i, (ax, ay, ex, ey, _) in enumerate(sides):
        if i == exclude:
            continue
        den = dx * ey - dy * ex
        if den == 0.0:
            continue
        wx, wy = ax - px, ay - py
        t = (wx * ey - wy * ex) / den
        if t <= 1e-13:
            continue
        s = (wx * dy - wy * dx) / den
        if s < -1e-12 or s > 1.0 + 1e-12:
            continue
        if best is None or t < best[0]:
            best = (t, i, s)
    return best


def _reflections(kite: Kite):
    """Mirror maps in each side line, as (r00, r01, r11, b0, b1)."""
    out = []
    for ax, ay, ex, ey, ln in _side_table(kite):
        ux, uy = ex / ln, ey / ln
        r00, r01, r11 = 2 * ux * ux - 1, 2 * ux * uy, 2 * uy * uy - 1
        out.append((r00, r01, r11, ax - (r00 * ax + r01 * ay), ay - (r01 * ax + r11 * ay)))
    return out


def _locate_start(kite: Kite, start, start_side):
    p = np.asarray(start, dtype=float)
    for i in range(4):
        if np.hypot(*(p - kite.vertices[i])) < TOL_VERTEX:
            raise DomainError(f"start point is kite vertex {i}")
    if start_side is None:
        for i in range(4):
            a, b = kite.side(i)
            e = b - a
            w = p - a
            s = float(np.dot(w, e) / np.dot(e, e))
            off = abs(float(e[0] * w[1] - e[1] * w[0])) / kite.side_length(i)
            if 0.0 < s < 1.0 and off < 1e-12:
                start_side = i
                break
    return p, start_side


def _direction_vector(direction) -> tuple[float, float]:
    theta = (direction.value if isinstance(direction, CircleAngle) else float(direction)) * TWO_PI
    return math.cos(theta), math.sin(theta)


def _check_inward(kite, side, d):
    if side is not None and float(np.dot(kite.inward_normal(side), d)) <= 1e-12:
        raise DomainError(f"direction does not point into the kite from side {side}")


@dataclass
class FoldResult:
    """Mirror-law trajectory inside the fixed kite."""

    points: np.ndarray  # reflection points, starting with the start point
    sides: list[int]  # side hit at each reflection
    lengths: np.ndarray  # segment lengths
    directions: np.ndarray  # unit direction leaving each point
    terminal: str  # "max_steps" or "vertex"
    vertex: int | None = None


def fold_trajectory(kite: Kite, start, direction, max_steps: int, *,
                    start_side: int | None = None) -> FoldResult:
    """Reflect a trajectory off the kite sides ``max_steps`` times."""
    p, side = _locate_start(kite, start, start_side)
    dx, dy = _direction_vector(direction)
    _check_inward(kite, side, (dx, dy))
    sides = _side_table(kite)
    px, py = float(p[0]), float(p[1])
    pts, hit_sides, lengths, dirs = [(px, py)], [], [], [(dx, dy)]
    terminal, vertex = "max_steps", None
    for _ in range(max_steps):
        hit = _cast(sides, px, py, dx, dy, side)
        if hit is None:
            raise DomainError("ray left the kite; start must be inside or on a side")
        t, j, s = hit
        ax, ay, ex, ey, ln = sides[j]
        px, py = ax + s * ex, ay + s * ey
        lengths.append(t)
        hit_sides.append(j)
        pts.append((px, py))
        if min(s, 1.0 - s) * ln < TOL_VERTEX:
            terminal, vertex = "vertex", (j + (1 if s > 0.5 else 0)) % 4
            break
        ux, uy = ex / ln, ey / ln
        dot = dx * ux + dy * uy
        dx, dy = 2.0 * dot * ux - dx, 2.0 * dot * uy - dy
        nrm = math.hypot(dx, dy)
        dx, dy = dx / nrm, dy / nrm
        dirs.append((dx, dy))
        side = j
    return FoldResult(np.array(pts), hit_sides, np.array(lengths), np.array(dirs),
                      terminal, vertex)


@dataclass(frozen=True)
class UnfoldingFrame:
    """Rigid motion x -> M x + c taking the base kite onto one unfolded copy."""

    matrix: tuple[float, float, float, float]  # row-major 2x2
    translation: tuple[float, float]
    entry_edge: int | None
    theta: CircleAngle

    @property
    def parity(self) -> int:
        a, b, c, d = self.matrix
        return 1 if a * d - b * c > 0 else -1

    @property
    def rotation(self) -> float:
        """Angle of the image of the main diagonal, radians in (-pi, pi]."""
        return math.atan2(self.matrix[2], self.matrix[0])

    def apply(self, pts) -> np.ndarray:
        m = np.array(self.matrix).reshape(2, 2)
        return np.asarray(pts, dtype=float) @ m.T + np.array(self.translation)


@dataclass
class UnfoldResult:
    crossings: np.ndarray  # global crossing points, starting with the start point
    lengths: np.ndarray  # distance between consecutive crossings
    frames: list[UnfoldingFrame]  # frame of copy k, k = 0..len(lengths)
    sides: list[int]
    terminal: str  # "max_steps", "max_length" or "vertex"
    vertex: int | None = None

    @property
    def thetas(self) -> np.ndarray:
        return np.array([f.theta.value for f in self.frames])


def _orthonormalize(m00, m01, m10, m11):
    n = math.hypot(m00, m10)
    c, s = m00 / n, m10 / n
    par = 1.0 if m00 * m11 - m01 * m10 > 0 else -1.0
    return c, -par * s, s, par * c


def unfold_ray(kite: Kite, start, direction, max_steps: int,
               max_length: float = math.inf, *, start_side: int | None = None,
               keep_frames: bool = True) -> UnfoldResult:
    """Trace a straight ray through successively reflected copies of the kite.

    Each copy's vertices are generated from its frame and the ray is cast
    against them in global coordinates; the next copy is the mirror image of
    the current one in the crossed side.  Coordinates are
    re-centred on the latest crossing so magnitudes stay O(1); the frame's
    linear part is re-orthonormalized every REORTHO_EVERY steps.
    """
    p, side = _locate_start(kite, start, start_side)
    ux, uy = _direction_vector(direction)
    _check_inward(kite, side, (ux, uy))
    base = [(float(x), float(y)) for x, y in kite.vertices]
    refl = _reflections(kite)
    u_angle = math.atan2(uy, ux)

    # frame of the current copy, with translation relative to the current crossing
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    cx, cy = -float(p[0]), -float(p[1])
    ox, oy = float(p[0]), float(p[1])  # global position of the current crossing
    travelled = 0.0

    def frame(entry):
        theta = CircleAngle((u_angle - math.atan2(m10, m00)) / TWO_PI)
        return UnfoldingFrame((m00, m01, m10, m11), (cx + ox, cy + oy), entry, theta)

    frames = [frame(side)]
    crossings, lengths, sides_hit = [(ox, oy)], [], []
    terminal, vertex = "max_steps", None
    lens = [row[4] for row in _side_table(kite)]
    for step in range(max_steps):
        w = [(m00 * x + m01 * y + cx, m10 * x + m11 * y + cy) for x, y in base]
        w.append(w[0])
        # cast from the origin (the current crossing) against the copy's sides
        best = None
        for i in range(4):
            if i == side:
                continue
            ax, ay = w[i]
            ex, ey = w[i + 1][0] - ax, w[i + 1][1] - ay
            den = ux * ey - uy * ex
            if den == 0.0:
                continue
            t = (ax * ey - ay * ex) / den
            if t <= 1e-13:
                continue
            s = (ax * uy - ay * ux) / den
            if s < -1e-12 or s > 1.0 + 1e-12:
                continue
            if best is None or t < best[0]:
                best = (t, i, s, ax, ay, ex, ey)
        if best is None:
            raise DomainError("ray left the kite; start must be inside or on a side")
        t, j, s, ax, ay, ex, ey = best
        if travelled + t > max_length:
            terminal = "max_length"
            break
        ln = lens[j]
        hx, hy = ax + s * ex, ay + s * ey  # crossing, relative to the previous one
        travelled += t
        lengths.append(t)
        sides_hit.append(j)
        ox, oy = ox + hx, oy + hy
        crossings.append((ox, oy))
        if min(s, 1.0 - s) * ln < TOL_VERTEX:
            terminal, vertex = "vertex", (j + (1 if s > 0.5 else 0)) % 4
            break
        # mirror in the crossed side: g' = g o R_j, then shift the origin
        # to the new crossing.  Composing with the fixed base reflections
        # keeps rounding from feeding back through the copy geometry.
        r00, r01, r11, bx, by = refl[j]
        cx, cy = m00 * bx + m01 * by + cx - hx, m10 * bx + m11 * by + cy - hy
        m00, m01, m10, m11 = (m00 * r00 + m01 * r01, m00 * r01 + m01 * r11,
                              m10 * r00 + m11 * r01, m10 * r01 + m11 * r11)
        if (step + 1) % REORTHO_EVERY == 0:
            m00, m01, m10, m11 = _orthonormalize(m00, m01, m10, m11)
        side = j
        if keep_frames:
            frames.append(frame(j))
    if not keep_frames:
        frames.append(frame(side))
    return UnfoldResult(np.array(crossings), np.array(lengths), frames, sides_hit,
                        terminal, vertex)


# beams


@dataclass
class OrbitSegment:
    """Straight unfolded segment whose folded image is a closed trajectory."""

    start: np.ndarray  # on the base side, base kite coordinates
    end: np.ndarray  # global endpoint, image of ``start`` under the copy frame
    side: int
    period_crossings: int

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.end - self.start)))

    @property
    def direction(self) -> CircleAngle:
        d = self.end - self.start
        return CircleAngle(math.atan2(d[1], d[0]) / TWO_PI)

    def to_dict(self) -> dict:
        return {"start": [float(x) for x in self.start], "end": [float(x) for x in self.end],
                "side": self.side, "period_crossings": self.period_crossings}


@dataclass
class Beam:
    """An (eps, T) beam: the strip of width eps around an axis ray.

    Local quantities (axis point and direction, end segment) are expressed in
    the coordinates of the copy the axis currently occupies, which are base
    kite coordinates.  ``matrix``/``translation`` give that copy's frame.
    """

    kite: Kite
    base_side: int
    base_interval: tuple[float, float]  # side parameters of the base segment
    direction: CircleAngle
    eps: float
    T: float = 0.0
    crossings: int = 0
    matrix: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 1.0)
    translation: tuple[float, float] = (0.0, 0.0)
    end_side: int | None = None
    end_interval: tuple[float, float] | None = None
    frames: list[UnfoldingFrame] = field(default_factory=list)

    @property
    def copies(self) -> int:
        return self.crossings + 1


def beam_base(kite: Kite, side: int, center: float, direction, eps: float) -> tuple[float, float]:
    """Side-parameter interval cut from ``side`` by a strip of width eps."""
    if not eps > 0:
        raise DomainError("beam width must be positive")
    dx, dy = _direction_vector(direction)
    a, b = kite.side(side)
    e = (b - a) / kite.side_length(side)
    sin = abs(float(e[0] * dy - e[1] * dx))
    if sin < 1e-12:
        raise DomainError("beam direction is parallel to its base side")
    _check_inward(kite, side, (dx, dy))
    half = 0.5 * eps / sin / kite.side_length(side)
    lo, hi = center - half, center + half
    if lo <= 0.0 or hi >= 1.0:
        raise DomainError(f"base [{lo!r}, {hi!r}] of side {side} contains a kite vertex")
    return lo, hi


def _end_interval(side_row, sx, dx, dy, eps):
    ax, ay, ex, ey, ln = side_row
    sin = abs(ex * dy - ey * dx) / ln
    half = 0.5 * eps / sin / ln
    return sx - half, sx + half


def detect_periodic(b: Beam, tol_ang: float = TOL_ANG) -> OrbitSegment | None:
    """Closed orbit inside the beam, if its end can be glued back onto its base.

    Requires the end segment to lie on the base side, the current copy to be
    a pure translate of the base kite (rotation 0 within ``tol_ang``, even
    parity), and the end segment to overlap the base segment.  The orbit runs
    from a base point y to its translate y + c.
    """
    if b.crossings < 1 or b.end_side is None or b.end_side != b.base_side:
        return None
    m00, m01, m10, m11 = b.matrix
    if m00 * m11 - m01 * m10 <= 0:
        return None
    if abs(math.atan2(m10, m00)) > tol_ang:
        return None
    lo = max(b.base_interval[0], b.end_interval[0])
    hi = min(b.base_interval[1], b.end_interval[1])
    if not hi > lo:
        return None
    y = b.kite.point_on_side(b.base_side, 0.5 * (lo + hi))
    m = np.array(b.matrix).reshape(2, 2)
    end = m @ y + np.array(b.translation)
    d = end - y
    if float(np.dot(d, b.kite.inward_normal(b.base_side))) <= 0:
        return None
    return OrbitSegment(y, end, b.base_side, b.crossings)


@dataclass
class PropagationOutcome:
    kind: str  # "split", "periodic" or "undecided"
    T: float
    beam: Beam
    vertex: tuple[int, int] | None = None  # (copy index, kite vertex)
    vertex_position: np.ndarray | None = None  # global coordinates
    orbit: OrbitSegment | None = None

    @property
    def period(self) -> float | None:
        return None if self.orbit is None else self.orbit.length

    @property
    def kite_count(self) -> int:
        return self.beam.copies


def propagate_beam(kite: Kite, base_side: int, base_center: float, direction, eps: float,
                   max_T: float, *, tol_ang: float = TOL_ANG,
                   keep_frames: bool = False) -> PropagationOutcome:
    """Advance a beam until a vertex enters it, it closes up, or T reaches max_T.

    The axis is folded back into the base kite at every crossing, so all
    geometry is done with O(1) coordinates; the copy frame is tracked as
    g_{k+1} = g_k o R_side.  In each copy, a vertex splits the beam when it lies
    in the open strip between the entry side and the axis's exit side.

    T is the length of the longest parallel segment: the axis length measured
    from the rear end of the (oblique) base segment.
    """
    lo, hi = beam_base(kite, base_side, base_center, direction, eps)
    half = 0.5 * eps
    sides = _side_table(kite)
    verts = [(float(x), float(y)) for x, y in kite.vertices]
    dx, dy = _direction_vector(direction)
    p = kite.point_on_side(base_side, base_center)
    px, py = float(p[0]), float(p[1])
    ax, ay, ex, ey, ln = sides[base_side]
    # rear end of the base, measured along the axis
    back = (hi - lo) * ln * 0.5 * abs(ex * dx + ey * dy) / ln
    refl = _reflections(kite)

    if not isinstance(direction, CircleAngle):
        direction = CircleAngle(direction)
    beam = Beam(kite, base_side, (lo, hi), direction, eps)
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    cx, cy = 0.0, 0.0
    ell = 0.0
    entry = base_side
    copy = 0

    def line_dist(row, ox, oy):
        # distance along (dx, dy) from (ox, oy) to the line of a side
        ax_, ay_, ex_, ey_, _ = row
        den = dx * ey_ - dy * ex_
        if den == 0.0:
            return math.inf
        return ((ax_ - ox) * ey_ - (ay_ - oy) * ex_) / den

    while True:
        hit = _cast(sides, px, py, dx, dy, entry)
        if hit is None:
            raise DomainError("beam axis left the kite")
        t, j, s = hit
        # vertices inside the open strip, between entry and exit sides
        nx, ny = -dy, dx
        best = None
        for vi, (vx, vy) in enumerate(verts):
            rx, ry = vx - px, vy - py
            h = nx * rx + ny * ry
            if abs(h) >= half:
                continue
            lam = dx * rx + dy * ry
            ox, oy = px + h * nx, py + h * ny
            if lam < line_dist(sides[entry], ox, oy) - 1e-12:
                continue
            if lam > line_dist(sides[j], ox, oy) + 1e-12:
                continue
            if best is None or lam < best[0]:
                best = (lam, vi)
        if best is not None and ell + best[0] + back <= max_T:
            lam, vi = best
            vx, vy = verts[vi]
            pos = np.array([m00 * vx + m01 * vy + cx, m10 * vx + m11 * vy + cy])
            beam.T = ell + lam + back
            beam.matrix, beam.translation = (m00, m01, m10, m11), (cx, cy)
            return PropagationOutcome("split", beam.T, beam, (copy, vi), pos)
        if ell + t + back >= max_T:
            beam.T = max_T
            beam.matrix, beam.translation = (m00, m01, m10, m11), (cx, cy)
            return PropagationOutcome("undecided", max_T, beam)
        ell += t
        sx = s
        ax, ay, ex, ey, ln = sides[j]
        end_iv = _end_interval(sides[j], sx, dx, dy, eps)
        px, py = ax + s * ex, ay + s * ey
        # g_{k+1} = g_k o R_j
        r00, r01, r11, bx, by = refl[j]
        cx, cy = m00 * bx + m01 * by + cx, m10 * bx + m11 * by + cy
        m00, m01, m10, m11 = (m00 * r00 + m01 * r01, m00 * r01 + m01 * r11,
                              m10 * r00 + m11 * r01, m10 * r01 + m11 * r11)
        copy += 1
        if copy % REORTHO_EVERY == 0:
            m00, m01, m10, m11 = _orthonormalize(m00, m01, m10, m11)
        # the axis continues in the next copy: fold its direction
        ux, uy = ex / ln, ey / ln
        dot = dx * ux + dy * uy
        dx, dy = 2.0 * dot * ux - dx, 2.0 * dot * uy - dy
        nrm = math.hypot(dx, dy)
        dx, dy = dx / nrm, dy / nrm
        entry = j
        beam.crossings = copy
        beam.T = ell + back
        beam.matrix, beam.translation = (m00, m01, m10, m11), (cx, cy)
        beam.end_side, beam.end_interval = j, end_iv
        if keep_frames:
            theta = CircleAngle(beam.direction.value - math.atan2(m10, m00) / TWO_PI)
            beam.frames.append(UnfoldingFrame((m00, m01, m10, m11), (cx, cy), j, theta))
        orbit = detect_periodic(beam, tol_ang)
        if orbit is not None:
            return PropagationOutcome("periodic", beam.T, beam, orbit=orbit)


# counting copies crossed by a beam


@dataclass(frozen=True)
class IntersectionCount:
    count: int
    bound: float
    C_used: float

    @property
    def holds(self) -> bool:
        return self.count < self.bound


def kite_intersection_count(b: Beam, C: float) -> IntersectionCount:
    """Copies crossed by the beam against the linear bound C*T/eps."""
    return IntersectionCount(b.copies, C * b.T / b.eps, C)


def _chords(kite: Kite, theta: float, offset: float):
    """Pieces of the line {x : <x, n> = offset} inside the kite."""
    d = np.array([math.cos(theta), math.sin(theta)])
    n = np.array([-d[1], d[0]])
    p0 = offset * n
    ts = []
    for i in range(4):
        a, b = kite.side(i)
        e = b - a
        den = d[0] * e[1] - d[1] * e[0]
        if abs(den) < 1e-15:
            continue
        w = a - p0
        t = (w[0] * e[1] - w[1] * e[0]) / den
        s = (w[0] * d[1] - w[1] * d[0]) / den
        if 0.0 <= s <= 1.0:
            ts.append(t)
    ts = sorted(set(round(t, 14) for t in ts))
    out = []
    for t0, t1 in zip(ts, ts[1:]):
        mid = p0 + 0.5 * (t0 + t1) * d
        if _inside(kite, mid):
            out.append((p0 + t0 * d, p0 + t1 * d))
    return out


def _inside(kite: Kite, x) -> bool:
    v = kite.vertices
    inside = False
    for i in range(4):
        a, b = v[i], v[(i + 1) % 4]
        if (a[1] > x[1]) != (b[1] > x[1]):
            xc = a[0] + (x[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x[0] < xc:
                inside = not inside
    return inside


def _seg_point_dist(p, a, b) -> float:
    e = b - a
    t = min(1.0, max(0.0, float(np.dot(p - a, e) / np.dot(e, e))))
    return float(np.hypot(*(p - a - t * e)))


def estimate_C(kite: Kite, samples: int = 2000, seed: int = 0, *, safety: float = 1.1) -> float:
    """Constant C with chord length >= (distance to the nearest vertex) / C.

    Starts from 2 / sin(theta_min / 2) and raises it to the largest ratio
    distance/length seen over random chords, times ``safety``.
    """
    c0 = 2.0 / math.sin(kite.min_angle / 2.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    radius = float(np.max(np.hypot(kite.vertices[:, 0], kite.vertices[:, 1])))
    for _ in range(samples):
        theta = rng.uniform(0.0, math.pi)
        offset = rng.uniform(-radius, radius)
        for a, b in _chords(kite, theta, offset):
            length = float(np.hypot(*(b - a)))
            if length < 1e-12:
                continue
            r = min(_seg_point_dist(v, a, b) for v in kite.vertices)
            worst = max(worst, r / length)
    return safety * max(c0, worst)


# splitting-time bound


@dataclass(frozen=True)
class Theorem2Report:
    eps: float
    C: float
    log10_eps_inner: float
    log10_P: float
    log10_Q: float
    N_at_Q: float | None  # None when the scan budget is exceeded
    log10_bound: float | None
    additive_term: str
    status: str = "ok"  # "ok", "budget-exceeded" or "rational" (N vanished)

    @property
    def budget_exceeded(self) -> bool:
        return self.status == "budget-exceeded"

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "C": self.C,
            "eps_inner": {"log10": self.log10_eps_inner},
            "P": {"log10": self.log10_P}, "Q": {"log10": self.log10_Q},
            "N_at_Q": "budget-exceeded" if self.N_at_Q is None else self.N_at_Q,
            "bound": None if self.log10_bound is None else {"log10": self.log10_bound},
            "additive_term": self.additive_term,
            "status": self.status,
        }


def theorem2_bound(alpha, beta, eps: float, F, C: float, *,
                   budget: int | None = None) -> Theorem2Report:
    """Splitting-time bound Q + C / (eps N_ab(Q)) with Q = ([16/eps] + 1) F(eps').

    ``F`` maps log10 of its argument eps' = (eps/1600)^([16/eps]+1) to log10 of
    the net-function value; see ``net_function_model``.
    """
    from .errors import ModelError
    from .numtheory import DEFAULT_SCAN_BUDGET, N_pair, pair_scan_size

    if not (math.isfinite(eps) and 0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    budget = DEFAULT_SCAN_BUDGET if budget is None else budget
    J = math.floor(16.0 / eps) + 1
    log10_inner = J * (math.log10(eps) - math.log10(1600.0))
    try:
        log10_P = float(F(log10_inner))
    except Exception as exc:
        raise ModelError(f"net-function model failed at log10 eps' = {log10_inner!r}: {exc}") from exc
    log10_Q = math.log10(J) + log10_P
    N = None
    log10_bound = None
    status = "budget-exceeded"
    term = f"C/(eps*N_ab(Q)) with C={C!r}, eps={eps!r}, log10 Q={log10_Q!r}"
    if log10_Q < 15:
        Q = J * round(10.0 ** log10_P)
        if pair_scan_size(Q) <= budget:
            N = N_pair(alpha, beta, Q, budget)
            if N > 0.0:
                status = "ok"
                log10_bound = math.log10(Q + C / (eps * N))
                term = f"{C / (eps * N)!r}"
            else:
                # n alpha + m beta is an integer for some |n| + |m| <= Q
                status = "rational"
                term = "unbounded: N_ab(Q) = 0"
    return Theorem2Report(eps, C, log10_inner, log10_P, log10_Q, N, log10_bound, term, status)


def net_function_model(kind: str, **kw):
    """Net-function models for theorem2_bound, all working on log10 values.

    ``constant``: F = value.  ``theory``: F = M(eps) for the pair (p, q).
    """
    from .numtheory import log10_M_from_log_eps

    if kind == "constant":
        v = math.log10(kw.get("value", 1))
        return lambda log10_eps: v
    if kind == "theory":
        p, q = kw["p"], kw["q"]
        return lambda log10_eps: log10_M_from_log_eps(p, q, log10_eps)
    raise DomainError(f"unknown net-function model {kind!r}")


# experiments


@dataclass(frozen=True)
class ExperimentRow:
    index: int
    eps: float
    direction_turns: float
    base_side: int
    base_center: float
    outcome: str
    T: float
    period: float | None
    kite_count: int
    C_used: float

    def csv_fields(self) -> list:
        return [self.eps, self.direction_turns, self.outcome, self.T,
                "" if self.period is None else self.period, self.kite_count, self.C_used]


CSV_HEADER = ("eps", "direction_turns", "outcome", "T", "period", "kite_count", "C_used")


def _sample_base(kite, rng, eps, direction=None, tries=1000):
    """Base side, centre and direction; the direction is uniform over inward ones."""
    for _ in range(tries):
        if direction is None:
            side = int(rng.integers(4))
            n = kite.inward_normal(side)
            psi = math.atan2(n[1], n[0]) + rng.uniform(-0.5 * math.pi, 0.5 * math.pi)
            d = CircleAngle(psi / TWO_PI)
        else:
            d = CircleAngle(direction)
            dv = _direction_vector(d)
            ok = [i for i in range(4) if float(np.dot(kite.inward_normal(i), dv)) > 1e-9]
            if not ok:
                raise DomainError("direction points inward through no side")
            side = ok[int(rng.integers(len(ok)))]
        center = float(rng.uniform(0.0, 1.0))
        try:
            beam_base(kite, side, center, d, eps)
        except DomainError:
            continue
        return side, center, d
    raise DomainError("could not place a beam base without a vertex")


def _run_row(args):
    kite, index, ei, eps, direction, max_T, seed, C = args
    rng = np.random.default_rng([seed, ei, index])
    side, center, d = _sample_base(kite, rng, eps, direction)
    out = propagate_beam(kite, side, center, d, eps, max_T)
    return ExperimentRow(index, eps, d.value, side, center, out.kind, out.T, out.period,
                         out.kite_count, C)


def splitting_experiment(kite: Kite, eps_list: Sequence[float], directions, max_T: float,
                         seed: int = 0, *, C: float | None = None,
                         workers: int = 1) -> list[ExperimentRow]:
    """One beam per (eps, direction); ``directions`` is a count or a list of turns.

    Each run draws its base from a generator seeded by (seed, eps index, run
    index), so rows do not depend on ``workers``.
    """
    if not eps_list:
        raise DomainError("eps_list must not be empty")
    C = estimate_C(kite, seed=seed) if C is None else C
    if isinstance(directions, (int, np.integer)):
        dirs = [None] * int(directions)
    else:
        dirs = [float(x) for x in directions]
    jobs = []
    for ei, eps in enumerate(eps_list):
        for i, d in enumerate(dirs):
            jobs.append((kite, ei * len(dirs) + i, ei, float(eps), d, max_T, seed, C))
    if workers > 1 and jobs:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_row, jobs))
    else:
        rows = [_run_row(j) for j in jobs]
    return sorted(rows, key=lambda r: r.index)
