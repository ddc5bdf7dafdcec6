"""Connected circle sequences and relative eps-nets.

A connected sequence walks the circle by steps of +-alpha or +-beta.  It is
stored run-length encoded: the commensurate construction needs walks whose
length is far beyond anything that fits in memory point by point, while their
step structure is short.

Coloured nets are stored the same way, as sorted pieces, each an arithmetic
progression whose colours repeat with a short period.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, DomainError, InsufficientLength
from .numtheory import first_small_multiple, signed_diff

TAGS = ("+a", "-a", "+b", "-b")
TOL_SEQ = 1e-12
DEFAULT_MIN_WIDTH = 0.05
MATERIALIZE_LIMIT = 10**7
DEFAULT_MAX_NET_SIZE = 2**53  # net coordinates must stay exact in a double

_TAG_CODE = {t: i for i, t in enumerate(TAGS)}
# (d_alpha, d_beta) per tag code
_TAG_DELTA = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _frac(x: Fraction) -> float:
    return float(x - math.floor(x))


def _frac_times(n: np.ndarray, x: float) -> np.ndarray:
    """frac(n * x) for integer arrays |n| < 2**26, accurate to a few ulp."""
    n = np.asarray(n, dtype=np.float64)
    hi = float(np.float32(x))
    lo = x - hi
    a = n * hi  # exact: 24-bit times 26-bit
    a -= np.floor(a)
    r = a + n * lo
    return r - np.floor(r)


@dataclass(frozen=True, eq=False)
class ConnectedSequence:
    """A run-length encoded alpha-beta connected sequence of circle points.

    ``run_tags[i]`` is an index into ``TAGS`` and is repeated ``run_counts[i]``
    times.  When ``gamma``/``p``/``q`` are set the sequence is commensurate
    (alpha = p*gamma, beta = q*gamma) and points are computed from the integer
    shadow ``z`` as ``start + z*gamma``, exactly.
    """

    start: float
    alpha: float
    beta: float
    run_tags: tuple[int, ...]
    run_counts: tuple[int, ...]
    gamma: float | None = None
    p: int | None = None
    q: int | None = None
    _cum: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.run_tags) != len(self.run_counts):
            raise DomainError("run_tags and run_counts differ in length")
        if any(c < 1 for c in self.run_counts):
            raise DomainError("run counts must be positive")
        if any(t not in (0, 1, 2, 3) for t in self.run_tags):
            raise DomainError("unknown step tag code")
        # cumulative (index, n_alpha, n_beta) at the start of each run
        idx, na, nb = 0, 0, 0
        cum = []
        for t, c in zip(self.run_tags, self.run_counts):
            cum.append((idx, na, nb))
            da, db = _TAG_DELTA[t]
            idx += c
            na += da * c
            nb += db * c
        cum.append((idx, na, nb))
        object.__setattr__(self, "_cum", tuple(cum))

    # construction

    @classmethod
    def from_runs(cls, start, alpha, beta, runs, **kw) -> "ConnectedSequence":
        tags, counts = [], []
        for tag, count in runs:
            code = _TAG_CODE[tag] if isinstance(tag, str) else int(tag)
            count = int(count)
            if tags and tags[-1] == code:
                counts[-1] += count
            else:
                tags.append(code)
                counts.append(count)
        return cls(float(start), float(alpha), float(beta), tuple(tags), tuple(counts), **kw)

    @classmethod
    def from_steps(cls, start, alpha, beta, steps: Sequence[str]) -> "ConnectedSequence":
        return cls.from_runs(start, alpha, beta, ((s, 1) for s in steps))

    @classmethod
    def commensurate(cls, start, gamma, p: int, q: int, runs) -> "ConnectedSequence":
        g = Fraction(float(gamma))
        return cls.from_runs(start, _frac(p * g), _frac(q * g), runs,
                             gamma=float(gamma), p=int(p), q=int(q))

    @classmethod
    def from_points(cls, points, alpha, beta, tol: float = TOL_SEQ) -> "ConnectedSequence":
        """Recover step tags from explicit points; raises if a step matches none."""
        pts = [float(x) for x in points]
        if not pts:
            raise DomainError("a connected sequence needs at least one point")
        values = (alpha, -alpha, beta, -beta)
        steps = []
        for i in range(len(pts) - 1):
            d = signed_diff(pts[i + 1], pts[i])
            for tag, v in zip(TAGS, values):
                if abs(signed_diff(d, v)) <= tol:
                    steps.append(tag)
                    break
            else:
                raise DomainError(
                    f"step {i} -> {i + 1} differs by {d!r}, which is none of +-alpha, +-beta")
        seq = cls.from_steps(pts[0], alpha, beta, steps)
        return seq

    def as_commensurate(self, gamma, p: int, q: int, tol: float = TOL_SEQ) -> "ConnectedSequence":
        g = Fraction(float(gamma))
        for name, got, k in (("alpha", self.alpha, p), ("beta", self.beta, q)):
            if abs(signed_diff(got, _frac(k * g))) > tol:
                raise DomainError(f"{name} is not {k}*gamma modulo 1")
        return ConnectedSequence(self.start, _frac(p * g), _frac(q * g), self.run_tags,
                                 self.run_counts, gamma=float(gamma), p=int(p), q=int(q))

    # access

    @property
    def is_commensurate(self) -> bool:
        return self.gamma is not None

    @property
    def length(self) -> int:
        """Number of points; unlike len() this is not capped at sys.maxsize."""
        return self._cum[-1][0] + 1

    def __len__(self) -> int:
        return self.length

    def counts_at(self, i: int) -> tuple[int, int]:
        """(n_alpha, n_beta) accumulated before point ``i``."""
        if not 0 <= i < self.length:
            raise IndexError(i)
        r = bisect_right(self._cum, (i, math.inf, math.inf)) - 1
        r = min(r, len(self.run_tags) - 1) if self.run_tags else 0
        idx, na, nb = self._cum[r]
        off = i - idx
        if self.run_tags and off:
            da, db = _TAG_DELTA[self.run_tags[r]]
            na += da * off
            nb += db * off
        return na, nb

    def shadow(self, i: int) -> int:
        na, nb = self.counts_at(i)
        return na * self.p + nb * self.q

    def point(self, i: int) -> float:
        """Point ``i`` computed in exact rational arithmetic, then rounded."""
        na, nb = self.counts_at(i)
        if self.is_commensurate:
            v = Fraction(self.start) + (na * self.p + nb * self.q) * Fraction(self.gamma)
        else:
            v = Fraction(self.start) + na * Fraction(self.alpha) + nb * Fraction(self.beta)
        return _frac(v)

    def step_codes(self, limit: int | None = None) -> np.ndarray:
        """Step tag codes, optionally only the first ``limit`` of them."""
        n = self.length - 1 if limit is None else min(limit, self.length - 1)
        if n > MATERIALIZE_LIMIT:
            raise BudgetExceeded("sequence too long to materialize", required=n,
                                 budget=MATERIALIZE_LIMIT)
        tags, counts, total = [], [], 0
        for t, c in zip(self.run_tags, self.run_counts):
            if total >= n:
                break
            c = min(c, n - total)
            tags.append(t)
            counts.append(c)
            total += c
        return np.repeat(np.asarray(tags, dtype=np.int8), np.asarray(counts, dtype=np.int64))

    @property
    def steps(self) -> list[str]:
        return [TAGS[c] for c in self.step_codes()]

    def _count_arrays(self, m: int | None = None):
        codes = self.step_codes(None if m is None else max(m - 1, 0))
        da = np.array([1, -1, 0, 0], dtype=np.int64)[codes]
        db = np.array([0, 0, 1, -1], dtype=np.int64)[codes]
        na = np.concatenate(([0], np.cumsum(da)))
        nb = np.concatenate(([0], np.cumsum(db)))
        return na, nb

    def prefix_points(self, m: int | None = None) -> np.ndarray:
        """The first ``m`` points (all if None) as a float array in [0, 1)."""
        na, nb = self._count_arrays(m)
        big = max(int(np.abs(na).max()), int(np.abs(nb).max())) if na.size else 0
        if self.is_commensurate:
            z = na * self.p + nb * self.q
            if int(np.abs(z).max()) < 2**26:
                out = _frac_times(z, self.gamma) + self.start
                return out - np.floor(out)
            return np.array([self.point(i) for i in range(na.size)])
        if big < 2**26:
            out = _frac_times(na, self.alpha) + _frac_times(nb, self.beta) + self.start
            return out - np.floor(out)
        return np.array([self.point(i) for i in range(na.size)])

    @property
    def points(self) -> np.ndarray:
        return self.prefix_points()

    def rotated(self, shift: float) -> "ConnectedSequence":
        start = _frac(Fraction(self.start) + Fraction(float(shift)))
        return ConnectedSequence(start, self.alpha, self.beta, self.run_tags, self.run_counts,
                                 gamma=self.gamma, p=self.p, q=self.q)

    def check_connected(self, tol: float = TOL_SEQ) -> bool:
        pts = self.points
        values = np.array([self.alpha, -self.alpha, self.beta, -self.beta])[self.step_codes()]
        d = np.diff(pts) - values
        d = np.abs(d - np.rint(d))
        return bool(np.all(d <= tol))


def random_walk(alpha, beta, length: int, rng: np.random.Generator,
                start: float = 0.0) -> ConnectedSequence:
    """``length`` points; steps i.i.d. uniform over +-alpha, +-beta."""
    if length < 1:
        raise DomainError("length must be >= 1")
    codes = rng.integers(0, 4, size=length - 1)
    return ConnectedSequence.from_runs(start, float(alpha), float(beta),
                                       ((int(c), 1) for c in codes))


def ballistic_runs(total_steps: int, rng: np.random.Generator, *, n_runs: int = 64,
                   forward_bias: float = 0.8) -> list[tuple[int, int]]:
    """Long monotone stretches: run lengths log-uniform, mostly positive tags.

    Used to build commensurate walks whose integer shadow travels far enough
    for the net construction without storing every step.
    """
    if total_steps < 1:
        raise DomainError("total_steps must be >= 1")
    n_runs = max(1, min(n_runs, total_steps))
    w = np.exp(rng.uniform(0.0, math.log(1e6), size=n_runs))
    counts = [1 + int(c) for c in np.floor(w / w.sum() * (total_steps - n_runs))]
    counts[-1] += total_steps - sum(counts)
    runs = []
    for c in counts:
        forward = rng.random() < forward_bias
        use_alpha = rng.random() < 0.5
        tag = (0 if forward else 1) if use_alpha else (2 if forward else 3)
        runs.append((tag, int(c)))
    return runs


# relative nets


def is_relative_eps_net(points, segment, eps: float) -> bool:
    """True iff ``points`` blown up from ``segment`` to [0, 1] form an eps-net.

    Uses the gap form: first point <= eps, last point >= 1 - eps and every
    consecutive gap <= 2 eps, all with closed inequalities and measured in
    units of the segment width.
    """
    lo, hi = float(segment[0]), float(segment[1])
    width = hi - lo
    if not width >= 1e-15 * max(abs(lo), abs(hi), 1.0):
        raise DomainError(f"degenerate segment [{lo}, {hi}]")
    pts = np.sort(np.asarray(points, dtype=np.float64).ravel())
    if pts.size == 0:
        return False
    # compare in segment units: rescaling first would round equal gaps apart
    reach = eps * width
    if pts[0] - lo > reach or hi - pts[-1] > reach:
        return False
    return bool(np.all(np.diff(pts) <= 2.0 * reach))


def unwrap_to_arc(values, lo: float, hi: float) -> np.ndarray:
    """Lift circle points onto the real arc starting at ``lo``."""
    v = np.asarray(values, dtype=np.float64)
    off = (v - lo) % 1.0
    width = hi - lo
    # points a hair below lo come back as offsets near 1
    off = np.where(off > width + (1.0 - width) / 2.0, off - 1.0, off)
    return lo + off


@dataclass(frozen=True)
class IntervalNetWitness:
    """A subset of a host point set that is a relative eps-net of ``segment``.

    ``values`` holds the host points referenced by ``indices``.  For circular
    witnesses ``segment`` is (lo, lo + width) with lo in [0, 1) and the values
    are unwrapped onto that arc before checking.
    """

    segment: tuple[float, float]
    indices: tuple[int, ...]
    eps: float
    values: tuple[float, ...] = ()
    circular: bool = False

    @property
    def width(self) -> float:
        return self.segment[1] - self.segment[0]

    def lifted(self, values=None) -> np.ndarray:
        vals = self.values if values is None else values
        if self.circular:
            return unwrap_to_arc(vals, *self.segment)
        return np.asarray(vals, dtype=np.float64)

    def verify(self, values=None) -> bool:
        return is_relative_eps_net(self.lifted(values), self.segment, self.eps)

    def to_dict(self) -> dict:
        return {"segment": [self.segment[0], self.segment[1]],
                "indices": [int(i) for i in self.indices], "eps": self.eps}

    @classmethod
    def from_dict(cls, d: dict, values=(), circular: bool = False) -> "IntervalNetWitness":
        return cls(tuple(d["segment"]), tuple(d["indices"]), d["eps"], tuple(values), circular)


@dataclass(frozen=True)
class Piece:
    """Points ``start + j*step`` for j < count; point j has colour pattern[j % len]."""

    start: float
    step: float
    count: int
    pattern: tuple[int, ...]

    @property
    def stop(self) -> float:
        return self.start + (self.count - 1) * self.step

    def value(self, j):
        return self.start + j * self.step


@dataclass(frozen=True)
class ColoredNet:
    pieces: tuple[Piece, ...]
    n_colors: int
    delta: float
    segment: tuple[float, float]

    def __post_init__(self):
        if self.n_colors < 1:
            raise DomainError("n_colors must be >= 1")
        prev = -math.inf
        for pc in self.pieces:
            if pc.count < 1 or not pc.pattern:
                raise DomainError("empty piece")
            if pc.count > 1 and not pc.step > 0:
                raise DomainError("piece steps must be positive")
            if not all(1 <= c <= self.n_colors for c in pc.pattern):
                raise DomainError(f"colour outside [1, {self.n_colors}]")
            if not pc.start > prev:
                raise DomainError("pieces must be sorted and disjoint")
            prev = pc.stop
        lo, hi = self.segment
        if self.pieces and (self.pieces[0].start < lo or prev > hi):
            raise DomainError("net points must lie in the segment")

    @classmethod
    def from_points(cls, points, colors, n_colors: int, delta: float,
                    segment=None) -> "ColoredNet":
        pts = np.asarray(points, dtype=np.float64)
        order = np.argsort(pts, kind="stable")
        pts = pts[order]
        cols = np.asarray(colors)[order]
        if segment is None:
            segment = (float(pts[0]), float(pts[-1]))
        pieces = tuple(Piece(float(x), 0.0, 1, (int(c),)) for x, c in zip(pts, cols))
        return cls(pieces, int(n_colors), float(delta), (float(segment[0]), float(segment[1])))

    @property
    def size(self) -> int:
        return sum(pc.count for pc in self.pieces)

    @property
    def points(self) -> np.ndarray:
        if self.size > MATERIALIZE_LIMIT:
            raise BudgetExceeded("net too large to materialize", required=self.size,
                                 budget=MATERIALIZE_LIMIT)
        return np.concatenate([pc.start + np.arange(pc.count) * pc.step for pc in self.pieces])

    @property
    def colors(self) -> np.ndarray:
        return np.concatenate([np.resize(np.asarray(pc.pattern), pc.count) for pc in self.pieces])

    def largest_gap(self) -> tuple[float, float, float]:
        """(relative half-gap, gap lo, gap hi) of the worst hole in the segment."""
        lo, hi = self.segment
        w = hi - lo
        worst = (2.0 * (self.pieces[0].start - lo), lo, self.pieces[0].start)
        tail = (2.0 * (hi - self.pieces[-1].stop), self.pieces[-1].stop, hi)
        cands = [worst, tail]
        for a, b in zip(self.pieces, self.pieces[1:]):
            cands.append((b.start - a.stop, a.stop, b.start))
        for pc in self.pieces:
            if pc.count > 1:
                cands.append((pc.step, pc.start, pc.start + pc.step))
        g, a, b = max(cands)
        return g / (2.0 * w), a, b

    def is_delta_net(self) -> bool:
        return bool(self.pieces) and self.largest_gap()[0] <= self.delta


# monochromatic extraction


@dataclass
class _Run:
    start: float
    step: float
    count: int
    pattern: tuple[int, ...]
    index0: int


def _cell_of(v, a, cw, J):
    return np.clip(np.floor((np.asarray(v) - a) / cw), 0, J - 1).astype(np.int64)


def _first_in_cells(v0, S, n, a, cw, J):
    """Cells hit by v0 + t*S (t < n) and the first t landing in each."""
    if n <= 4 * J:
        t = np.arange(n)
        cells = _cell_of(v0 + t * S, a, cw, J)
        uc, first = np.unique(cells, return_index=True)
        return uc, t[first]
    # dense progression (S < cw): every cell between the ends is hit
    def cell(v):
        return min(max(math.floor((v - a) / cw), 0), J - 1)

    c0 = cell(v0)
    c1 = cell(v0 + (n - 1) * S)
    cells = np.arange(c0, c1 + 1)
    ts = [0]
    for c in range(c0 + 1, c1 + 1):
        t = max(0, min(n - 1, math.ceil((a + c * cw - v0) / S)))
        while t > 0 and cell(v0 + (t - 1) * S) >= c:
            t -= 1
        while cell(v0 + t * S) < c:
            t += 1
        ts.append(t)
    return cells, np.array(ts, dtype=np.int64)


def _residue_progressions(run: _Run):
    r = len(run.pattern)
    for i in range(min(r, run.count)):
        n = (run.count - i + r - 1) // r
        yield run.pattern[i], i, r, n


@dataclass(frozen=True)
class SubnetResult:
    witness: IntervalNetWitness
    color: int
    depth: int


def monochromatic_subnet(net: ColoredNet, eps: float) -> SubnetResult:
    """Find a single-colour relative eps-net of some subinterval of the net.

    Split the current interval into ceil(2/eps) equal cells.  If a colour
    occurs in every cell, one point of that colour per cell is the answer.
    Otherwise some cell misses a colour present in the interval; recurse into
    the hull of that cell's points, which uses strictly fewer colours.
    """
    if not 0.0 < eps <= 0.5:
        raise DomainError(f"eps must lie in (0, 1/2], got {eps!r}")
    bound = (eps / 100.0) ** net.n_colors
    if net.delta > bound * (1 + 1e-12):
        raise DomainError(
            f"net delta {net.delta:.6g} exceeds (eps/100)^n = {bound:.6g}")
    if not net.pieces:
        raise DomainError("empty net")
    g, ga, gb = net.largest_gap()
    if g > net.delta:
        raise DomainError(
            f"input is not a relative {net.delta:.6g}-net: hole [{ga!r}, {gb!r}] "
            f"has relative half-width {g:.6g}")

    runs, offset = [], 0
    for pc in net.pieces:
        runs.append(_Run(pc.start, pc.step, pc.count, pc.pattern, offset))
        offset += pc.count
    a, b = net.segment
    J = math.ceil(2.0 / eps)
    depth = 0
    while True:
        cw = (b - a) / J
        present = np.zeros((net.n_colors + 1, J), dtype=bool)
        hits = []  # (colour, run, residue, stride, cells, ts)
        for run in runs:
            for color, i, r, n in _residue_progressions(run):
                cells, ts = _first_in_cells(run.start + i * run.step, r * run.step, n, a, cw, J)
                present[color, cells] = True
                hits.append((color, run, i, r, cells, ts))
        used = np.flatnonzero(present.any(axis=1))
        full = [c for c in used if present[c].all()]
        if full:
            color = int(full[0])
            best = {}
            for c, run, i, r, cells, ts in hits:
                if c != color:
                    continue
                for cell, t in zip(cells.tolist(), ts.tolist()):
                    j = i + r * t
                    v = run.start + j * run.step
                    if cell not in best or v < best[cell][0]:
                        best[cell] = (v, run.index0 + j)
            chosen = [best[c] for c in range(J)]
            w = IntervalNetWitness((a, b), tuple(ix for _, ix in chosen), eps,
                                   tuple(v for v, _ in chosen))
            return SubnetResult(w, color, depth)
        if used.size <= 1 or depth >= net.n_colors:
            raise DomainError(
                f"net too coarse: colour {int(used[0]) if used.size else None} misses a cell "
                f"of [{a!r}, {b!r}] at depth {depth}")
        missing = ~present[used]
        cell = int(np.flatnonzero(missing.any(axis=0))[0])
        lo_edge = a + cell * cw
        new_runs = []
        for run in runs:
            cells, ts = _first_in_cells(run.start, run.step if run.count > 1 else 1.0,
                                        run.count, a, cw, J)
            where = np.flatnonzero(cells == cell)
            if where.size == 0:
                continue
            k = int(where[0])
            t0 = int(ts[k])
            t1 = int(ts[k + 1]) - 1 if k + 1 < cells.size else run.count - 1
            r = len(run.pattern)
            rot = t0 % r
            new_runs.append(_Run(run.start + t0 * run.step, run.step, t1 - t0 + 1,
                                 run.pattern[rot:] + run.pattern[:rot], run.index0 + t0))
        if not new_runs:
            raise DomainError(f"cell starting at {lo_edge!r} holds no points")
        new_a = new_runs[0].start
        new_b = max(rn.start + (rn.count - 1) * rn.step for rn in new_runs)
        if not new_b > new_a:
            raise DomainError(f"net too coarse: cell starting at {lo_edge!r} holds one point")
        runs, a, b = new_runs, new_a, new_b
        depth += 1


# commensurate construction


@dataclass(frozen=True)
class CommensurateResult:
    witness: IntervalNetWitness
    n0: int
    drift: Fraction  # signed <n0 * gamma>
    net_size: int
    color: int
    direction: int
    depth: int


def _net_scale(p, q, g, eps, max_net_size):
    m = p + q
    delta = (Fraction(eps) / 100) ** m
    K = math.floor(1 / delta)
    if K > max_net_size:
        raise BudgetExceeded(f"net of floor(1/delta) = {K} points exceeds {max_net_size}",
                             required=K, budget=max_net_size)
    n0 = m * first_small_multiple(m * Fraction(g), delta)
    assert m <= n0 <= m * math.ceil(1 / delta)
    return K, n0, delta


def commensurate_reach(p: int, q: int, gamma, eps: float, *,
                       max_net_size: int = DEFAULT_MAX_NET_SIZE) -> int:
    """Shadow distance K * n0 a walk must travel, one way, for the construction."""
    g = float(gamma.value if hasattr(gamma, "value") else gamma)
    K, n0, _ = _net_scale(int(p), int(q), g, eps, max_net_size)
    return K * n0


def commensurate_net_construction(p: int, q: int, gamma, seq: ConnectedSequence,
                                  eps: float, *,
                                  max_net_size: int = DEFAULT_MAX_NET_SIZE) -> CommensurateResult:
    """Extract a relative eps-net from a (p*gamma, q*gamma)-connected sequence.

    The walk is read through its integer shadow z (point = start + z*gamma).
    With m = p + q and delta = (eps/100)^m, n0 is the least multiple of m with
    <n0 gamma> < delta, and the points k*n0*gamma, k = 1..floor(1/delta), form
    a relative delta-net.  Each k is coloured by the offset t in [0, m) of the
    first walk point in [k n0, k n0 + m - 1]; a monochromatic subnet of colour
    t, shifted by t*gamma, consists of walk points.
    """
    for name, v in (("p", p), ("q", q)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise DomainError(f"{name} must be a positive integer, got {v!r}")
    if not 0.0 < eps <= 0.5:
        raise DomainError(f"eps must lie in (0, 1/2], got {eps!r}")
    p, q = int(p), int(q)
    g = float(gamma.value if hasattr(gamma, "value") else gamma)
    if not seq.is_commensurate or (seq.gamma, seq.p, seq.q) != (g, p, q):
        seq = seq.as_commensurate(g, p, q)
    m = p + q
    G = Fraction(g)
    K, n0, delta = _net_scale(p, q, g, eps, max_net_size)
    drift = n0 * G - round(n0 * G)

    # running extremes of the shadow, read run by run
    runs = []  # (first index, shadow at run start, signed step, count)
    z, zmax, zmin = 0, 0, 0
    for (idx, na, nb), tag, count in zip(seq._cum, seq.run_tags, seq.run_counts):
        da, db = _TAG_DELTA[tag]
        s = da * p + db * q
        runs.append((idx, z, s, count))
        end = z + s * count
        zmax, zmin = max(zmax, end), min(zmin, end)
        z = end
    need = K * n0
    if zmax >= need:
        sign = 1
    elif -zmin >= need:
        sign = -1
    else:
        reach = max(zmax, -zmin)
        raise InsufficientLength(
            f"shadow reaches {reach}, needs {need}; interval k = {reach // n0 + 1} "
            "has no walk point", first_uncovered=reach // n0 + 1)

    # pieces in k-space, walking in direction `sign`
    pieces, owners = [], []  # owners: (k_first, run first index, x, s)
    top, k_next = 0, 1
    for idx, x, s, count in runs:
        x, s = sign * x, sign * s
        if s <= 0:
            continue
        # the run's first point sits one step after the previous run's end
        x_first = x + s
        end = x + count * s
        if end <= top:
            continue
        k_last = min(end // n0, K)
        if k_last >= k_next:
            period = s // math.gcd(s, n0 % s) if n0 % s else 1
            pattern = tuple((x_first - (k_next + i) * n0) % s + 1 for i in range(period))
            pieces.append(Piece(float(k_next), 1.0, k_last - k_next + 1, pattern))
            owners.append((k_next, idx, x_first, s))
            k_next = k_last + 1
        top = end
        if k_next > K:
            break
    net = ColoredNet(tuple(pieces), m, float(delta), (1.0, float(K)))
    sub = monochromatic_subnet(net, eps)
    t = sub.color - 1

    firsts = [o[0] for o in owners]
    host_idx, ks = [], []
    for net_index in sub.witness.indices:
        k = net_index + 1
        _, idx, x_first, s = owners[bisect_right(firsts, k) - 1]
        j = (k * n0 + t - x_first) // s
        assert x_first + j * s - k * n0 == t
        host_idx.append(idx + 1 + j)
        ks.append(k)
    kl, kh = sub.witness.segment
    base = Fraction(seq.start) + sign * t * G
    D = sign * drift
    lo = base + D * Fraction(kl) if D > 0 else base + D * Fraction(kh)
    width = abs(D) * Fraction(kh - kl)
    lo_f = _frac(lo)
    values = tuple(seq.point(i) for i in host_idx)
    w = IntervalNetWitness((lo_f, lo_f + float(width)), tuple(host_idx), eps, values,
                           circular=True)
    return CommensurateResult(w, n0, drift, K, t, sign, sub.depth)


# first qualifying prefix and net-function estimation


def _qualifying_arcs(vals: np.ndarray, eps: float, min_width: float):
    """Arcs over sorted circle points whose points form a net of the arc.

    Returns arrays (start, n_gaps, width); an arc qualifies when it is at
    least ``min_width`` wide and no gap inside exceeds 2*eps*width.
    """
    n = vals.size
    empty = (np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0))
    if n < 2:
        return empty
    gaps = np.diff(np.concatenate((vals, [vals[0] + 1.0])))
    g2 = np.concatenate((gaps, gaps))
    windows = np.lib.stride_tricks.sliding_window_view(g2, n - 1)
    rows = max(1, 2_000_000 // n)
    parts = []
    for i0 in range(0, n, rows):
        mat = windows[i0:min(n, i0 + rows)]
        W = np.cumsum(mat, axis=1)
        G = np.maximum.accumulate(mat, axis=1)
        ii, tt = np.nonzero((W >= min_width) & (G <= 2.0 * eps * W))
        parts.append((ii + i0, tt + 1, W[ii, tt]))
    if not parts:
        return empty
    return tuple(np.concatenate(x) for x in zip(*parts))


@dataclass(frozen=True)
class PrefixHit:
    index: int
    witness: IntervalNetWitness


def _arc_witness(vals, first_idx, i, t, eps):
    n = vals.size
    lo = float(vals[i])
    span = float((vals[(i + t) % n] - lo) % 1.0)
    sel = [(i + s) % n for s in range(t + 1)]
    return IntervalNetWitness((lo, lo + span), tuple(int(first_idx[s]) for s in sel), eps,
                              tuple(float(vals[s]) for s in sel), circular=True)


def _best_witness(pts: np.ndarray, eps: float, min_width: float):
    vals, first_idx = np.unique(pts, return_index=True)
    ii, tt, W = _qualifying_arcs(vals, eps, min_width)
    if ii.size == 0:
        return None
    # widest first, then earliest visited start point
    order = np.lexsort((tt, first_idx[ii], -W))
    for k in order[:64]:
        w = _arc_witness(vals, first_idx, int(ii[k]), int(tt[k]), eps)
        if w.verify():
            return w
    return None


def first_net_prefix(seq: ConnectedSequence, eps: float,
                     min_width: float = DEFAULT_MIN_WIDTH, *,
                     max_len: int | None = None) -> PrefixHit | None:
    """Shortest prefix containing a relative eps-net of an arc of width >= min_width.

    Having a net is monotone in the prefix length, so the search doubles and
    then bisects.  Returns None if no prefix (up to ``max_len``) qualifies.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    if not min_width > 0:
        raise DomainError("min_width must be positive")
    n = seq.length if max_len is None else min(seq.length, max_len)
    pts = seq.prefix_points(n)

    def hit(m):
        return _best_witness(pts[:m], eps, min_width)

    lo, hi = 1, 2
    while hi < n and hit(hi) is None:
        lo, hi = hi, min(2 * hi, n)
    w = hit(hi)
    if w is None:
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        wm = hit(mid)
        if wm is None:
            lo = mid
        else:
            hi, w = mid, wm
    return PrefixHit(hi, w)


@dataclass(frozen=True)
class NetFunctionEstimate:
    empirical_F_lower: int
    histogram: dict[int, int]
    censored: int
    samples: int

    def to_dict(self) -> dict:
        hist = [{"len": int(k), "count": int(v)} for k, v in sorted(self.histogram.items())]
        hist.append({"censored": int(self.censored)})
        return {"empirical_F_lower": self.empirical_F_lower, "samples": self.samples,
                "histogram": hist}

    @classmethod
    def from_dict(cls, d: dict) -> "NetFunctionEstimate":
        hist, censored = {}, 0
        for row in d["histogram"]:
            if "censored" in row:
                censored = row["censored"]
            else:
                hist[row["len"]] = row["count"]
        return cls(d["empirical_F_lower"], hist, censored, d["samples"])


def _sample_hit(args):
    alpha, beta, eps, min_width, max_len, master_seed, i = args
    rng = np.random.default_rng([master_seed, i])
    seq = random_walk(alpha, beta, max_len, rng)
    hit = first_net_prefix(seq, eps, min_width)
    return i, (None if hit is None else hit.index)


def estimate_net_function(alpha, beta, eps: float, min_width: float = DEFAULT_MIN_WIDTH,
                          samples: int = 1000, max_len: int = 1000, master_seed: int = 0,
                          *, workers: int = 1) -> NetFunctionEstimate:
    """Sample uniform random walks and record when each first contains a net.

    Sample i is seeded by ``(master_seed, i)``, so the histogram does not depend
    on ``workers``.  The returned lower bound is ``max(hit) - 1``, raised to
    ``max_len`` when some walk never contains a net.
    """
    if samples < 1 or max_len < 2:
        raise DomainError("need samples >= 1 and max_len >= 2")
    a = float(alpha.value if hasattr(alpha, "value") else alpha)
    b = float(beta.value if hasattr(beta, "value") else beta)
    jobs = [(a, b, eps, min_width, max_len, master_seed, i) for i in range(samples)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sample_hit, jobs, chunksize=max(1, samples // (4 * workers))))
    else:
        results = [_sample_hit(j) for j in jobs]
    results.sort()
    hist = Counter(h for _, h in results if h is not None)
    censored = sum(1 for _, h in results if h is None)
    lower = max((h - 1 for h in hist), default=0)
    if censored:
        lower = max(lower, max_len)
    return NetFunctionEstimate(lower, dict(sorted(hist.items())), censored, samples)
