"""Independent checks shared by the geometry and acceptance tests."""
import math

import numpy as np

from kite_billiards.geometry import unfold_ray


def split_oracle(kite, out, base_center, direction):
    """Earliest vertex of any copy along the axis inside the open strip.

    The copies come from unfold_ray on the axis; distances are measured in
    the global unfolded picture.
    """
    b = out.beam
    p0 = kite.point_on_side(b.base_side, base_center)
    u = np.array([math.cos(2 * math.pi * direction.value), math.sin(2 * math.pi * direction.value)])
    nrm = np.array([-u[1], u[0]])
    e = kite.side(b.base_side)[1] - kite.side(b.base_side)[0]
    back = 0.5 * (b.base_interval[1] - b.base_interval[0]) * abs(float(e @ u))
    ray = unfold_ray(kite, p0, direction, out.vertex[0] + 1, start_side=b.base_side)
    inward = kite.inward_normal(b.base_side)
    best = None
    for fr in ray.frames[: out.vertex[0] + 1]:
        for v in fr.apply(kite.vertices):
            r = v - p0
            if float(r @ inward) <= 1e-12:
                continue
            if abs(float(r @ nrm)) < 0.5 * b.eps:
                along = float(r @ u) + back
                if best is None or along < best[0]:
                    best = (along, v, abs(float(r @ nrm)))
    return best
