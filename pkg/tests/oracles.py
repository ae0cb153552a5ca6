"""Independent reference computations used only by the tests.

Nothing here calls into the package; each oracle is written from the
definition it checks.
"""

import itertools
import math

import numpy as np


def distance_product_volume(vectors: np.ndarray) -> float:
    """p-volume as a product of distances: |v1| * dist(v2, span v1) * ...

    Projections use least squares against the earlier vectors, with no
    orthogonalization shared with the code under test.
    """
    v = np.asarray(vectors, float)
    vol = np.linalg.norm(v[:, 0])
    for k in range(1, v.shape[1]):
        prev = v[:, :k]
        coef, *_ = np.linalg.lstsq(prev, v[:, k], rcond=None)
        vol *= np.linalg.norm(v[:, k] - prev @ coef)
    return float(vol)


def eigen_log_moduli(a) -> np.ndarray:
    return np.sort(np.log(np.abs(np.linalg.eigvals(np.asarray(a, float)))))[::-1]


def interval_cover_count(a: float, n: int, beta: float) -> int:
    """Cells of side exp(-n beta) meeting [-|a|^n, |a|^n]."""
    r = abs(a) ** n
    s = math.exp(-n * beta)
    return math.floor(r / s) - math.floor(-r / s) + 1


def cylinder_intervals(ks, n):
    """All (word, [j/K, (j+1)/K)) pairs of depth-n inverse-branch cylinders."""
    out = set()
    for word in itertools.product(range(len(ks)), repeat=n):
        k = int(np.prod([ks[i] for i in word], dtype=object)) if n else 1
        out.update((word, j, k) for j in range(k))
    return out


def circle_distance(x, y) -> float:
    d = abs(x - y) % 1.0
    return min(d, 1.0 - d)


def grid_pressure(j, step: float = 1e-3):
    """max over nu1 on a uniform grid of H(nu) + <nu, J>, and the argmax."""
    nu1 = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(nu1 > 0, nu1 * np.log(nu1), 0.0)
              + np.where(nu1 < 1, (1 - nu1) * np.log(1 - nu1), 0.0))
    vals = h + nu1 * j[0] + (1 - nu1) * j[1]
    i = int(np.argmax(vals))
    return float(vals[i]), float(nu1[i])


def ellipse_cover_count(m, side, digits: int = 60) -> int:
    """Boxes of side * Z^2 meeting m(unit disk), from the quadratic form in mpmath.

    The image is {p : p^T (m m^T)^-1 p <= 1}. In each column strip the y-range
    is attained either at the global top/bottom point or on a strip edge,
    where it solves a quadratic exactly.
    """
    import mpmath as mp

    mp.mp.dps = digits
    a = mp.matrix([[mp.mpf(int(v)) if float(v).is_integer() else mp.mpf(v) for v in row]
                   for row in np.asarray(m).tolist()])
    g = a * a.T
    q = g ** -1
    s = mp.mpf(side)
    xmax, ymax = mp.sqrt(g[0, 0]), mp.sqrt(g[1, 1])
    x_at_top = g[0, 1] / ymax

    def y_range_at(x):
        # q00 x^2 + 2 q01 x y + q11 y^2 = 1
        disc = (q[0, 1] * x) ** 2 - q[1, 1] * (q[0, 0] * x * x - 1)
        r = mp.sqrt(max(disc, 0))
        return (-q[0, 1] * x - r) / q[1, 1], (-q[0, 1] * x + r) / q[1, 1]

    total = 0
    for j in range(int(mp.floor(-xmax / s)), int(mp.floor(xmax / s)) + 1):
        x0, x1 = max(j * s, -xmax), min((j + 1) * s, xmax)
        lo0, hi0 = y_range_at(x0)
        lo1, hi1 = y_range_at(x1)
        top = ymax if x0 <= x_at_top <= x1 else max(hi0, hi1)
        bot = -ymax if x0 <= -x_at_top <= x1 else min(lo0, lo1)
        total += int(mp.floor(top / s)) - int(mp.floor(bot / s)) + 1
    return total


def axis_ellipsoid_cover_count(axes, side) -> int:
    """Boxes of side * Z^d meeting the ellipsoid sum (p_i / a_i)^2 <= 1, by brute force."""
    axes = np.asarray(axes, float)
    ranges = [range(math.floor(-a / side), math.floor(a / side) + 1) for a in axes]
    total = 0
    for idx in itertools.product(*ranges):
        lo = np.array(idx) * side
        gap = np.clip(0.0, lo, lo + side)  # nearest box point to the origin, per axis
        total += float(np.sum((gap / axes) ** 2)) <= 1.0
    return total


def greedy_separated_oracle(ks, n: int, eps: float, depth: int, shift_steps: int = 0) -> int:
    """Lexicographic greedy separated set over cylinder centres, in exact rationals."""
    from fractions import Fraction

    length = n + shift_steps
    extra = max(0, n + depth - length)
    pts = []
    for word in itertools.product(range(len(ks)), repeat=length):
        mult = [ks[i] for i in word] + [ks[0]] * extra
        k = math.prod(mult[:length])
        for j in range(k):
            x = Fraction(2 * j + 1, 2 * k)
            traj = [x]
            for f in mult:
                x = (x * f) % 1
                traj.append(x)
            pts.append([float(t) for t in traj])

    def bowen(a, b):
        return max(sum(circle_distance(a[k + m], b[k + m]) / 2**m for m in range(depth + 1))
                   for k in range(n))

    kept = []
    for p in pts:
        if all(bowen(p, q) > eps for q in kept):
            kept.append(p)
    return len(kept)
