"""Orbit space of a commuting pair: the metric d-bar, separated sets and growth rates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .entropy import friedland_formula
from .errors import InvalidInputError, ResourceError, UnsupportedMapError
from .systems import CIRCLE_EXPANDING, CommutingSystem, DynamicalMap, circle_gap, compose_orbit

BUDGET = 10**8
RELATION_TOL = 1e-12
GREEDY = "greedy"
ITINERARY = "itinerary"


@dataclass(frozen=True, eq=False)
class OrbitPoint:
    """A word and a trajectory obeying x[m+1] = f_{word[m]}(x[m])."""

    word: np.ndarray
    trajectory: np.ndarray
    truncation_depth: int

    @classmethod
    def build(cls, system: CommutingSystem, word, x0, truncation_depth: int | None = None):
        word = np.asarray(word, dtype=np.int8).reshape(-1)
        traj = compose_orbit(system, word, x0)
        depth = len(word) if truncation_depth is None else truncation_depth
        return cls(word, traj, depth)

    def __len__(self):
        return len(self.word)

    def check_relation(self, system: CommutingSystem) -> float:
        """Largest distance between f_{word[m]}(x[m]) and x[m+1]."""
        from .systems import apply
        worst = 0.0
        for m, s in enumerate(self.word):
            g = system.generator(int(s))
            worst = max(worst, g.distance(apply(g, self.trajectory[m]), self.trajectory[m + 1]))
        return worst


def depth_for(epsilon: float) -> int:
    """Smallest depth with 2^-depth < epsilon / 10."""
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    return int(np.floor(np.log2(10.0 / epsilon))) + 1


def _gaps(a: np.ndarray, b: np.ndarray, periodic: bool) -> np.ndarray:
    diff = circle_gap(a, b) if periodic else a - b
    diff = np.asarray(diff, float)
    return np.abs(diff) if diff.ndim == 1 else np.linalg.norm(diff, axis=-1)


def bar_distance(a: OrbitPoint, b: OrbitPoint, depth: int, periodic: bool = True) -> float:
    """sum_{m=0}^{depth} d(x_m, y_m) / 2^m."""
    if depth < 0:
        raise InvalidInputError("depth must be >= 0")
    if depth >= len(a.trajectory) or depth >= len(b.trajectory):
        raise InvalidInputError(
            f"depth {depth} exceeds trajectory lengths {len(a.trajectory) - 1}, {len(b.trajectory) - 1}")
    g = _gaps(a.trajectory[: depth + 1], b.trajectory[: depth + 1], periodic)
    return float(np.sum(g / 2.0 ** np.arange(depth + 1)))


def truncation_error(depth: int, diameter: float = 0.5) -> float:
    """Bound on the d-bar tail dropped after ``depth`` terms."""
    return diameter * 2.0 ** -depth


def bowen_distances(ta: np.ndarray, tb: np.ndarray, n: int, depth: int) -> np.ndarray:
    """max_{k < n} of the depth-truncated d-bar between shifted circle trajectories.

    ``ta``, ``tb`` have shape (P, >= n + depth); returns shape (P,).
    """
    g = np.abs(circle_gap(ta[:, : n + depth], tb[:, : n + depth]))
    w = 2.0 ** -np.arange(depth + 1)
    windows = np.lib.stride_tricks.sliding_window_view(g, depth + 1, axis=1)[:, :n]
    return (windows @ w).max(axis=1)


def branch_factors(system) -> tuple[int, ...]:
    maps = (system,) if isinstance(system, DynamicalMap) else system.generators
    for m in maps:
        if m.kind != CIRCLE_EXPANDING:
            raise UnsupportedMapError(f"{m.name}: exact enumeration needs circle-expanding maps")
    return tuple(int(m.factor) for m in maps)


def _candidates(ks, length: int, extra: int) -> np.ndarray:
    """Trajectories of the centres of all depth-``length`` branch cylinders.

    One row per (word, cylinder), in lexicographic word order; the last
    ``extra`` steps continue with the first generator. Arithmetic is exact
    in integers before the final division.
    """
    rows = []
    for word in itertools.product(range(len(ks)), repeat=length):
        mult = [ks[i] for i in word] + [ks[0]] * extra
        k = np.concatenate([[1], np.cumprod(mult, dtype=np.int64)])
        kl = int(k[length])
        num = 2 * np.arange(kl, dtype=np.int64) + 1
        rows.append(np.mod(num[:, None] * k[None, :], 2 * kl) / (2.0 * kl))
    return np.vstack(rows)


def greedy_cost(ks, n: int, shift_steps: int = 0) -> int:
    return n * sum(ks) ** (n + shift_steps)


def separated_count(system, n: int, epsilon: float, shift_steps: int = 0,
                    budget: int = BUDGET) -> int:
    """Greedy (n, epsilon)-separated set among cylinder-centre orbit points.

    Words of length n + shift_steps are enumerated in lexicographic order,
    each with the centres of its branch cylinders; a candidate is kept when
    its Bowen d-bar distance to every kept point exceeds epsilon. Close
    pairs are found with a periodic Chebyshev KD-tree on the first n
    coordinates, then confirmed with the exact truncated metric.
    """
    ks = branch_factors(system)
    if n < 0 or shift_steps < 0:
        raise InvalidInputError("n and shift_steps must be >= 0")
    if n == 0:
        return 1
    cost = greedy_cost(ks, n, shift_steps)
    if cost > budget:
        feasible = max((m for m in range(n) if greedy_cost(ks, m, shift_steps) <= budget), default=0)
        raise ResourceError(f"enumeration cost {cost} exceeds budget {budget}; feasible n <= {feasible}",
                            feasible=feasible)
    depth = depth_for(epsilon)
    length = n + shift_steps
    traj = _candidates(ks, length, max(0, n + depth - length))
    tree = cKDTree(traj[:, :n], boxsize=1.0 + 1e-12)
    pairs = tree.query_pairs(epsilon, p=np.inf, output_type="ndarray")
    if pairs.size:
        close = bowen_distances(traj[pairs[:, 0]], traj[pairs[:, 1]], n, depth) <= epsilon
        pairs = pairs[close]
    if pairs.size == 0:
        return len(traj)
    lo, hi = pairs.min(axis=1), pairs.max(axis=1)
    order = np.lexsort((lo, hi))
    lo, hi = lo[order], hi[order]
    starts = np.searchsorted(hi, np.arange(len(traj) + 1))
    kept = np.ones(len(traj), bool)
    for v in np.unique(hi):
        earlier = lo[starts[v]:starts[v + 1]]
        if kept[earlier].any():
            kept[v] = False
    return int(kept.sum())


def itinerary_count(system, n: int, epsilon: float) -> int:
    """Number of distinct cell itineraries (c_0, ..., c_{n-1}) of orbit points.

    Cells are the M = ceil(1/epsilon) equal arcs of the circle, a Markov
    partition for every x -> kx, so the count is 1^T G^(n-1) 1 for the union
    transition graph G, evaluated in exact integers.
    """
    ks = branch_factors(system)
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    if n == 0:
        return 1
    cells = int(np.ceil(1.0 / epsilon))
    g = np.zeros((cells, cells), dtype=object)
    c = np.arange(cells)
    for k in ks:
        for a in range(k):
            g[c, (k * c + a) % cells] = 1
    v = np.ones(cells, dtype=object)
    for _ in range(n - 1):
        v = g.dot(v)
    return int(v.sum())


def cylinder_count(system, n: int) -> int:
    """Distinct (word, inverse-branch cylinder) pairs of depth n, by enumeration."""
    ks = branch_factors(system)
    return int(sum(int(np.prod([ks[i] for i in w], dtype=object))
                   for w in itertools.product(range(len(ks)), repeat=n)))


@dataclass(frozen=True)
class FriedlandEstimate:
    n_values: tuple
    counts: tuple
    slope: float
    stderr: float
    formula_value: float | None
    epsilon: float
    depth: int
    method: str

    @property
    def residual(self) -> float | None:
        return None if self.formula_value is None else abs(self.slope - self.formula_value)

    def table(self) -> list[tuple[int, int, float]]:
        return [(n, c, float(np.log(c))) for n, c in zip(self.n_values, self.counts)]

    def to_dict(self) -> dict:
        return {"n": list(self.n_values), "counts": list(self.counts), "slope": self.slope,
                "stderr": self.stderr, "formula_value": self.formula_value,
                "residual": self.residual, "epsilon": self.epsilon, "depth": self.depth,
                "method": self.method}


def friedland_estimate(system, n_range, epsilon: float, method: str = "auto",
                       budget: int = BUDGET) -> FriedlandEstimate:
    """Slope of log count against n, fitted on the upper half of ``n_range``.

    ``method`` is ``greedy`` (separated sets), ``itinerary`` (transfer
    matrix) or ``auto``, which uses greedy when its budget covers the whole
    range and the itinerary count otherwise.
    """
    ns = list(range(n_range[0], n_range[1] + 1)) if len(n_range) == 2 else list(n_range)
    if len(ns) < 4:
        raise InvalidInputError("n_range needs at least 4 values")
    ks = branch_factors(system)
    if method == "auto":
        method = GREEDY if greedy_cost(ks, max(ns)) <= budget else ITINERARY
    if method == GREEDY:
        counts = [separated_count(system, n, epsilon, budget=budget) for n in ns]
    elif method == ITINERARY:
        counts = [itinerary_count(system, n, epsilon) for n in ns]
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    half = len(ns) // 2
    x = np.array(ns[half:], float)
    y = np.log(np.array(counts[half:], float))
    coef, cov = np.polyfit(x, y, 1, cov=True) if len(x) > 2 else (np.polyfit(x, y, 1), None)
    stderr = float(np.sqrt(cov[0, 0])) if cov is not None else float("nan")
    formula = friedland_formula(*np.log(ks)) if len(ks) == 2 else None
    return FriedlandEstimate(tuple(ns), tuple(counts), float(coef[0]), stderr, formula,
                             float(epsilon), depth_for(epsilon), method)


def factor_map_residual(system: CommutingSystem, word, x0) -> float:
    """Largest gap between the projection of F(w, x) and the shifted projection of (w, x)."""
    word = np.asarray(word, dtype=np.int8).reshape(-1)
    if len(word) < 2:
        raise InvalidInputError("need a word of length >= 2")
    traj = compose_orbit(system, word, x0)
    image = compose_orbit(system, word[1:], traj[1])
    return float(np.max(np.abs(image - traj[1:])))
