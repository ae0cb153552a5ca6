"""Named example systems, runnable by name from the CLI."""

import numpy as np

from .errors import InvalidInputError
from .systems import CommutingSystem, circle_expanding, linear_toral, truncated_operator

CAT = ((2, 1), (1, 1))
CAT_SQUARED = ((5, 3), (3, 2))
CAT_INVERSE = ((1, -1), (-1, 2))

#: log of the cat map's expanding eigenvalue, log((3 + sqrt 5) / 2)
CAT_LAMBDA = float(np.log((3 + np.sqrt(5)) / 2))


def cat_map():
    return linear_toral(CAT, name="cat")


def compact_diag(d: int = 64):
    """diag(1/k), k = 1..d, with the tail bound 1/(d+1) of the discarded block."""
    return truncated_operator(np.diag(1.0 / np.arange(1, d + 1)), tail_norm_bound=1.0 / (d + 1),
                              name="compact-diag")


def compact_diag_squared(d: int = 64):
    return truncated_operator(np.diag(1.0 / np.arange(1, d + 1) ** 2),
                              tail_norm_bound=1.0 / (d + 1) ** 2, name="compact-diag-squared")


def shift_plus_finite_rank(d: int = 32, rank: int = 3, seed: int = 0):
    """0.5 * (cyclic shift on C^d) + a rank-``rank`` block on the first coordinates.

    The matrix is the whole operator, so the declared tail bound is 0. The
    cyclic link e_d -> e_1 lands inside every projection range, which leaves
    ||(I - P_N) T|| = 0.5 for rank <= N < d.
    """
    g = np.random.default_rng(seed)
    t = 0.5 * np.roll(np.eye(d), 1, axis=0)
    t[:rank, :rank] += 0.2 * g.standard_normal((rank, rank))
    return truncated_operator(t, tail_norm_bound=0.0, radius=None, name="shift-plus-finite-rank")


def _systems():
    cat = cat_map()
    return {
        "cat-and-square": lambda: CommutingSystem.build(
            cat, linear_toral(CAT_SQUARED, name="cat-squared"), (0.5, 0.5), name="cat-and-square"),
        "cat-and-inverse": lambda: CommutingSystem.build(
            cat, linear_toral(CAT_INVERSE, name="cat-inverse"), (0.5, 0.5), name="cat-and-inverse"),
        "times2-times3": lambda: CommutingSystem.build(
            circle_expanding(2), circle_expanding(3), (0.5, 0.5), name="times2-times3"),
        "diag-mixed": lambda: CommutingSystem.build(
            truncated_operator(np.diag([2.0, 0.5]), radius=None, name="diag(2,1/2)"),
            truncated_operator(np.diag([0.5, 2.0]), radius=None, name="diag(1/2,2)"),
            (0.5, 0.5), name="diag-mixed"),
        "compact-diag": lambda: CommutingSystem.build(
            compact_diag(), compact_diag_squared(), (0.5, 0.5), name="compact-diag"),
    }


SINGLE_MAPS = {
    "cat": cat_map,
    "times2": lambda: circle_expanding(2),
    "times3": lambda: circle_expanding(3),
    "compact-diag": compact_diag,
    "shift-plus-finite-rank": shift_plus_finite_rank,
}

SYSTEM_NAMES = tuple(_systems())


def builtin_system(name: str, nu=None) -> CommutingSystem:
    table = _systems()
    if name not in table:
        raise InvalidInputError(f"unknown built-in system {name!r}; choose from {sorted(table)}")
    s = table[name]()
    return s if nu is None else s.with_nu(nu)


def builtin_map(name: str):
    if name not in SINGLE_MAPS:
        raise InvalidInputError(f"unknown built-in map {name!r}; choose from {sorted(SINGLE_MAPS)}")
    return SINGLE_MAPS[name]()
