"""Compactness-index bounds and lattice covering exponents of tangent maps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .. import rng as _rng
from ..checks import ResidualRow
from ..errors import InvalidInputError, ResourceError, UnsupportedMapError
from ..systems import TRUNCATED_OPERATOR, CommutingSystem, DynamicalMap, sample_word, validate_nu

CELL_CAP = 10**7
MAX_COVER_DIM = 3


@dataclass(frozen=True)
class IndexReport:
    dims: tuple
    tail_norms: tuple
    bounds: tuple
    tail_bound: float

    @property
    def estimate(self) -> float:
        return min(self.bounds)

    @property
    def monotone(self) -> bool:
        return all(b2 <= b1 + 1e-15 for b1, b2 in zip(self.bounds, self.bounds[1:]))

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "tail_norms": list(self.tail_norms),
                "bounds": list(self.bounds), "tail_bound": self.tail_bound,
                "estimate": self.estimate, "monotone": self.monotone}


def tail_norm(t: np.ndarray, n: int) -> float:
    """||(I - P_N) T|| in the operator 2-norm, P_N onto the first N coordinates."""
    rest = np.asarray(t, float)[n:]
    return float(np.linalg.norm(rest, 2)) if rest.size else 0.0


def _truncated(m: DynamicalMap) -> np.ndarray:
    if m.kind != TRUNCATED_OPERATOR:
        raise UnsupportedMapError(f"{m.name}: index bounds need a truncated-operator map")
    if m.tail_norm_bound is None:
        raise InvalidInputError(f"{m.name}: missing tail bound")
    return m.matrix


def kuratowski_index(m: DynamicalMap, truncation_dims) -> IndexReport:
    """Upper bounds ||(I - P_N) T|| + tail for each N, and their minimum."""
    t = _truncated(m)
    dims = tuple(int(n) for n in truncation_dims)
    if not dims or any(b <= a for a, b in zip(dims, dims[1:])):
        raise InvalidInputError("truncation_dims must be a nonempty ascending list")
    if dims[0] < 0 or dims[-1] > m.dim:
        raise InvalidInputError(f"truncation dims must lie in [0, {m.dim}]")
    tails = tuple(tail_norm(t, n) for n in dims)
    return IndexReport(dims, tails, tuple(x + m.tail_norm_bound for x in tails), m.tail_norm_bound)


def _log_tail_of_product(mats, n_trunc: int) -> float:
    """log ||(I - P_N) M_k ... M_1|| with renormalization against underflow."""
    d = mats[0].shape[0]
    prod = np.eye(d)
    log_scale = 0.0
    for a in mats:
        prod = a @ prod
        s = np.abs(prod).max()
        if s == 0:
            return -np.inf
        prod /= s
        log_scale += np.log(s)
    tn = tail_norm(prod, n_trunc)
    return -np.inf if tn == 0 else log_scale + np.log(tn)


def alpha_rate_check(system: CommutingSystem, n: int, samples: int, truncation_dim: int,
                     seed: int = 0) -> list[ResidualRow]:
    """Index rate of random products against the nu-weighted generator rates.

    Per sample: (1/n) log e(A_w) with e(M) = ||(I - P_N) M||, checked
    against (1/n) (log e(A1^n1) + log e(A2^n2)). The bound is
    submultiplicativity of e, valid when both maps preserve span(P_N).
    """
    mats = [_truncated(g) for g in system.generators]
    nu = validate_nu(system.nu)
    rows = []
    for s in range(samples):
        word = sample_word(nu, n, _rng.derive_seed(seed, s))
        n1, n2 = word.counts
        est = _log_tail_of_product([mats[k - 1] for k in word.symbols], truncation_dim) / n
        parts = [_log_tail_of_product([mats[i]] * c, truncation_dim) if c else 0.0
                 for i, c in enumerate((n1, n2))]
        bound = sum(parts) / n
        # one-sided check: only an excess over the bound counts as residual
        excess = est if est > bound else bound
        rows.append(ResidualRow(f"alpha sample {s}", excess, bound, 1e-9,
                                note=f"random={est:.6g} bound={bound:.6g}"))
    return rows


# ---------------------------------------------------------------- covering


def _extreme(rows: np.ndarray, k: int, lo: np.ndarray, hi: np.ndarray, sign: float) -> np.ndarray:
    """max over the unit ball of sign * (rows[k] . u) under lo <= rows[:k] u <= hi.

    Vectorized over boxes (lo, hi have shape (B, k)). Enumerates active sets:
    each constrained coordinate is free, at its lower face or at its upper
    face. Returns -inf where no candidate is feasible.
    """
    c = sign * rows[k]
    B = lo.shape[0]
    best = np.full(B, -np.inf)
    scale = np.abs(rows).max()
    ftol = 1e-9 * max(scale, 1.0)
    for pattern in itertools.product((0, 1, 2), repeat=k):
        active = [i for i, p in enumerate(pattern) if p]
        if active:
            p_s = rows[active]
            vals = np.stack([lo[:, i] if pattern[i] == 1 else hi[:, i] for i in active], axis=1)
            u0 = vals @ np.linalg.pinv(p_s).T
            consistent = np.all(np.abs(u0 @ p_s.T - vals) <= ftol, axis=1)
            # an SVD null-space basis keeps the search direction exactly on the
            # active faces; projecting c with I - pinv(P) P loses too many digits
            null = scipy.linalg.null_space(p_s)
        else:
            u0 = np.zeros((B, rows.shape[1]))
            consistent = np.ones(B, bool)
            null = np.eye(rows.shape[1])
        r2 = 1.0 - np.einsum("bi,bi->b", u0, u0)
        c_perp = null @ (null.T @ c)
        cn = np.linalg.norm(c_perp)
        step = np.sqrt(np.clip(r2, 0.0, None))
        u = u0 + (step[:, None] * (c_perp / cn)[None, :] if cn > 1e-300 else 0.0)
        ok = consistent & (r2 >= -1e-12)
        if k:
            y = u @ rows[:k].T
            ok &= np.all((y >= lo - ftol) & (y <= hi + ftol), axis=1)
        best = np.where(ok, np.maximum(best, u @ c), best)
    return best


def lattice_cover_count(m: np.ndarray, side: float, cap: int = CELL_CAP) -> int:
    """Boxes of the lattice side * Z^d meeting the image of the unit ball under m.

    Boxes are enumerated coordinate by coordinate: for each partial box the
    exact range of the next coordinate over the ellipsoid slice is computed.
    ``cap`` bounds the number of materialized partial boxes.
    """
    m = np.atleast_2d(np.asarray(m, float))
    d = m.shape[0]
    if d > MAX_COVER_DIM:
        raise UnsupportedMapError(f"lattice covering supports dim <= {MAX_COVER_DIM}, got {d}")
    rows = m
    lo = np.zeros((1, 0))
    hi = np.zeros((1, 0))
    for k in range(d):
        top = _extreme(rows, k, lo, hi, 1.0)
        bottom = -_extreme(rows, k, lo, hi, -1.0)
        feasible = np.isfinite(top) & np.isfinite(bottom)
        j0 = np.floor(bottom[feasible] / side).astype(np.int64)
        j1 = np.floor(top[feasible] / side).astype(np.int64)
        counts = np.maximum(j1 - j0 + 1, 0)
        if k == d - 1:
            return int(counts.sum())
        total = int(counts.sum())
        if total > cap:
            raise ResourceError(f"{total} partial lattice boxes exceed the cap {cap}")
        base = np.repeat(np.arange(counts.size), counts)
        offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        j = (np.repeat(j0, counts) + offs).astype(float)
        lo = np.hstack([lo[feasible][base], (j * side)[:, None]])
        hi = np.hstack([hi[feasible][base], ((j + 1) * side)[:, None]])
    return 1


@dataclass(frozen=True)
class CoveringReport:
    n_values: tuple
    counts: tuple
    beta: float
    slope: float
    lower: float
    upper: float

    @property
    def rate(self) -> float:
        """(1/n) log(count) at the largest n."""
        return float(np.log(self.counts[-1]) / self.n_values[-1])

    def to_dict(self) -> dict:
        return {"n": list(self.n_values), "counts": list(self.counts), "beta": self.beta,
                "slope": self.slope, "rate": self.rate, "lower": self.lower, "upper": self.upper}


def _tangent_power(m: DynamicalMap, x0, n: int) -> np.ndarray:
    if m.constant_jacobian:
        return np.linalg.matrix_power(m.jacobian(), n)
    from ..systems import apply
    x = np.asarray(x0, float)
    prod = np.eye(m.dim)
    for _ in range(n):
        prod = m.jacobian(x) @ prod
        x = apply(m, x)
    return prod


def covering_exponent(m: DynamicalMap, x0, beta: float, n: int, grid: int = 8,
                      cap: int = CELL_CAP) -> CoveringReport:
    """Growth of lattice covers of d_x f^k (unit ball) at scale exp(-k beta).

    Counts are taken for k = n - grid + 1 .. n and the slope is the
    least-squares fit of log(count) against k. ``lower`` and ``upper`` are
    sum (lambda + beta)^+ over the eigenvalue log-moduli, which coincide for
    a single map.
    """
    if beta <= 0:
        raise InvalidInputError("beta must be positive")
    if m.dim > MAX_COVER_DIM:
        raise UnsupportedMapError(f"lattice covering supports dim <= {MAX_COVER_DIM}, got {m.dim}")
    if grid < 2 or n < grid:
        raise InvalidInputError("need n >= grid >= 2")
    ks = list(range(n - grid + 1, n + 1))
    counts = []
    for k in ks:
        try:
            counts.append(lattice_cover_count(_tangent_power(m, x0, k), np.exp(-k * beta), cap))
        except ResourceError as exc:
            raise ResourceError(f"covering at n={k}: {exc}", feasible=k - 1) from exc
    slope = float(np.polyfit(ks, np.log(counts), 1)[0])
    if m.constant_jacobian:
        lams = np.log(np.abs(np.linalg.eigvals(m.jacobian())))
    else:
        lams = np.log(np.abs(np.linalg.eigvals(_tangent_power(m, x0, n)))) / n
    bound = float(np.sum(np.clip(lams + beta, 0.0, None)))
    return CoveringReport(tuple(ks), tuple(counts), beta, slope, bound, bound)
