"""Generator maps, commuting pairs, Bernoulli words and skew-product orbits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rng as _rng
from .errors import InvalidInputError, InvalidStateError
from .linalg import Frame

LINEAR_TORAL = "linear-toral"
CIRCLE_EXPANDING = "circle-expanding"
TRUNCATED_OPERATOR = "truncated-operator"
CUSTOM = "custom"
KINDS = (LINEAR_TORAL, CIRCLE_EXPANDING, TRUNCATED_OPERATOR, CUSTOM)

COMMUTATION_TOL = 1e-9
WEIGHT_TOL = 1e-12
INJECTIVITY_TOL = 1e-12
# commutation is sampled on this dyadic grid: integer maps act on it without rounding
DYADIC_GRID = 2.0 ** -32


def wrap(x):
    """Reduce toral coordinates to [0, 1).

    ``np.mod`` can return exactly 1.0 for inputs a hair below an integer;
    those are folded to 0.0 so every point has one representative.
    """
    y = np.mod(x, 1.0)
    return np.where(y >= 1.0, 0.0, y)


def circle_gap(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b))
    d = np.mod(d, 1.0)
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True, eq=False)
class DynamicalMap:
    """A point map together with its derivative.

    Use the ``linear_toral``, ``circle_expanding``, ``truncated_operator``
    and ``custom`` constructors rather than building this directly.
    """

    kind: str
    dim: int
    name: str
    matrix: np.ndarray | None = None
    factor: int | None = None
    tail_norm_bound: float | None = None
    radius: float | None = None
    point_map: Callable | None = field(default=None, repr=False)
    tangent_map: Callable | None = field(default=None, repr=False)
    periodic: bool = True

    @property
    def constant_jacobian(self) -> bool:
        return self.kind != CUSTOM

    def jacobian(self, x=None) -> np.ndarray:
        if self.kind == LINEAR_TORAL or self.kind == TRUNCATED_OPERATOR:
            return self.matrix.astype(float)
        if self.kind == CIRCLE_EXPANDING:
            return np.array([[float(self.factor)]])
        j = np.atleast_2d(np.asarray(self.tangent_map(np.asarray(x, float)), dtype=float))
        if j.shape != (self.dim, self.dim):
            raise InvalidStateError(f"{self.name}: tangent map returned shape {j.shape}")
        return j

    def jacobian_stack(self, xs: np.ndarray) -> np.ndarray:
        """Jacobians at a stack of points, shape (S, d, d)."""
        if self.constant_jacobian:
            return np.broadcast_to(self.jacobian(), (len(xs), self.dim, self.dim))
        return np.stack([self.jacobian(x) for x in xs])

    def distance(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if self.periodic:
            return float(np.linalg.norm(circle_gap(x, y)))
        return float(np.linalg.norm(x - y))

    def __repr__(self):
        return f"DynamicalMap({self.kind!r}, name={self.name!r}, dim={self.dim})"


def linear_toral(matrix, name: str = "toral") -> DynamicalMap:
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name}: toral matrix must be square")
    if not np.all(np.equal(np.mod(a, 1), 0)):
        raise InvalidInputError(f"{name}: toral matrix must have integer entries")
    a = a.astype(np.int64)
    if round(np.linalg.det(a.astype(float))) == 0:
        raise InvalidInputError(f"{name}: toral matrix must have nonzero determinant")
    a.setflags(write=False)
    return DynamicalMap(LINEAR_TORAL, a.shape[0], name, matrix=a)


def circle_expanding(k: int, name: str | None = None) -> DynamicalMap:
    if int(k) != k or k < 2:
        raise InvalidInputError(f"circle-expanding factor must be an integer >= 2, got {k}")
    return DynamicalMap(CIRCLE_EXPANDING, 1, name or f"times{int(k)}", factor=int(k))


def truncated_operator(matrix, tail_norm_bound: float | None = None, radius: float | None = 1.0,
                       name: str = "operator") -> DynamicalMap:
    """Finite compression of a sequence-space operator acting on a closed ball.

    ``tail_norm_bound`` is the caller's upper estimate for the norm of the
    discarded part of the operator; it is never inferred. ``radius=None``
    drops the ball constraint (plain linear map of R^d).
    """
    t = np.array(matrix, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InvalidInputError(f"{name}: operator matrix must be square")
    if not np.all(np.isfinite(t)):
        raise InvalidInputError(f"{name}: operator matrix has non-finite entries")
    s = np.linalg.svd(t, compute_uv=False)
    if s[-1] <= INJECTIVITY_TOL * max(s[0], 1.0):
        raise InvalidInputError(f"{name}: operator truncation is not injective")
    if tail_norm_bound is not None and tail_norm_bound < 0:
        raise InvalidInputError(f"{name}: tail_norm_bound must be nonnegative")
    t.setflags(write=False)
    return DynamicalMap(TRUNCATED_OPERATOR, t.shape[0], name, matrix=t,
                        tail_norm_bound=tail_norm_bound,
                        radius=None if radius is None else float(radius), periodic=False)


def custom(point_map: Callable, tangent_map: Callable, dim: int, name: str = "custom",
           periodic: bool = False) -> DynamicalMap:
    """A nonlinear map given by callbacks.

    Injectivity of the tangent map can only be spot-checked on sampled
    points (see ``check_tangent_injective``).
    """
    return DynamicalMap(CUSTOM, int(dim), name, point_map=point_map, tangent_map=tangent_map,
                        periodic=periodic)


def _check_point(m: DynamicalMap, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(m.dim)
    if not np.all(np.isfinite(x)):
        raise InvalidStateError(f"{m.name}: non-finite coordinates {x}")
    return x


def apply(m: DynamicalMap, x) -> np.ndarray:
    x = _check_point(m, x)
    if m.kind == LINEAR_TORAL:
        return wrap(m.matrix @ x)
    if m.kind == CIRCLE_EXPANDING:
        return wrap(m.factor * x)
    if m.kind == TRUNCATED_OPERATOR:
        y = m.matrix @ x
        if m.radius is not None and np.linalg.norm(y) > m.radius * (1 + 1e-12):
            raise InvalidStateError(f"{m.name}: image left the declared ball of radius {m.radius}")
        return y
    y = np.asarray(m.point_map(x), dtype=float).reshape(m.dim)
    if not np.all(np.isfinite(y)):
        raise InvalidStateError(f"{m.name}: image has non-finite coordinates")
    return wrap(y) if m.periodic else y


def apply_stack(m: DynamicalMap, xs: np.ndarray) -> np.ndarray:
    """``apply`` over a stack of points of shape (S, d)."""
    if m.kind == LINEAR_TORAL:
        return wrap(xs @ m.matrix.T)
    if m.kind == CIRCLE_EXPANDING:
        return wrap(m.factor * xs)
    return np.stack([apply(m, x) for x in xs])


def tangent_apply(m: DynamicalMap, x, frame) -> Frame:
    v = frame.vectors if isinstance(frame, Frame) else np.asarray(frame, float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] != m.dim:
        raise InvalidInputError(f"frame dimension {v.shape[0]} does not match map dimension {m.dim}")
    return Frame(m.jacobian(x) @ v)


def sample_points(m: DynamicalMap, count: int, seed: int) -> np.ndarray:
    g = _rng.stream(seed, _rng.POINT_STREAM)
    if m.kind == TRUNCATED_OPERATOR:
        d = g.standard_normal((count, m.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = (m.radius or 1.0) * g.random(count) ** (1.0 / m.dim)
        return d * r[:, None]
    return g.random((count, m.dim))


def check_tangent_injective(m: DynamicalMap, sample_count: int = 100, seed: int = 0) -> bool:
    for x in sample_points(m, sample_count, seed):
        s = np.linalg.svd(m.jacobian(x), compute_uv=False)
        if s[-1] <= INJECTIVITY_TOL * max(s[0], 1.0):
            return False
    return True


@dataclass(frozen=True)
class CommutationReport:
    max_residual: float
    mean_residual: float
    sample_count: int

    @property
    def passed(self) -> bool:
        return self.max_residual <= COMMUTATION_TOL


def check_commutation(f1: DynamicalMap, f2: DynamicalMap, sample_count: int = 100,
                      seed: int = 0) -> CommutationReport:
    if f1.dim != f2.dim:
        raise InvalidInputError(f"dimension mismatch: {f1.dim} vs {f2.dim}")
    if sample_count < 1:
        raise InvalidInputError("sample_count must be >= 1")
    res = []
    points = sample_points(f1, sample_count, seed)
    if f1.periodic and f2.periodic:
        points = np.floor(points / DYADIC_GRID) * DYADIC_GRID
    for x in points:
        res.append(f1.distance(apply(f1, apply(f2, x)), apply(f2, apply(f1, x))))
    res = np.array(res)
    return CommutationReport(float(res.max()), float(res.mean()), sample_count)


def validate_nu(nu) -> tuple[float, float]:
    nu = tuple(float(v) for v in nu)
    if len(nu) != 2:
        raise InvalidInputError("nu must be a pair of weights")
    if any(not np.isfinite(v) or v < 0 for v in nu):
        raise InvalidInputError(f"nu weights must be finite and nonnegative, got {nu}")
    if abs(sum(nu) - 1.0) > WEIGHT_TOL:
        raise InvalidInputError(f"nu weights must sum to 1, got {sum(nu)!r}")
    return nu


@dataclass(frozen=True, eq=False)
class CommutingSystem:
    f1: DynamicalMap
    f2: DynamicalMap
    nu: tuple
    commutation_residual: float
    name: str = "system"

    @classmethod
    def build(cls, f1, f2, nu=(0.5, 0.5), sample_count: int = 100, seed: int = 0,
              name: str = "system") -> "CommutingSystem":
        nu = validate_nu(nu)
        report = check_commutation(f1, f2, sample_count, seed)
        if not report.passed:
            raise InvalidInputError(
                f"{f1.name} and {f2.name} do not commute (residual {report.max_residual:.3g})")
        return cls(f1, f2, nu, report.max_residual, name)

    @property
    def dim(self) -> int:
        return self.f1.dim

    @property
    def generators(self) -> tuple:
        return (self.f1, self.f2)

    def generator(self, symbol: int) -> DynamicalMap:
        return self.f1 if symbol == 1 else self.f2

    def with_nu(self, nu) -> "CommutingSystem":
        return CommutingSystem(self.f1, self.f2, validate_nu(nu), self.commutation_residual, self.name)


@dataclass(frozen=True, eq=False)
class RandomWord:
    symbols: np.ndarray
    seed: int | None = None
    nu: tuple | None = None

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.int8).reshape(-1)
        if s.size and not np.all((s == 1) | (s == 2)):
            raise InvalidInputError("word symbols must be 1 or 2")
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)

    @property
    def counts(self) -> tuple[int, int]:
        n1 = int(np.count_nonzero(self.symbols == 1))
        return n1, len(self) - n1

    def __len__(self):
        return int(self.symbols.size)

    def regenerate(self) -> "RandomWord":
        return sample_word(self.nu, len(self), self.seed)


def sample_word(nu, n: int, seed: int) -> RandomWord:
    """i.i.d. word of length n with P(symbol 1) = nu[0]."""
    nu = validate_nu(nu)
    if n < 1:
        raise InvalidInputError("word length must be >= 1")
    u = _rng.stream(seed, _rng.WORD_STREAM).random(n)
    return RandomWord(np.where(u < nu[0], 1, 2), seed=seed, nu=nu)


def compose_orbit(system: CommutingSystem, word, x0) -> np.ndarray:
    """Points f(m, w) x0 for m = 0..len(word), one per row."""
    symbols = word.symbols if isinstance(word, RandomWord) else np.asarray(word, dtype=np.int8)
    x = _check_point(system.f1, x0)
    out = np.empty((len(symbols) + 1, system.dim))
    out[0] = x
    for m, s in enumerate(symbols):
        try:
            x = apply(system.generator(int(s)), x)
        except InvalidStateError as exc:
            raise InvalidStateError(f"orbit index {m + 1}: {exc}") from exc
        out[m + 1] = x
    return out
