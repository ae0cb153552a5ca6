"""Dense frame and subspace linear algebra.

A frame is stored column-wise: ``vectors[:, i]`` is the i-th vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DegenerateFrameError, InvalidInputError

DEGENERACY_TOL = 1e-12
CHOLESKY_CLAMP = 1e-12


@dataclass(frozen=True)
class Frame:
    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] == 0:
            raise InvalidInputError("frame needs a (dim, count) array with count >= 1")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("frame has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def count(self) -> int:
        return self.vectors.shape[1]

    def is_orthonormal(self, tol: float = 1e-10) -> bool:
        g = self.vectors.T @ self.vectors
        return bool(np.max(np.abs(g - np.eye(self.count))) <= tol)

    @classmethod
    def random(cls, dim: int, count: int, rng: np.random.Generator) -> "Frame":
        """Haar-random orthonormal frame."""
        q, r = np.linalg.qr(rng.standard_normal((dim, count)))
        return cls(q * np.sign(np.diag(r)))

    @classmethod
    def standard(cls, dim: int, count: int | None = None) -> "Frame":
        return cls(np.eye(dim)[:, : dim if count is None else count])


@dataclass(frozen=True)
class Subspace:
    basis: Frame
    label: object = field(default=None, compare=False)

    def __post_init__(self):
        b = self.basis if isinstance(self.basis, Frame) else Frame(self.basis)
        if not b.is_orthonormal():
            b = Frame(orthonormalize(b.vectors))
        if b.count > b.dim:
            raise InvalidInputError("subspace basis has more vectors than dimensions")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.count

    @property
    def ambient_dim(self) -> int:
        return self.basis.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.basis.vectors

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace."""
        q = self.matrix
        return q @ q.T

    @classmethod
    def span(cls, vectors, label=None, tol: float = 1e-10) -> "Subspace":
        return cls(Frame(orthonormalize(np.atleast_2d(np.asarray(vectors, float)), tol)), label)


def _as_array(frame) -> np.ndarray:
    v = frame.vectors if isinstance(frame, Frame) else np.asarray(frame, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("frame has non-finite entries")
    return v


def orthonormalize(vectors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column span, rank-revealing."""
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise InvalidInputError("cannot orthonormalize the zero frame")
    rank = int(np.sum(s > tol * s[0]))
    return u[:, :rank]


def pivoted_cholesky_pivots(gram: np.ndarray) -> np.ndarray:
    """Diagonal pivots of a symmetrically pivoted Cholesky factorization.

    Pivots that come out negative by less than ``CHOLESKY_CLAMP`` (relative to
    the largest diagonal entry) are clamped to zero, and so is the rest of
    the factorization; the product of the pivots is the determinant.
    """
    a = np.array(gram, dtype=float)
    p = a.shape[0]
    scale = max(float(np.max(np.diag(a))), 0.0)
    pivots = np.zeros(p)
    for k in range(p):
        j = k + int(np.argmax(np.diag(a)[k:]))
        if j != k:
            a[[k, j]] = a[[j, k]]
            a[:, [k, j]] = a[:, [j, k]]
        piv = a[k, k]
        if piv <= 0.0:
            if piv < -CHOLESKY_CLAMP * max(scale, 1.0):
                raise InvalidInputError(f"Gram matrix is not positive semidefinite (pivot {piv:g})")
            # remaining block is numerically zero
            return pivots
        pivots[k] = piv
        col = a[k + 1 :, k] / piv
        a[k + 1 :, k + 1 :] -= np.outer(col, a[k, k + 1 :])
    return pivots


def gram_volume(frame) -> float:
    """p-dimensional volume of the parallelotope spanned by the frame vectors."""
    v = _as_array(frame)
    return float(np.sqrt(np.prod(pivoted_cholesky_pivots(v.T @ v))))


ORTHONORMAL_TOL = 1e-12


def _orthonormal_stack(v: np.ndarray) -> np.ndarray:
    """Q factor of each frame in a (S, d, p) stack, skipped when already orthonormal."""
    gram = np.swapaxes(v, -1, -2) @ v
    if np.abs(gram - np.eye(v.shape[-1])).max() <= ORTHONORMAL_TOL:
        return v
    q, r = np.linalg.qr(v)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    if np.any(np.abs(d) <= DEGENERACY_TOL * np.abs(r).max()):
        raise InvalidInputError("input frame is linearly dependent")
    return q * np.where(d < 0, -1.0, 1.0)[..., None, :]


def qr_push(frame, action, step=None):
    """Push a frame through a linear action and reorthonormalize.

    Returns ``(new_frame, log_diagonal)`` where ``log_diagonal[i]`` is the log
    of the i-th diagonal entry of the positive-diagonal triangular factor.
    A frame that is not orthonormal is replaced by its Q factor first, so the
    log-diagonals always sum to log(vol(A F) / vol(F)).
    Raises DegenerateFrameError if a pivot falls below ``DEGENERACY_TOL``
    relative to the largest image column.
    """
    v = _orthonormal_stack(_as_array(frame)[None])[0]
    a = np.asarray(action, dtype=float)
    q, r = np.linalg.qr(a @ v)
    d = np.diag(r)
    sign = np.where(d < 0, -1.0, 1.0)
    q = q * sign
    d = np.abs(d)
    scale = max(float(np.max(np.abs(r))), 1e-300)
    bad = np.flatnonzero(d < DEGENERACY_TOL * scale)
    if bad.size:
        raise DegenerateFrameError(
            f"frame collapsed at vector {int(bad[0])}" + ("" if step is None else f" (step {step})"),
            index=int(bad[0]),
            step=step,
        )
    return Frame(q), np.log(d)


def qr_push_batch(frames: np.ndarray, actions: np.ndarray, step=None):
    """Batched qr_push over a leading sample axis.

    ``frames`` has shape (S, d, p) and ``actions`` shape (S, d, d). Returns
    raw arrays, not Frame objects, since this is the inner loop of the
    Monte Carlo estimators.
    """
    q, r = np.linalg.qr(actions @ _orthonormal_stack(np.asarray(frames, float)))
    d = np.diagonal(r, axis1=1, axis2=2)
    sign = np.where(d < 0, -1.0, 1.0)
    q = q * sign[:, None, :]
    d = np.abs(d)
    scale = np.maximum(np.max(np.abs(r), axis=(1, 2)), 1e-300)
    bad = d < DEGENERACY_TOL * scale[:, None]
    if bad.any():
        s, idx = np.argwhere(bad)[0]
        raise DegenerateFrameError(
            f"frame collapsed at vector {int(idx)} in sample {int(s)}"
            + ("" if step is None else f" (step {step})"),
            index=int(idx),
            step=step,
        )
    return q, np.log(d)


def principal_angles(u, v) -> np.ndarray:
    """Principal angles between two subspaces, ascending, in [0, pi/2]."""
    a = u.matrix if isinstance(u, Subspace) else _as_array(u)
    b = v.matrix if isinstance(v, Subspace) else _as_array(v)
    if a.shape[0] != b.shape[0]:
        raise InvalidInputError(f"ambient dimensions differ: {a.shape[0]} vs {b.shape[0]}")
    return np.sort(scipy.linalg.subspace_angles(a, b))


def intersect(u: np.ndarray, v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of span(u) ∩ span(v) (possibly with zero columns)."""
    # x = u a = v b  <=>  [u, -v] [a; b] = 0
    m = np.hstack([u, -v])
    _, s, vh = np.linalg.svd(m)
    s = np.concatenate([s, np.zeros(m.shape[1] - s.size)])
    null = vh[s <= tol * max(s[0], 1.0)].T
    if null.shape[1] == 0:
        return np.zeros((u.shape[0], 0))
    return orthonormalize(u @ null[: u.shape[1]], tol)
