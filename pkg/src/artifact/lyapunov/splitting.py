"""Joint splittings of commuting constant cocycles and the identities they satisfy."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .. import rng as _rng
from ..checks import ResidualRow
from ..errors import InvalidInputError, UnsupportedMapError
from ..linalg import Subspace, gram_volume, intersect, principal_angles
from ..systems import COMMUTATION_TOL, CUSTOM, CommutingSystem, DynamicalMap, sample_word, validate_nu

MODULUS_TOL = 1e-8
INVARIANCE_TOL = 1e-6

JOINT = "joint"
DEFECT_F1 = "defect-f1"
DEFECT_F2 = "defect-f2"
ALPHA = "alpha"


def spectral_groups(a: np.ndarray, tol: float = MODULUS_TOL) -> list[tuple[float, np.ndarray]]:
    """Invariant subspaces of ``a`` grouped by eigenvalue modulus, descending.

    Each entry is (log-modulus, orthonormal basis). Groups are cut out of
    ordered real Schur forms: the span of eigenvalues with modulus >= lo
    intersected with the span of those with modulus <= hi.
    """
    a = np.asarray(a, float)
    d = a.shape[0]
    logs = np.log(np.abs(np.linalg.eigvals(a)))
    levels = np.sort(logs)[::-1]
    clusters = [[levels[0]]]
    for v in levels[1:]:
        if clusters[-1][-1] - v > tol:
            clusters.append([v])
        else:
            clusters[-1].append(v)
    if len(clusters) == 1:
        return [(float(np.mean(clusters[0])), np.eye(d))]
    out = []
    for c in clusters:
        lo, hi = min(c) - tol / 2, max(c) + tol / 2
        _, z_ge, k_ge = scipy.linalg.schur(
            a, output="real", sort=lambda re, im, lo=lo: np.log(np.hypot(re, im)) >= lo)
        _, z_le, k_le = scipy.linalg.schur(
            a, output="real", sort=lambda re, im, hi=hi: np.log(np.hypot(re, im)) <= hi)
        basis = intersect(z_ge[:, :k_ge], z_le[:, :k_le])
        if basis.shape[1] != len(c):
            raise InvalidInputError(
                f"spectral subspace for log-modulus {np.mean(c):.6g} has dimension "
                f"{basis.shape[1]}, expected {len(c)}")
        out.append((float(np.mean(c)), basis))
    return out


@dataclass(frozen=True)
class JointBlock:
    subspace: Subspace
    pair: tuple[float, float]
    kind: str

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def weighted(self, nu) -> float:
        return nu[0] * self.pair[0] + nu[1] * self.pair[1]


@dataclass(frozen=True, eq=False)
class JointSplitting:
    """Common refinement of two commuting linear maps' spectral splittings."""

    blocks: tuple
    defect_blocks_f1: tuple
    defect_blocks_f2: tuple
    alpha_blocks: tuple
    matrices: tuple = field(repr=False)
    lambda_alpha: float = 0.0

    @property
    def all_blocks(self) -> tuple:
        return self.blocks + self.defect_blocks_f1 + self.defect_blocks_f2 + self.alpha_blocks

    @property
    def alpha_block(self) -> Subspace | None:
        if not self.alpha_blocks:
            return None
        return Subspace.span(np.hstack([b.subspace.matrix for b in self.alpha_blocks]), label="alpha")

    @property
    def alpha_dim(self) -> int:
        return sum(b.dim for b in self.alpha_blocks)

    @property
    def ambient_dim(self) -> int:
        return self.matrices[0].shape[0]

    def generator_spectrum(self, i: int) -> list[tuple[float, int]]:
        """(exponent, multiplicity) of generator i (0 or 1), descending."""
        table: dict[float, list] = {}
        for b in self.all_blocks:
            # equal exponents from different blocks merge; the first exact value is kept
            entry = table.setdefault(round(b.pair[i], 10), [b.pair[i], 0])
            entry[1] += b.dim
        return sorted(((lam, m) for lam, m in table.values()), reverse=True)

    def defect_dims(self, i: int) -> list[tuple[float, int, int]]:
        """(exponent, m, d) for generator i's exponents above the threshold.

        d = m minus the dimension of the blocks where generator i expands and
        the other generator does not.
        """
        defects = self.defect_blocks_f1 if i == 0 else self.defect_blocks_f2
        rows = []
        for lam, m in self.generator_spectrum(i):
            if lam <= self.lambda_alpha:
                continue
            lost = sum(b.dim for b in defects if round(b.pair[i], 10) == round(lam, 10))
            rows.append((lam, m, m - lost))
        return rows

    def unstable_space(self, i: int) -> np.ndarray:
        """Basis of the span of blocks where generator i expands."""
        cols = [b.subspace.matrix for b in self.all_blocks if b.pair[i] > self.lambda_alpha]
        if not cols:
            return np.zeros((self.ambient_dim, 0))
        return np.hstack(cols)

    def h3_angles(self) -> np.ndarray:
        """Principal angles between the two generators' unstable spaces."""
        u, v = self.unstable_space(0), self.unstable_space(1)
        k = min(u.shape[1], v.shape[1])
        angles = principal_angles(u, v)[:k] if k else np.zeros(0)
        # a dimension mismatch leaves directions with no partner at all
        return np.append(angles, [np.pi / 2] * (max(u.shape[1], v.shape[1]) - k))

    def h3_holds(self, tol: float = INVARIANCE_TOL) -> bool:
        a = self.h3_angles()
        return bool(np.all(a <= tol))

    def to_dict(self) -> dict:
        def block(b):
            return {"basis": b.subspace.matrix.tolist(), "pair": list(b.pair), "kind": b.kind}
        return {
            "blocks": [block(b) for b in self.blocks],
            "defects": {"f1": [block(b) for b in self.defect_blocks_f1],
                        "f2": [block(b) for b in self.defect_blocks_f2]},
            "alpha_dim": self.alpha_dim,
            "lambda_alpha": self.lambda_alpha,
            "h3_angles": self.h3_angles().tolist(),
            "h3_holds": self.h3_holds(),
        }


def _linear_matrix(m: DynamicalMap) -> np.ndarray:
    if m.kind == CUSTOM:
        raise UnsupportedMapError(f"{m.name}: joint splittings need a constant Jacobian")
    return m.jacobian()


def joint_splitting(f1: DynamicalMap, f2: DynamicalMap, lambda_alpha: float = 0.0) -> JointSplitting:
    a1, a2 = _linear_matrix(f1), _linear_matrix(f2)
    if a1.shape != a2.shape:
        raise InvalidInputError(f"dimension mismatch: {a1.shape} vs {a2.shape}")
    scale = max(1.0, np.abs(a1).max() * np.abs(a2).max())
    residual = np.abs(a1 @ a2 - a2 @ a1).max()
    if residual > COMMUTATION_TOL * scale:
        raise InvalidInputError(f"{f1.name} and {f2.name} do not commute (residual {residual:.3g})")
    sorted_blocks = {JOINT: [], DEFECT_F1: [], DEFECT_F2: [], ALPHA: []}
    for l1, e in spectral_groups(a1):
        restricted = e.T @ a2 @ e
        for l2, c in spectral_groups(restricted):
            basis = e @ c
            up1, up2 = l1 > lambda_alpha, l2 > lambda_alpha
            kind = JOINT if up1 and up2 else DEFECT_F1 if up1 else DEFECT_F2 if up2 else ALPHA
            sorted_blocks[kind].append(
                JointBlock(Subspace.span(basis, label=f"E({l1:.6g},{l2:.6g})"), (l1, l2), kind))
    return JointSplitting(tuple(sorted_blocks[JOINT]), tuple(sorted_blocks[DEFECT_F1]),
                          tuple(sorted_blocks[DEFECT_F2]), tuple(sorted_blocks[ALPHA]),
                          (a1, a2), lambda_alpha)


def _restricted(splitting: JointSplitting, block: JointBlock) -> tuple[np.ndarray, np.ndarray]:
    e = block.subspace.matrix
    return tuple(e.T @ a @ e for a in splitting.matrices)


def _growth(mats, n: int) -> float:
    """(1/n) log of the norm growth of e_1 under a sequence of n matrices."""
    v = np.zeros(mats[0].shape[0])
    v[0] = 1.0
    total = 0.0
    for m in mats:
        v = m @ v
        norm = np.linalg.norm(v)
        total += np.log(norm)
        v = v / norm
    return total / n


def _label(block: JointBlock) -> str:
    return f"{block.kind}({block.pair[0]:.6f},{block.pair[1]:.6f})"


def composite_spectrum_check(system: CommutingSystem, splitting: JointSplitting, s1: int, s2: int,
                             n: int = 200, tol: float = 1e-6) -> list[ResidualRow]:
    """Growth of (f1^s1 f2^s2)^n on each block against s1*l1 + s2*l2."""
    if s1 < 0 or s2 < 0 or s1 + s2 == 0:
        raise InvalidInputError("s1, s2 must be >= 0 and not both zero")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rows = []
    for b in splitting.all_blocks:
        b1, b2 = _restricted(splitting, b)
        m = np.linalg.matrix_power(b1, s1) @ np.linalg.matrix_power(b2, s2)
        est = _growth([m] * n, n)
        rows.append(ResidualRow(f"s=({s1},{s2}) {_label(b)}", est,
                                s1 * b.pair[0] + s2 * b.pair[1], tol))
    return rows


def _word_growth(b1, b2, words: np.ndarray) -> np.ndarray:
    """Per-word (1/n) log growth of e_1 under the block product, shape (S,)."""
    n = words.shape[1]
    if b1.shape == (1, 1):
        n1 = np.count_nonzero(words == 1, axis=1)
        return (n1 * np.log(abs(b1[0, 0])) + (n - n1) * np.log(abs(b2[0, 0]))) / n
    table = np.stack([b1, b2])
    v = np.zeros((words.shape[0], b1.shape[0]))
    v[:, 0] = 1.0
    total = np.zeros(words.shape[0])
    for t in range(n):
        v = np.einsum("sij,sj->si", table[words[:, t] - 1], v)
        norm = np.linalg.norm(v, axis=1)
        total += np.log(norm)
        v /= norm[:, None]
    return total / n


def verify_weighted_exponents(system: CommutingSystem, splitting: JointSplitting, n: int,
                              samples: int, seed: int = 0, z: float = 2.0,
                              floor: float = 1e-9) -> list[ResidualRow]:
    """Monte Carlo block growth along random words against nu1*l1 + nu2*l2.

    The tolerance is z * (sample sd) / sqrt(samples), floored at ``floor`` so
    that degenerate weights, whose estimates have zero spread, can pass.
    """
    nu = validate_nu(system.nu)
    if n < 1 or samples < 1:
        raise InvalidInputError("n and samples must be >= 1")
    words = np.stack([sample_word(nu, n, _rng.derive_seed(seed, s)).symbols for s in range(samples)])
    rows = []
    for b in splitting.all_blocks:
        est = _word_growth(*_restricted(splitting, b), words)
        sd = est.std(ddof=1) if samples > 1 else 0.0
        ci = z * sd / np.sqrt(samples)
        rows.append(ResidualRow(f"weighted {_label(b)}", float(est.mean()), b.weighted(nu),
                                max(ci, floor), note=f"ci={ci:.3g}"))
    return rows


def vector_exponent(a: np.ndarray, v: np.ndarray, groups=None, tol: float = 1e-10) -> float:
    """Exact growth rate of v under powers of a: the top group v touches."""
    groups = spectral_groups(a) if groups is None else groups
    basis = np.hstack([g[1] for g in groups])
    coef = np.linalg.solve(basis, v)
    start = 0
    scale = np.linalg.norm(coef)
    for lam, e in groups:
        k = e.shape[1]
        if np.linalg.norm(coef[start:start + k]) > tol * scale:
            return lam
        start += k
    raise InvalidInputError("zero vector has no exponent")


def exponent_invariance_check(system: CommutingSystem, n: int = 50, sample_points: int = 10,
                              seed: int = 0, tol: float = 1e-6) -> list[ResidualRow]:
    """Exponents of v under f_j compared with those of d f_i v, for i != j.

    Two rows per pair and sample: the exact limit (spectral filtration of
    the pushed vector) and the finite-n estimate, whose tolerance is the
    conditioning bound log cond(A_i) / n.
    """
    mats = [_linear_matrix(g) for g in system.generators]
    groups = [spectral_groups(m) for m in mats]
    g = _rng.stream(seed, _rng.POINT_STREAM)
    rows = []
    for k in range(sample_points):
        v = g.standard_normal(system.dim)
        for i, j in ((0, 1), (1, 0)):
            w = mats[i] @ v
            lim_v = vector_exponent(mats[j], v, groups[j])
            lim_w = vector_exponent(mats[j], w, groups[j])
            rows.append(ResidualRow(f"limit f{i + 1}->f{j + 1} #{k}", lim_w, lim_v, tol))
            fin_v, fin_w = _finite(mats[j], v, n), _finite(mats[j], w, n)
            cond = np.linalg.cond(mats[i])
            rows.append(ResidualRow(f"finite f{i + 1}->f{j + 1} #{k}", fin_w, fin_v,
                                    max(np.log(cond) / n, 1e-12)))
    return rows


def _finite(a, v, n):
    v = v / np.linalg.norm(v)
    total = 0.0
    for _ in range(n):
        v = a @ v
        norm = np.linalg.norm(v)
        total += np.log(norm)
        v = v / norm
    return total / n


def block_invariance_check(splitting: JointSplitting, tol: float = INVARIANCE_TOL) -> list[ResidualRow]:
    """Largest principal angle between A_i E and E for every block."""
    rows = []
    for b in splitting.all_blocks:
        e = b.subspace.matrix
        for i, a in enumerate(splitting.matrices):
            angle = float(principal_angles(a @ e, e).max())
            rows.append(ResidualRow(f"invariance f{i + 1} {_label(b)}", angle, 0.0, tol))
    return rows


def projection_growth(splitting: JointSplitting, n: int = 100) -> list[ResidualRow]:
    """Per-step log growth of block projector norms along an orbit.

    For a constant cocycle the projectors do not depend on the point, so the
    growth is exactly zero.
    """
    rows = []
    basis = np.hstack([b.subspace.matrix for b in splitting.all_blocks])
    inv = np.linalg.inv(basis)
    start = 0
    for b in splitting.all_blocks:
        k = b.dim
        proj = basis[:, start:start + k] @ inv[start:start + k]
        norms = np.full(n + 1, np.linalg.norm(proj, 2))
        growth = float(np.log(norms[-1] / norms[0]) / n)
        rows.append(ResidualRow(f"projection {_label(b)}", growth, 0.0, 0.0))
        start += k
    return rows


@dataclass(frozen=True)
class DeterminantRate:
    rate: float
    ci_halfwidth: float
    lower: float
    upper: float
    dim: int

    @property
    def within_bounds(self) -> bool:
        return self.lower - self.ci_halfwidth - 1e-9 <= self.rate <= self.upper + self.ci_halfwidth + 1e-9

    def to_dict(self) -> dict:
        return {"rate": self.rate, "ci": self.ci_halfwidth, "lower": self.lower,
                "upper": self.upper, "dim": self.dim, "within_bounds": self.within_bounds}


def unstable_determinant_rate(system: CommutingSystem, splitting: JointSplitting, n: int,
                              samples: int, seed: int = 0) -> DeterminantRate:
    """Average log volume expansion of the random unstable space per step.

    The unstable space is the span of all blocks whose weighted exponent is
    positive; it does not depend on the word for constant cocycles.
    """
    nu = validate_nu(system.nu)
    cols = [b.subspace.matrix for b in splitting.all_blocks if b.weighted(nu) > splitting.lambda_alpha]
    lower = sum(nu[i] * lam * d for i in (0, 1) for lam, _, d in splitting.defect_dims(i))
    upper = sum(nu[i] * lam * m for i in (0, 1) for lam, m, _ in splitting.defect_dims(i))
    if not cols:
        return DeterminantRate(0.0, 0.0, lower, upper, 0)
    u = np.linalg.qr(np.hstack(cols))[0]
    logdet = np.array([np.log(gram_volume(a @ u)) for a in splitting.matrices])
    rates = []
    for s in range(samples):
        n1, n2 = sample_word(nu, n, _rng.derive_seed(seed, s)).counts
        rates.append((n1 * logdet[0] + n2 * logdet[1]) / n)
    rates = np.array(rates)
    sd = rates.std(ddof=1) if samples > 1 else 0.0
    return DeterminantRate(float(rates.mean()), float(2 * sd / np.sqrt(samples)), lower, upper, u.shape[1])
