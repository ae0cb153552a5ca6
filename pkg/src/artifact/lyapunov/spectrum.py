"""Lyapunov spectra by QR frame pushing, deterministic and along random words."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import rng as _rng
from ..errors import DegenerateFrameError, InvalidInputError
from ..linalg import Frame, qr_push_batch
from ..systems import CommutingSystem, DynamicalMap, apply_stack, sample_word, validate_nu

GROUP_TOL = 1e-3
CI_BATCHES = 10


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Exponents (nats per iterate) grouped with multiplicities.

    ``raw`` keeps the ungrouped per-direction averages, descending, and
    ``raw_ci`` their half-widths. Exponents at or below
    ``lambda_alpha_threshold`` are kept in ``exponents`` (finite-dimensional
    spectra are fully resolved), but only those above it count toward ``r``.
    """

    exponents: tuple
    multiplicities: tuple
    ci_halfwidth: tuple
    n_used: int
    lambda_alpha_threshold: float = 0.0
    raw: tuple = ()
    raw_ci: tuple = ()
    samples: int = 1
    seed: int | None = None
    provenance: str = field(default="", compare=False)

    @property
    def r(self) -> int:
        return sum(1 for e in self.exponents if e > self.lambda_alpha_threshold)

    def above_threshold(self) -> list[tuple[float, int]]:
        return [(e, m) for e, m in zip(self.exponents, self.multiplicities)
                if e > self.lambda_alpha_threshold]

    def unresolved(self) -> list[float]:
        """Exponents within 2 CI of the threshold: reported, not classified."""
        return [e for e, c in zip(self.exponents, self.ci_halfwidth)
                if abs(e - self.lambda_alpha_threshold) <= 2 * c]

    def partial_sum(self, p: int) -> float:
        return float(np.sum(self.raw[:p]))

    @property
    def top(self) -> float:
        return self.exponents[0]

    def to_dict(self) -> dict:
        return {
            "exponents": list(self.exponents),
            "multiplicities": list(self.multiplicities),
            "ci": list(self.ci_halfwidth),
            "raw": list(self.raw),
            "raw_ci": list(self.raw_ci),
            "n": self.n_used,
            "samples": self.samples,
            "seed": self.seed,
            "lambda_alpha": self.lambda_alpha_threshold,
            "unresolved": self.unresolved(),
            "provenance": self.provenance,
        }


def group_exponents(raw, ci, tol: float = GROUP_TOL):
    """Merge neighbours closer than max(tol, 3 * ci) into one exponent."""
    order = np.argsort(raw)[::-1]
    raw = np.asarray(raw, float)[order]
    ci = np.asarray(ci, float)[order]
    groups = [[0]]
    for i in range(1, raw.size):
        gap = raw[groups[-1][-1]] - raw[i]
        if gap <= max(tol, 3 * max(ci[i], ci[groups[-1][-1]])):
            groups[-1].append(i)
        else:
            groups.append([i])
    exps = tuple(float(np.mean(raw[g])) for g in groups)
    mults = tuple(len(g) for g in groups)
    cis = tuple(float(np.max(ci[g])) for g in groups)
    return exps, mults, cis, tuple(raw), tuple(ci)


def _push(generators, symbols, x0, frames, burn_in, n, batches, start_step=0):
    """Core loop: frames (S, d, p) pushed along per-sample symbol rows.

    ``symbols`` has shape (S, burn_in + n) with entries indexing
    ``generators`` from 1. Returns log-diagonal sums per batch, shape
    (S, batches, p), the batch edges, and the running totals (S, p). The
    totals are accumulated step by step whatever the batch count, so the
    result does not depend on how the orbit is batched.
    """
    S, d, p = frames.shape
    constant = all(g.constant_jacobian for g in generators)
    table = np.stack([g.jacobian() for g in generators]) if constant else None
    xs = None if constant else np.repeat(np.asarray(x0, float).reshape(1, d), S, axis=0)
    edges = burn_in + np.linspace(0, n, batches + 1).astype(int)
    sums = np.zeros((S, batches, p))
    total = np.zeros((S, p))
    b = 0
    q = frames
    for t in range(burn_in + n):
        col = symbols[:, t] - 1
        if constant:
            jac = table[col]
        else:
            jac = np.empty((S, d, d))
            new = np.empty_like(xs)
            for gi, g in enumerate(generators):
                idx = np.flatnonzero(col == gi)
                if idx.size:
                    jac[idx] = g.jacobian_stack(xs[idx])
                    new[idx] = apply_stack(g, xs[idx])
            xs = new
        if p == 1:
            v = np.einsum("sij,sj->si", jac, q[:, :, 0])
            norm = np.linalg.norm(v, axis=1)
            if np.any(norm == 0) or not np.all(np.isfinite(norm)):
                raise DegenerateFrameError(f"frame collapsed (step {start_step + t})", 0, start_step + t)
            q = (v / norm[:, None])[:, :, None]
            logs = np.log(norm)[:, None]
        else:
            q, logs = qr_push_batch(q, jac, step=start_step + t)
        if t >= burn_in:
            while t >= edges[b + 1]:
                b += 1
            sums[:, b, :] += logs
            total += logs
    return sums, edges, total


def _check_sizes(dim, p, n, burn_in):
    if not 1 <= p <= dim:
        raise InvalidInputError(f"p must satisfy 1 <= p <= dim={dim}, got {p}")
    if n < 100:
        raise InvalidInputError(f"n must be >= 100, got {n}")
    if burn_in < 0:
        raise InvalidInputError("burn_in must be >= 0")


def lyapunov_spectrum(m: DynamicalMap, x0, p: int, n: int, burn_in: int | None = None,
                      seed: int = 0, lambda_alpha: float = 0.0) -> LyapunovSpectrum:
    """Time-averaged QR log-diagonals of a random p-frame along one orbit.

    The half-width comes from batch means over ``CI_BATCHES`` consecutive
    blocks of the orbit.
    """
    burn_in = n // 10 if burn_in is None else burn_in
    _check_sizes(m.dim, p, n, burn_in)
    frame = Frame.random(m.dim, p, _rng.stream(seed, 0, _rng.FRAME_STREAM)).vectors[None]
    symbols = np.ones((1, burn_in + n), dtype=np.int8)
    sums, edges, total = _push((m,), symbols, x0, frame, burn_in, n, CI_BATCHES)
    raw = total[0] / n
    batch_means = sums[0] / np.diff(edges)[:, None]
    ci = 2 * batch_means.std(axis=0, ddof=1) / np.sqrt(CI_BATCHES)
    exps, mults, cis, raw_s, ci_s = group_exponents(raw, ci)
    return LyapunovSpectrum(exps, mults, cis, n, lambda_alpha, raw_s, ci_s, 1, seed,
                            f"lyapunov_spectrum(map={m.name}, p={p}, n={n}, burn_in={burn_in}, seed={seed})")


def sample_symbols(nu, length: int, seed: int, samples: int) -> np.ndarray:
    """Rows of i.i.d. words, row s drawn from the stream keyed by (seed, s)."""
    return np.stack([sample_word(nu, length, _rng.derive_seed(seed, s)).symbols
                     for s in range(samples)])


def random_frame_stack(dim: int, p: int, seed: int, samples: int) -> np.ndarray:
    return np.stack([Frame.random(dim, p, _rng.stream(seed, s, _rng.FRAME_STREAM)).vectors
                     for s in range(samples)])


def random_lyapunov_spectrum(system: CommutingSystem, x0, p: int, n: int, samples: int,
                             seed: int = 0, burn_in: int | None = None, jobs: int = 1,
                             lambda_alpha: float = 0.0) -> LyapunovSpectrum:
    """Spectrum of the i.i.d. composition f(n, w), averaged over sampled words.

    ``ci_halfwidth`` is 2 * (sample standard deviation) / sqrt(samples).
    With nu = (1, 0) and samples = 1 the frame and orbit coincide with
    ``lyapunov_spectrum(system.f1, ..., seed=seed)``.
    """
    burn_in = n // 10 if burn_in is None else burn_in
    _check_sizes(system.dim, p, n, burn_in)
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    nu = validate_nu(system.nu)
    frames = random_frame_stack(system.dim, p, seed, samples)
    if nu[0] == 1.0:
        symbols = np.ones((samples, burn_in + n), dtype=np.int8)
    else:
        symbols = sample_symbols(nu, burn_in + n, seed, samples)

    def run(idx):
        _, _, total = _push(system.generators, symbols[idx], x0, frames[idx], burn_in, n, 1)
        return total / n

    chunks = np.array_split(np.arange(samples), max(1, min(jobs, samples)))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    per_sample = np.concatenate(parts, axis=0)
    raw = per_sample.mean(axis=0)
    sd = per_sample.std(axis=0, ddof=1) if samples > 1 else np.zeros(p)
    ci = 2 * sd / np.sqrt(samples)
    exps, mults, cis, raw_s, ci_s = group_exponents(raw, ci)
    return LyapunovSpectrum(
        exps, mults, cis, n, lambda_alpha, raw_s, ci_s, samples, seed,
        f"random_lyapunov_spectrum(system={system.name}, nu={tuple(nu)}, p={p}, n={n}, "
        f"samples={samples}, burn_in={burn_in}, seed={seed})")
