"""Command implementations behind the CLI: each returns a JSON-ready result and a table."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import entropy as ent
from .checks import ResidualRow
from .lyapunov import (alpha_rate_check, block_invariance_check, composite_spectrum_check,
                       exponent_invariance_check, joint_splitting, kuratowski_index,
                       lyapunov_spectrum, projection_growth, random_lyapunov_spectrum,
                       unstable_determinant_rate, verify_weighted_exponents)
from .orbitspace import branch_factors, friedland_estimate
from .systems import CIRCLE_EXPANDING, TRUNCATED_OPERATOR, sample_points

VERIFY_Z = 3.0
FRIEDLAND_TOL = 0.1
IDENTITY_TOL = 1e-12


@dataclass
class Outcome:
    results: dict
    table: list = field(default_factory=list)
    failed: list = field(default_factory=list)


def _x0(m, params, seed):
    if params["x0"] is not None:
        return np.asarray(params["x0"], float).reshape(m.dim)
    return sample_points(m, 1, seed)[0]


def _linear(system) -> bool:
    return all(g.constant_jacobian for g in system.generators)


def _spectrum_dict(m, params, seed):
    p = params["p"] or m.dim
    s = lyapunov_spectrum(m, _x0(m, params, seed), p, params["n"], params["burn_in"], seed,
                          params["lambda_alpha"])
    return s


def cmd_spectrum(cfg) -> Outcome:
    single = cfg.single_map()
    maps = [single] if single is not None else list(cfg.system().generators)
    out, table = {}, []
    for m in maps:
        s = _spectrum_dict(m, cfg.params, cfg.seed)
        out[m.name] = s.to_dict()
        table += [{"map": m.name, "exponent": e, "multiplicity": k, "ci": c}
                  for e, k, c in zip(s.exponents, s.multiplicities, s.ci_halfwidth)]
    return Outcome({"spectra": out}, table)


def cmd_random_spectrum(cfg) -> Outcome:
    system = cfg.system()
    p = cfg.params["p"] or system.dim
    s = random_lyapunov_spectrum(system, _x0(system.f1, cfg.params, cfg.seed), p, cfg.params["n"],
                                 cfg.params["samples"], cfg.seed, cfg.params["burn_in"],
                                 cfg.jobs or 1, cfg.params["lambda_alpha"])
    table = [{"exponent": e, "multiplicity": k, "ci": c}
             for e, k, c in zip(s.exponents, s.multiplicities, s.ci_halfwidth)]
    return Outcome({"system": system.name, "nu": list(system.nu), "spectrum": s.to_dict()}, table)


def cmd_splitting(cfg) -> Outcome:
    system = cfg.system()
    sp = joint_splitting(system.f1, system.f2, cfg.params["lambda_alpha"])
    table = [{"kind": b.kind, "lambda_f1": b.pair[0], "lambda_f2": b.pair[1], "dim": b.dim}
             for b in sp.all_blocks]
    return Outcome({"system": system.name, "splitting": sp.to_dict()}, table)


def _generator_entropies(system, params, seed):
    """Unstable entropies of both generators, with where each number came from."""
    if _linear(system):
        sp = joint_splitting(system.f1, system.f2, params["lambda_alpha"])
        h = tuple(ent.unstable_entropy(sp.generator_spectrum(i)) for i in (0, 1))
        prov = {g.name: "eigenvalue log-moduli of the joint splitting" for g in system.generators}
        return h, sp, prov
    h, prov = [], {}
    for g in system.generators:
        s = _spectrum_dict(g, params, seed)
        h.append(ent.unstable_entropy(s))
        prov[g.name] = s.provenance
    return tuple(h), None, prov


ENTROPY_FIELDS = ("per_generator_unstable", "ruelle_bound", "pesin_value", "srb_lower",
                  "shift_entropy", "skew_entropy", "friedland_value", "friedland_upper")


def in_units(d: dict, units: str) -> dict:
    """Entropy values rescaled for display; computation stays in nats."""
    if units == "nats":
        return {**d, "units": units}
    scale = 1.0 / np.log(2.0)
    out = dict(d)
    for k in ENTROPY_FIELDS:
        v = out[k]
        if v is not None:
            out[k] = [x * scale for x in v] if isinstance(v, list) else v * scale
    return {**out, "units": units}


def cmd_entropy(cfg) -> Outcome:
    system = cfg.system()
    h, sp, prov = _generator_entropies(system, cfg.params, cfg.seed)
    report = ent.entropy_report(h, system.nu, sp, prov)
    d = in_units(report.to_dict(), cfg.units)
    table = [{"quantity": k, "value": v} for k, v in d.items() if isinstance(v, (int, float))]
    return Outcome({"system": system.name, "entropy": d}, table)


def cmd_friedland(cfg) -> Outcome:
    system = cfg.system()
    est = friedland_estimate(system, cfg.params["n_range"], cfg.params["epsilon"],
                             cfg.params["method"])
    table = [{"n": n, "count": c, "log_count": lc} for n, c, lc in est.table()]
    return Outcome({"system": system.name, "friedland": est.to_dict()}, table)


# ------------------------------------------------------------------ verify


def _rows(group: str, rows, required: bool = True) -> list[dict]:
    return [{"group": group, "check": r.label, "required": required, **r.to_dict()} for r in rows]


def _outside(label: str, value: float, lo: float, hi: float, note: str = "") -> ResidualRow:
    """Residual = distance of value outside [lo, hi]."""
    gap = max(lo - value, value - hi, 0.0)
    return ResidualRow(label, gap, 0.0, 1e-9, note=note or f"value={value:.6g} in [{lo:.6g}, {hi:.6g}]")


def verify_suite(system, params, seed, jobs=1) -> Outcome:
    n, samples = params["n"], params["samples"]
    table = []
    table += _rows("commutation", [ResidualRow("commutation", system.commutation_residual, 0.0, 1e-9)])
    linear = _linear(system)
    info = {"system": system.name, "nu": list(system.nu)}
    h, sp, _ = _generator_entropies(system, params, seed)
    if linear:
        table += _rows("exponent-invariance", exponent_invariance_check(system, seed=seed))
        for s1 in range(4):
            for s2 in range(4):
                if s1 or s2:
                    table += _rows("composite-spectrum", composite_spectrum_check(system, sp, s1, s2))
        table += _rows("weighted-exponents",
                       verify_weighted_exponents(system, sp, n, samples, seed, z=VERIFY_Z))
        table += _rows("block-invariance", block_invariance_check(sp))
        table += _rows("projection-growth", projection_growth(sp))
        det = unstable_determinant_rate(system, sp, n, samples, seed)
        table += _rows("unstable-determinant", [_outside(
            "determinant rate within bounds", det.rate, det.lower - VERIFY_Z / 2 * det.ci_halfwidth,
            det.upper + VERIFY_Z / 2 * det.ci_halfwidth)])
        angles = sp.h3_angles()
        worst = float(angles.max()) if angles.size else 0.0
        table += _rows("h3", [ResidualRow("unstable spaces coincide (max principal angle)",
                                          worst, 0.0, 1e-6,
                                          note="informational; a failure means the unstable spaces differ")],
                       required=False)
        info["h3_holds"] = sp.h3_holds()
        info["h3_max_angle"] = worst
    report = ent.entropy_report(h, system.nu, sp)
    ent_rows = [
        ResidualRow("srb lower <= ruelle bound",
                    max(report.srb_lower - report.ruelle_bound, 0.0) if sp else 0.0, 0.0, 1e-12),
        ResidualRow("friedland = abramov-rokhlin at optimal weights",
                    ent.abramov_rokhlin(report.optimal_nu,
                                        ent.ruelle_bound(h, report.optimal_nu)),
                    report.friedland_value, IDENTITY_TOL),
        ResidualRow("variational optimum equals pressure",
                    ent.variational_objective(report.optimal_nu, h),
                    ent.pressure_bernoulli(h), IDENTITY_TOL),
    ]
    table += _rows("entropy", ent_rows)
    info["entropy"] = report.to_dict()
    if all(g.kind == CIRCLE_EXPANDING for g in system.generators):
        est = friedland_estimate(system, params["n_range"], params["epsilon"], params["method"])
        # the closed form needs the generators to differ almost everywhere
        distinct = len(set(branch_factors(system))) == 2
        table += _rows("friedland", [ResidualRow(
            f"counting slope vs formula ({est.method})", est.slope, est.formula_value,
            FRIEDLAND_TOL, note="" if distinct else "identical generators: formula not applicable")],
            required=distinct)
        info["friedland"] = est.to_dict()
    if all(g.kind == TRUNCATED_OPERATOR and g.tail_norm_bound is not None for g in system.generators):
        dims = params["truncation_dims"] or sorted({max(1, system.dim // 8), system.dim // 4,
                                                    system.dim // 2, system.dim})
        idx = [kuratowski_index(g, dims) for g in system.generators]
        table += _rows("kuratowski", [
            ResidualRow(f"{g.name} bounds non-increasing in N", 0.0 if r.monotone else 1.0, 0.0, 0.0)
            for g, r in zip(system.generators, idx)])
        table += _rows("alpha-subadditivity",
                       alpha_rate_check(system, min(n, 200), min(samples, 20), dims[0], seed))
        info["kuratowski"] = {g.name: r.to_dict() for g, r in zip(system.generators, idx)}
    failed = [r["check"] for r in table if r["required"] and not r["passed"]]
    info["passed"] = not failed
    info["failed"] = failed
    return Outcome({**info, "checks": table}, table, failed)


def cmd_verify(cfg) -> Outcome:
    return verify_suite(cfg.system(), cfg.params, cfg.seed, cfg.jobs or 1)


COMMAND_TABLE = {
    "spectrum": cmd_spectrum,
    "random-spectrum": cmd_random_spectrum,
    "splitting": cmd_splitting,
    "entropy": cmd_entropy,
    "friedland": cmd_friedland,
    "verify": cmd_verify,
}
