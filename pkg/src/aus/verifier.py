"""Certify a persisted :class:`SystemBundle` against the disjoint-spectrum and envelope properties.

Everything is recomputed from the bundle contents (f0, tree, epsilons and the
stored coefficients); nothing is shared with the constructor's runtime.

Checks, each reported per ``m``:

``disjoint``  stored spectra pairwise disjoint, and the quadrature Fourier
              coefficients of ``f_m`` vanish on ``Lambda_m``
``upper``     ``|f_m| < |f0| + eps_m`` on a dense grid and random points
``lower``     ``|f_m| > |f0| - eps_m`` at those points lying in ``Omega_m``
``omega``     stored ``Omega_m`` lies in the level-``k_m`` cores and has
              measure at least ``1 - 2^-k_m``
``chain``     ``sup_err < delta_m^2 + 2 delta_m <= eps_m`` with ``delta_m``
              consistent with ``Lambda_m``
``dyadic``    tree nesting, partition, equal weights and core bounds
"""

from dataclasses import dataclass, field
import copy
import json
import logging
import math

import numpy as np

from .constructor import (
    check_points,
    compute_delta_m,
    measure_sup_err,
    random_check_points,
    sup_grid,
)
from .dyadic import cell_nu_masses, pushforward_cdf, shrink_cores
from .groups import IrrepLabel, haar_grid, sweep_coordinate
from .spectral import GridFunction, analyze, synthesize, synthesize_grid

log = logging.getLogger(__name__)

TOL_MARGIN = 1e-9
TOL_RESIDUAL = 1e-10
TOL_NU = 1e-8
CHECKS = ("disjoint", "upper", "lower", "omega", "chain", "dyadic")


@dataclass
class VerificationReport:
    records: list = field(default_factory=list)
    run: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    residual_tol: float = TOL_RESIDUAL
    margin_tol: float = TOL_MARGIN

    def failed_checks(self):
        bad = set()
        for rec in self.records:
            for name in CHECKS:
                if name in rec and not rec[name]["pass"]:
                    bad.add(name)
        if not self.run.get("dyadic", {"pass": True})["pass"]:
            bad.add("dyadic")
        if self.run.get("partial_bundle"):
            # the records present may all be sound, but the requested count was not reached
            bad.add("complete")
        return sorted(bad)

    @property
    def passed(self):
        return bool(self.records) and not self.failed_checks()

    def to_json(self):
        return {
            "pass": self.passed,
            "failed_checks": self.failed_checks(),
            "tolerances": {"margin": self.margin_tol, "residual": self.residual_tol},
            "grid": self.grid,
            "run": self.run,
            "records": self.records,
        }

    def dumps(self):
        return json.dumps(_plain(self.to_json()), indent=1) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# ---------------------------------------------------------------------------


def verify_disjoint(bundle, tol=TOL_RESIDUAL):
    """Pairwise-disjoint stored supports plus the recomputed residual on ``Lambda_m``."""
    group = bundle.group
    supports = [set(r.coeffs.support()) for r in bundle.records]
    out = []
    for i, rec in enumerate(bundle.records):
        others = set().union(*(s for j, s in enumerate(supports) if j != i))
        overlap = sorted(supports[i] & others, key=IrrepLabel.sort_key)
        lam = rec.lam
        expected = set().union(*supports[:i]) if i else set()
        lam_ok = set(lam) == expected
        residual = 0.0
        if lam:
            b_lam = max(lab.bandlimit for lab in lam)
            grid = haar_grid(group, rec.coeffs.bandlimit + b_lam)
            vals = synthesize_grid(rec.coeffs, grid)
            fhat = analyze(GridFunction(grid, vals), b_lam)
            residual = max(float(np.abs(fhat[lab]).max()) for lab in lam)
        ok = not overlap and lam_ok and residual < tol
        out.append({
            "pass": ok,
            "overlap": [str(lab) for lab in overlap],
            "lambda_consistent": lam_ok,
            "residual": residual,
        })
    return out


def _eval_points(bundle, rec, grid_factor, seed):
    f0 = bundle.params.f0
    rng_points = check_points(bundle.tree, rec.k_m, bundle.group, seed)
    s = float(np.min(np.diff(bundle.tree.boundaries[rec.k_m]))) / 4.0
    s = min(s, 2.0 ** (-2 * rec.k_m - 2))
    B = max(rec.coeffs.bandlimit, f0.bandlimit)
    grid = sup_grid(bundle.group, B, grid_factor, ramp_width=s)
    pts = grid.points
    fm = np.concatenate([synthesize_grid(rec.coeffs, grid), synthesize(rec.coeffs, rng_points)])
    f0v = np.concatenate([synthesize_grid(f0, grid), synthesize(f0, rng_points)])
    t = np.concatenate([sweep_coordinate(bundle.group, pts),
                        sweep_coordinate(bundle.group, rng_points)])
    meta = {"m": rec.m, "grid_shape": list(grid.shape), "check_points": len(rng_points)}
    return np.abs(fm), np.abs(f0v), t, meta


def in_intervals(t, intervals):
    iv = np.asarray(intervals, dtype=float).reshape(-1, 2)
    j = np.searchsorted(iv[:, 0], t, side="right") - 1
    jj = np.clip(j, 0, len(iv) - 1)
    return (j >= 0) & (t >= iv[jj, 0]) & (t <= iv[jj, 1])


def verify_upper(bundle, grid_factor=8, seed=0, tol=TOL_MARGIN, _cache=None):
    """Minimum of ``|f0| + eps_m - |f_m|`` over the evaluation points."""
    out = []
    for rec in bundle.records:
        fm, f0, _, meta = (_cache or {}).get(rec.m) or _eval_points(bundle, rec, grid_factor, seed)
        eps = bundle.params.epsilons[rec.m - 1]
        margin = float(np.min(f0 + eps - fm))
        out.append({
            "pass": margin > -tol,
            "margin": margin,
            "analytic_margin": eps - rec.sup_err,
            "points": int(fm.size),
        })
    return out


def verify_lower(bundle, grid_factor=8, seed=0, tol=TOL_MARGIN, _cache=None):
    """Minimum of ``|f_m| - |f0| + eps_m`` over evaluation points inside ``Omega_m``.

    ``Omega_m`` is taken as the level-``k_m`` cores recomputed from the tree.
    """
    out = []
    for rec in bundle.records:
        fm, f0, t, meta = (_cache or {}).get(rec.m) or _eval_points(bundle, rec, grid_factor, seed)
        eps = bundle.params.epsilons[rec.m - 1]
        inside = in_intervals(t, shrink_cores(bundle.tree, rec.k_m))
        if not inside.any():
            raise ValueError(f"m={rec.m}: no evaluation point in Omega_m; use a denser grid")
        margin = float(np.min(fm[inside] - f0[inside] + eps))
        out.append({
            "pass": margin > -tol,
            "margin": margin,
            "analytic_margin": eps - rec.sup_err,
            "points_in_omega": int(inside.sum()),
        })
    return out


def verify_omega(bundle):
    """Exact interval arithmetic on the stored ``Omega_m``."""
    tree = bundle.tree
    out = []
    prev_bound = -math.inf
    for rec in bundle.records:
        k = rec.k_m
        cores = shrink_cores(tree, k)
        cells = tree.cells(k)
        stored = np.asarray(rec.omega, dtype=float).reshape(-1, 2)
        within = stored.shape == cores.shape and bool(
            np.all(stored[:, 0] >= cores[:, 0]) and np.all(stored[:, 1] <= cores[:, 1])
            and np.all(stored[:, 0] <= stored[:, 1])
        )
        measure = math.fsum((stored[:, 1] - stored[:, 0]).tolist())
        measure_ok = abs(measure - rec.omega_measure) <= 1e-14 * max(1.0, measure)
        bound = 1.0 - 2.0 ** (-k)
        excess = (cells[:, 1] - cells[:, 0]) - (cores[:, 1] - cores[:, 0])
        per_cell_ok = bool(np.all(excess < 2.0 ** (-2 * k)))
        out.append({
            "pass": within and measure_ok and measure >= bound and per_cell_ok,
            "measure": measure,
            "bound": bound,
            "within_cores": within,
            "measure_consistent": measure_ok,
            "per_cell_ok": per_cell_ok,
            "bound_nondecreasing": bound >= prev_bound,
        })
        prev_bound = max(prev_bound, bound)
    return out


def verify_chain(bundle, grid_factor=8, seed=0, remeasure=True):
    """``sup_err < delta_m^2 + 2 delta_m <= eps_m`` using the recorded ``sup_err``.

    The recorded value is cross-referenced with a fresh measurement, which is
    reported but does not gate the check (the upper/lower checks certify the
    stored coefficients directly).
    """
    p = bundle.params
    out = []
    for rec in bundle.records:
        eps = p.epsilons[rec.m - 1]
        expected = compute_delta_m(eps, rec.lam)
        consistent = abs(rec.delta_m - expected) <= 1e-15 * max(1.0, expected)
        d = rec.delta_m
        bound = d * d + 2.0 * d
        entry = {
            "pass": consistent and rec.sup_err < bound and bound <= eps,
            "delta_sq": d * d,
            "two_delta": 2.0 * d,
            "bound": bound,
            "sup_err": rec.sup_err,
            "eps": eps,
            "delta_consistent": consistent,
            "eps_above_3": eps > 3.0,
        }
        if remeasure:
            entry["remeasured_sup_err"] = measure_sup_err(
                rec.coeffs, bundle.tree, rec.k_m, p.f0, p.profile, grid_factor,
                check_points(bundle.tree, rec.k_m, bundle.group, seed),
            )
        out.append(entry)
    return out


def verify_dyadic(bundle, tol=TOL_NU):
    """Tree invariants: nesting, partition, equal ``nu``-weight, core bounds."""
    tree = bundle.tree
    F = pushforward_cdf(bundle.params.f0)
    nesting = partition = equal = cores_ok = True
    worst = 0.0
    for k in range(1, tree.k_max + 1):
        b = tree.boundaries[k]
        partition &= bool(b[0] == 0.0 and b[-1] == 1.0 and np.all(np.diff(b) >= 0))
        partition &= len(b) == (1 << k) + 1
        nesting &= bool(np.array_equal(tree.boundaries[k - 1], b[::2]))
        masses = cell_nu_masses(F, tree, k)
        rel = float(np.max(np.abs(masses / (F.nu_total * 2.0 ** (-k)) - 1.0)))
        worst = max(worst, rel)
        equal &= rel < tol
        cells = tree.cells(k)
        c = tree.cores[k]
        cores_ok &= bool(np.all(c[:, 0] >= cells[:, 0]) and np.all(c[:, 1] <= cells[:, 1]))
        cores_ok &= bool(np.all((cells[:, 1] - cells[:, 0]) - (c[:, 1] - c[:, 0]) < 2.0 ** (-2 * k)))
    return {
        "pass": nesting and partition and equal and cores_ok,
        "nesting": nesting,
        "partition": partition,
        "equal_weight_rel_err": worst,
        "cores_ok": cores_ok,
    }


def verify_bundle(bundle, grid_factor=8, seed=0):
    """Run every check; returns a :class:`VerificationReport`."""
    if not bundle.records:
        raise ValueError("bundle has no records")
    cache = {}
    grid_meta = []
    for rec in bundle.records:
        fm, f0, t, meta = _eval_points(bundle, rec, grid_factor, seed)
        cache[rec.m] = (fm, f0, t, meta)
        grid_meta.append(meta)
    parts = {
        "disjoint": verify_disjoint(bundle),
        "upper": verify_upper(bundle, grid_factor, seed, _cache=cache),
        "lower": verify_lower(bundle, grid_factor, seed, _cache=cache),
        "omega": verify_omega(bundle),
        "chain": verify_chain(bundle, grid_factor, seed),
    }
    records = []
    for i, rec in enumerate(bundle.records):
        entry = {"m": rec.m, "k_m": rec.k_m, "delta_m": rec.delta_m,
                 "lambda_size": len(rec.lam)}
        for name, vals in parts.items():
            entry[name] = vals[i]
        records.append(entry)
    omega = parts["omega"]
    run = {
        "dyadic": verify_dyadic(bundle),
        "omega_bounds_nondecreasing": all(o["bound_nondecreasing"] for o in omega),
        "partial_bundle": bundle.partial,
    }
    if not run["omega_bounds_nondecreasing"]:
        log.warning("lower bounds 1 - 2^-k_m are not monotone along this run")
    report = VerificationReport(
        records=records, run=run,
        grid={"factor": grid_factor, "seed": seed, "per_m": grid_meta},
    )
    return report


# ---------------------------------------------------------------------------
# negative controls

CORRUPTIONS = {
    "support": "disjoint",
    "scale_up": "upper",
    "scale_down": "lower",
    "omega": "omega",
}


def corrupt_bundle(bundle, mode, m=None):
    """Deep copy of ``bundle`` with one record damaged in the given way.

    ``support`` injects a tiny coefficient at a label of ``Lambda_m``;
    ``scale_up``/``scale_down`` rescale ``f_m`` past the ``eps_m`` band;
    ``omega`` inflates the stored ``Omega_m`` intervals into the ramps.
    """
    if mode not in CORRUPTIONS:
        raise ValueError(f"unknown corruption {mode!r}")
    bad = copy.deepcopy(bundle)
    if m is None:
        m = len(bad.records)
    rec = bad.records[m - 1]
    eps = bad.params.epsilons[m - 1]
    if mode == "support":
        if not rec.lam:
            raise ValueError("support injection needs m >= 2")
        lab = rec.lam[0]
        mat = rec.coeffs[lab].copy()
        mat[0, 0] += 1e-6
        rec.coeffs.coeffs[lab] = mat
    elif mode == "scale_up":
        rec.coeffs = rec.coeffs.scaled(1.0 + 2.0 * eps)
    elif mode == "scale_down":
        floor = _min_abs_f0_on_cores(bad, rec.k_m)
        rec.coeffs = rec.coeffs.scaled(1.0 - 2.0 * eps / max(floor, 2.0 * eps))
    else:
        cells = bad.tree.cells(rec.k_m)
        om = np.asarray(rec.omega, dtype=float).copy()
        grow_l = 0.5 * (om[:, 0] - cells[:, 0])
        grow_r = 0.5 * (cells[:, 1] - om[:, 1])
        om[:, 0] -= grow_l
        om[:, 1] += grow_r
        rec.omega = om
        rec.omega_measure = math.fsum((om[:, 1] - om[:, 0]).tolist())
    return bad


def _min_abs_f0_on_cores(bundle, k, n=20000):
    """Sampled ``min |f0|`` over points whose sweep coordinate lies in the level-``k`` cores."""
    pts = random_check_points(bundle.group, 1, n)
    inside = in_intervals(sweep_coordinate(bundle.group, pts), shrink_cores(bundle.tree, k))
    return float(np.abs(synthesize(bundle.params.f0, pts[inside])).min())
