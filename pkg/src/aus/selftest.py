"""Fast invariant checks across all modules, run by ``aus selftest``.

Each check returns ``(name, passed, detail)``. Sizes are small so the whole
suite finishes in well under a minute on one core.
"""

import logging
import math

import numpy as np

from .constructor import ConstructionParams, construct_system
from .dyadic import build_tree, cell_nu_masses, omega_measure, pushforward_cdf
from .groups import (
    enumerate_irreps,
    haar_grid,
    irrep_matrix,
    label,
    parse_group,
    trivial_label,
)
from .rademacher import delta_inner, window_deficit
from .spectral import (
    GridFunction,
    SpectralCoeffs,
    analyze,
    kunze_sup_bound,
    random_coeffs,
    synthesize_grid,
)
from .verifier import CORRUPTIONS, corrupt_bundle, verify_bundle

log = logging.getLogger(__name__)


def constant_one(group):
    return SpectralCoeffs(group, {trivial_label(group): np.array([[1.0]])})


def sqrt2_cos(group):
    """``sqrt(2) cos(x)`` on the circle, unit L2 norm."""
    c = math.sqrt(2.0) / 2.0
    return SpectralCoeffs(group, {label(group, 1): np.array([[c]]), label(group, -1): np.array([[c]])})


def orthogonality_defect(group, B):
    """Max deviation of ``d <pi_ij, pi'_kl>`` from the Kronecker pattern."""
    grid = haar_grid(group, B)
    cols = []
    for lab in enumerate_irreps(group, B):
        D = irrep_matrix(group, lab, grid.points).reshape(grid.size, -1)
        cols.append(math.sqrt(lab.degree) * D)
    Phi = np.concatenate(cols, axis=1)
    gram = (Phi.conj().T * grid.weights) @ Phi
    return float(np.abs(gram - np.eye(gram.shape[0])).max())


def parseval_defect(group, B, rng):
    A = random_coeffs(group, B, rng)
    grid = haar_grid(group, B)
    vals = synthesize_grid(A, grid)
    l2 = float(grid.integrate(np.abs(vals) ** 2).real)
    rel = abs(l2 - A.hs_norm_sq()) / A.hs_norm_sq()
    back = analyze(GridFunction(grid, vals), B)
    ent = max(float(np.abs(back[lab] - A[lab]).max()) for lab in A.labels())
    return rel, ent


def dyadic_defects(f0, k_max):
    """Worst equal-weight error, nesting flag and Omega-bound flag over ``k <= k_max``."""
    F = pushforward_cdf(f0)
    tree = build_tree(F, k_max)
    worst, nest, omega_ok = 0.0, True, True
    for k in range(1, k_max + 1):
        m = cell_nu_masses(F, tree, k) / F.nu_total
        worst = max(worst, float(np.abs(m * 2**k - 1).max()))
        nest &= bool(np.array_equal(tree.boundaries[k - 1], tree.boundaries[k][::2]))
        cells = tree.cells(k)
        excess = (cells[:, 1] - cells[:, 0]) - (tree.cores[k][:, 1] - tree.cores[k][:, 0])
        omega_ok &= bool(np.all(excess < 2.0 ** (-2 * k)))
        omega_ok &= omega_measure(tree, k) >= 1 - 2.0**-k
    return worst, nest, omega_ok


def run_selftest():
    rng = np.random.default_rng(12345)
    circle, torus, su2 = parse_group("circle"), parse_group("torus:2"), parse_group("su2")
    out = []

    d = max(orthogonality_defect(circle, 8), orthogonality_defect(torus, 3),
            orthogonality_defect(su2, 3.0))
    out.append(("orthogonality", d < 1e-9, f"max defect {d:.2e}"))

    worst_rel = worst_ent = 0.0
    for g, B in ((circle, 8), (torus, 3), (su2, 2.0)):
        for _ in range(5):
            rel, ent = parseval_defect(g, B, rng)
            worst_rel, worst_ent = max(worst_rel, rel), max(worst_ent, ent)
    out.append(("parseval", worst_rel < 1e-8 and worst_ent < 1e-9,
                f"rel {worst_rel:.2e}, round trip {worst_ent:.2e}"))

    ok, detail = True, []
    for name, f0 in (("one", constant_one(circle)), ("sqrt2cos", sqrt2_cos(circle))):
        worst, nest, om = dyadic_defects(f0, 6)
        ok &= worst < 1e-8 and nest and om
        detail.append(f"{name}: weight err {worst:.1e}")
    out.append(("dyadic", ok, "; ".join(detail)))

    ok, detail = True, []
    for name, f0 in (("one", constant_one(circle)), ("sqrt2cos", sqrt2_cos(circle))):
        F = pushforward_cdf(f0)
        tree = build_tree(F, 6)
        sup2 = 1.0 if name == "one" else 2.0
        for k in range(1, 7):
            ok &= window_deficit(tree, k, f0) <= 2.0**-k * sup2
        inner = max(abs(delta_inner(F, tree, k, l)) for k in range(1, 7) for l in range(1, k))
        ok &= inner < 1e-8
        detail.append(f"{name}: max |<delta_k, delta_l>| {inner:.1e}")
    out.append(("rademacher", ok, "; ".join(detail)))

    worst = math.inf
    for g, B in ((circle, 8), (torus, 3), (su2, 2.0)):
        for _ in range(5):
            A = random_coeffs(g, B, rng)
            grid = haar_grid(g, 4 * B)
            sup = float(np.abs(synthesize_grid(A, grid)).max())
            worst = min(worst, kunze_sup_bound(A) - sup)
    out.append(("kunze", worst >= -1e-10, f"min margin {worst:.2e}"))

    params = ConstructionParams(circle, constant_one(circle), [0.5, 0.25], band_cap=1024)
    bundle = construct_system(params)
    report = verify_bundle(bundle)
    out.append(("construct+verify", report.passed, f"failed: {report.failed_checks()}"))

    ok = True
    for mode, target in CORRUPTIONS.items():
        failed = verify_bundle(corrupt_bundle(bundle, mode, 2)).failed_checks()
        ok &= failed == [target]
    out.append(("negative controls", ok, "each corruption trips only its check"))
    return out
