"""
Building and certifying a disjoint-spectrum system on the circle
================================================================

Each ``f_m`` is a trigonometric polynomial whose spectrum avoids every
earlier one, with ``|f_m| < 1 + eps_m`` everywhere and
``|f_m| > 1 - eps_m`` on a set of measure at least ``1 - 2^(-k_m)``.
"""
import tempfile
from pathlib import Path

from aus import ConstructionParams, SystemBundle, construct_system, corrupt_bundle, parse_group, verify_bundle
from aus.report import emit_plots
from aus.selftest import constant_one
from aus.verifier import CORRUPTIONS

circle = parse_group("circle")
bundle = construct_system(ConstructionParams(circle, constant_one(circle), [0.5, 0.25, 0.125]))
for r in bundle.records:
    print(f"m={r.m} k_m={r.k_m} delta_m={r.delta_m:.4g} |Lambda|={len(r.lam)} "
          f"B={r.bandlimit:g} sup_err={r.sup_err:.2e} mu(Omega)={r.omega_measure}")

###############################################################################
# The verifier only sees the saved file, so we round-trip through disk.
out = Path(tempfile.mkdtemp())
bundle.save(out / "bundle.json")
report = verify_bundle(SystemBundle.load(out / "bundle.json"))
for rec in report.records:
    print(f"m={rec['m']} upper margin {rec['upper']['margin']:.3e} "
          f"lower margin {rec['lower']['margin']:.3e} residual {rec['disjoint']['residual']:.1e}")
print("certified:", report.passed)

###############################################################################
# Each deliberate corruption is caught by exactly one check.
for mode, target in CORRUPTIONS.items():
    failed = verify_bundle(corrupt_bundle(bundle, mode, 2)).failed_checks()
    print(f"{mode:10s} -> {failed} (expected {target!r})")

###############################################################################
# Profiles along the sweep coordinate and the envelope band as CSV and SVG.
print([Path(p).name for p in emit_plots(bundle, out / "plots")])
