"""
Where SU(2) runs out of room
============================

The first function fits within spin 8, but the second needs the dyadic
level at which the windowed sign function is nearly orthogonal to every
coefficient of ``f_1``. That overlap decays only like ``2^(-k)``, so the
level cap is exhausted and a partial bundle is kept for inspection.
"""
from aus import CapError, ConstructionParams, construct_system, parse_group, verify_bundle
from aus.constructor import overlap_sum
from aus.selftest import constant_one

su2 = parse_group("su2")
f0 = constant_one(su2)
params = ConstructionParams(su2, f0, [0.6, 0.5, 0.4], band_cap=16)
try:
    bundle = construct_system(params)
except CapError as err:
    print("cap reached:", err)
    bundle = err.bundle

r1 = bundle.records[0]
print(f"m=1: 2j <= {2 * r1.bandlimit:g}, taper {r1.taper}, sup_err {r1.sup_err:.3f}")
labs = sorted(r1.coeffs.support(), key=lambda l: l.sort_key())
for k in (1, 4, 8, 12):
    print(f"overlap with level {k:2d}: {overlap_sum(bundle.tree, k, f0, labs):.3f}")
print("verifier:", verify_bundle(bundle).failed_checks())
