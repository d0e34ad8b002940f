"""
Equal-weight dyadic partitions and windowed Rademacher functions
================================================================

The weight ``|f0|^2`` is pushed forward to a sweep coordinate in [0, 1].
Cells of equal weight are nested, and each cell keeps a core that loses at
most ``2^(-2k)`` of Haar measure.
"""
import numpy as np

from aus import build_tree, eval_delta, eval_psi, parse_group, pushforward_cdf
from aus.dyadic import cell_nu_masses, omega_measure
from aus.rademacher import delta_inner, window_deficit
from aus.selftest import sqrt2_cos

circle = parse_group("circle")
f0 = sqrt2_cos(circle)
F = pushforward_cdf(f0)
tree = build_tree(F, 6)

###############################################################################
# Level 2 boundaries are no longer quarter points because the weight is
# ``2 cos^2``; every cell still carries a quarter of the mass.
print("level 2 boundaries:", np.round(tree.boundaries[2], 6))
print("relative cell masses:", cell_nu_masses(F, tree, 2) / F.nu_total)
for k in range(1, 7):
    print(f"k={k}  mu(Omega) = {omega_measure(tree, k):.6f} >= {1 - 2.0**-k:.6f}")

###############################################################################
# ``delta_k`` alternates sign across cells of level k and carries ``f0``;
# ``psi_k`` ramps smoothly to zero off the cores so it is continuous.
x = np.linspace(0, 2 * np.pi, 9)[:-1, None]
print("delta_2:", np.round(eval_delta(tree, 2, f0, x).real, 3))
print("psi_2:  ", np.round(eval_psi(tree, 2, f0, x).real, 3))

###############################################################################
# The windows cost little L2 mass and the signed functions are orthogonal.
for k in (1, 3, 6):
    print(f"k={k}  ||psi_k - delta_k||^2 = {window_deficit(tree, k, f0):.2e}"
          f"  bound {2.0**-k * 2:.2e}")
print("max |<delta_k, delta_l>| for k != l:",
      f"{max(abs(delta_inner(F, tree, k, l)) for k in range(1, 7) for l in range(1, k)):.1e}")
