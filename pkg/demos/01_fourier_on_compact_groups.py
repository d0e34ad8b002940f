"""
Fourier analysis on the circle, the torus and SU(2)
===================================================

Irreducible representations, exact Haar quadrature and the analysis and
synthesis round trip that every later step relies on.
"""
import numpy as np

from aus import analyze, enumerate_irreps, haar_grid, irrep_matrix, parse_group, synthesize
from aus.spectral import GridFunction, kunze_sup_bound, random_coeffs, synthesize_grid

rng = np.random.default_rng(0)

###############################################################################
# Groups are parsed from short strings. SU(2) labels store twice the spin,
# so ``j=1/2`` is a 2x2 unitary matrix.
for name in ("circle", "torus:2", "su2"):
    g = parse_group(name)
    labs = enumerate_irreps(g, 1)
    print(f"{name:8s} irreps up to bandlimit 1: {[str(l) for l in labs]}")

su2 = parse_group("su2")
half = enumerate_irreps(su2, 0.5)[1]
U = irrep_matrix(su2, half, np.array([[0.3, 1.1, -0.4]]))[0]
print("j=1/2 at a random Euler triple is unitary:", np.allclose(U @ U.conj().T, np.eye(2)))

###############################################################################
# A random bandlimited function survives synthesis then analysis on the
# exact quadrature grid.
for name, B in (("circle", 8), ("torus:2", 3), ("su2", 2.0)):
    g = parse_group(name)
    A = random_coeffs(g, B, rng)
    grid = haar_grid(g, B)
    back = analyze(GridFunction(grid, synthesize_grid(A, grid)), B)
    err = max(np.abs(back[l] - A[l]).max() for l in A.labels())
    print(f"{name:8s} round trip error {err:.1e} on {grid.size} nodes")

###############################################################################
# The sup norm of a trigonometric polynomial is bounded by the sum of
# degree times trace norm of its coefficients.
g = parse_group("su2")
A = random_coeffs(g, 2.0, rng)
pts = g.random_points(20000, rng)
print(f"sampled sup {np.abs(synthesize(A, pts)).max():.3f} <= bound {kunze_sup_bound(A):.3f}")
