"""Fourier analysis and synthesis against the dual object.

Conventions: ``fhat(pi) = int f(g) pi(g)^* dmu(g)`` and
``f(g) = sum_pi d_pi tr(pi(g) fhat(pi))``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .groups import (
    IrrepLabel,
    QuadratureGrid,
    check_label,
    enumerate_irreps,
    irrep_matrix,
    parse_group,
    wigner_small_d,
)

SUPPORT_RTOL = 1e-12


@dataclass
class GridFunction:
    """Samples of a function on the nodes of a quadrature grid."""

    grid: QuadratureGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).ravel()
        if self.values.size != self.grid.size:
            raise ValueError(
                f"sample count {self.values.size} != grid size {self.grid.size}"
            )

    @classmethod
    def from_callable(cls, grid, func):
        return cls(grid, func(grid.points))


class SpectralCoeffs:
    """Map from irrep labels to ``d x d`` complex coefficient matrices.

    The support is the set of labels whose largest entry modulus exceeds
    ``tau_supp = 1e-12 * max(1, largest entry overall)``.
    """

    def __init__(self, group, coeffs=None):
        self.group = group
        self.coeffs = {}
        for lab, mat in (coeffs or {}).items():
            check_label(group, lab)
            m = np.asarray(mat, dtype=complex).reshape(lab.degree, lab.degree)
            self.coeffs[lab] = m

    def __repr__(self):
        return f"SpectralCoeffs({self.group}, {len(self.coeffs)} labels)"

    def __len__(self):
        return len(self.coeffs)

    def __contains__(self, lab):
        return lab in self.coeffs

    def __getitem__(self, lab):
        if lab in self.coeffs:
            return self.coeffs[lab]
        return np.zeros((lab.degree, lab.degree), dtype=complex)

    def labels(self):
        return sorted(self.coeffs, key=IrrepLabel.sort_key)

    def items(self):
        return [(lab, self.coeffs[lab]) for lab in self.labels()]

    def max_entry(self):
        if not self.coeffs:
            return 0.0
        return max(float(np.abs(m).max()) for m in self.coeffs.values())

    @property
    def tau_supp(self):
        return SUPPORT_RTOL * max(1.0, self.max_entry())

    def support(self):
        tau = self.tau_supp
        return [lab for lab in self.labels() if np.abs(self.coeffs[lab]).max() > tau]

    def normalized(self):
        """Copy without labels whose matrices are entirely below threshold."""
        keep = set(self.support())
        return SpectralCoeffs(
            self.group, {lab: m.copy() for lab, m in self.coeffs.items() if lab in keep}
        )

    @property
    def bandlimit(self):
        labs = self.support()
        return max((lab.bandlimit for lab in labs), default=0)

    def scaled(self, factor):
        return SpectralCoeffs(self.group, {k: factor * v for k, v in self.coeffs.items()})

    def restricted(self, labels):
        labels = set(labels)
        return SpectralCoeffs(
            self.group, {k: v.copy() for k, v in self.coeffs.items() if k in labels}
        )

    def copy(self):
        return self.restricted(self.coeffs)

    def hs_norm_sq(self):
        """``sum_pi d_pi ||A(pi)||_HS^2``, the squared L2 norm of the synthesis."""
        return math.fsum(
            lab.degree * float(np.sum(np.abs(m) ** 2)) for lab, m in self.items()
        )

    def to_json(self):
        out = {}
        for lab, m in self.items():
            flat = m.ravel()
            out[str(lab)] = [[float(z.real), float(z.imag)] for z in flat]
        return {"group": str(self.group), "coeffs": out}

    @classmethod
    def from_json(cls, obj, group=None):
        group = group or parse_group(obj["group"])
        coeffs = {}
        for key, pairs in obj["coeffs"].items():
            lab = IrrepLabel.parse(group, key)
            arr = np.array(pairs, dtype=float)
            if arr.shape != (lab.degree**2, 2):
                raise ValueError(f"coefficient {key} has wrong shape {arr.shape}")
            coeffs[lab] = (arr[:, 0] + 1j * arr[:, 1]).reshape(lab.degree, lab.degree)
        return cls(group, coeffs)


# ---------------------------------------------------------------------------
# analysis


def fourier_coeff(f, lab, grid=None):
    """Quadrature value of ``int f(g) pi(g)^* dmu(g)`` for one label."""
    if isinstance(f, GridFunction):
        grid, values = f.grid, f.values
    else:
        values = np.asarray(f, dtype=complex).ravel()
        if grid is None or values.size != grid.size:
            raise ValueError("grid/sample mismatch")
    D = irrep_matrix(grid.group, lab, grid.points)
    wf = grid.weights * values
    return np.einsum("n,nqp->pq", wf, D.conj())


def analyze(f, B):
    """Fourier coefficients of a grid function for every label of bandlimit ``<= B``."""
    grid = f.grid
    group = grid.group
    labs = enumerate_irreps(group, B)
    if group.kind == "su2":
        return SpectralCoeffs(group, _analyze_su2(f.values, grid, labs))
    vals = f.values.reshape(grid.shape)
    spec = np.fft.fftn(vals) / vals.size
    shape = np.array(grid.shape)
    out = {}
    for lab in labs:
        idx = tuple(np.mod(np.array(lab.index), shape))
        out[lab] = np.array([[spec[idx]]])
    return SpectralCoeffs(group, out)


def _analyze_su2(values, grid, labs):
    (alpha, wa), (beta, wb), (gamma, wg) = grid.axes
    vals = values.reshape(grid.shape)
    two_jmax = max(lab.index[0] for lab in labs)
    m2 = np.arange(-two_jmax, two_jmax + 1)
    ea = np.exp(0.5j * np.outer(m2, alpha)) * wa
    eg = np.exp(0.5j * np.outer(m2, gamma)) * wg
    # S[q, b, p] = sum_{a,c} w f e^{i q alpha} e^{i p gamma}
    tmp = np.tensordot(ea, vals, axes=([1], [0]))
    S = np.tensordot(tmp, eg, axes=([2], [1]))
    out = {}
    for lab in labs:
        tj = lab.index[0]
        small = wigner_small_d(tj, beta)
        pos = two_jmax + (tj - 2 * np.arange(tj + 1))  # row index of 2m in m2
        sub = S[np.ix_(pos, np.arange(len(beta)), pos)]  # [q, b, p]
        # fhat[p, q] = sum_b w_b d^j_{q p}(beta_b) S[q, b, p]
        out[lab] = np.einsum("b,bqp,qbp->pq", wb, small, sub)
    return out


# ---------------------------------------------------------------------------
# synthesis


def synthesize(A, points):
    """Evaluate ``sum_pi d_pi tr(pi(g) A(pi))`` at one point or a batch."""
    group = A.group
    p = np.asarray(points, dtype=float)
    single = p.ndim == 1
    p = p.reshape(-1, group.dim)
    out = np.zeros(len(p), dtype=complex)
    items = A.items()
    if not items:
        return complex(out[0]) if single else out
    if group.kind == "su2":
        for lab, m in items:
            D = irrep_matrix(group, lab, p)
            out += lab.degree * np.einsum("nik,ki->n", D, m)
    else:
        idx = np.array([lab.index for lab, _ in items], dtype=float)
        c = np.array([m[0, 0] for _, m in items])
        chunk = max(1, 2_000_000 // len(items))
        for s in range(0, len(p), chunk):
            out[s : s + chunk] = np.exp(1j * (p[s : s + chunk] @ idx.T)) @ c
    return complex(out[0]) if single else out


def synthesize_grid(A, grid):
    """Evaluate the synthesis on every node of a tensor grid (flattened)."""
    group = A.group
    items = A.items()
    if not items:
        return np.zeros(grid.size, dtype=complex)
    if group.kind == "su2":
        return _synthesize_su2_grid(items, grid)
    shape = np.array(grid.shape)
    spec = np.zeros(grid.shape, dtype=complex)
    idx = np.mod(np.array([lab.index for lab, _ in items]), shape)
    c = np.array([m[0, 0] for _, m in items])
    np.add.at(spec, tuple(idx.T), c)
    return (np.fft.ifftn(spec) * spec.size).ravel()


def _synthesize_su2_grid(items, grid):
    (alpha, _), (beta, _), (gamma, _) = grid.axes
    two_jmax = max(lab.index[0] for lab, _ in items)
    m2 = np.arange(-two_jmax, two_jmax + 1)
    nm = len(m2)
    C = np.zeros((len(beta), nm, nm), dtype=complex)
    for lab, A in items:
        tj = lab.index[0]
        small = wigner_small_d(tj, beta)
        pos = two_jmax + (tj - 2 * np.arange(tj + 1))
        # tr(D A) = sum_{i,k} D_{ik} A_{ki}
        C[np.ix_(np.arange(len(beta)), pos, pos)] += lab.degree * small * A.T[None]
    ea = np.exp(-0.5j * np.outer(alpha, m2))  # [a, i]
    eg = np.exp(-0.5j * np.outer(m2, gamma))  # [k, c]
    tmp = np.tensordot(ea, C, axes=([1], [1]))  # [a, b, k]
    vals = np.tensordot(tmp, eg, axes=([2], [0]))  # [a, b, c]
    return vals.ravel()


def zero_on_set(A, labels):
    """Remove the coefficients at ``labels``; the support then avoids them exactly."""
    labels = set(labels)
    return SpectralCoeffs(
        A.group, {k: v.copy() for k, v in A.coeffs.items() if k not in labels}
    )


def random_coeffs(group, B, rng, scale=1.0):
    """Random complex coefficients on every label of bandlimit ``<= B``."""
    out = {}
    for lab in enumerate_irreps(group, B):
        d = lab.degree
        out[lab] = scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return SpectralCoeffs(group, out)


# ---------------------------------------------------------------------------
# norms


def trace_norm(M):
    """Schatten-1 norm: the sum of singular values."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(M, compute_uv=False)))


def kunze_sup_bound(A):
    """``sum_pi d_pi ||A(pi)||_1``, an upper bound for ``sup_g |synthesize(A, g)|``."""
    return math.fsum(lab.degree * trace_norm(m) for lab, m in A.items())


def entrywise_l1_sum(A, labels):
    """``sum_{pi in labels} d_pi sum_{ij} |A(pi)_ij|``."""
    return math.fsum(
        lab.degree * float(np.abs(A[lab]).sum()) for lab in sorted(labels, key=IrrepLabel.sort_key)
    )
