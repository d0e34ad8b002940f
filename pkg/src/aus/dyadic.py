"""Equal-weight dyadic bands in the sweep coordinate and their compact cores.

The weight is ``nu = |f0|^2 dmu``. Its pushforward under the sweep
coordinate has a density that is itself a trigonometric expression (the
marginal of ``|f0|^2``), so the CDF has a closed-form antiderivative and the
quantiles can be located to machine precision.
"""

from dataclasses import dataclass
import math

import numpy as np

from .groups import haar_grid, su2_theta_from_sweep
from .spectral import GridFunction, analyze, synthesize_grid

DEFAULT_MESH = 1 << 16
MAX_MESH = 1 << 24
MIN_INTERVALS_PER_CELL = 16


def weight_coeffs(f0):
    """Spectral coefficients of ``|f0|^2``."""
    b = f0.bandlimit
    grid = haar_grid(f0.group, 2 * b)
    vals = synthesize_grid(f0, grid)
    return analyze(GridFunction(grid, np.abs(vals) ** 2), 2 * b)


class SweepMarginal:
    """Conditional mean of ``|f0|^2`` along the sweep coordinate.

    ``density(t)`` is ``d nu / dt`` and ``mass(t)`` is ``nu{t(g) < t}``.
    """

    def __init__(self, f0):
        self.group = f0.group
        h = weight_coeffs(f0)
        if self.group.kind == "su2":
            # class average of h is sum_j tr(hhat_j) chi_j
            self.n = np.array([lab.index[0] for lab, _ in h.items()], dtype=float)
            self.c = np.array([np.trace(m).real for _, m in h.items()])
        else:
            rows = [(lab.index[0], m[0, 0]) for lab, m in h.items()
                    if all(v == 0 for v in lab.index[1:])]
            self.n = np.array([r[0] for r in rows], dtype=float)
            self.c = np.array([r[1] for r in rows], dtype=complex)
        self.total = float(self.mass(np.array([1.0]))[0])

    def density(self, t):
        t = np.asarray(t, dtype=float)
        if self.group.kind == "su2":
            th = su2_theta_from_sweep(t)
            s = np.sin(th)
            num = np.sin(np.multiply.outer(th, self.n + 1))
            with np.errstate(invalid="ignore", divide="ignore"):
                chi = np.where(s[..., None] > 1e-300, num / s[..., None], self.n + 1)
            return chi @ self.c
        ph = np.exp(2j * np.pi * np.multiply.outer(t, self.n))
        return (ph @ self.c).real

    def mass(self, t):
        t = np.asarray(t, dtype=float)
        if self.group.kind == "su2":
            th = su2_theta_from_sweep(t)
            n = self.n
            th_n = np.multiply.outer(th, n)
            th_n2 = np.multiply.outer(th, n + 2)
            with np.errstate(invalid="ignore", divide="ignore"):
                first = np.where(n > 0, np.sin(th_n) / np.where(n > 0, n, 1), th[..., None])
            terms = (first - np.sin(th_n2) / (n + 2)) / np.pi
            return terms @ self.c
        n = self.n
        zero = n == 0
        safe = np.where(zero, 1.0, n)
        prim = (np.exp(2j * np.pi * np.multiply.outer(t, n)) - 1.0) / (2j * np.pi * safe)
        prim = np.where(zero, t[..., None], prim)
        return (prim @ self.c).real


@dataclass
class PushforwardCDF:
    """Normalized CDF ``F(t) = nu{t(g) < t} / nu(G)`` tabulated on a uniform mesh."""

    marginal: SweepMarginal
    mesh: np.ndarray
    values: np.ndarray

    @property
    def nu_total(self):
        return self.marginal.total

    @property
    def mesh_size(self):
        return len(self.mesh) - 1

    def __call__(self, t):
        return self.marginal.mass(np.asarray(t, dtype=float)) / self.nu_total

    def density(self, t):
        return self.marginal.density(t) / self.nu_total

    def interp(self, t):
        return np.interp(t, self.mesh, self.values)

    def refined(self, mesh_size):
        return _tabulate(self.marginal, mesh_size)

    def quantile(self, q):
        """Leftmost ``b`` with ``F(b) = q`` (smallest ``b`` with ``F(b) >= q``)."""
        q = np.atleast_1d(np.asarray(q, dtype=float))
        i = np.searchsorted(self.values, q, side="left")
        i = np.clip(i, 1, len(self.mesh) - 1)
        lo = self.mesh[i - 1].copy()
        hi = self.mesh[i].copy()
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4 * np.spacing(np.maximum(hi, 1e-300))):
                break
        out = np.where(q <= 0.0, 0.0, np.where(q >= 1.0, 1.0, hi))
        return out


def _tabulate(marginal, mesh_size):
    mesh = np.linspace(0.0, 1.0, mesh_size + 1)
    vals = marginal.mass(mesh) / marginal.total
    vals = np.maximum.accumulate(np.clip(vals, 0.0, 1.0))
    vals[0], vals[-1] = 0.0, 1.0
    return PushforwardCDF(marginal, mesh, vals)


def pushforward_cdf(f0, mesh_size=DEFAULT_MESH):
    """CDF of the sweep coordinate under ``|f0|^2 dmu``, normalized to end at 1."""
    if f0.group.kind != "su2" and f0.group.kind not in ("circle", "torus"):
        raise ValueError(f"unsupported group {f0.group}")
    if not f0.support():
        raise ValueError("degenerate weight: f0 is identically zero")
    marginal = SweepMarginal(f0)
    if not marginal.total > 0:
        raise ValueError("degenerate weight: f0 is identically zero")
    return _tabulate(marginal, mesh_size)


@dataclass
class DyadicTree:
    """Nested equal-weight bands ``D_j^k`` and closed cores ``K_j^k``.

    ``boundaries[k]`` has ``2^k + 1`` entries; ``cores[k]`` is a
    ``(2^k, 2)`` array. Level 0 is the whole group.
    """

    k_max: int
    boundaries: list
    cores: list
    nu_total: float

    def cells(self, k):
        b = self.boundaries[k]
        return np.stack([b[:-1], b[1:]], axis=1)

    def cell_index(self, k, t):
        b = self.boundaries[k]
        j = np.searchsorted(b, t, side="right") - 1
        return np.clip(j, 0, len(b) - 2)

    def to_json(self):
        return {
            "k_max": self.k_max,
            "nu_total": self.nu_total,
            "levels": [
                {"k": k, "boundaries": [float(x) for x in self.boundaries[k]],
                 "cores": [[float(a), float(b)] for a, b in self.cores[k]]}
                for k in range(1, self.k_max + 1)
            ],
        }

    @classmethod
    def from_json(cls, obj):
        k_max = int(obj["k_max"])
        bounds = [np.array([0.0, 1.0])]
        cores = [np.array([[0.0, 1.0]])]
        for lev in obj["levels"]:
            bounds.append(np.array(lev["boundaries"], dtype=float))
            cores.append(np.array(lev["cores"], dtype=float).reshape(-1, 2))
        if len(bounds) != k_max + 1:
            raise ValueError("tree levels do not match k_max")
        tree = cls(k_max, bounds, cores, float(obj["nu_total"]))
        tree.cores[0] = shrink_cores(tree, 0)
        return tree


def build_tree(F, k_max):
    """Dyadic bands from leftmost quantiles of ``F``, cores for every level."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    n = 1 << k_max
    while True:
        q = np.arange(n + 1) / n
        finest = F.quantile(q)
        finest[0], finest[-1] = 0.0, 1.0
        finest = np.maximum.accumulate(finest)
        width = np.diff(finest).min()
        if width * F.mesh_size >= MIN_INTERVALS_PER_CELL:
            break
        # quantiles come from the exact CDF, so the needed mesh is known now
        need = int(math.ceil(MIN_INTERVALS_PER_CELL / max(width, 1e-300)))
        if need > MAX_MESH:
            raise ValueError(
                f"level {k_max} cells under-resolved: mesh size >= {need} "
                f"required (limit {MAX_MESH})"
            )
        F = F.refined(max(2 * F.mesh_size, 1 << (need - 1).bit_length()))
    bounds = [finest[:: 1 << (k_max - k)].copy() for k in range(k_max + 1)]
    tree = DyadicTree(k_max, bounds, [None] * (k_max + 1), F.nu_total)
    for k in range(k_max + 1):
        tree.cores[k] = shrink_cores(tree, k)
    return tree


def shrink_amount(k, width):
    """Per-side shrink ``min(2^(-2k-2), width/4)``."""
    return np.minimum(2.0 ** (-2 * k - 2), np.asarray(width) / 4.0)


def shrink_cores(tree, k):
    """Closed core intervals of level-``k`` cells."""
    if k > tree.k_max:
        raise ValueError(f"level {k} exceeds tree depth {tree.k_max}")
    cells = tree.cells(k)
    s = shrink_amount(k, cells[:, 1] - cells[:, 0])
    return np.stack([cells[:, 0] + s, cells[:, 1] - s], axis=1)


def omega_measure(tree, k):
    """Haar measure of the union of level-``k`` cores (bands have measure = width)."""
    c = tree.cores[k]
    return math.fsum((c[:, 1] - c[:, 0]).tolist())


def cell_nu_masses(F, tree, k):
    """``nu(D_j^k)`` from the exact CDF."""
    return np.diff(F(tree.boundaries[k])) * F.nu_total
