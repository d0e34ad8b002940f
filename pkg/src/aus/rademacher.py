"""Rademacher-like sign systems built on the dyadic bands.

``delta_k = f0 * sum_j (-1)^(j+1) 1_{D_j^k}`` (hard window) and
``psi_k = f0 * sum_j (-1)^(j+1) gamma_j^k`` (ramped window), where each
``gamma_j^k`` equals 1 on the core, 0 at the cell edges and ramps in between.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import eval_chebyu

from .dyadic import SweepMarginal
from .groups import su2_theta_from_sweep, sweep_coordinate
from .spectral import synthesize, synthesize_grid

PROFILES = ("linear", "smooth")


def ramp(x, profile="smooth"):
    """Monotone ramp from 0 (x <= 0) to 1 (x >= 1), with ``ramp(1/2) = 1/2``."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    if profile == "linear":
        return x
    if profile != "smooth":
        raise ValueError(f"unknown ramp profile {profile!r}")
    # C-infinity smoothstep from exp(-1/x)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def cell_signs(n):
    """``(-1)^(j+1)`` for 1-based ``j``; first cell positive."""
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


@dataclass
class WindowEnvelope:
    """Piecewise sign window on ``[0, 1)`` for one dyadic level."""

    k: int
    cells: np.ndarray
    cores: np.ndarray
    signs: np.ndarray
    mode: str = "ramped"
    profile: str = "smooth"

    @classmethod
    def from_tree(cls, tree, k, mode="ramped", profile="smooth"):
        if k > tree.k_max:
            raise ValueError(f"level {k} exceeds tree depth {tree.k_max}")
        if mode not in ("hard", "ramped"):
            raise ValueError(f"unknown window mode {mode!r}")
        cells = tree.cells(k)
        return cls(k, cells, tree.cores[k], cell_signs(len(cells)), mode, profile)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        edges = np.append(self.cells[:, 0], 1.0)
        j = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(self.cells) - 1)
        sign = self.signs[j]
        if self.mode == "hard":
            return sign
        a, b = self.cells[j, 0], self.cells[j, 1]
        c, d = self.cores[j, 0], self.cores[j, 1]
        sl, sr = c - a, b - d
        with np.errstate(divide="ignore", invalid="ignore"):
            left = np.where(sl > 0, ramp((t - a) / np.where(sl > 0, sl, 1.0), self.profile), 1.0)
            right = np.where(sr > 0, ramp((b - t) / np.where(sr > 0, sr, 1.0), self.profile), 1.0)
        return sign * np.minimum(left, right)

    def ramp_intervals(self):
        """``(start, end, rising)`` for every ramp; ``rising`` means 0 -> 1."""
        out = []
        for (a, b), (c, d) in zip(self.cells, self.cores):
            if c > a:
                out.append((a, c, True))
            if b > d:
                out.append((d, b, False))
        return out


def _f0_values(f0, points, grid=None):
    if grid is not None:
        return synthesize_grid(f0, grid)
    return synthesize(f0, points)


def eval_delta(tree, k, f0, points, grid=None):
    """``delta_k(g) = f0(g) * hard window(t(g))``."""
    pts = grid.points if grid is not None else np.atleast_2d(points)
    w = WindowEnvelope.from_tree(tree, k, mode="hard")
    vals = _f0_values(f0, pts, grid) * w(sweep_coordinate(f0.group, pts))
    if grid is None and np.ndim(points) == 1:
        return complex(vals[0])
    return vals


def eval_psi(tree, k, f0, points, grid=None, profile="smooth"):
    """``psi_k(g) = f0(g) * ramped window(t(g))``; continuous on the group."""
    pts = grid.points if grid is not None else np.atleast_2d(points)
    w = WindowEnvelope.from_tree(tree, k, mode="ramped", profile=profile)
    vals = _f0_values(f0, pts, grid) * w(sweep_coordinate(f0.group, pts))
    if grid is None and np.ndim(points) == 1:
        return complex(vals[0])
    return vals


def window_deficit(tree, k, f0, profile="smooth", nodes=128):
    """``||psi_k - delta_k||_{L2}^2`` by Gauss-Legendre along the sweep coordinate.

    Only ramps contribute, each with integrand ``(1 - ramp)^2`` against the
    marginal density of ``|f0|^2``.
    """
    marginal = SweepMarginal(f0)
    w = WindowEnvelope.from_tree(tree, k, profile=profile)
    x, wx = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (x + 1.0)
    parts = []
    for start, end, rising in w.ramp_intervals():
        h = end - start
        t = start + h * u
        r = ramp(u if rising else 1.0 - u, profile)
        parts.append(0.5 * h * float(np.sum(wx * (1.0 - r) ** 2 * marginal.density(t))))
    return math.fsum(parts)


def delta_inner(F, tree, k, l):
    """``<delta_k, delta_l>_{L2}`` from exact band weights at the finer level."""
    L = max(k, l)
    masses = np.diff(F(tree.boundaries[L])) * F.nu_total
    j = np.arange(1 << L)
    sk = cell_signs(1 << k)[j >> (L - k)]
    sl = cell_signs(1 << l)[j >> (L - l)]
    return math.fsum((sk * sl * masses).tolist())


def ramp_probe_sweeps(tree, k, budget=20000):
    """Sweep coordinates spread through every level-``k`` ramp (at most ``budget``)."""
    w = WindowEnvelope.from_tree(tree, k)
    ramps = w.ramp_intervals()
    if not ramps:
        return np.empty(0)
    per = max(1, min(8, budget // len(ramps)))
    u = (np.arange(per) + 0.5) / per
    return np.concatenate([a + (b - a) * u for a, b, _ in ramps])


def window_class_coeffs(tree, k, two_l_max, profile="smooth", nodes=64):
    """``w_l = int W(t(g)) chi_l(g) dmu(g)`` for ``2l = 0..two_l_max`` on SU(2).

    ``W`` is the ramped level-``k`` window, a class function, so
    ``W = sum_l w_l chi_l``. The integral runs over the half angle ``theta``
    with Weyl density ``(2/pi) sin^2 theta``, split at every cell and core
    edge so each Gauss-Legendre panel sees a smooth integrand.
    """
    w = WindowEnvelope.from_tree(tree, k, profile=profile)
    edges = np.unique(np.concatenate([w.cells.ravel(), w.cores.ravel(), [0.0, 1.0]]))
    th = su2_theta_from_sweep(edges)
    th[0], th[-1] = 0.0, np.pi
    x, wx = np.polynomial.legendre.leggauss(nodes)
    lo, hi = th[:-1], th[1:]
    half = 0.5 * (hi - lo)
    nodes_th = (lo + half)[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * wx[None, :]
    nodes_th, weights = nodes_th.ravel(), weights.ravel()
    t = (nodes_th - np.sin(nodes_th) * np.cos(nodes_th)) / np.pi
    dens = weights * (2.0 / np.pi) * np.sin(nodes_th) ** 2 * w(t)
    c = np.cos(nodes_th)
    return np.array([math.fsum((dens * eval_chebyu(n, c)).tolist())
                     for n in range(two_l_max + 1)])
