"""Concrete infinite compact groups: circle, d-torus and SU(2).

Points are stored as coordinate arrays of shape ``(n, dim)``:

* circle: ``theta`` in ``[0, 2pi)``
* torus:d: angle vector in ``[0, 2pi)^d``
* su2: z-y-z Euler angles ``(alpha, beta, gamma)`` in
  ``[0, 2pi) x [0, pi] x [0, 4pi)``

Irreducible representations are labelled by integer tuples; SU(2) spins are
stored as ``2j`` so half-integers never become float keys.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
import re

import numpy as np
from scipy.special import eval_jacobi, gammaln

TWO_PI = 2.0 * np.pi
FOUR_PI = 4.0 * np.pi

KINDS = ("circle", "torus", "su2")


@dataclass(frozen=True)
class GroupDescriptor:
    """One of the supported infinite compact groups."""

    kind: str
    dim: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unsupported group kind {self.kind!r}")
        if self.kind == "circle" and self.dim != 1:
            raise ValueError("circle has dimension 1")
        if self.kind == "torus" and self.dim < 2:
            raise ValueError("torus dimension must be >= 2")
        if self.kind == "su2" and self.dim != 3:
            object.__setattr__(self, "dim", 3)

    @property
    def coord_dim(self):
        return self.dim

    def __str__(self):
        if self.kind == "torus":
            return f"torus:{self.dim}"
        return self.kind

    def normalize(self, points):
        """Reduce coordinates to the fundamental ranges."""
        p = np.array(points, dtype=float, copy=True)
        single = p.ndim == 1
        p = p.reshape(-1, self.dim)
        if self.kind in ("circle", "torus"):
            p = np.mod(p, TWO_PI)
        else:
            p = _normalize_euler(p)
        return p[0] if single else p

    def identity(self):
        return np.zeros(self.dim)

    def random_points(self, n, rng):
        """Haar-distributed random points."""
        if self.kind == "su2":
            alpha = rng.uniform(0.0, TWO_PI, n)
            beta = np.arccos(rng.uniform(-1.0, 1.0, n))
            gamma = rng.uniform(0.0, FOUR_PI, n)
            return np.stack([alpha, beta, gamma], axis=1)
        return rng.uniform(0.0, TWO_PI, (n, self.dim))


_FINITE_HINTS = ("cyclic", "dihedral", "symmetric", "finite", "z", "zn", "s")


def parse_group(text):
    """Parse ``"circle"``, ``"torus:d"`` or ``"su2"``.

    Finite groups have atoms in their Haar measure and are rejected.
    """
    s = text.strip().lower()
    if s in ("circle", "t", "u1", "torus:1"):
        if s == "torus:1":
            raise ValueError("torus:1 is the circle; use 'circle'")
        return GroupDescriptor("circle", 1)
    if s in ("su2", "su(2)"):
        return GroupDescriptor("su2", 3)
    m = re.fullmatch(r"torus:(\d+)", s)
    if m:
        return GroupDescriptor("torus", int(m.group(1)))
    head = s.split(":")[0]
    if head in _FINITE_HINTS:
        raise ValueError(f"finite group {text!r} rejected: Haar measure has atoms")
    raise ValueError(f"unknown group {text!r}; expected circle, torus:d or su2")


@dataclass(frozen=True)
class IrrepLabel:
    """Label of an irreducible unitary representation.

    ``index`` is ``(n,)`` on the circle, ``(n_1, ..., n_d)`` on the torus and
    ``(2j,)`` on SU(2).
    """

    kind: str
    index: tuple = field(default=())

    @property
    def degree(self):
        return self.index[0] + 1 if self.kind == "su2" else 1

    @property
    def bandlimit(self):
        if self.kind == "su2":
            return self.index[0] / 2.0
        return max(abs(n) for n in self.index)

    @property
    def is_trivial(self):
        return all(n == 0 for n in self.index)

    def sort_key(self):
        return (self.bandlimit, self.index)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        if self.kind == "circle":
            return f"n={self.index[0]}"
        if self.kind == "torus":
            return "n=(" + ",".join(str(n) for n in self.index) + ")"
        two_j = self.index[0]
        return f"j={two_j // 2}" if two_j % 2 == 0 else f"j={two_j}/2"

    @classmethod
    def parse(cls, group, text):
        """Inverse of ``str``: ``"n=3"``, ``"n=(1,-2)"``, ``"j=3/2"``."""
        key, _, val = text.partition("=")
        if group.kind == "su2":
            if key != "j":
                raise ValueError(f"bad SU(2) label {text!r}")
            if "/" in val:
                num, den = val.split("/")
                if int(den) != 2:
                    raise ValueError(f"bad SU(2) label {text!r}")
                two_j = int(num)
            else:
                two_j = 2 * int(val)
            if two_j < 0:
                raise ValueError(f"negative spin in {text!r}")
            return cls("su2", (two_j,))
        if key != "n":
            raise ValueError(f"bad label {text!r}")
        if group.kind == "circle":
            return cls("circle", (int(val),))
        vals = tuple(int(v) for v in val.strip("()").split(","))
        if len(vals) != group.dim:
            raise ValueError(f"label {text!r} does not match {group}")
        return cls("torus", vals)


def label(group, *index):
    """Convenience constructor, e.g. ``label(su2, 1)`` for spin 1/2."""
    if len(index) == 1 and isinstance(index[0], (tuple, list)):
        index = tuple(index[0])
    lab = IrrepLabel(group.kind, tuple(int(i) for i in index))
    check_label(group, lab)
    return lab


def check_label(group, lab):
    if lab.kind != group.kind:
        raise ValueError(f"label {lab} does not belong to {group}")
    if group.kind == "torus" and len(lab.index) != group.dim:
        raise ValueError(f"label {lab} does not belong to {group}")
    if group.kind == "su2" and lab.index[0] < 0:
        raise ValueError(f"negative spin label {lab}")


def trivial_label(group):
    if group.kind == "su2":
        return IrrepLabel("su2", (0,))
    return IrrepLabel(group.kind, (0,) * group.dim)


def enumerate_irreps(group, B):
    """All labels of bandlimit ``<= B`` in canonical order.

    On SU(2) the bandlimit is the spin ``j``, so ``B = 1`` yields
    ``j = 0, 1/2, 1``.
    """
    if B < 0:
        raise ValueError("bandlimit must be non-negative")
    if group.kind == "su2":
        labs = [IrrepLabel("su2", (tj,)) for tj in range(int(math.floor(2 * B)) + 1)]
    else:
        Bi = int(math.floor(B))
        rng = range(-Bi, Bi + 1)
        if group.kind == "circle":
            labs = [IrrepLabel("circle", (n,)) for n in rng]
        else:
            grids = np.meshgrid(*([np.arange(-Bi, Bi + 1)] * group.dim), indexing="ij")
            idx = np.stack([g.ravel() for g in grids], axis=1)
            labs = [IrrepLabel("torus", tuple(int(v) for v in row)) for row in idx]
    return sorted(labs, key=IrrepLabel.sort_key)


# ---------------------------------------------------------------------------
# SU(2) helpers


def _normalize_euler(p):
    alpha, beta, gamma = p[:, 0], p[:, 1], p[:, 2]
    beta = np.clip(beta, 0.0, np.pi)
    wraps = np.floor(alpha / TWO_PI)
    alpha = alpha - wraps * TWO_PI
    # a tiny negative alpha can round up to exactly 2pi: one more wrap
    over = alpha >= TWO_PI
    alpha = np.where(over, alpha - TWO_PI, alpha)
    wraps = wraps + over
    # shifting alpha by 2pi flips the sign of R_z(alpha); compensate in gamma
    gamma = np.mod(gamma + wraps * TWO_PI, FOUR_PI)
    gamma = np.where(gamma >= FOUR_PI, gamma - FOUR_PI, gamma)
    return np.stack([alpha, beta, gamma], axis=1)


def euler_to_su2(points):
    """SU(2) matrices ``R_z(alpha) R_y(beta) R_z(gamma)``, shape ``(n, 2, 2)``."""
    p = np.atleast_2d(points)
    a, b, g = p[:, 0], p[:, 1], p[:, 2]
    c, s = np.cos(b / 2), np.sin(b / 2)
    u = np.empty((len(p), 2, 2), dtype=complex)
    u[:, 0, 0] = np.exp(-0.5j * (a + g)) * c
    u[:, 0, 1] = -np.exp(-0.5j * (a - g)) * s
    u[:, 1, 0] = np.exp(0.5j * (a - g)) * s
    u[:, 1, 1] = np.exp(0.5j * (a + g)) * c
    return u


def su2_to_euler(u):
    """Inverse of :func:`euler_to_su2` onto the fundamental ranges."""
    u = np.asarray(u).reshape(-1, 2, 2)
    a = u[:, 0, 0]
    b = u[:, 1, 0]
    beta = 2.0 * np.arctan2(np.abs(b), np.abs(a))
    arg_a = np.angle(a)
    arg_b = np.where(np.abs(b) > 0, np.angle(b), 0.0)
    alpha = arg_b - arg_a
    gamma = -arg_a - arg_b
    return _normalize_euler(np.stack([alpha, beta, gamma], axis=1))


def su2_multiply(p1, p2):
    """Group product of Euler-angle points."""
    return su2_to_euler(euler_to_su2(p1) @ euler_to_su2(p2))


def class_angle(points):
    """Half rotation angle ``theta`` in ``[0, pi]``; ``cos(theta) = Re tr(g) / 2``."""
    p = np.atleast_2d(points)
    x0 = np.cos(p[:, 1] / 2) * np.cos((p[:, 0] + p[:, 2]) / 2)
    return np.arccos(np.clip(x0, -1.0, 1.0))


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def wigner_small_d(two_j, beta):
    """Little-d matrices ``d^j_{m m'}(beta)``, shape ``(n, 2j+1, 2j+1)``.

    Row ``i`` is ``m = j - i``, column ``k`` is ``m' = j - k``. Jacobi
    polynomial form with log-binomial prefactors.
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    return _small_d_cached(int(two_j), beta.tobytes()).copy()


@lru_cache(maxsize=256)
def _small_d_cached(two_j, beta_bytes):
    beta = np.frombuffer(beta_bytes, dtype=float)
    d = two_j + 1
    cb, sb = np.cos(beta / 2), np.sin(beta / 2)
    x = np.cos(beta)
    out = np.empty((len(beta), d, d))
    # all quantities doubled to stay integer: J = 2j, M = 2m, N = 2m'
    J = two_j
    for i in range(d):
        M = J - 2 * i
        for kk in range(d):
            N = J - 2 * kk
            # d^j_{M N} with Wikipedia's d^j_{m' m} orientation: m' -> M, m -> N
            cands = ((J + N) // 2, (J - N) // 2, (J + M) // 2, (J - M) // 2)
            k = min(cands)
            which = cands.index(k)
            if which == 0:
                a, lam = (M - N) // 2, (M - N) // 2
            elif which == 1:
                a, lam = (N - M) // 2, 0
            elif which == 2:
                a, lam = (N - M) // 2, 0
            else:
                a, lam = (M - N) // 2, (M - N) // 2
            bb = J - 2 * k - a
            logc = 0.5 * (_log_binom(J - k, k + a) - _log_binom(k + bb, bb))
            pref = (-1.0) ** lam * np.exp(logc)
            val = pref * sb**a * cb**bb * eval_jacobi(k, a, bb, x)
            out[:, i, kk] = val
    out.setflags(write=False)
    return out


def _m_values(two_j):
    return (two_j - 2 * np.arange(two_j + 1)) / 2.0


def irrep_matrix(group, lab, points):
    """Unitary matrices ``pi(g)``.

    A single point of shape ``(dim,)`` gives a ``(d, d)`` matrix; a batch of
    shape ``(n, dim)`` gives ``(n, d, d)``.
    """
    check_label(group, lab)
    p = np.asarray(points, dtype=float)
    single = p.ndim == 1
    p = p.reshape(-1, group.dim)
    if group.kind == "su2":
        two_j = lab.index[0]
        m = _m_values(two_j)
        small = wigner_small_d(two_j, p[:, 1])
        ea = np.exp(-1j * np.outer(p[:, 0], m))
        eg = np.exp(-1j * np.outer(p[:, 2], m))
        out = ea[:, :, None] * small * eg[:, None, :]
    else:
        n = np.asarray(lab.index, dtype=float)
        out = np.exp(1j * (p @ n))[:, None, None]
    return out[0] if single else out


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product Haar quadrature.

    ``axes`` holds one ``(nodes, weights)`` pair per coordinate; ``points``
    and ``weights`` are the flattened C-order tensor product.
    """

    group: GroupDescriptor
    bandlimit: float
    axes: tuple

    @property
    def shape(self):
        return tuple(len(n) for n, _ in self.axes)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def points(self):
        nodes = np.meshgrid(*[n for n, _ in self.axes], indexing="ij")
        return np.stack([x.ravel() for x in nodes], axis=1)

    @property
    def weights(self):
        w = self.axes[0][1]
        for _, wi in self.axes[1:]:
            w = np.multiply.outer(w, wi)
        return np.asarray(w).ravel()

    def integrate(self, values):
        v = np.asarray(values).reshape(self.shape)
        for _, w in reversed(self.axes):
            v = v @ w
        return v


def _uniform_axis(n, period):
    nodes = period * np.arange(n) / n
    return nodes, np.full(n, 1.0 / n)


def haar_grid(group, B, counts=None):
    """Quadrature exact for products of two matrix coefficients of bandlimit ``<= B``.

    ``counts`` optionally overrides the node count per axis (e.g. for dense
    evaluation grids); it must not be smaller than the exactness minimum.
    """
    if B < 0:
        raise ValueError("bandlimit must be non-negative")
    if group.kind == "su2":
        need = (int(math.ceil(2 * B)) + 1, int(math.ceil(B)) + 1, int(math.ceil(4 * B)) + 1)
    else:
        need = (int(math.ceil(2 * B)) + 1,) * group.dim
    counts = need if counts is None else tuple(max(c, n) for c, n in zip(counts, need))
    if group.kind == "su2":
        na, nb, ng = counts
        x, w = np.polynomial.legendre.leggauss(nb)
        # order beta ascending
        beta = np.arccos(x)[::-1]
        wb = (w / 2.0)[::-1]
        axes = (_uniform_axis(na, TWO_PI), (beta, wb), _uniform_axis(ng, FOUR_PI))
    else:
        axes = tuple(_uniform_axis(n, TWO_PI) for n in counts)
    return QuadratureGrid(group, float(B), axes)


def dense_grid(group, B, factor=8, minimum=0):
    """Evaluation grid with ``factor`` times the exactness node count per axis."""
    base = haar_grid(group, B)
    counts = tuple(max(factor * n, minimum) for n in base.shape)
    if group.kind != "su2":
        counts = tuple(1 << int(math.ceil(math.log2(c))) for c in counts)
    return haar_grid(group, B, counts=counts)


# ---------------------------------------------------------------------------
# sweep coordinate


def _su2_class_cdf(theta):
    return (theta - np.sin(theta) * np.cos(theta)) / np.pi


def su2_theta_from_sweep(t, iters=60):
    """Invert ``t = (theta - sin(theta) cos(theta)) / pi`` on ``[0, pi]``."""
    t = np.asarray(t, dtype=float)
    lo = np.zeros_like(t)
    hi = np.full_like(t, np.pi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = _su2_class_cdf(mid) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def sweep_coordinate(group, points):
    """Measurable map ``G -> [0, 1)`` whose pushforward of Haar measure is uniform.

    Circle and torus use the first angle. SU(2) uses the Haar CDF of the
    half rotation angle, a continuous class function; the single point
    ``-I`` (where it reaches 1) is wrapped to 0.
    """
    p = np.asarray(points, dtype=float)
    single = p.ndim == 1
    p = p.reshape(-1, group.dim)
    if group.kind == "su2":
        t = _su2_class_cdf(class_angle(p))
    else:
        t = np.mod(p[:, 0], TWO_PI) / TWO_PI
    t = np.where(t >= 1.0, t - 1.0, t)
    t = np.clip(t, 0.0, np.nextafter(1.0, 0.0))
    return float(t[0]) if single else t


def sweep_interval_mu(group, a, b):
    """Haar measure of ``{g : a <= t(g) < b}``; equals ``b - a`` by uniformity."""
    if not 0.0 <= a <= b <= 1.0:
        raise ValueError("need 0 <= a <= b <= 1")
    return b - a


def points_at_sweep(group, t, rng):
    """Group points whose sweep coordinate is ``t``; the remaining freedom is random.

    Circle/torus fix the first angle and draw the others uniformly. SU(2)
    conjugates the diagonal element of half angle ``theta(t)`` by a
    Haar-random element.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if group.kind == "su2":
        theta = su2_theta_from_sweep(t)
        diag = euler_to_su2(np.stack([2.0 * theta, 0 * theta, 0 * theta], axis=1))
        h = euler_to_su2(group.random_points(len(t), rng))
        return su2_to_euler(h @ diag @ np.conj(np.swapaxes(h, 1, 2)))
    pts = group.random_points(len(t), rng)
    pts[:, 0] = TWO_PI * t
    return pts
