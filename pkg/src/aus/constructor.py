"""Build the disjoint-spectrum system ``f_1, f_2, ...``.

``f_1`` approximates ``psi_1`` within ``eps_1``. For ``m > 1`` the labels
already used, ``Lambda_m``, fix ``delta_m``; the level ``k_m`` is the first
one whose ``psi_k`` is spectrally negligible on ``Lambda_m``; ``xi_m``
approximates ``psi_{k_m}`` within ``delta_m^2``; ``f_m`` is ``xi_m`` with its
``Lambda_m`` coefficients removed.
"""

from dataclasses import dataclass, field
import json
import logging
import math

import numpy as np
from scipy.special import eval_chebyu

from .dyadic import build_tree, DyadicTree, omega_measure, pushforward_cdf, shrink_amount
from .groups import (
    GroupDescriptor,
    IrrepLabel,
    class_angle,
    dense_grid,
    haar_grid,
    parse_group,
    points_at_sweep,
)
from .rademacher import PROFILES, eval_psi, ramp_probe_sweeps, window_class_coeffs
from .spectral import (
    GridFunction,
    SpectralCoeffs,
    analyze,
    entrywise_l1_sum,
    synthesize,
    synthesize_grid,
    zero_on_set,
)

log = logging.getLogger(__name__)

BUNDLE_VERSION = 1

DEFAULT_K_CAP = 12
# native units: |n| on circle/torus (per dimension), 2j on SU(2)
DEFAULT_BAND_CAP = {"circle": 32768, "torus": 256, "su2": 32}
MIN_DENSE_POINTS = 8192
N_RANDOM_POINTS = 10_000
MAX_FFT_POINTS = 1 << 22

TAPERS = ("fejer", "vallee-poussin", "none")


class CapError(RuntimeError):
    """A dyadic-level or bandlimit cap was exhausted.

    ``value`` carries the last overlap sum or best sup error reached;
    ``bundle`` (when raised from :func:`construct_system`) holds the
    completed prefix.
    """

    def __init__(self, message, value=None, bundle=None):
        super().__init__(message)
        self.value = value
        self.bundle = bundle


def bandlimit_of_native(group, b):
    return b / 2.0 if group.kind == "su2" else float(b)


@dataclass
class ConstructionParams:
    group: GroupDescriptor
    f0: SpectralCoeffs
    epsilons: list
    count: int = None
    k_cap: int = DEFAULT_K_CAP
    band_cap: int = None
    grid_factor: int = 8
    profile: str = "smooth"
    seed: int = 0

    def __post_init__(self):
        eps = [float(e) for e in self.epsilons]
        if not eps:
            raise ValueError("empty epsilon sequence")
        if any(not e > 0 for e in eps):
            raise ValueError("epsilons must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be strictly decreasing")
        self.epsilons = eps
        if self.count is None:
            self.count = len(eps)
        if not 1 <= self.count <= len(eps):
            raise ValueError("count must be between 1 and len(epsilons)")
        if self.band_cap is None:
            self.band_cap = DEFAULT_BAND_CAP[self.group.kind]
        if self.profile not in PROFILES:
            raise ValueError(f"unknown ramp profile {self.profile!r}")
        if self.f0.group != self.group:
            raise ValueError("f0 lives on a different group")
        if not self.f0.support():
            raise ValueError("degenerate weight: f0 is identically zero")

    def to_json(self):
        return {
            "group": str(self.group),
            "count": self.count,
            "k_cap": self.k_cap,
            "band_cap": self.band_cap,
            "grid_factor": self.grid_factor,
            "profile": self.profile,
            "seed": self.seed,
        }


@dataclass
class Record:
    m: int
    k_m: int
    delta_m: float
    lam: list
    coeffs: SpectralCoeffs
    omega: np.ndarray
    omega_measure: float
    sup_err: float
    bandlimit: float = 0.0
    taper: str = ""
    overlap_sum: float = 0.0

    def to_json(self):
        return {
            "m": self.m,
            "k_m": self.k_m,
            "delta_m": float(self.delta_m),
            "lambda": [str(lab) for lab in self.lam],
            "coeffs": self.coeffs.to_json()["coeffs"],
            "omega": [[float(a), float(b)] for a, b in self.omega],
            "omega_measure": float(self.omega_measure),
            "sup_err": float(self.sup_err),
            "bandlimit": float(self.bandlimit),
            "taper": self.taper,
            "overlap_sum": float(self.overlap_sum),
        }

    @classmethod
    def from_json(cls, obj, group):
        return cls(
            m=int(obj["m"]),
            k_m=int(obj["k_m"]),
            delta_m=float(obj["delta_m"]),
            lam=[IrrepLabel.parse(group, s) for s in obj["lambda"]],
            coeffs=SpectralCoeffs.from_json({"coeffs": obj["coeffs"]}, group),
            omega=np.array(obj["omega"], dtype=float).reshape(-1, 2),
            omega_measure=float(obj["omega_measure"]),
            sup_err=float(obj["sup_err"]),
            bandlimit=float(obj.get("bandlimit", 0.0)),
            taper=obj.get("taper", ""),
            overlap_sum=float(obj.get("overlap_sum", 0.0)),
        )


@dataclass
class SystemBundle:
    params: ConstructionParams
    tree: DyadicTree
    records: list = field(default_factory=list)
    partial: bool = False
    error: str = ""
    version: int = BUNDLE_VERSION

    @property
    def group(self):
        return self.params.group

    def to_json(self):
        out = {
            "version": self.version,
            "group": str(self.group),
            "f0": self.params.f0.to_json()["coeffs"],
            "epsilons": [float(e) for e in self.params.epsilons],
            "params": self.params.to_json(),
            "tree": self.tree.to_json(),
            "records": [r.to_json() for r in self.records],
        }
        if self.partial:
            out["partial"] = True
            out["error"] = self.error
        return out

    def dumps(self):
        return json.dumps(self.to_json(), indent=1) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def from_json(cls, obj):
        if obj.get("version") != BUNDLE_VERSION:
            raise ValueError(f"unsupported bundle version {obj.get('version')!r}")
        group = parse_group(obj["group"])
        f0 = SpectralCoeffs.from_json({"coeffs": obj["f0"]}, group)
        p = obj.get("params", {})
        eps = obj["epsilons"]
        params = ConstructionParams(
            group=group,
            f0=f0,
            epsilons=eps,
            count=int(p.get("count", len(eps))),
            k_cap=int(p.get("k_cap", DEFAULT_K_CAP)),
            band_cap=p.get("band_cap"),
            grid_factor=int(p.get("grid_factor", 8)),
            profile=p.get("profile", "smooth"),
            seed=int(p.get("seed", 0)),
        )
        tree = DyadicTree.from_json(obj["tree"])
        records = [Record.from_json(r, group) for r in obj["records"]]
        return cls(params, tree, records, bool(obj.get("partial", False)), obj.get("error", ""))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# ---------------------------------------------------------------------------


def compute_delta_m(eps, labels):
    """``min(eps/3, 1 / sum_{pi in labels} d_pi^(5/2))``, clamped to at most 1."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    delta = eps / 3.0
    if labels:
        total = math.fsum(lab.degree**2.5 for lab in labels)
        delta = min(delta, 1.0 / total)
    return min(delta, 1.0)


def _pow2(n):
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def analysis_grid(group, bandlimit, ramp_width=None):
    """Grid for analysing a non-bandlimited ``psi_k`` up to ``bandlimit``.

    On the circle/torus the FFT size also resolves the narrowest ramp.
    """
    if group.kind == "su2":
        L = min(max(2 * bandlimit + 8, 24), 64)
        return haar_grid(group, L)
    n = 8 * (int(bandlimit) + 1)
    if ramp_width:
        n = max(n, int(math.ceil(64.0 / ramp_width)))
    n = _pow2(max(n, 256))
    cap = int(MAX_FFT_POINTS ** (1.0 / group.dim))
    n = min(n, _pow2(cap) if _pow2(cap) <= cap else _pow2(cap) // 2)
    return haar_grid(group, n // 2 - 1, counts=(n,) * group.dim)


def sup_grid(group, bandlimit, factor, ramp_width=None):
    """Dense evaluation grid for sup norms."""
    if group.kind == "su2":
        return dense_grid(group, max(bandlimit, 0.5), factor)
    n = factor * (2 * int(bandlimit) + 1)
    n = max(n, MIN_DENSE_POINTS if group.dim == 1 else 64)
    if ramp_width:
        n = max(n, int(math.ceil(8.0 / ramp_width)))
    n = _pow2(n)
    cap = int(MAX_FFT_POINTS ** (1.0 / group.dim))
    n = min(n, _pow2(cap) if _pow2(cap) <= cap else _pow2(cap) // 2)
    return haar_grid(group, 0, counts=(n,) * group.dim)


def taper_weights(labels, B, taper):
    bl = np.array([lab.bandlimit for lab in labels], dtype=float)
    if taper == "fejer":
        return np.clip(1.0 - bl / (B + 1.0), 0.0, 1.0)
    if taper == "vallee-poussin":
        return np.clip(2.0 * (1.0 - bl / (B + 1.0)), 0.0, 1.0)
    if taper == "none":
        return np.ones_like(bl)
    raise ValueError(f"unknown taper {taper!r}")


@dataclass
class Approximation:
    coeffs: SpectralCoeffs
    bandlimit: float
    taper: str
    sup_err: float


def approximate_uniformly(psi, target_sup, group, band_cap, grid_factor=8,
                          ramp_width=None, rng_points=None, psi_hat=None):
    """Tapered truncated Fourier series of ``psi`` with sup error below ``target_sup``.

    ``psi`` maps an ``(n, dim)`` point array to values. The bandlimit doubles
    (in native units) until one of the tapers (Fejer, de la Vallee Poussin,
    none, tried in that order) meets the target on the dense grid and the
    random points. ``psi_hat`` may supply precomputed coefficients.
    """
    if not target_sup > 0:
        raise ValueError("target_sup must be positive")
    top = bandlimit_of_native(group, band_cap)
    if psi_hat is None:
        grid = analysis_grid(group, top, ramp_width)
        psi_hat = analyze(GridFunction(grid, psi(grid.points)), top)
    rand_vals = psi(rng_points) if rng_points is not None else None
    best = (math.inf, None)
    native = 1
    while True:
        B = bandlimit_of_native(group, native)
        base = psi_hat.restricted([lab for lab in psi_hat.labels() if lab.bandlimit <= B])
        labs = base.labels()
        grid = sup_grid(group, B, grid_factor, ramp_width)
        target_vals = psi(grid.points)
        for taper in TAPERS:
            w = taper_weights(labs, B, taper)
            cand = SpectralCoeffs(group, {lab: wi * base[lab] for lab, wi in zip(labs, w)})
            cand = cand.normalized()
            err = float(np.max(np.abs(synthesize_grid(cand, grid) - target_vals)))
            if rng_points is not None and err < target_sup:
                err = max(err, float(np.max(np.abs(synthesize(cand, rng_points) - rand_vals))))
            if err < best[0]:
                best = (err, taper)
            if err < target_sup:
                log.debug("approximation: B=%s taper=%s err=%.3e", B, taper, err)
                return Approximation(cand, B, taper, err)
        if native >= band_cap:
            raise CapError(
                f"bandlimit cap {band_cap} reached; best sup error {best[0]:.3e} "
                f"({best[1]}) vs target {target_sup:.3e}",
                value=best[0],
            )
        native = min(2 * native, band_cap)


def psi_coefficients(tree, k, f0, bandlimit, profile="smooth"):
    """Coefficients of ``psi_k`` for all labels up to ``bandlimit``.

    Circle/torus: FFT quadrature on a grid resolving the narrowest ramp.
    SU(2): the window is a class function ``sum_l w_l chi_l``; only
    ``l <= bandlimit + bandlimit(f0)`` reach labels up to ``bandlimit``, so the
    truncated product is bandlimited and an exact grid gives its coefficients.
    """
    group = f0.group
    if group.kind == "su2":
        b = f0.bandlimit
        two_l = int(round(2 * (bandlimit + b)))
        w = window_class_coeffs(tree, k, two_l, profile)
        grid = haar_grid(group, bandlimit + b)
        c = np.cos(class_angle(grid.points))
        win = sum(w[n] * eval_chebyu(n, c) for n in range(two_l + 1))
        vals = synthesize_grid(f0, grid) * win
        return analyze(GridFunction(grid, vals), bandlimit)
    s = float(shrink_amount(k, np.diff(tree.boundaries[k])).min())
    grid = analysis_grid(group, bandlimit, ramp_width=s)
    vals = eval_psi(tree, k, f0, None, grid=grid, profile=profile)
    return analyze(GridFunction(grid, vals), bandlimit)


def overlap_sum(tree, k, f0, labels, profile="smooth"):
    """``sum_{pi in labels} d_pi sum_ij |psi_k^(pi)_ij|``."""
    if not labels:
        return 0.0
    B = max(lab.bandlimit for lab in labels)
    return entrywise_l1_sum(psi_coefficients(tree, k, f0, B, profile), labels)


def find_cutoff_M(labels, delta, tree, f0, k_cap=None, profile="smooth"):
    """Smallest level ``k`` whose overlap sum over ``labels`` is strictly below ``delta``.

    Returns ``(k, sum)``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    k_cap = tree.k_max if k_cap is None else min(k_cap, tree.k_max)
    if not labels:
        return 1, 0.0
    last = math.inf
    for k in range(1, k_cap + 1):
        last = overlap_sum(tree, k, f0, labels, profile)
        log.debug("cutoff search: k=%d sum=%.3e delta=%.3e", k, last, delta)
        if last < delta:
            return k, last
    raise CapError(
        f"dyadic level cap {k_cap} exhausted; last overlap sum {last:.3e} >= delta {delta:.3e}",
        value=last,
    )


def psi_function(tree, k, f0, profile):
    return lambda pts: eval_psi(tree, k, f0, pts, profile=profile)


def measure_sup_err(coeffs, tree, k, f0, profile, grid_factor, rng_points):
    """``sup |f - psi_k|`` on the dense grid plus the random points."""
    B = max(coeffs.bandlimit, f0.bandlimit)
    s = float(shrink_amount(k, np.diff(tree.boundaries[k])).min())
    grid = sup_grid(f0.group, B, grid_factor, ramp_width=s)
    psi = psi_function(tree, k, f0, profile)
    err = float(np.max(np.abs(synthesize_grid(coeffs, grid) - psi(grid.points))))
    if rng_points is not None:
        err = max(err, float(np.max(np.abs(synthesize(coeffs, rng_points) - psi(rng_points)))))
    return err


def random_check_points(group, seed, n=N_RANDOM_POINTS):
    return group.random_points(n, np.random.default_rng(seed))


def check_points(tree, k, group, seed):
    """Seeded random points plus probes spread through every level-``k`` ramp."""
    rng = np.random.default_rng(seed)
    pts = group.random_points(N_RANDOM_POINTS, rng)
    probes = points_at_sweep(group, ramp_probe_sweeps(tree, k), rng)
    return np.concatenate([pts, probes])


def construct_system(params):
    """Run the inductive construction; returns a :class:`SystemBundle`.

    On a cap failure a :class:`CapError` is raised whose ``bundle`` holds
    the completed records with ``partial=True``.
    """
    group, f0 = params.group, params.f0
    tree = build_tree(pushforward_cdf(f0), params.k_cap)
    bundle = SystemBundle(params, tree)
    used = set()
    for m in range(1, params.count + 1):
        eps = params.epsilons[m - 1]
        lam = sorted(used, key=IrrepLabel.sort_key)
        try:
            if m == 1:
                delta = compute_delta_m(eps, [])
                # delta^2 + 2 delta stays below eps_1 whenever eps_1 <= 3
                k, s1, target = 1, 0.0, min(eps, delta**2 + 2 * delta)
            else:
                delta = compute_delta_m(eps, lam)
                k, s1 = find_cutoff_M(lam, delta, tree, f0, params.k_cap, params.profile)
                target = delta**2
            s = float(shrink_amount(k, np.diff(tree.boundaries[k])).min())
            pts = check_points(tree, k, group, params.seed)
            top = bandlimit_of_native(group, params.band_cap)
            psi_hat = psi_coefficients(tree, k, f0, top, params.profile)
            approx = approximate_uniformly(
                psi_function(tree, k, f0, params.profile), target, group,
                params.band_cap, params.grid_factor, ramp_width=s,
                rng_points=pts, psi_hat=psi_hat,
            )
        except CapError as exc:
            bundle.partial = True
            bundle.error = f"m={m}: {exc}"
            exc.bundle = bundle
            raise
        f = zero_on_set(approx.coeffs, lam).normalized()
        sup_err = measure_sup_err(f, tree, k, f0, params.profile, params.grid_factor, pts)
        rec = Record(
            m=m, k_m=k, delta_m=delta, lam=lam, coeffs=f,
            omega=tree.cores[k].copy(), omega_measure=omega_measure(tree, k),
            sup_err=sup_err, bandlimit=approx.bandlimit, taper=approx.taper, overlap_sum=s1,
        )
        log.info(
            "m=%d k=%d delta=%.3e |Lambda|=%d B=%s taper=%s sup_err=%.3e mu(Omega)=%.6f",
            m, k, delta, len(lam), approx.bandlimit, approx.taper, sup_err, rec.omega_measure,
        )
        bundle.records.append(rec)
        used.update(f.support())
    return bundle
