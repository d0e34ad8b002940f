"""CSV and SVG emission for a constructed system.

Profiles are taken along the sweep coordinate at ``N_PROFILE`` midpoints
``t = (i + 1/2) / N``; on groups with more than one coordinate the remaining
freedom is drawn from a seeded generator, so the output is a function of
``(bundle, seed)`` only.
"""

import csv
import logging
import os

import numpy as np

from .groups import points_at_sweep
from .spectral import synthesize
from .verifier import in_intervals

log = logging.getLogger(__name__)

N_PROFILE = 2048
SVG_W, SVG_H, PAD = 720, 300, 40


def profile(bundle, rec, seed=0, n=N_PROFILE):
    """``(t, |f_m|, |f0|, in_omega)`` along the sweep coordinate."""
    t = (np.arange(n) + 0.5) / n
    pts = points_at_sweep(bundle.group, t, np.random.default_rng(seed))
    fm = np.abs(synthesize(rec.coeffs, pts))
    f0 = np.abs(synthesize(bundle.params.f0, pts))
    inside = in_intervals(t, rec.omega)
    return t, fm, f0, inside


def spectrum_rows(rec):
    return [(str(lab), float(np.linalg.norm(m))) for lab, m in rec.coeffs.items()
            if lab in set(rec.coeffs.support())]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _poly(xs, ys):
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))


def band_svg(t, fm, f0, inside, eps, title):
    """Line plot of ``|f_m|`` over the ``|f0| +- eps`` band with ``Omega`` shaded."""
    top = float(max(fm.max(), (f0 + eps).max())) * 1.05
    bot = float(min(0.0, (f0 - eps).min()))
    sx = lambda x: PAD + x * (SVG_W - 2 * PAD)
    sy = lambda y: SVG_H - PAD - (y - bot) / (top - bot) * (SVG_H - 2 * PAD)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}">',
        f'<text x="{PAD}" y="20" font-family="sans-serif" font-size="13">{title}</text>',
    ]
    # shaded Omega runs
    edges = np.flatnonzero(np.diff(np.concatenate([[0], inside.astype(int), [0]])))
    for a, b in zip(edges[::2], edges[1::2]):
        x0, x1 = sx(t[a] - 0.5 / len(t)), sx(t[b - 1] + 0.5 / len(t))
        parts.append(f'<rect x="{x0:.2f}" y="{PAD}" width="{x1 - x0:.2f}" '
                     f'height="{SVG_H - 2 * PAD}" fill="#dde8f4"/>')
    xs = [sx(v) for v in t]
    upper = [sy(v) for v in f0 + eps]
    lower = [sy(v) for v in f0 - eps]
    parts.append(f'<polygon points="{_poly(xs + xs[::-1], upper + lower[::-1])}" '
                 'fill="#f4d9a6" fill-opacity="0.6" stroke="none"/>')
    parts.append(f'<polyline points="{_poly(xs, [sy(v) for v in f0])}" '
                 'fill="none" stroke="#888" stroke-dasharray="4 3"/>')
    parts.append(f'<polyline points="{_poly(xs, [sy(v) for v in fm])}" '
                 'fill="none" stroke="#1f4e8c" stroke-width="1"/>')
    parts.append(f'<line x1="{PAD}" y1="{sy(0):.2f}" x2="{SVG_W - PAD}" y2="{sy(0):.2f}" '
                 'stroke="#000" stroke-width="0.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plots(bundle, out_dir, seed=0):
    """Write per-record profile CSV, band SVG and spectrum CSV; returns the paths."""
    if not bundle.records:
        log.warning("bundle has no records; nothing to plot")
        return []
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for rec in bundle.records:
        eps = bundle.params.epsilons[rec.m - 1]
        t, fm, f0, inside = profile(bundle, rec, seed)
        p = os.path.join(out_dir, f"profile_m{rec.m}.csv")
        _write_csv(p, ["t", "abs_f_m", "abs_f0", "in_omega"],
                   [(repr(float(a)), repr(float(b)), repr(float(c)), int(d))
                    for a, b, c, d in zip(t, fm, f0, inside)])
        written.append(p)
        p = os.path.join(out_dir, f"band_m{rec.m}.svg")
        with open(p, "w") as fh:
            fh.write(band_svg(t, fm, f0, inside, eps,
                              f"m={rec.m}  k={rec.k_m}  eps={eps:g}  |f_m| vs |f0| +- eps"))
        written.append(p)
        p = os.path.join(out_dir, f"spectrum_m{rec.m}.csv")
        _write_csv(p, ["label", "frobenius"], [(a, repr(b)) for a, b in spectrum_rows(rec)])
        written.append(p)
    return written
