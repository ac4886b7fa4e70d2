"""JSON, SVG and CSV emission.  Geometry stays y-up; SVG output flips y on the way out."""

from __future__ import annotations

import csv
import io

import numpy as np

from .geometry import RegularPolygon, limit_shape_arcs
from .processes import c_infinity, q_map, ybar_variance
from .sampling import ConvexConfig

SCHEMA = 1


def config_to_dict(cfg: ConvexConfig, kappa: int, seed: int | None) -> dict:
    out = {
        "schema": SCHEMA,
        "kappa": kappa,
        "n": cfg.n,
        "algorithm": cfg.algorithm,
        "seed": seed,
        "points": cfg.points.tolist(),
        "ell": cfg.ell.tolist(),
        "s": [int(v) for v in cfg.s],
    }
    if cfg.trials is not None:
        out["trials"] = int(cfg.trials)
    return out


def _fmt(v: float) -> str:
    text = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def _pt(p) -> str:
    return f"{_fmt(p[0])} {_fmt(-p[1])}"


def svg_document(poly: RegularPolygon, points=None, limit: bool = True, size: int = 480) -> str:
    """SVG of the host polygon, an optional sample hull and the limit shape.

    The viewBox is the polygon bounding box padded by 5% on each side.
    """
    v = poly.vertices
    lo, hi = v.min(axis=0), v.max(axis=0)
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    w, h = hi - lo
    box = f"{_fmt(lo[0])} {_fmt(-hi[1])} {_fmt(w)} {_fmt(h)}"
    stroke = _fmt(0.004 * max(w, h))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{box}" width="{size}" '
        f'height="{int(round(size * h / w))}">',
        f'<path d="M {" L ".join(_pt(p) for p in v)} Z" fill="none" stroke="black" '
        f'stroke-width="{stroke}"/>',
    ]
    if limit:
        arcs = limit_shape_arcs(poly)
        cmds = [f"M {_pt(arcs[0][0])}"] + [f"Q {_pt(c)} {_pt(e)}" for _, c, e in arcs]
        parts.append(
            f'<path d="{" ".join(cmds)} Z" fill="none" stroke="#c03030" stroke-width="{stroke}"/>'
        )
    if points is not None and len(points):
        pts = np.asarray(points)
        parts.append(
            f'<path d="M {" L ".join(_pt(p) for p in pts)} Z" fill="none" stroke="#2060b0" '
            f'stroke-width="{stroke}"/>'
        )
        r = _fmt(0.006 * max(w, h))
        parts += [f'<circle cx="{_fmt(p[0])}" cy="{_fmt(-p[1])}" r="{r}" fill="#2060b0"/>' for p in pts]
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def curve_csv(points: int = 101) -> str:
    """Grid of the limit arc with the slope-mass function and both variance functions."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["u", "x", "y", "q", "var_x", "var_y"])
    for u in np.linspace(0.0, 1.0, points):
        x, y = c_infinity(u)
        wr.writerow([f"{u:.6g}", f"{x:.10g}", f"{y:.10g}", f"{q_map(u):.10g}",
                     f"{ybar_variance(1, u):.10g}", f"{ybar_variance(2, u):.10g}"])
    return buf.getvalue()


def summaries_csv(results) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["test", "estimate", "stderr", "target", "replicas", "pass", "seconds"])
    for r in results:
        wr.writerow([r.test, r.estimate, r.stderr, r.target, r.replicas, r.passed, f"{r.seconds:.3f}"])
    return buf.getvalue()
