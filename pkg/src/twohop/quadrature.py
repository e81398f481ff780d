"""Gauss rules on the cell square and on discs clipped to it."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of every numerical integral in :mod:`twohop.analytic`.

    Node counts are per smooth piece: radial pieces are delimited by the
    distances at which a circle around the centre gains or loses an edge or a
    corner of the square, angular pieces by the circle/square crossings, and
    the square is split into quadrants.

    ``lattice_K`` truncates infinite lattice sums and products to
    ``{-K..K}^2``; ``tail_correction`` adds the integral of the far field
    beyond the window.  With ``finite_lattice`` the window is the whole
    network, so cells near its edge see fewer interferers than the origin;
    :meth:`matching` sets this up for the simulated network.
    """

    radial_nodes: int = 24
    angular_nodes: int = 24
    square_nodes: int = 16
    laguerre_nodes: int = 48
    lattice_K: int = 64
    tail_correction: bool = True
    finite_lattice: bool = False
    t1_exact_K: int = 8
    tol: float = 1e-6

    @classmethod
    def matching(cls, params, **kw) -> QuadratureSpec:
        """Same truncation as the simulated lattice, no tail."""
        return cls(lattice_K=params.lattice.K, tail_correction=False, finite_lattice=True, **kw)

    def refined(self) -> QuadratureSpec:
        return replace(
            self,
            radial_nodes=2 * self.radial_nodes,
            angular_nodes=2 * self.angular_nodes,
            square_nodes=2 * self.square_nodes,
            laguerre_nodes=2 * self.laguerre_nodes,
        )


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    x, w = npleg.leggauss(n)
    return x, w


@lru_cache(maxsize=16)
def gauss_laguerre(n: int):
    return np.polynomial.laguerre.laggauss(n)


def gl_interval(a: float, b: float, n: int):
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def square_nodes(half: float, n: int):
    """Tensor Gauss rule on ``[-half, half]^2``, split at the axes."""
    xa, wa = gl_interval(-half, 0.0, n)
    xb, wb = gl_interval(0.0, half, n)
    x = np.concatenate([xa, xb])
    w = np.concatenate([wa, wb])
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


def _inside(px, py, half):
    eps = 1e-12 * max(1.0, half)
    return (np.abs(px) <= half + eps) & (np.abs(py) <= half + eps)


def arc_intervals(center, r: float, half: float) -> list[tuple[float, float]]:
    """Angular intervals of the circle ``|x - center| = r`` inside the square."""
    if r <= 0:
        return []
    cx, cy = center
    cuts = [0.0, 2 * math.pi]
    for line, c, trig in ((half, cx, "x"), (-half, cx, "x"), (half, cy, "y"), (-half, cy, "y")):
        v = (line - c) / r
        if abs(v) <= 1:
            if trig == "x":
                a = math.acos(v)
                cuts += [a % (2 * math.pi), (-a) % (2 * math.pi)]
            else:
                a = math.asin(v)
                cuts += [a % (2 * math.pi), (math.pi - a) % (2 * math.pi)]
    cuts = sorted(set(cuts))
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-15:
            continue
        m = 0.5 * (a + b)
        if _inside(cx + r * math.cos(m), cy + r * math.sin(m), half):
            if out and abs(out[-1][1] - a) < 1e-15:
                out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
    # merge wrap-around at 0 == 2*pi
    if len(out) > 1 and out[0][0] == 0.0 and out[-1][1] == 2 * math.pi:
        first = out.pop(0)
        last = out.pop()
        out.append((last[0], first[1] + 2 * math.pi))
    return out


def _radial_piece(a: float, b: float, n: int):
    """Gauss rule on ``[a, b]`` after ``r = a + (b - a)(1 - cos(pi t))/2``.

    The clipped arc length has square-root kinks where the circle starts or
    stops touching an edge; the substitution flattens them at both ends.
    Returns the nodes ``t``, radii, weights in ``r`` and ``dr/dt``.
    """
    t, wt = gl_interval(0.0, 1.0, n)
    r = a + 0.5 * (b - a) * (1.0 - np.cos(math.pi * t))
    jac = 0.5 * (b - a) * math.pi * np.sin(math.pi * t)
    return t, r, wt * jac, jac


def circle_nodes(center, r: float, half: float, n: int):
    """Nodes and weights for the line integral over the circle inside the square."""
    pts, wts = [], []
    for a, b in arc_intervals(center, r, half):
        phi, w = gl_interval(a, b, n)
        pts.append(np.column_stack([center[0] + r * np.cos(phi), center[1] + r * np.sin(phi)]))
        wts.append(r * w)
    if not pts:
        return np.empty((0, 2)), np.empty(0)
    return np.concatenate(pts), np.concatenate(wts)


def radial_breaks(center, half: float) -> np.ndarray:
    """Radii where the topology of the clipped circle changes, from 0 to the far corner."""
    cx, cy = center
    d = [abs(half - cx), abs(half + cx), abs(half - cy), abs(half + cy)]
    corners = [math.hypot(sx * half - cx, sy * half - cy) for sx in (-1, 1) for sy in (-1, 1)]
    rmax = max(corners)
    b = sorted({0.0, rmax, *[v for v in d + corners if 0 < v < rmax]})
    return np.array(b)


def disk_nodes(center, r: float, half: float, n_r: int, n_phi: int):
    """Nodes and weights for ``int_{B(center, r) & square} f``."""
    breaks = radial_breaks(center, half)
    edges = [b for b in breaks if b < r] + [min(r, breaks[-1])]
    pts, wts = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        _, rho, wr, _ = _radial_piece(a, b, n_r)
        for ri, wi in zip(rho, wr):
            p, w = circle_nodes(center, ri, half, n_phi)
            pts.append(p)
            wts.append(w * wi)
    if not pts:
        return np.empty((0, 2)), np.empty(0)
    return np.concatenate(pts), np.concatenate(wts)


class RadialProfile:
    """``D(rho) = int_{circle(rho) & square} h ds`` and its running integral.

    On each radial piece ``D dr/dt`` is sampled at Gauss nodes in the smoothing
    variable ``t`` and replaced by its Legendre interpolant, so
    ``M(r) = int_0^r D`` is available at any radius without further
    evaluations of ``h``.
    """

    def __init__(self, h, center, half: float, n_r: int, n_phi: int):
        self.center = center
        self.breaks = radial_breaks(center, half)
        self.pieces = []
        acc = 0.0
        for a, b in zip(self.breaks[:-1], self.breaks[1:]):
            t, rho, wr, jac = _radial_piece(a, b, n_r)
            vals = np.empty(n_r)
            for i, ri in enumerate(rho):
                p, w = circle_nodes(center, ri, half, n_phi)
                vals[i] = np.dot(w, h(p)) if len(w) else 0.0
            coef = npleg.legfit(2 * t - 1, vals * jac, n_r - 1)
            icoef = npleg.legint(coef, lbnd=-1)
            self.pieces.append((a, b, rho, wr, vals, coef, icoef, acc))
            acc += float(np.dot(wr, vals))
        self.total = acc

    @property
    def rmax(self) -> float:
        return float(self.breaks[-1])

    def nodes(self):
        """Radial Gauss nodes, weights and ``D`` values over ``[0, rmax]``."""
        rho = np.concatenate([p[2] for p in self.pieces])
        w = np.concatenate([p[3] for p in self.pieces])
        d = np.concatenate([p[4] for p in self.pieces])
        return rho, w, d

    def cumulative(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.full(r.shape, self.total)
        for a, b, _, _, _, _, icoef, acc in self.pieces:
            m = (r >= a) & (r < b)
            if np.any(m):
                out[m] = acc + 0.5 * npleg.legval(2 * self._t(r[m], a, b) - 1, icoef)
        out[r <= 0] = 0.0
        return out

    @staticmethod
    def _t(r, a, b):
        return np.arccos(np.clip(1.0 - 2.0 * (r - a) / (b - a), -1.0, 1.0)) / math.pi

