"""Numerical evaluation of the closed forms, semi-analytic integrals and
high-SNR expansions for the direct and two-hop schemes.

Nothing here touches the simulator; these values are what the Monte-Carlo
estimates are checked against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from twohop.channel import SystemParams
from twohop.quadrature import (
    QuadratureSpec,
    RadialProfile,
    circle_nodes,
    disk_nodes,
    gauss_laguerre,
    square_nodes,
)

DEFAULT_QUAD = QuadratureSpec()

# Bernoulli numbers B_2, B_4, ... for the Euler-Maclaurin tail
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def hurwitz_xi(s: float, b: float, head: int = 32) -> float:
    """``sum_{k >= 0, k + b != 0} (k + b)^-s`` for ``s > 1``, ``0 <= b < 1``."""
    if not s > 1:
        raise ValueError(f"series diverges for s={s}")
    k0 = 1 if b == 0 else 0
    ks = np.arange(k0, head, dtype=float) + b
    total = math.fsum(ks ** (-s))
    # Euler-Maclaurin for k >= head
    a = head + b
    tail = a ** (1 - s) / (s - 1) + 0.5 * a ** (-s)
    rising = s  # (s)_{2j-1}
    fact = 2.0  # (2j)!
    for j, bern in enumerate(_BERNOULLI, start=1):
        m = 2 * j - 1
        # f^{(m)}(a) = (-1)^m (s)_m a^{-s-m}; the EM term is -B_{2j}/(2j)! f^{(2j-1)}(a)
        tail += bern / fact * rising * a ** (-s - m)
        rising *= (s + m) * (s + m + 1)
        fact *= (2 * j + 1) * (2 * j + 2)
    return total + tail


def epstein_C(alpha: float) -> float:
    """Square-lattice constant ``sum_{z in Z^2 \\ 0} |z|^-alpha``.

    Evaluated as ``xi(a/2, 0) [xi(a/2, 1/4) - xi(a/2, 3/4)] / 2^(a-2)``.
    """
    if not alpha > 2:
        raise ValueError(f"C(alpha) needs alpha > 2, got {alpha}")
    s = alpha / 2
    return hurwitz_xi(s, 0.0) * (hurwitz_xi(s, 0.25) - hurwitz_xi(s, 0.75)) / 2 ** (alpha - 2)


def far_field_integral(alpha: float, h: float) -> float:
    """``int |y|^-alpha dy`` over the plane outside the square ``[-h, h]^2``."""
    val, _ = integrate.quad(lambda p: math.cos(p) ** (alpha - 2), 0.0, math.pi / 4)
    return 8.0 * h ** (2 - alpha) / (alpha - 2) * val


def lattice_sum_bruteforce(alpha: float, K: int = 200) -> float:
    """Direct summation of ``|z|^-alpha`` over ``{-K..K}^2 \\ 0`` plus the far-field tail."""
    i = np.arange(-K, K + 1, dtype=float)
    X, Y = np.meshgrid(i, i, indexing="ij")
    d2 = X * X + Y * Y
    d2 = d2[d2 > 0]
    return float(np.sum(d2 ** (-alpha / 2))) + far_field_integral(alpha, K + 0.5)


def _interferer_sites(params: SystemParams, K: int, cell=None) -> np.ndarray:
    """Other BSs relative to the BS of ``cell`` (integer lattice index, origin by default)."""
    i = np.arange(-K, K + 1, dtype=float)
    X, Y = np.meshgrid(i, i, indexing="ij")
    z = np.column_stack([X.ravel(), Y.ravel()])
    if cell is not None:
        z = z - np.asarray(cell, dtype=float)
    z = z[np.any(z != 0, axis=1)]
    return z * params.lattice.spacing


def _tail_sum(params: SystemParams, quad: QuadratureSpec) -> float:
    """Approximate ``sum ell`` over lattice sites outside the truncation window."""
    if not quad.tail_correction:
        return 0.0
    h = (quad.lattice_K + 0.5) * params.lattice.spacing
    return params.lattice.density * far_field_integral(params.path_loss.alpha, h)


def _inv_ell_at(x, params):
    return params.path_loss.inverse(np.linalg.norm(x, axis=-1))


def log_delta(x, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD, cell=None) -> np.ndarray:
    """``log Delta`` at cell-relative points ``x``.

    ``cell`` only matters for a finite lattice, where the interferer set
    depends on where the serving BS sits in the window.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    sites = _interferer_sites(params, quad.lattice_K, cell if quad.finite_lattice else None)
    c = params.theta * _inv_ell_at(x, params)  # theta / ell(x)
    model = params.path_loss
    out = np.empty(len(x))
    step = max(1, 4_000_000 // max(len(sites), 1))
    for s in range(0, len(x), step):
        xs = x[s : s + step]
        d2 = np.sum((sites[None, :, :] - xs[:, None, :]) ** 2, axis=-1)
        out[s : s + step] = -np.sum(np.log1p(c[s : s + step, None] * model.of_dist2(d2)), axis=1)
    return out - c * _tail_sum(params, quad)


def delta_interference_product(x, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """``Delta(x) = prod_{y != o} 1 / (1 + theta ell(y - x) / ell(x))``."""
    out = np.exp(log_delta(x, params, quad))
    return float(out[0]) if np.ndim(x) == 1 else out


def one_minus_delta(x, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD):
    out = -np.expm1(log_delta(x, params, quad))
    return float(out[0]) if np.ndim(x) == 1 else out


def p_direct(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``exp(-theta / SNR) Delta(r(o))``."""
    noise_term = params.theta * params.noise / (params.power * params.ell_R)
    return math.exp(-noise_term) * delta_interference_product(np.array(params.offset), params, quad)


class Regime(enum.Enum):
    NOISE_LIMITED = "noise_limited"
    INTERFERENCE_LIMITED = "interference_limited"
    BOUNDARY = "boundary"


class Quantity(enum.Enum):
    DIRECT_ERROR = "direct_error"
    NEAREST_ERROR = "nearest_error"
    BEST_ERROR = "best_error"


@dataclass(frozen=True)
class AsymptoteCurve:
    """High-SNR error ``coefficient * SNR**-exponent``."""

    coefficient: float
    exponent: float
    regime: Regime
    quantity: Quantity

    def __call__(self, snr):
        return self.coefficient * np.asarray(snr, dtype=float) ** (-self.exponent)


def _regime(alpha: float, beta: float) -> Regime:
    ab = alpha * beta
    if math.isclose(ab, 2.0, rel_tol=1e-12, abs_tol=1e-12):
        return Regime.BOUNDARY
    return Regime.NOISE_LIMITED if ab > 2 else Regime.INTERFERENCE_LIMITED


def diversity_order(beta: float, alpha: float) -> float:
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    return min(1.0, alpha * beta / 2)


def p_direct_asymptote(beta: float, params: SystemParams) -> AsymptoteCurve:
    """High-SNR ``1 - P_d`` under ``lambda_b = SNR**-beta``."""
    if beta <= 0:
        raise ValueError("the expansion needs beta > 0")
    a = params.path_loss.alpha
    th = params.theta
    reg = _regime(a, beta)
    C = epstein_C(a)
    if reg is Regime.NOISE_LIMITED:
        return AsymptoteCurve(th, 1.0, reg, Quantity.DIRECT_ERROR)
    if reg is Regime.BOUNDARY:
        return AsymptoteCurve(th * (1 + C / params.ell_R), 1.0, reg, Quantity.DIRECT_ERROR)
    return AsymptoteCurve(th * C / params.ell_R, a * beta / 2, reg, Quantity.DIRECT_ERROR)


def relay_intensity_delta(x, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD, cell=None):
    """Intensity of the decoded set: ``eta(x) exp(-theta ell(R) / (SNR ell(x))) Delta(x)``.

    ``x`` is relative to the serving BS.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    eta = params.profile.eta(x)
    out = np.zeros(len(x))
    m = eta > 0
    if np.any(m):
        noise_term = params.theta * params.noise / params.power * _inv_ell_at(x[m], params)
        out[m] = eta[m] * np.exp(-noise_term + log_delta(x[m], params, quad, cell))
    return out


def _delta_fn(params, quad, cell=None):
    return lambda p: relay_intensity_delta(p, params, quad, cell)


def mean_connect_count(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Mean size of the decoded set, ``int delta``."""
    pts, w = square_nodes(params.profile.half_width, quad.square_nodes)
    return float(np.dot(w, relay_intensity_delta(pts, params, quad)))


def mean_connect_distance(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Mean BS-to-decoded-mobile distance, ``int |x| delta / int delta``."""
    pts, w = square_nodes(params.profile.half_width, quad.square_nodes)
    d = relay_intensity_delta(pts, params, quad)
    mass = float(np.dot(w, d))
    if mass <= 0:
        raise ValueError("no mobile can be reached; mean connection distance undefined")
    return float(np.dot(w, np.linalg.norm(pts, axis=1) * d)) / mass


def _first_contact_profile(params, quad, cell=None):
    return RadialProfile(
        _delta_fn(params, quad, cell),
        params.offset,
        params.profile.half_width,
        quad.radial_nodes,
        quad.angular_nodes,
    )


def first_contact_cdf(r, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """Distance law from ``r(o)`` to the nearest decoded mobile (defective)."""
    prof = _first_contact_profile(params, quad)
    out = -np.expm1(-prof.cumulative(r))
    return float(out[0]) if np.ndim(r) == 0 else out


def first_contact_mass(r, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``int_{B(r(o), r)} delta`` by direct 2-D quadrature (no radial interpolation)."""
    pts, w = disk_nodes(params.offset, float(r), params.profile.half_width, quad.radial_nodes, quad.angular_nodes)
    return float(np.dot(w, relay_intensity_delta(pts, params, quad))) if len(w) else 0.0


def first_contact_pdf(r, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """``d F_o / d r = exp(-M(r)) * (line integral of delta over the clipped circle)``."""
    prof = _first_contact_profile(params, quad)
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty(rr.shape)
    for i, ri in enumerate(rr):
        p, w = circle_nodes(params.offset, ri, params.profile.half_width, quad.angular_nodes)
        line = float(np.dot(w, relay_intensity_delta(p, params, quad))) if len(w) else 0.0
        out[i] = math.exp(-prof.cumulative(ri)[0]) * line
    return float(out[0]) if np.ndim(r) == 0 else out


def _cell_offsets(params, K):
    """Integer lattice indices ``a != 0`` in ``{-K..K}^2``."""
    i = np.arange(-K, K + 1)
    X, Y = np.meshgrid(i, i, indexing="ij")
    a = np.column_stack([X.ravel(), Y.ravel()])
    return a[np.any(a != 0, axis=1)]


def _per_cell_silence(measure_of, params, quad, s_values):
    """``log prod_{a != o} E[...]`` over the slot-2 transmitters of the other cells.

    ``measure_of(a)`` returns ``(points, weights)``, the (defective) density of
    the transmitter position of cell ``a`` relative to its BS; ``a=None``
    asks for the generic cell of an infinite lattice.  Returns, for every ``s``,
    ``sum_a log(1 - int w(y) s ell(z_a(y)) / (1 + s ell(z_a(y))) dy)`` with
    ``z_a(y) = a / sqrt(lambda_b) + y - r(o)``: the log Laplace transform of the
    normalised interference at ``r(o)``.
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    model = params.path_loss
    ro = np.array(params.offset)
    K = quad.lattice_K
    K_exact = K if quad.finite_lattice else min(K, quad.t1_exact_K)
    out = np.zeros(len(s_values))
    for ai in _cell_offsets(params, K_exact):
        pts, w = measure_of(tuple(int(v) for v in ai))
        z = ai * params.lattice.spacing + pts - ro
        ell = model.of_dist2(np.sum(z * z, axis=1))
        sl = s_values[:, None] * ell[None, :]
        frac = np.where(np.isinf(sl), 1.0, sl / (1.0 + sl))
        out += np.log1p(-(frac @ w))
    # far cells: relay assumed at the mean position of its cell
    pts, w = measure_of(None)
    mass = float(np.sum(w))
    if mass > 0 and K > K_exact:
        ybar = (w @ pts) / mass
        far = _cell_offsets(params, K) * params.lattice.spacing
        far = far[np.max(np.abs(far), axis=1) > K_exact * params.lattice.spacing * (1 + 1e-9)]
        z = far + ybar - ro
        ell = model.of_dist2(np.sum(z * z, axis=1))
        sl = s_values[:, None] * ell[None, :]
        out += np.sum(np.log1p(-mass * sl / (1.0 + sl)), axis=1)
    out -= mass * s_values * _tail_sum(params, quad)
    return out


def _nearest_position_measure(params, quad, cell=None):
    """Density of the nearest decoded mobile's position in a cell (mass 1 - exp(-int delta))."""
    prof = _first_contact_profile(params, quad, cell)
    pts, w = square_nodes(params.profile.half_width, quad.square_nodes)
    d = relay_intensity_delta(pts, params, quad, cell)
    r = np.linalg.norm(pts - np.array(params.offset), axis=1)
    return pts, w * d * np.exp(-prof.cumulative(r))


def _measures(builder, params, quad):
    """Per-cell position measures, built once each."""
    cache = {}

    def measure_of(cell):
        key = cell if quad.finite_lattice else None
        if key not in cache:
            cache[key] = builder(params, quad, key)
        return cache[key]

    return measure_of


def interference_factor_t1(r, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """``T_1(lambda_b, r)``: Laplace transform of the other cells' nearest-relay
    interference at ``r(o)``, evaluated at ``theta / ell(r)``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    s = params.theta * params.path_loss.inverse(r)
    return np.exp(_per_cell_silence(_measures(_nearest_position_measure, params, quad), params, quad, s))


def nearest_success_semianalytic(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Unconditional second-hop success of the nearest-relay scheme.

    ``int exp(-theta ell(R) / (SNR ell(r))) T_1(r) f_o(r) dr``; divide by
    ``mu`` for the value conditional on a non-empty origin cell.
    """
    prof = _first_contact_profile(params, quad)
    rho, w, D = prof.nodes()
    noise = params.theta * params.noise / params.power * params.path_loss.inverse(rho)
    t1 = interference_factor_t1(rho, params, quad)
    f_o = np.exp(-prof.cumulative(rho)) * D
    return float(np.sum(w * np.exp(-noise) * t1 * f_o))


def _eta_profile(params, quad, weight=None):
    lam = params.profile.lam_m
    if weight is None:
        h = lambda p: np.full(len(p), lam)  # noqa: E731
    else:
        h = lambda p: lam * weight(p)  # noqa: E731
    return RadialProfile(h, params.offset, params.profile.half_width, quad.radial_nodes, quad.angular_nodes)


def nearest_error_integrals(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """The two radial integrals of the nearest-relay expansion.

    Returns ``(J_noise, J_interference)`` where
    ``J_noise = int e^{-f} (g + f'/ell(r)) dr`` and
    ``J_interference = int e^{-f} (g + mu f'/ell(r)) dr``, with
    ``f(r) = int_{B(r(o), r)} eta``, ``H(r) = int_{B(r(o), r)} eta/ell`` and
    ``g = H' - H f'``.
    """
    fprof = _eta_profile(params, quad)
    hprof = _eta_profile(params, quad, weight=lambda p: _inv_ell_at(p, params))
    rho, w, fp = fprof.nodes()
    _, _, Hp = hprof.nodes()
    f = fprof.cumulative(rho)
    H = hprof.cumulative(rho)
    g = Hp - H * fp
    inv_l = params.path_loss.inverse(rho)
    mu = params.profile.mu
    e = np.exp(-f)
    return float(np.sum(w * e * (g + inv_l * fp))), float(np.sum(w * e * (g + mu * inv_l * fp)))


def _two_hop_regime(beta, params):
    if beta <= 0:
        raise ValueError("the expansion needs beta > 0")
    reg = _regime(params.path_loss.alpha, beta)
    if reg is Regime.BOUNDARY:
        raise ValueError("alpha * beta == 2 is not covered by the two-hop expansions")
    return reg


def nearest_error_asymptote(
    beta: float, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD
) -> AsymptoteCurve:
    """High-SNR ``1 - P_r | n_o > 0`` for the nearest-relay scheme."""
    reg = _two_hop_regime(beta, params)
    mu = params.profile.mu
    if mu == 0:
        raise ValueError("empty cells: the conditional error is undefined")
    jn, ji = nearest_error_integrals(params, quad)
    th = params.theta
    if reg is Regime.NOISE_LIMITED:
        return AsymptoteCurve(th * params.ell_R / mu * jn, 1.0, reg, Quantity.NEAREST_ERROR)
    C = epstein_C(params.path_loss.alpha)
    return AsymptoteCurve(th * C / mu * ji, params.path_loss.alpha * beta / 2, reg, Quantity.NEAREST_ERROR)


def best_error_integrals(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD):
    """``(int eta / ell(x - r(o)), int eta / ell(x))`` over the cell."""
    pts, w = square_nodes(params.profile.half_width, quad.square_nodes)
    eta = params.profile.eta(pts)
    a = float(np.dot(w, eta * _inv_ell_at(pts - np.array(params.offset), params)))
    b = float(np.dot(w, eta * _inv_ell_at(pts, params)))
    return a, b


def best_error_asymptote(
    beta: float, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD
) -> AsymptoteCurve:
    """High-SNR ``1 - P_r | n_o > 0`` for best-channel selection."""
    reg = _two_hop_regime(beta, params)
    mu = params.profile.mu
    if mu == 0:
        raise ValueError("empty cells: the conditional error is undefined")
    to_dest, to_bs = best_error_integrals(params, quad)
    odds = math.exp(-params.profile.mean_count) / mu
    th = params.theta
    if reg is Regime.NOISE_LIMITED:
        return AsymptoteCurve(odds * th * params.ell_R * (to_dest + to_bs), 1.0, reg, Quantity.BEST_ERROR)
    C = epstein_C(params.path_loss.alpha)
    c = odds * th * C * (mu * to_dest + to_bs)
    return AsymptoteCurve(c, params.path_loss.alpha * beta / 2, reg, Quantity.BEST_ERROR)


def asymptotic_gain(scheme, beta: float, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``lim G`` as SNR grows: direct error coefficient over the scheme's."""
    name = getattr(scheme, "value", scheme)
    if name == "retransmit":
        return 1.0
    if name == "nearest":
        curve = nearest_error_asymptote(beta, params, quad)
    elif name == "best":
        curve = best_error_asymptote(beta, params, quad)
    else:
        raise ValueError(f"no asymptotic gain for scheme {scheme!r}")
    direct = p_direct_asymptote(beta, params)
    return direct.coefficient / curve.coefficient


def sir_of_params(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``ell(R) / sum_{x != o} ell(x - r(o))``."""
    sites = _interferer_sites(params, quad.lattice_K)
    d2 = np.sum((sites - np.array(params.offset)) ** 2, axis=1)
    total = float(np.sum(params.path_loss.of_dist2(d2))) + _tail_sum(params, quad)
    if total == 0:
        return math.inf
    return params.ell_R / total


def best_position_measure(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD, cell=None):
    """Density of the best-channel relay's position in a cell (mass ``1 - exp(-int delta)``).

    ``g(y) = delta(y) int_0^inf e^-h exp(-int delta(z) exp(-h ell(y-r)/ell(z-r)) dz) dh``:
    ``y`` wins when no decoded point has a larger fading-weighted gain.
    """
    pts, w = square_nodes(params.profile.half_width, quad.square_nodes)
    d = relay_intensity_delta(pts, params, quad, cell)
    inv = _inv_ell_at(pts - np.array(params.offset), params)  # 1/ell(. - r)
    hs, hw = gauss_laguerre(quad.laguerre_nodes)
    wd = w * d
    g = np.empty(len(pts))
    for i in range(len(pts)):
        # ell(y - r) / ell(z - r) = inv_z / inv_y
        ratio = inv / inv[i] if inv[i] > 0 else np.where(inv > 0, np.inf, 1.0)
        void = np.exp(-(np.exp(-np.outer(hs, ratio)) @ wd))
        g[i] = d[i] * float(hw @ void)
    return pts, w * g


def interference_laplace(s, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD, measure_of=None):
    """``E exp(-s I)`` for the normalised slot-2 interference at ``r(o)`` under best-channel selection."""
    measure_of = measure_of or _measures(best_position_measure, params, quad)
    return np.exp(_per_cell_silence(measure_of, params, quad, s))


def interference_mgf(t: float, params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD, measure_of=None) -> float:
    """``E exp(+t I)``; infinite once ``t ell`` reaches 1 for some interferer position.

    Every cell of the window is treated exactly here, so this is slow for a
    large infinite-lattice window.
    """
    measure_of = measure_of or _measures(best_position_measure, params, quad)
    model = params.path_loss
    ro = np.array(params.offset)
    acc = 0.0
    mass = 0.0
    for ai in _cell_offsets(params, quad.lattice_K):
        pts, w = measure_of(tuple(int(v) for v in ai))
        mass = float(np.sum(w))
        z = ai * params.lattice.spacing + pts - ro
        tl = t * model.of_dist2(np.sum(z * z, axis=1))
        if np.any(tl >= 1):
            return math.inf
        acc += math.log1p(float(w @ (tl / (1 - tl))))
    if quad.tail_correction:
        acc += mass * t * _tail_sum(params, quad)
    return math.exp(acc)


def best_relay_bounds(params: SystemParams, quad: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
    """Jensen lower and upper bounds on ``P_r | n_o > 0`` for best-channel selection."""
    mu = params.profile.mu
    if mu == 0:
        raise ValueError("empty cells: the conditional success is undefined")
    measure_of = _measures(best_position_measure, params, quad)
    pts, w = square_nodes(params.profile.half_width, quad.square_nodes)
    d = relay_intensity_delta(pts, params, quad)
    inv = _inv_ell_at(pts - np.array(params.offset), params)
    n2p = params.theta * params.noise / params.power  # theta sigma^2 / P
    lt = interference_laplace(params.theta * inv, params, quad, measure_of)
    upper = -math.expm1(-float(np.sum(w * d * np.exp(-n2p * inv) * lt))) / mu

    total = float(w @ d)
    J = float(w @ (d * inv))
    mgf = interference_mgf(params.theta * J, params, quad, measure_of)
    lower = (1.0 - math.exp(-total + n2p * J) * mgf) / mu if math.isfinite(mgf) else -math.inf
    return lower, upper
