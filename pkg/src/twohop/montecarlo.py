"""Monte-Carlo estimation of the direct and two-hop success probabilities."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from twohop import _kernel
from twohop.channel import SystemParams, connects, decoded_set
from twohop.geometry import realize_network
from twohop.rng import S_PICK, as_seed, stream_key, uniform

CHUNK = 1 << 16


class RelayScheme(enum.Enum):
    RETRANSMIT = "retransmit"
    NEAREST = "nearest"
    BEST = "best"
    # diagnostic only: uniformly random decoded mobile
    RANDOM = "random"

    @property
    def code(self) -> int:
        return {"retransmit": 0, "nearest": 1, "best": 2, "random": 3}[self.value]


class Metric(enum.Enum):
    DIRECT_SUCCESS = "direct_success"
    RELAY_SUCCESS = "relay_success"
    TWO_HOP_SUCCESS = "two_hop_success"
    GAIN = "gain"
    THROUGHPUT_DENSITY = "throughput_density"


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    trials: int
    seed: int
    metric: Metric
    defined: bool = True


@dataclass(frozen=True)
class SweepSpec:
    snr_db: tuple[float, ...]
    betas: tuple[float, ...]
    scheme: RelayScheme = RelayScheme.BEST
    trials: int = 100_000
    seed: int = 0

    def points(self, base: SystemParams):
        """Grid points in (beta, SNR) order with ``lambda_b = SNR**-beta``."""
        for beta in self.betas:
            for s in self.snr_db:
                yield base.at(s, beta)


# -- reference single-trial path ---------------------------------------------


@dataclass(frozen=True)
class TwoHopRecord:
    first_hop_direct: bool
    second_hop: bool
    n_origin: int = 0
    n_decoded: int = 0
    nearest_dist: float = math.inf
    selected: tuple = ()


def _bs_list(r, power, exclude):
    return [(("bs", b), r.sites[b], power) for b in range(r.n_cells) if b != exclude]


def trial_direct(params: SystemParams, trial: int, seed: int) -> bool:
    """One slot-1 trial of BS o -> r(o) with every other BS interfering."""
    r = realize_network(params, seed, trial)
    o = r.origin
    p = params.power
    return connects(
        (("bs", o), r.sites[o]),
        (("dest", o), r.destinations[o]),
        _bs_list(r, p, o),
        p,
        lambda a, b: r.fading(a, b, 1),
        params,
    )


def _select(r, cell, decoded, scheme, params):
    if len(decoded) == 0:
        return None
    dest = r.destinations[cell]
    pts = r.mobiles_abs(cell)[decoded.indices]
    if scheme is RelayScheme.NEAREST:
        d2 = np.sum((pts - dest) ** 2, axis=1)
        return int(decoded.indices[int(np.argmin(d2))])
    if scheme is RelayScheme.BEST:
        gains = [
            r.fading(("ms", cell, int(j)), ("dest", cell), 2) * params.path_loss.of_dist2(float(np.sum((p - dest) ** 2)))
            for j, p in zip(decoded.indices, pts)
        ]
        return int(decoded.indices[int(np.argmax(gains))])
    if scheme is RelayScheme.RANDOM:
        u = uniform(stream_key(as_seed(r.seed), r.trial, cell, S_PICK), 0)
        return int(decoded.indices[min(int(u * len(decoded)), len(decoded) - 1)])
    raise ValueError(f"{scheme} does not select a relay")


def trial_two_hop(
    params: SystemParams, scheme: RelayScheme, trial: int, seed: int, condition_origin: bool = True
) -> TwoHopRecord:
    """Reference implementation of one two-hop trial, link by link.

    Slower than :func:`simulate` by orders of magnitude; used as its oracle.
    """
    r = realize_network(params, seed, trial, condition_origin=condition_origin)
    o = r.origin
    p = params.power
    direct = trial_direct(params, trial, seed)
    dec = [decoded_set(r, c, params) for c in range(r.n_cells)]
    n_dec = len(dec[o])
    near = math.inf
    if n_dec:
        near = float(np.min(np.hypot(*(r.mobiles_abs(o)[dec[o].indices] - r.destinations[o]).T)))
    rx = (("dest", o), r.destinations[o])
    slot2 = lambda a, b: r.fading(a, b, 2)  # noqa: E731

    if scheme is RelayScheme.RETRANSMIT:
        second = connects((("bs", o), r.sites[o]), rx, _bs_list(r, p, o), p, slot2, params)
        return TwoHopRecord(direct, second, len(r.mobiles[o]), n_dec, near, ())

    chosen = [_select(r, c, dec[c], scheme, params) for c in range(r.n_cells)]
    if chosen[o] is None:
        second = False
    else:
        interferers = [
            (("ms", c, j), r.position(("ms", c, j)), p)
            for c, j in enumerate(chosen)
            if c != o and j is not None
        ]
        tx = (("ms", o, chosen[o]), r.position(("ms", o, chosen[o])))
        second = connects(tx, rx, interferers, p, slot2, params)
    return TwoHopRecord(direct, second, len(r.mobiles[o]), n_dec, near, tuple(chosen))


# -- batch engine -------------------------------------------------------------


@dataclass
class TrialBatch:
    """Per-trial outcomes of :func:`simulate`."""

    params: SystemParams
    scheme: RelayScheme
    seed: int
    conditioned: bool
    direct_ok: np.ndarray
    relay_ok: np.ndarray
    n_origin: np.ndarray
    n_decoded: np.ndarray
    nearest_dist: np.ndarray
    hist: np.ndarray = field(repr=False)

    @property
    def trials(self) -> int:
        return len(self.direct_ok)

    def _prob(self, x, metric):
        n = len(x)
        p = float(np.mean(x))
        return Estimate(p, math.sqrt(p * (1 - p) / n), n, self.seed, metric)

    def p_direct(self) -> Estimate:
        return self._prob(self.direct_ok, Metric.DIRECT_SUCCESS)

    def p_relay(self) -> Estimate:
        """Second-hop success; conditional on ``n_o > 0`` if the run was."""
        return self._prob(self.relay_ok, Metric.RELAY_SUCCESS)

    def p_two_hop(self) -> Estimate:
        d = self.direct_ok.astype(float)
        r = self.relay_ok.astype(float)
        n = len(d)
        pd, pr = d.mean(), r.mean()
        value = 1.0 - (1.0 - pd) * (1.0 - pr)
        cov = np.cov(d, r) / n if n > 1 else np.zeros((2, 2))
        a, b = 1.0 - pr, 1.0 - pd
        var = a * a * cov[0, 0] + b * b * cov[1, 1] + 2 * a * b * cov[0, 1]
        return Estimate(float(value), math.sqrt(max(var, 0.0)), n, self.seed, Metric.TWO_HOP_SUCCESS)

    def joint_failure(self) -> float:
        """Empirical rate of both slots failing in the same trial (diagnostic)."""
        return float(np.mean((self.direct_ok == 0) & (self.relay_ok == 0)))

    def gain(self) -> Estimate:
        d = self.direct_ok.astype(float)
        r = self.relay_ok.astype(float)
        n = len(d)
        pd, pr = d.mean(), r.mean()
        if pr == 1.0:
            return Estimate(math.inf, math.nan, n, self.seed, Metric.GAIN, defined=False)
        g = (1 - pd) / (1 - pr)
        cov = np.cov(d, r) / n if n > 1 else np.zeros((2, 2))
        gd, gr = -1.0 / (1 - pr), (1 - pd) / (1 - pr) ** 2
        var = gd * gd * cov[0, 0] + gr * gr * cov[1, 1] + 2 * gd * gr * cov[0, 1]
        return Estimate(float(g), math.sqrt(max(var, 0.0)), n, self.seed, Metric.GAIN)

    def throughput_density(self) -> Estimate:
        ps = self.p_two_hop()
        scale = math.log2(1.0 + self.params.theta) * self.params.snr ** (-self.params.beta)
        return Estimate(ps.value * scale, ps.stderr * scale, ps.trials, self.seed, Metric.THROUGHPUT_DENSITY)


def _run_chunk(args):
    params, scheme, seed, start, n, conditioned, direct_only, first_hop_only, nbins = args
    from twohop.geometry import generate_lattice

    sites = generate_lattice(params.lattice)
    hist = np.zeros((nbins, nbins), np.int64)
    out = (
        np.zeros(n, np.uint8),
        np.zeros(n, np.uint8),
        np.zeros(n, np.int32),
        np.zeros(n, np.int32),
        np.full(n, np.inf),
    )
    prof = params.profile
    _kernel.run_trials(
        sites,
        params.lattice.origin_index,
        np.asarray(params.offset, dtype=float),
        prof.half_width,
        prof.L,
        prof.mean_count,
        params.theta,
        params.noise,
        params.power,
        params.path_loss.code,
        float(params.path_loss.alpha),
        scheme.code,
        conditioned,
        direct_only,
        first_hop_only,
        as_seed(seed),
        start,
        n,
        hist,
        *out,
    )
    return out, hist


def simulate(
    params: SystemParams,
    scheme: RelayScheme,
    trials: int,
    seed: int,
    *,
    condition_origin: bool = True,
    direct_only: bool = False,
    first_hop_only: bool = False,
    hist_bins: int = 10,
    workers: int = 1,
    start: int = 0,
) -> TrialBatch:
    """Run trials ``start .. start+trials-1`` of stream ``seed``.

    Trials are cut into fixed chunks; each trial depends only on its own index,
    so results are identical for any ``workers``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if condition_origin and params.profile.mean_count <= 0 and not direct_only:
        raise ValueError("cannot condition on a non-empty origin cell when the mean count is 0")
    jobs = []
    for s in range(start, start + trials, CHUNK):
        n = min(CHUNK, start + trials - s)
        jobs.append((params, scheme, seed, s, n, condition_origin, direct_only, first_hop_only, hist_bins))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_chunk, jobs))
    else:
        results = [_run_chunk(j) for j in jobs]
    cols = [np.concatenate([r[0][i] for r in results]) for i in range(5)]
    hist = np.zeros((hist_bins, hist_bins), np.int64)
    for _, h in results:
        hist += h
    return TrialBatch(params, scheme, int(seed), condition_origin, *cols, hist)


def estimate_metric(
    params: SystemParams,
    scheme: RelayScheme,
    metric: Metric,
    trials: int,
    seed: int,
    workers: int = 1,
) -> Estimate:
    """One metric at one operating point; relay metrics are conditional on ``n_o > 0``."""
    if metric is Metric.DIRECT_SUCCESS:
        return simulate(params, scheme, trials, seed, direct_only=True, workers=workers).p_direct()
    batch = simulate(params, scheme, trials, seed, workers=workers)
    return {
        Metric.RELAY_SUCCESS: batch.p_relay,
        Metric.TWO_HOP_SUCCESS: batch.p_two_hop,
        Metric.GAIN: batch.gain,
        Metric.THROUGHPUT_DENSITY: batch.throughput_density,
    }[metric]()


def throughput_density(
    base: SystemParams, sweep: SweepSpec, workers: int = 1
) -> list[tuple[float, float, Estimate]]:
    """``(P_s | n_o > 0) log2(1+theta) SNR**-beta`` over the sweep grid."""
    out = []
    for beta in sweep.betas:
        for s in sweep.snr_db:
            batch = simulate(base.at(s, beta), sweep.scheme, sweep.trials, sweep.seed, workers=workers)
            out.append((s, beta, batch.throughput_density()))
    return out


def fit_slope(curve) -> float:
    """Negated least-squares slope of log(error) against log(SNR).

    ``curve`` holds ``(snr_linear, error)`` pairs; zero-error points are dropped.
    """
    pts = [(s, e) for s, e in curve if e > 0]
    if not pts:
        raise ValueError("all error values are zero; slope undefined")
    if len(pts) < 3:
        raise ValueError(f"need at least 3 non-zero points for a slope fit, got {len(pts)}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)
