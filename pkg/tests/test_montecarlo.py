import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twohop import analytic as A
from twohop.channel import PathLossModel, SystemParams
from twohop.geometry import IntensityProfile, LatticeSpec
from twohop.montecarlo import (
    Metric,
    RelayScheme,
    SweepSpec,
    TrialBatch,
    estimate_metric,
    fit_slope,
    simulate,
    throughput_density,
    trial_direct,
    trial_two_hop,
)
from twohop.quadrature import QuadratureSpec

BASE = SystemParams()

CASES = [
    BASE.at(10.0, 0.25),
    replace(BASE, lattice=LatticeSpec(K=1)).at(20.0, 0.5),
    replace(BASE, path_loss=PathLossModel("singular", 3.5), profile=IntensityProfile(lam_m=2.0)).at(15.0, 0.3),
    replace(BASE, path_loss=PathLossModel("min", 4.0), noise=0.0, lattice=LatticeSpec(K=1, density=0.5)),
]


@pytest.mark.parametrize("params", CASES)
@pytest.mark.parametrize("scheme", list(RelayScheme))
@pytest.mark.parametrize("conditioned", [True, False])
def test_kernel_matches_reference(params, scheme, conditioned):
    seed, start, n = 1234, 50, 25
    b = simulate(params, scheme, n, seed, start=start, condition_origin=conditioned)
    for i in range(n):
        rec = trial_two_hop(params, scheme, start + i, seed, condition_origin=conditioned)
        assert bool(b.direct_ok[i]) == rec.first_hop_direct
        assert bool(b.relay_ok[i]) == rec.second_hop
        assert b.n_origin[i] == rec.n_origin
        assert b.n_decoded[i] == rec.n_decoded
        assert b.nearest_dist[i] == pytest.approx(rec.nearest_dist, rel=1e-12) or (
            math.isinf(b.nearest_dist[i]) and math.isinf(rec.nearest_dist)
        )
        assert trial_direct(params, start + i, seed) == rec.first_hop_direct


def test_worker_count_does_not_change_results():
    p = BASE.at(15.0, 0.25)
    a = simulate(p, RelayScheme.BEST, 70000, 9, workers=1)
    b = simulate(p, RelayScheme.BEST, 70000, 9, workers=2)
    for x, y in zip(
        (a.direct_ok, a.relay_ok, a.n_decoded, a.nearest_dist, a.hist),
        (b.direct_ok, b.relay_ok, b.n_decoded, b.nearest_dist, b.hist),
    ):
        assert np.array_equal(x, y)


def test_chunks_compose():
    p = BASE.at(15.0, 0.25)
    whole = simulate(p, RelayScheme.NEAREST, 3000, 4)
    parts = [simulate(p, RelayScheme.NEAREST, 1000, 4, start=s) for s in (0, 1000, 2000)]
    assert np.array_equal(whole.relay_ok, np.concatenate([x.relay_ok for x in parts]))


def test_single_bs_direct_is_rayleigh_tail():
    p = SystemParams(lattice=LatticeSpec(K=0), snr=15.0)
    e = simulate(p, RelayScheme.RETRANSMIT, 100000, 2, direct_only=True).p_direct()
    assert abs(e.value - math.exp(-0.1)) < 3 * e.stderr


def test_huge_threshold_never_connects():
    p = replace(BASE.at(20.0, 0.5), theta=1e12)
    b = simulate(p, RelayScheme.NEAREST, 2000, 1)
    assert b.direct_ok.sum() == 0 and b.relay_ok.sum() == 0


def test_empty_origin_fails_second_hop():
    p = replace(BASE, profile=IntensityProfile(lam_m=0.3)).at(20.0, 0.5)
    b = simulate(p, RelayScheme.BEST, 5000, 3, condition_origin=False)
    assert np.all(b.relay_ok[b.n_decoded == 0] == 0)
    assert np.all(np.isinf(b.nearest_dist[b.n_decoded == 0]))


@pytest.mark.parametrize("snr_db,beta", [(10.0, 0.0), (20.0, 0.5), (30.0, 0.25)])
def test_direct_estimate_matches_closed_form(snr_db, beta):
    p = BASE.at(snr_db, beta)
    e = estimate_metric(p, RelayScheme.RETRANSMIT, Metric.DIRECT_SUCCESS, 100000, 17)
    assert abs(e.value - A.p_direct(p, QuadratureSpec.matching(p))) < 3 * e.stderr


def test_nearest_semianalytic_oracle():
    p = BASE.at(30.0, 0.75)
    b = simulate(p, RelayScheme.NEAREST, 200000, 21, condition_origin=False)
    e = b.p_relay()
    assert abs(e.value - A.nearest_success_semianalytic(p, QuadratureSpec.matching(p))) < 3 * e.stderr


def test_conditioning_identity():
    p = replace(BASE, profile=IntensityProfile(lam_m=1.0)).at(20.0, 0.5)
    un = simulate(p, RelayScheme.NEAREST, 100000, 5, condition_origin=False).p_relay()
    co = simulate(p, RelayScheme.NEAREST, 100000, 6).p_relay()
    mu = p.profile.mu
    assert abs(un.value - mu * co.value) < 3 * math.hypot(un.stderr, mu * co.stderr)


def test_mean_decoded_count_matches_campbell():
    p = BASE.at(10.0, 0.25)
    b = simulate(p, RelayScheme.NEAREST, 100000, 8, condition_origin=False, first_hop_only=True)
    m = b.n_decoded.mean()
    se = b.n_decoded.std() / math.sqrt(b.trials)
    assert abs(m - A.mean_connect_count(p, QuadratureSpec.matching(p))) < 3 * se


def test_scheme_ordering():
    # common random numbers: same slot-1 outcomes for every scheme
    for snr_db, beta in [(10.0, 0.25), (20.0, 0.5)]:
        p = BASE.at(snr_db, beta)
        r = {s: simulate(p, s, 100000, 31).p_relay() for s in (RelayScheme.BEST, RelayScheme.NEAREST, RelayScheme.RANDOM)}
        tol = lambda a, b: 3 * math.hypot(r[a].stderr, r[b].stderr)  # noqa: E731
        assert r[RelayScheme.BEST].value >= r[RelayScheme.NEAREST].value - tol(RelayScheme.BEST, RelayScheme.NEAREST)
        assert r[RelayScheme.NEAREST].value >= r[RelayScheme.RANDOM].value - tol(RelayScheme.NEAREST, RelayScheme.RANDOM)


def _batch(d, r, params=BASE):
    d = np.asarray(d, np.uint8)
    r = np.asarray(r, np.uint8)
    n = len(d)
    return TrialBatch(params, RelayScheme.BEST, 0, True, d, r, np.ones(n, np.int32), np.ones(n, np.int32), np.zeros(n), np.zeros((1, 1)))


def test_gain_and_composition():
    b = _batch([1, 0, 1, 0], [1, 0, 1, 0])
    assert b.gain().value == 1.0
    assert b.p_two_hop().value == pytest.approx(1 - 0.5 * 0.5)
    assert b.joint_failure() == 0.5
    g = _batch([0, 1], [1, 1]).gain()
    assert not g.defined


def test_estimate_stderr_formula():
    e = _batch([1, 1, 0, 1], [0, 0, 0, 0]).p_direct()
    assert e.stderr == pytest.approx(math.sqrt(0.75 * 0.25 / 4))
    assert e.metric is Metric.DIRECT_SUCCESS


def test_throughput_fixed_density_is_proportional():
    sweep = SweepSpec(snr_db=(10.0, 20.0), betas=(0.0,), scheme=RelayScheme.BEST, trials=5000, seed=3)
    rows = throughput_density(BASE, sweep)
    for s, beta, e in rows:
        ps = simulate(BASE.at(s, beta), RelayScheme.BEST, 5000, 3).p_two_hop().value
        assert e.value == pytest.approx(ps * math.log2(2.5))


def test_sweep_points_scale_density():
    pts = list(SweepSpec(snr_db=(0.0, 20.0), betas=(0.5,)).points(BASE))
    assert pts[1].lattice.density == pytest.approx(0.1)
    assert pts[0].lattice.density == pytest.approx(1.0)


@given(st.floats(0.01, 100.0), st.floats(0.1, 3.0))
def test_fit_slope_exact_power_law(c, e):
    snr = [10.0 ** (k / 10) for k in range(20, 41, 5)]
    assert fit_slope([(s, c * s**-e) for s in snr]) == pytest.approx(e, rel=1e-9)


def test_fit_slope_degenerate():
    assert fit_slope([(1.0, 0.0), (10.0, 0.1), (100.0, 0.01), (1000.0, 0.001)]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_slope([(1.0, 0.0), (10.0, 0.0), (100.0, 0.0)])
    with pytest.raises(ValueError):
        fit_slope([(1.0, 0.1), (10.0, 0.01)])


def test_simulate_rejects():
    with pytest.raises(ValueError):
        simulate(BASE, RelayScheme.BEST, 0, 1)
    with pytest.raises(ValueError):
        simulate(replace(BASE, profile=IntensityProfile(lam_m=0.0)), RelayScheme.BEST, 10, 1)
