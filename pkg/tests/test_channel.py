import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twohop.channel import PathLossModel, SystemParams, connects, decoded_set, path_loss, sinr
from twohop.geometry import LatticeSpec, realize_network

dist = st.floats(1e-3, 1e3)
alphas = st.floats(2.05, 6.0)


def test_path_loss_values():
    assert path_loss((0.5, 0.5), PathLossModel()) == pytest.approx(1 / 1.25)
    assert path_loss((2.0, 0.0), PathLossModel("singular", 3.0)) == pytest.approx(1 / 8)
    assert path_loss((0.5, 0.0), PathLossModel("min")) == 1.0
    assert math.isinf(path_loss((0.0, 0.0), PathLossModel("singular")))


@given(dist, dist, alphas)
def test_path_loss_monotone_and_ordered(r1, r2, a):
    for kind in ("singular", "sum", "min"):
        m = PathLossModel(kind, a)
        lo, hi = sorted((r1, r2))
        assert m(lo) >= m(hi)
    assert PathLossModel("min", a)(r1) >= PathLossModel("sum", a)(r1)
    m = PathLossModel("sum", a)
    assert m.inverse(r1) * m(r1) == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [dict(kind="log"), dict(alpha=2.0)])
def test_path_loss_rejects(bad):
    with pytest.raises(ValueError):
        PathLossModel(**bad)


def test_params_power_and_scaling():
    p = SystemParams(snr=100.0)
    assert p.ell_R == pytest.approx(0.8)
    assert p.power == pytest.approx(125.0)
    assert SystemParams(noise=0.0).power == 1.0
    q = p.at(30.0, 0.25)
    assert q.snr == pytest.approx(1000.0)
    assert q.lattice.density == pytest.approx(1000.0**-0.25)
    for bad in (dict(theta=1.0), dict(noise=-1.0), dict(snr=0.0), dict(beta=-0.1), dict(offset=(1, 2, 3))):
        with pytest.raises(ValueError):
            SystemParams(**bad)


def test_sinr_basic():
    tx = (None, (0.0, 0.0))
    rx = (None, (1.0, 0.0))
    m = PathLossModel("singular", 4.0)
    assert sinr(tx, rx, [], 2.0, None, 1.0, m) == pytest.approx(2.0)
    assert sinr(tx, rx, [(None, (3.0, 0.0), 16.0)], 2.0, None, 0.0, m) == pytest.approx(2.0)
    assert math.isinf(sinr(tx, rx, [], 1.0, None, 0.0, m))


def test_coincident_relay_always_connects():
    m = PathLossModel("singular", 4.0)
    params = SystemParams(path_loss=m)
    assert connects((None, (0.5, 0.5)), (None, (0.5, 0.5)), [(None, (3.0, 0.0), 1.0)], 1.0, None, params)


def test_connects_is_strict():
    params = SystemParams(theta=2.0, noise=1.0)
    m = params.path_loss
    p = 2.0 / float(m(1.0))
    assert not connects((None, (0, 0)), (None, (1, 0)), [], p, None, params)
    assert connects((None, (0, 0)), (None, (1, 0)), [], p * 1.000001, None, params)


def test_decoded_set_matches_manual_sinr():
    params = SystemParams(lattice=LatticeSpec(K=1)).at(10.0, 0.0)
    r = realize_network(params, 2, 4)
    ds = decoded_set(r, 4, params)
    p = params.power
    manual = []
    for j, x in enumerate(r.mobiles_abs(4)):
        num = p * r.fading(("bs", 4), ("ms", 4, j), 1) * float(params.path_loss(np.linalg.norm(x - r.sites[4])))
        den = params.noise + sum(
            p * r.fading(("bs", b), ("ms", 4, j), 1) * float(params.path_loss(np.linalg.norm(x - r.sites[b])))
            for b in range(9)
            if b != 4
        )
        if num / den > params.theta:
            manual.append(j)
    assert list(ds.indices) == manual
    assert len(ds) == len(manual)
