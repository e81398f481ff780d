import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twohop.channel import SystemParams
from twohop.geometry import (
    IntensityProfile,
    LatticeSpec,
    generate_lattice,
    realize_network,
    sample_cell,
    sample_cell_conditioned_nonempty,
)


@given(st.floats(1e-3, 10.0), st.integers(0, 5))
def test_lattice_shape_and_spacing(density, K):
    spec = LatticeSpec(density=density, K=K)
    pts = generate_lattice(spec)
    assert pts.shape == ((2 * K + 1) ** 2, 2)
    assert np.allclose(pts[spec.origin_index], 0.0)
    steps = np.unique(np.round(np.diff(np.unique(pts[:, 0])), 9))
    if K:
        assert np.allclose(steps, 1 / math.sqrt(density))


def test_default_lattice_is_25_cells():
    assert generate_lattice(LatticeSpec()).shape == (25, 2)


@pytest.mark.parametrize("bad", [dict(density=0.0), dict(K=-1), dict(K=1.5)])
def test_lattice_rejects(bad):
    with pytest.raises(ValueError):
        LatticeSpec(**bad)


def test_profile_constants():
    p = IntensityProfile()
    assert p.mean_count == 5.0
    assert p.mu == pytest.approx(1 - math.exp(-5))
    pts = np.array([[0.0, 0.0], [0.49, -0.49], [0.51, 0.0], [0.0, -0.6]])
    assert list(p.eta(pts)) == [5.0, 5.0, 0.0, 0.0]


def test_sample_cell_statistics():
    g = np.random.default_rng(0)
    p = IntensityProfile(lam_m=3.0, L=2.0)
    draws = [sample_cell(p, g) for _ in range(20000)]
    counts = np.array([len(d) for d in draws])
    assert abs(counts.mean() - 12.0) < 4 * math.sqrt(12.0 / 20000)
    allpts = np.concatenate(draws)
    assert np.all(np.abs(allpts) <= 1.0)
    assert abs(allpts.mean()) < 0.01


def test_conditioned_cell():
    g = np.random.default_rng(1)
    p = IntensityProfile(lam_m=0.5, L=1.0)
    counts = np.array([len(sample_cell_conditioned_nonempty(p, g)) for _ in range(20000)])
    assert counts.min() >= 1
    n = 0.5
    assert abs(counts.mean() - n / (1 - math.exp(-n))) < 0.02
    with pytest.raises(ValueError):
        sample_cell_conditioned_nonempty(IntensityProfile(lam_m=0.0), g)


def test_realization_reproducible_and_conditioned():
    params = SystemParams(profile=IntensityProfile(lam_m=0.2))
    a = realize_network(params, 5, 17)
    b = realize_network(params, 5, 17)
    assert all(np.array_equal(x, y) for x, y in zip(a.mobiles, b.mobiles))
    assert np.allclose(a.destinations - a.sites, 0.5)
    assert all(len(realize_network(params, 5, t, condition_origin=True).mobiles[12]) >= 1 for t in range(200))


def test_fading_views_are_consistent():
    r = realize_network(SystemParams(), 3, 0)
    assert r.fading(("bs", 1), ("ms", 12, 0), 1) == r.fading(("bs", 1), ("ms", 12, 0), 1)
    assert r.fading(("bs", 12), ("dest", 12), 1) != r.fading(("bs", 12), ("dest", 12), 2)
    with pytest.raises(KeyError):
        r.fading(("ms", 1, 0), ("bs", 1), 1)
