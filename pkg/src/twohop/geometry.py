"""Base-station lattice and per-cell Poisson mobiles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from twohop import rng as crng

if TYPE_CHECKING:
    from twohop.channel import SystemParams


@dataclass(frozen=True)
class LatticeSpec:
    """Square lattice ``density**-0.5 * {-K..K}^2``."""

    density: float = 1.0
    K: int = 2

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError(f"lattice density must be positive, got {self.density}")
        if int(self.K) != self.K or self.K < 0:
            raise ValueError(f"truncation index K must be an integer >= 0, got {self.K}")

    @property
    def spacing(self) -> float:
        return 1.0 / math.sqrt(self.density)

    @property
    def n_sites(self) -> int:
        return (2 * self.K + 1) ** 2

    @property
    def origin_index(self) -> int:
        return self.n_sites // 2


@dataclass(frozen=True)
class IntensityProfile:
    """Mobile density ``lam_m`` on the square ``[-L/2, L/2]^2`` around each BS."""

    lam_m: float = 5.0
    L: float = 1.0

    def __post_init__(self):
        if self.lam_m < 0:
            raise ValueError(f"mobile density must be >= 0, got {self.lam_m}")
        if not self.L > 0:
            raise ValueError(f"cell width L must be positive, got {self.L}")

    @property
    def half_width(self) -> float:
        return 0.5 * self.L

    @property
    def mean_count(self) -> float:
        return self.lam_m * self.L**2

    @property
    def mu(self) -> float:
        """Probability that a cell holds at least one mobile."""
        return -math.expm1(-self.mean_count)

    def eta(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.all(np.abs(x) <= self.half_width, axis=-1)
        return np.where(inside, self.lam_m, 0.0)


def generate_lattice(spec: LatticeSpec) -> np.ndarray:
    """Lattice sites as an ``(n, 2)`` array in row-major integer-index order."""
    idx = np.arange(-spec.K, spec.K + 1, dtype=float)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    return np.column_stack([ii.ravel(), jj.ravel()]) * spec.spacing


def sample_cell(profile: IntensityProfile, rng: np.random.Generator) -> np.ndarray:
    """One draw of a cell's mobiles, relative to its BS."""
    k = rng.poisson(profile.mean_count)
    return rng.uniform(-profile.half_width, profile.half_width, size=(k, 2))


def sample_cell_conditioned_nonempty(
    profile: IntensityProfile, rng: np.random.Generator
) -> np.ndarray:
    """Like :func:`sample_cell` but conditioned on at least one mobile."""
    n = profile.mean_count
    if n <= 0:
        raise ValueError("cannot condition an empty process on being non-empty")
    p0 = math.exp(-n)
    # inverse-CDF draw restricted to k >= 1
    k = crng.poisson_inverse(n, p0 + rng.uniform() * (1.0 - p0))
    k = max(int(k), 1)
    return rng.uniform(-profile.half_width, profile.half_width, size=(k, 2))


def _mobiles_of_cell(profile, seed, trial, cell, conditioned):
    n = profile.mean_count
    u = crng.uniform(crng.stream_key(seed, trial, cell, crng.S_COUNT), 0)
    if conditioned:
        k = crng.zero_truncated_poisson_inverse(n, u)
    else:
        k = crng.poisson_inverse(n, u)
    key = crng.stream_key(seed, trial, cell, crng.S_POS)
    pts = np.empty((k, 2))
    for j in range(k):
        pts[j, 0] = -profile.half_width + profile.L * crng.uniform(key, 2 * j)
        pts[j, 1] = -profile.half_width + profile.L * crng.uniform(key, 2 * j + 1)
    return pts


@dataclass
class NetworkRealization:
    """One sampled network.

    Mobiles are stored relative to their BS.  Fading is not stored: it is
    derived on demand from the counter-based generator, so every lookup of the
    same link and slot returns the same value.

    Node identifiers used by :meth:`fading` are ``("bs", b)``,
    ``("ms", b, j)`` (mobile ``j`` of cell ``b``) and ``("dest", c)``.
    """

    sites: np.ndarray
    mobiles: list[np.ndarray]
    destinations: np.ndarray
    seed: int
    trial: int
    origin: int
    _keys: dict = field(default_factory=dict, repr=False)

    @property
    def n_cells(self) -> int:
        return len(self.sites)

    def mobiles_abs(self, cell: int) -> np.ndarray:
        return self.sites[cell] + self.mobiles[cell]

    def position(self, node) -> np.ndarray:
        kind = node[0]
        if kind == "bs":
            return self.sites[node[1]]
        if kind == "ms":
            return self.sites[node[1]] + self.mobiles[node[1]][node[2]]
        if kind == "dest":
            return self.destinations[node[1]]
        raise ValueError(f"unknown node {node!r}")

    def _key(self, cell, stream):
        k = (cell, stream)
        if k not in self._keys:
            self._keys[k] = crng.stream_key(crng.as_seed(self.seed), self.trial, cell, stream)
        return self._keys[k]

    def fading(self, tx, rx, slot: int) -> float:
        """Power fading ``h`` of link ``tx -> rx`` in time slot 1 or 2."""
        nc = self.n_cells
        if slot == 1 and tx[0] == "bs":
            b = tx[1]
            if rx[0] == "ms":
                c, j = rx[1], rx[2]
                return crng.exponential(self._key(c, crng.S_HOP1), j * nc + b)
            if rx[0] == "dest":
                return crng.exponential(self._key(rx[1], crng.S_DEST1), b)
        if slot == 2 and rx[0] == "dest":
            c = rx[1]
            if tx[0] == "bs":
                return crng.exponential(self._key(c, crng.S_DEST2_BS), tx[1])
            if tx[0] == "ms":
                b, j = tx[1], tx[2]
                if b == c:
                    return crng.exponential(self._key(c, crng.S_SEL), j)
                return crng.exponential(self._key(c, crng.S_DEST2), j * nc + b)
        raise KeyError(f"no fading defined for {tx!r} -> {rx!r} in slot {slot}")


def realize_network(
    params: SystemParams, seed: int, trial: int = 0, condition_origin: bool = False
) -> NetworkRealization:
    """Sample trial ``trial`` of the stream ``seed``.

    With ``condition_origin`` the origin cell's count is zero-truncated, which
    is how the ``n_o > 0`` conditioning is realized.
    """
    sites = generate_lattice(params.lattice)
    origin = params.lattice.origin_index
    s = crng.as_seed(seed)
    mobiles = [
        _mobiles_of_cell(params.profile, s, trial, c, condition_origin and c == origin)
        for c in range(len(sites))
    ]
    dests = sites + np.asarray(params.offset, dtype=float)
    return NetworkRealization(
        sites=sites, mobiles=mobiles, destinations=dests, seed=int(seed), trial=int(trial), origin=origin
    )
