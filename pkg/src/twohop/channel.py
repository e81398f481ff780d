"""Path loss, SINR and the first-hop decoded sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from twohop.geometry import IntensityProfile, LatticeSpec, NetworkRealization

SINGULAR = "singular"
NONSINGULAR_SUM = "sum"
NONSINGULAR_MIN = "min"
_KINDS = {SINGULAR: 0, NONSINGULAR_SUM: 1, NONSINGULAR_MIN: 2}


@dataclass(frozen=True)
class PathLossModel:
    """``singular``: |x|^-a, ``sum``: 1/(1+|x|^a), ``min``: min(1, |x|^-a)."""

    kind: str = NONSINGULAR_SUM
    alpha: float = 4.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown path-loss kind {self.kind!r}; expected one of {sorted(_KINDS)}")
        if not self.alpha > 2:
            raise ValueError(f"path-loss exponent must exceed 2, got {self.alpha}")

    @property
    def code(self) -> int:
        return _KINDS[self.kind]

    def of_dist2(self, d2):
        """Path loss as a function of squared distance; +inf at 0 for ``singular``."""
        d2 = np.asarray(d2, dtype=float)
        with np.errstate(divide="ignore"):
            if self.alpha == 4.0:
                da = d2 * d2
            else:
                da = d2 ** (0.5 * self.alpha)
            if self.kind == NONSINGULAR_SUM:
                return 1.0 / (1.0 + da)
            inv = np.where(da > 0, 1.0 / np.where(da > 0, da, 1.0), np.inf)
            if self.kind == SINGULAR:
                return inv
            return np.minimum(1.0, inv)

    def __call__(self, r):
        """Path loss at distance(s) ``r``."""
        r = np.asarray(r, dtype=float)
        return self.of_dist2(r * r)

    def inverse(self, r):
        """1/ell(r), finite everywhere (0 at r=0 for ``singular``)."""
        r = np.asarray(r, dtype=float)
        ra = r**self.alpha
        if self.kind == NONSINGULAR_SUM:
            return 1.0 + ra
        if self.kind == SINGULAR:
            return ra
        return np.maximum(1.0, ra)


def path_loss(x, model: PathLossModel):
    """``ell(x)`` for a point or an ``(..., 2)`` array of points."""
    x = np.asarray(x, dtype=float)
    out = model.of_dist2(np.sum(x * x, axis=-1))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SystemParams:
    """All model constants.

    ``snr`` is linear; the BS (and relay) power is ``snr * noise / ell(R)``.
    With ``noise == 0`` the system is interference-only and unit power is used.
    """

    lattice: LatticeSpec = field(default_factory=LatticeSpec)
    profile: IntensityProfile = field(default_factory=IntensityProfile)
    path_loss: PathLossModel = field(default_factory=PathLossModel)
    theta: float = 1.5
    offset: tuple[float, float] = (0.5, 0.5)
    noise: float = 1.0
    snr: float = 100.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "offset", tuple(float(v) for v in self.offset))
        if len(self.offset) != 2:
            raise ValueError("destination offset must be a 2-D vector")
        if not self.theta > 1:
            raise ValueError(f"decode threshold must exceed 1, got {self.theta}")
        if self.noise < 0:
            raise ValueError(f"noise power must be >= 0, got {self.noise}")
        if not self.snr > 0:
            raise ValueError(f"SNR must be positive, got {self.snr}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    @property
    def R(self) -> float:
        return math.hypot(*self.offset)

    @property
    def ell_R(self) -> float:
        return float(self.path_loss(self.R))

    @property
    def power(self) -> float:
        if self.noise == 0:
            return 1.0
        return self.snr * self.noise / self.ell_R

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    def at(self, snr_db: float, beta: float | None = None) -> SystemParams:
        """Same system at ``snr_db`` with the BS density scaled as ``SNR**-beta``."""
        beta = self.beta if beta is None else beta
        snr = 10.0 ** (snr_db / 10.0)
        return replace(
            self,
            snr=snr,
            beta=beta,
            lattice=replace(self.lattice, density=snr ** (-beta)),
        )


def sinr(
    tx, rx, interferers: Sequence, tx_power: float, fading, noise: float, model: PathLossModel = PathLossModel()
) -> float:
    """SINR at ``rx`` of the signal from ``tx``.

    ``tx`` and ``rx`` are ``(node_id, position)`` pairs, ``interferers`` is a
    sequence of ``(node_id, position, power)`` and ``fading(a, b)`` returns the
    power fading of link ``a -> b`` for the current slot.  ``fading`` may also
    be ``None`` when node ids are ``None``; then every ``h`` is 1.
    """
    tx_id, tx_pos = tx
    rx_id, rx_pos = rx
    h = 1.0 if fading is None else fading(tx_id, rx_id)
    signal = tx_power * h * _ell(tx_pos, rx_pos, model)
    interference = 0.0
    for z_id, z_pos, p_z in interferers:
        hz = 1.0 if fading is None else fading(z_id, rx_id)
        interference += p_z * hz * _ell(z_pos, rx_pos, model)
    denom = noise + interference
    if denom == 0.0:
        return math.inf
    return signal / denom


def _ell(a, b, model):
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return float(model.of_dist2(dx * dx + dy * dy))


def connects(tx, rx, interferers, tx_power, fading, params: SystemParams) -> bool:
    """``1(tx -> rx | interferers)``: SINR strictly above the threshold."""
    return sinr(tx, rx, interferers, tx_power, fading, params.noise, params.path_loss) > params.theta


@dataclass(frozen=True)
class DecodedSet:
    """Mobiles of ``cell`` that decoded the slot-1 broadcast of their BS."""

    cell: int
    indices: np.ndarray
    points: np.ndarray

    def __len__(self):
        return len(self.indices)


def decoded_set(realization: NetworkRealization, cell: int, params: SystemParams) -> DecodedSet:
    """Slot 1: every BS transmits at the common power; keep the mobiles of
    ``cell`` whose own BS gets through."""
    p = params.power
    r = realization
    bs = [(("bs", b), r.sites[b], p) for b in range(r.n_cells)]
    tx = (("bs", cell), r.sites[cell])
    others = bs[:cell] + bs[cell + 1 :]
    keep = []
    pts = r.mobiles_abs(cell)
    for j in range(len(pts)):
        rx = (("ms", cell, j), pts[j])
        if connects(tx, rx, others, p, lambda a, b: r.fading(a, b, 1), params):
            keep.append(j)
    idx = np.asarray(keep, dtype=int)
    return DecodedSet(cell=cell, indices=idx, points=r.mobiles[cell][idx] if len(idx) else np.empty((0, 2)))
