"""Counter-based random numbers.

Every random quantity in a realization is a pure function of
``(seed, trial, cell, stream, index)``.  Nothing is carried between draws, so
outcomes do not depend on evaluation order, laziness or worker count.

The mixer is the SplitMix64 finalizer applied to a keyed Weyl sequence.
"""

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SALT = np.uint64(0x5851F42D4C957F2D)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO_M53 = 1.0 / 9007199254740992.0

# stream identifiers, one per family of draws attached to a cell
S_COUNT = 0  # mobile count of the cell
S_POS = 1  # mobile positions, 2 uniforms per mobile
S_HOP1 = 2  # slot-1 fading BS b -> mobile j of this cell, index j*ncell + b
S_SEL = 3  # slot-2 fading own mobile j -> own destination, index j
S_DEST1 = 4  # slot-1 fading BS b -> own destination, index b
S_DEST2 = 5  # slot-2 fading mobile j of cell b -> own destination, index j*ncell + b
S_DEST2_BS = 6  # slot-2 fading BS b -> own destination, index b
S_PICK = 7  # uniform used by the random-relay diagnostic scheme


@nb.njit(nb.uint64(nb.uint64), cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(nb.uint64(nb.uint64, nb.int64, nb.int64, nb.int64), cache=True)
def stream_key(seed, trial, cell, stream):
    k = mix64(seed ^ _SALT)
    k = mix64(k + np.uint64(trial) * _GOLDEN)
    k = mix64(k ^ (np.uint64(cell) + _ONE) * _M1)
    return mix64(k + (np.uint64(stream) + _ONE) * _M2)


@nb.njit(nb.float64(nb.uint64, nb.int64), cache=True)
def uniform(key, index):
    """Uniform on the open interval (0, 1)."""
    x = mix64(key + (np.uint64(index) + _ONE) * _GOLDEN) >> _S11
    return (np.float64(x) + 0.5) * _TWO_M53


@nb.njit(nb.float64(nb.uint64, nb.int64), cache=True)
def exponential(key, index):
    """Unit-mean exponential, strictly positive."""
    return -np.log(uniform(key, index))


@nb.njit(nb.int64(nb.float64, nb.float64), cache=True)
def poisson_inverse(mean, u):
    if mean <= 0.0:
        return 0
    p = np.exp(-mean)
    c = p
    k = 0
    while u > c:
        k += 1
        p *= mean / k
        if p == 0.0:
            break
        c += p
    return k


@nb.njit(nb.int64(nb.float64, nb.float64), cache=True)
def zero_truncated_poisson_inverse(mean, u):
    """Inverse CDF of Poisson(mean) conditioned on being at least one."""
    p0 = np.exp(-mean)
    k = poisson_inverse(mean, p0 + u * (1.0 - p0))
    return max(k, 1)


def as_seed(seed):
    """Coerce any non-negative int below 2**64 to the kernel seed type."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.uint64(seed)
