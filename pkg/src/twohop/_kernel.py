"""Compiled trial loop.

Mirrors the reference path built from :mod:`twohop.geometry` and
:mod:`twohop.channel` draw for draw; the two are checked against each other
trial by trial in the test suite.

Non-origin cells only need their selected relay, so their slot-1 decodes are
evaluated lazily in selection order and stop at the first success.  Because
every fading value is a pure function of its counter, this gives exactly the
selection a full evaluation would.
"""

import numba as nb
import numpy as np

from twohop.rng import (
    S_COUNT,
    S_DEST1,
    S_DEST2,
    S_DEST2_BS,
    S_HOP1,
    S_PICK,
    S_POS,
    S_SEL,
    exponential,
    poisson_inverse,
    stream_key,
    uniform,
    zero_truncated_poisson_inverse,
)

RETRANSMIT = 0
NEAREST = 1
BEST = 2
RANDOM = 3


@nb.njit(cache=True, inline="always")
def _pl(d2, kind, alpha):
    if alpha == 4.0:
        da = d2 * d2
    else:
        da = d2 ** (0.5 * alpha)
    if kind == 1:
        return 1.0 / (1.0 + da)
    if da > 0.0:
        inv = 1.0 / da
    else:
        inv = np.inf
    if kind == 0:
        return inv
    return min(1.0, inv)


@nb.njit(cache=True)
def _decodes(c, x, y, sites, key_hop1, j, power, noise, theta, kind, alpha):
    """Slot-1 decode of mobile ``j`` of cell ``c`` located at ``(x, y)``."""
    nc = sites.shape[0]
    dx = sites[c, 0] - x
    dy = sites[c, 1] - y
    signal = power * exponential(key_hop1, j * nc + c) * _pl(dx * dx + dy * dy, kind, alpha)
    interference = 0.0
    for b in range(nc):
        if b == c:
            continue
        dx = sites[b, 0] - x
        dy = sites[b, 1] - y
        interference += power * exponential(key_hop1, j * nc + b) * _pl(dx * dx + dy * dy, kind, alpha)
    denom = noise + interference
    if denom == 0.0:
        return True
    return signal / denom > theta


@nb.njit(cache=True)
def run_trials(
    sites,
    origin,
    offset,
    half,
    L,
    mean_count,
    theta,
    noise,
    power,
    kind,
    alpha,
    scheme,
    condition_origin,
    direct_only,
    first_hop_only,
    seed,
    start,
    n,
    hist,
    direct_ok,
    relay_ok,
    n_origin,
    n_decoded,
    nearest_dist,
):
    nc = sites.shape[0]
    nbins = hist.shape[0]
    ox = sites[origin, 0] + offset[0]
    oy = sites[origin, 1] + offset[1]
    counts = np.zeros(nc, np.int64)
    first = np.zeros(nc, np.int64)
    cap = 64 * nc
    px = np.empty(cap)
    py = np.empty(cap)
    score = np.empty(cap)
    state = np.zeros(cap, np.int8)  # slot-1 decode: 0 untested, 1 decoded, 2 failed
    sel = np.full(nc, -1, np.int64)

    for t in range(n):
        trial = start + t

        # slot 1, BS o -> r(o)
        kd = stream_key(seed, trial, origin, S_DEST1)
        dx = sites[origin, 0] - ox
        dy = sites[origin, 1] - oy
        signal = power * exponential(kd, origin) * _pl(dx * dx + dy * dy, kind, alpha)
        interference = 0.0
        for b in range(nc):
            if b == origin:
                continue
            dx = sites[b, 0] - ox
            dy = sites[b, 1] - oy
            interference += power * exponential(kd, b) * _pl(dx * dx + dy * dy, kind, alpha)
        denom = noise + interference
        direct_ok[t] = 1 if (denom == 0.0 or signal / denom > theta) else 0
        if direct_only:
            continue

        # mobiles
        total = 0
        for c in range(nc):
            u = uniform(stream_key(seed, trial, c, S_COUNT), 0)
            if condition_origin and c == origin:
                k = zero_truncated_poisson_inverse(mean_count, u)
            else:
                k = poisson_inverse(mean_count, u)
            counts[c] = k
            first[c] = total
            total += k
        if total > cap:
            cap = 2 * total
            px = np.empty(cap)
            py = np.empty(cap)
            score = np.empty(cap)
            state = np.zeros(cap, np.int8)
        for c in range(nc):
            kp = stream_key(seed, trial, c, S_POS)
            for j in range(counts[c]):
                i = first[c] + j
                px[i] = sites[c, 0] + (-half + L * uniform(kp, 2 * j))
                py[i] = sites[c, 1] + (-half + L * uniform(kp, 2 * j + 1))
                state[i] = 0

        # origin cell: full slot-1 evaluation
        kh = stream_key(seed, trial, origin, S_HOP1)
        m = 0
        best_d = np.inf
        for j in range(counts[origin]):
            i = first[origin] + j
            if _decodes(origin, px[i], py[i], sites, kh, j, power, noise, theta, kind, alpha):
                state[i] = 1
                m += 1
                dx = px[i] - ox
                dy = py[i] - oy
                d = np.sqrt(dx * dx + dy * dy)
                if d < best_d:
                    best_d = d
                bx = int((px[i] - sites[origin, 0] + half) / L * nbins)
                by = int((py[i] - sites[origin, 1] + half) / L * nbins)
                bx = min(max(bx, 0), nbins - 1)
                by = min(max(by, 0), nbins - 1)
                hist[bx, by] += 1
            else:
                state[i] = 2
        n_origin[t] = counts[origin]
        n_decoded[t] = m
        nearest_dist[t] = best_d
        if first_hop_only:
            continue

        # slot 2
        if scheme == RETRANSMIT:
            kr = stream_key(seed, trial, origin, S_DEST2_BS)
            dx = sites[origin, 0] - ox
            dy = sites[origin, 1] - oy
            signal = power * exponential(kr, origin) * _pl(dx * dx + dy * dy, kind, alpha)
            interference = 0.0
            for b in range(nc):
                if b == origin:
                    continue
                dx = sites[b, 0] - ox
                dy = sites[b, 1] - oy
                interference += power * exponential(kr, b) * _pl(dx * dx + dy * dy, kind, alpha)
            denom = noise + interference
            relay_ok[t] = 1 if (denom == 0.0 or signal / denom > theta) else 0
            continue

        for c in range(nc):
            sel[c] = -1
            k = counts[c]
            if k == 0:
                continue
            rxc = sites[c, 0] + offset[0]
            ryc = sites[c, 1] + offset[1]
            ks = stream_key(seed, trial, c, S_SEL)
            kh = stream_key(seed, trial, c, S_HOP1)
            f = first[c]
            if scheme == RANDOM:
                md = 0
                for j in range(k):
                    if c != origin:
                        ok = _decodes(c, px[f + j], py[f + j], sites, kh, j, power, noise, theta, kind, alpha)
                        state[f + j] = 1 if ok else 2
                    if state[f + j] == 1:
                        md += 1
                if md > 0:
                    pick = int(uniform(stream_key(seed, trial, c, S_PICK), 0) * md)
                    pick = min(pick, md - 1)
                    for j in range(k):
                        if state[f + j] == 1:
                            if pick == 0:
                                sel[c] = j
                                break
                            pick -= 1
                continue
            for j in range(k):
                dx = px[f + j] - rxc
                dy = py[f + j] - ryc
                if scheme == NEAREST:
                    score[f + j] = -(dx * dx + dy * dy)
                else:
                    score[f + j] = exponential(ks, j) * _pl(dx * dx + dy * dy, kind, alpha)
            for _ in range(k):
                # best remaining candidate; strict comparison keeps the lowest index on ties
                jb = -1
                for j in range(k):
                    if state[f + j] == 2:
                        continue
                    if jb < 0 or score[f + j] > score[f + jb]:
                        jb = j
                if jb < 0:
                    break
                if state[f + jb] == 0:
                    ok = _decodes(c, px[f + jb], py[f + jb], sites, kh, jb, power, noise, theta, kind, alpha)
                    state[f + jb] = 1 if ok else 2
                if state[f + jb] == 1:
                    sel[c] = jb
                    break

        jo = sel[origin]
        if jo < 0:
            relay_ok[t] = 0
            continue
        io = first[origin] + jo
        dx = px[io] - ox
        dy = py[io] - oy
        signal = power * exponential(stream_key(seed, trial, origin, S_SEL), jo) * _pl(dx * dx + dy * dy, kind, alpha)
        k2 = stream_key(seed, trial, origin, S_DEST2)
        interference = 0.0
        for b in range(nc):
            if b == origin or sel[b] < 0:
                continue
            ib = first[b] + sel[b]
            dx = px[ib] - ox
            dy = py[ib] - oy
            interference += power * exponential(k2, sel[b] * nc + b) * _pl(dx * dx + dy * dy, kind, alpha)
        denom = noise + interference
        relay_ok[t] = 1 if (denom == 0.0 or signal / denom > theta) else 0
