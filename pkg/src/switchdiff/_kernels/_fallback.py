"""Pure-Python (numpy) implementation of the sampling kernels.

Same stream contract as the compiled backend: sample ``i`` of master seed
``s`` reads an unbounded sequence of doubles produced by Philox4x32-10 with

    key     = splitmix64(s) split into two 32-bit words
    counter = (block_lo, block_hi, sample_lo, sample_hi)

Each counter block yields four 32-bit words, packed into two 64-bit words,
each mapped to a double in the open interval (0, 1).  Position ``p`` of the
stream lives in block ``p // 2``.

Draw layout per kernel (positions consumed in order):
  * cycle kernels: one uniform per holding time (2*n_cycles legs, plus one
    leading leg when the chain starts in the minus regime), then, for the
    terminal-state kernel, one Gaussian per leg at two uniforms each.
  * horizon kernels: holding times until the accumulated time reaches the
    horizon, then one Gaussian per path segment (exact sampler) or per
    integration step (Euler-Maruyama).

Gaussians are Box-Muller: sqrt(-2 log u1) * cos(TAU * u2).  Exponentials are
-log(u) / rate.
"""

import math

import numpy as np

BACKEND = "python"

TAU = 6.283185307179586

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_BUMP0 = np.uint64(0x9E3779B9)
_BUMP1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Samples per internal batch; bounds temporary memory, never affects values.
_CHUNK = 1 << 16


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _key_words(seed: int):
    mixed = _splitmix64(int(seed) & _MASK64)
    return np.uint64(mixed & 0xFFFFFFFF), np.uint64(mixed >> 32)


def _philox_block(k0, k1, c0, c1, c2, c3):
    """Philox4x32-10 on broadcastable uint64 arrays holding 32-bit values.

    Returns the two packed 64-bit output words.  Round arithmetic runs
    in-place on a fixed buffer pool; allocation otherwise dominates.
    """
    shape = np.broadcast_shapes(np.shape(c0), np.shape(c1), np.shape(c2),
                                np.shape(c3))
    b0 = np.empty(shape, dtype=np.uint64)
    b1 = np.empty(shape, dtype=np.uint64)
    b2 = np.empty(shape, dtype=np.uint64)
    b3 = np.empty(shape, dtype=np.uint64)
    np.copyto(b0, c0)
    np.copyto(b1, c1)
    np.copyto(b2, c2)
    np.copyto(b3, c3)
    p0 = np.empty(shape, dtype=np.uint64)
    p1 = np.empty(shape, dtype=np.uint64)
    lo0 = np.empty(shape, dtype=np.uint64)
    lo1 = np.empty(shape, dtype=np.uint64)
    thirty_two = np.uint64(32)
    for rnd in range(10):
        np.multiply(_M0, b0, out=p0)
        np.multiply(_M1, b2, out=p1)
        np.bitwise_and(p0, _MASK32, out=lo0)
        np.bitwise_and(p1, _MASK32, out=lo1)
        np.right_shift(p0, thirty_two, out=p0)   # hi0
        np.right_shift(p1, thirty_two, out=p1)   # hi1
        np.bitwise_xor(p1, b1, out=p1)
        np.bitwise_xor(p1, k0, out=p1)           # new c0
        np.bitwise_xor(p0, b3, out=p0)
        np.bitwise_xor(p0, k1, out=p0)           # new c2
        b0, b1, b2, b3, p0, p1, lo0, lo1 = p1, lo1, p0, lo0, b0, b2, b1, b3
        if rnd < 9:
            k0 = (k0 + _BUMP0) & _MASK32
            k1 = (k1 + _BUMP1) & _MASK32
    np.left_shift(b1, thirty_two, out=b1)
    np.bitwise_or(b0, b1, out=b0)
    np.left_shift(b3, thirty_two, out=b3)
    np.bitwise_or(b2, b3, out=b2)
    return b0, b2


def _to_unit(words):
    # ((w >> 12) + 0.5) * 2**-52: exact arithmetic, open interval (0, 1).
    return ((words >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def _uniforms_grid(seed, sample0, n_samples, pos0, n_pos):
    """(n_samples, n_pos) matrix of stream doubles at positions pos0.. ."""
    if n_pos == 0:
        return np.empty((n_samples, 0), dtype=np.float64)
    k0, k1 = _key_words(seed)
    samples = (int(sample0) + np.arange(n_samples, dtype=np.uint64))[:, None]
    s_lo, s_hi = samples & _MASK32, samples >> np.uint64(32)
    b_first = pos0 >> 1
    b_last = (pos0 + n_pos - 1) >> 1
    blocks = np.arange(b_first, b_last + 1, dtype=np.uint64)[None, :]
    b_lo, b_hi = blocks & _MASK32, blocks >> np.uint64(32)
    w_even, w_odd = _philox_block(k0, k1, b_lo, b_hi, s_lo, s_hi)
    out = np.empty((n_samples, 2 * (b_last - b_first + 1)), dtype=np.float64)
    out[:, 0::2] = _to_unit(w_even)
    out[:, 1::2] = _to_unit(w_odd)
    off = pos0 & 1
    return out[:, off:off + n_pos]


def _uniforms_at(seed, samples, positions):
    """Stream doubles at per-element (sample, position) pairs."""
    k0, k1 = _key_words(seed)
    samples = np.asarray(samples, dtype=np.uint64)
    positions = np.asarray(positions, dtype=np.uint64)
    blocks = positions >> np.uint64(1)
    w_even, w_odd = _philox_block(
        k0, k1, blocks & _MASK32, blocks >> np.uint64(32),
        samples & _MASK32, samples >> np.uint64(32))
    odd = (positions & np.uint64(1)).astype(bool)
    return np.where(odd, _to_unit(w_odd), _to_unit(w_even))


def uniforms(seed, sample_index, start, count):
    """1-D block of stream doubles for one sample."""
    return _uniforms_grid(seed, sample_index, 1, int(start), int(count))[0]


def _leg_rates_drifts(n_legs, lam_plus, lam_minus, start_minus, b_plus, b_minus):
    # Leg j is a plus leg when (j + start_minus) is even.
    j = np.arange(n_legs)
    plus = ((j + (1 if start_minus else 0)) % 2) == 0
    rates = np.where(plus, lam_plus, lam_minus)
    drifts = np.where(plus, b_plus, b_minus)
    return rates, drifts


def cycle_time_totals(seed, sample0, n_samples, n_cycles, lam_plus, lam_minus,
                      start_minus):
    """T_{2n} for n_samples independent skeletons of n_cycles full cycles."""
    n_legs = 2 * int(n_cycles) + (1 if start_minus else 0)
    if n_legs == 0:
        return np.zeros(n_samples, dtype=np.float64)
    rates, _ = _leg_rates_drifts(n_legs, lam_plus, lam_minus, start_minus, 0.0, 0.0)
    out = np.empty(n_samples, dtype=np.float64)
    for lo in range(0, n_samples, _CHUNK):
        hi = min(lo + _CHUNK, n_samples)
        u = _uniforms_grid(seed, int(sample0) + lo, hi - lo, 0, n_legs)
        legs = -np.log(u) / rates
        # cumsum reproduces the sequential accumulation of the compiled core
        out[lo:hi] = np.cumsum(legs, axis=1)[:, -1]
    return out


def cycle_terminal_state(seed, sample0, n_samples, n_cycles, lam_plus,
                         lam_minus, start_minus, b_plus, b_minus, x0):
    """(X at T_{2n}, T_{2n}) for constant-drift models."""
    n_legs = 2 * int(n_cycles) + (1 if start_minus else 0)
    if n_legs == 0:
        return (np.full(n_samples, x0, dtype=np.float64),
                np.zeros(n_samples, dtype=np.float64))
    rates, drifts = _leg_rates_drifts(n_legs, lam_plus, lam_minus, start_minus,
                                      b_plus, b_minus)
    xs = np.empty(n_samples, dtype=np.float64)
    ts = np.empty(n_samples, dtype=np.float64)
    for lo in range(0, n_samples, _CHUNK):
        hi = min(lo + _CHUNK, n_samples)
        m = hi - lo
        u = _uniforms_grid(seed, int(sample0) + lo, m, 0, n_legs)
        legs = -np.log(u) / rates
        ug = _uniforms_grid(seed, int(sample0) + lo, m, n_legs, 2 * n_legs)
        z = np.sqrt(-2.0 * np.log(ug[:, 0::2])) * np.cos(TAU * ug[:, 1::2])
        terms = np.empty((m, n_legs + 1), dtype=np.float64)
        terms[:, 0] = x0
        terms[:, 1:] = drifts * legs + np.sqrt(legs) * z
        xs[lo:hi] = np.cumsum(terms, axis=1)[:, -1]
        ts[lo:hi] = np.cumsum(legs, axis=1)[:, -1]
    return xs, ts


def horizon_terminal_exact(seed, sample0, n_samples, horizon, lam_plus,
                           lam_minus, start_minus, b_plus, b_minus, x0):
    """X at a fixed horizon via exact Gaussian transitions (constant drifts).

    Per block of samples, one contiguous uniform grid covers both phases of
    every row's stream (legs at positions [0, count), Gaussians right after),
    since position p of a row is independent of how far others read.  The
    Gaussian pairs are gathered from the grid at per-row offsets.
    """
    out = np.empty(n_samples, dtype=np.float64)
    mean_cycle = 1.0 / lam_plus + 1.0 / lam_minus
    expected = 2.0 * horizon / mean_cycle
    est_legs = int(expected + 5.0 * math.sqrt(expected + 1.0)) + 16
    rows = max(16, min(_CHUNK, 4_000_000 // (3 * est_legs)))
    for lo in range(0, n_samples, rows):
        hi = min(lo + rows, n_samples)
        m = hi - lo
        first = int(sample0) + lo
        n_legs = est_legs
        while True:
            grid = _uniforms_grid(seed, first, m, 0, n_legs)
            rates, drifts = _leg_rates_drifts(n_legs, lam_plus, lam_minus,
                                              start_minus, b_plus, b_minus)
            legs = -np.log(grid) / rates
            totals = np.cumsum(legs, axis=1)
            if totals[:, -1].min() >= horizon:
                break
            n_legs = int(1.5 * n_legs) + 16
        counts = (totals < horizon).sum(axis=1) + 1
        max_c = int(counts.max())
        legs = legs[:, :max_c]
        started = np.concatenate(
            [np.zeros((m, 1)), totals[:, :max_c - 1]], axis=1)
        active = np.arange(max_c)[None, :] < counts[:, None]
        seg = np.where(active, np.minimum(legs, horizon - started), 0.0)
        # extend the grid far enough for every row's Gaussian pairs
        width = max(n_legs, 3 * max_c)
        if width > n_legs:
            ext = _uniforms_grid(seed, first, m, n_legs, width - n_legs)
            grid = np.concatenate([grid, ext], axis=1)
        rows_idx = np.arange(m)[:, None]
        base = counts[:, None] + 2 * np.arange(max_c, dtype=np.int64)[None, :]
        ua = grid[rows_idx, base]
        ub = grid[rows_idx, base + 1]
        z = np.sqrt(-2.0 * np.log(ua)) * np.cos(TAU * ub)
        terms = np.empty((m, max_c + 1), dtype=np.float64)
        terms[:, 0] = x0
        # inactive legs contribute exactly 0.0, so the sequential cumsum
        # matches the compiled core's per-leg accumulation bit for bit
        terms[:, 1:] = np.where(active, drifts[:max_c] * seg
                                + np.sqrt(seg) * z, 0.0)
        out[lo:hi] = np.cumsum(terms, axis=1)[:, -1]
    return out


def horizon_terminal_em(seed, sample0, n_samples, horizon, dt, lam_plus,
                        lam_minus, start_minus, b_plus, b_minus, x0):
    """X at a fixed horizon via switch-aligned Euler-Maruyama steps.

    Constant drifts only; the Gaussian propagation is exact for them, so this
    exists to exercise and benchmark the discretization path.
    """
    out = np.empty(n_samples, dtype=np.float64)
    start = int(sample0)
    n_nominal = int(math.ceil(horizon / dt))
    nominal = np.arange(1, n_nominal + 1, dtype=np.float64) * dt
    nominal = nominal[nominal < horizon]
    for i in range(n_samples):
        sample = start + i
        # Legs until coverage.  Positions are pure reads, so scanning ahead
        # in blocks consumes nothing.
        legs = np.empty(0, dtype=np.float64)
        while legs.size == 0 or legs[-1] < horizon:
            grow = max(64, int(2.5 * horizon * max(lam_plus, lam_minus)))
            n_read = legs.size + grow
            u = uniforms(seed, sample, 0, n_read)
            rates, _ = _leg_rates_drifts(n_read, lam_plus, lam_minus,
                                         start_minus, 0.0, 0.0)
            legs = np.cumsum(-np.log(u) / rates)
        n_legs = int(np.searchsorted(legs, horizon, side="left")) + 1
        switches = legs[:n_legs]
        inner = switches[switches < horizon]
        targets = np.unique(np.concatenate([nominal, inner, [horizon]]))
        lefts = np.concatenate([[0.0], targets[:-1]])
        h = targets - lefts
        n_done = np.searchsorted(switches, lefts, side="right")
        plus_seg = ((n_done + (1 if start_minus else 0)) % 2) == 0
        b = np.where(plus_seg, b_plus, b_minus)
        ug = uniforms(seed, sample, n_legs, 2 * targets.size)
        z = np.sqrt(-2.0 * np.log(ug[0::2])) * np.cos(TAU * ug[1::2])
        terms = np.concatenate([[x0], b * h + np.sqrt(h) * z])
        out[i] = np.cumsum(terms)[-1]
    return out
