# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling kernels.

Stream contract and draw layout are documented in the fallback module; both
backends implement the same Philox4x32-10 counter scheme and must agree to
floating-point noise (libm vs numpy SIMD transcendentals, at most 1 ulp per
call).
"""

from libc.math cimport cos, log, sqrt
from libc.stdint cimport uint32_t, uint64_t

import numpy as np

BACKEND = "cython"

cdef double TAU = 6.283185307179586
cdef double INV_2_52 = 1.0 / 4503599627370496.0
cdef double INF = float("inf")


cdef inline uint64_t _splitmix64(uint64_t x) nogil:
    x = x + <uint64_t>0x9E3779B97F4A7C15
    x = (x ^ (x >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    x = (x ^ (x >> 27)) * <uint64_t>0x94D049BB133111EB
    return x ^ (x >> 31)


cdef inline void _philox_words(uint32_t key0, uint32_t key1, uint64_t block,
                               uint32_t s_lo, uint32_t s_hi,
                               uint64_t* w0, uint64_t* w1) nogil:
    cdef uint32_t c0 = <uint32_t>(block & <uint64_t>0xFFFFFFFF)
    cdef uint32_t c1 = <uint32_t>(block >> 32)
    cdef uint32_t c2 = s_lo
    cdef uint32_t c3 = s_hi
    cdef uint32_t k0 = key0, k1 = key1
    cdef uint64_t p0, p1
    cdef uint32_t hi0, lo0, hi1, lo1
    cdef int r
    for r in range(10):
        p0 = (<uint64_t>0xD2511F53) * <uint64_t>c0
        p1 = (<uint64_t>0xCD9E8D57) * <uint64_t>c2
        hi0 = <uint32_t>(p0 >> 32)
        lo0 = <uint32_t>(p0 & <uint64_t>0xFFFFFFFF)
        hi1 = <uint32_t>(p1 >> 32)
        lo1 = <uint32_t>(p1 & <uint64_t>0xFFFFFFFF)
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        if r < 9:
            k0 = k0 + <uint32_t>0x9E3779B9
            k1 = k1 + <uint32_t>0xBB67AE85
    w0[0] = (<uint64_t>c0) | ((<uint64_t>c1) << 32)
    w1[0] = (<uint64_t>c2) | ((<uint64_t>c3) << 32)


cdef inline double _unit(uint64_t w) nogil:
    return (<double>(w >> 12) + 0.5) * INV_2_52


cdef struct Stream:
    uint32_t k0, k1, s_lo, s_hi
    uint64_t block
    uint64_t pos
    int have
    double pending


cdef inline void _stream_init(Stream* st, uint32_t k0, uint32_t k1,
                              uint64_t sample, uint64_t pos) nogil:
    st.k0 = k0
    st.k1 = k1
    st.s_lo = <uint32_t>(sample & <uint64_t>0xFFFFFFFF)
    st.s_hi = <uint32_t>(sample >> 32)
    st.block = pos >> 1
    st.pos = pos
    st.have = 0
    st.pending = 0.0


cdef inline double _stream_next(Stream* st) nogil:
    cdef uint64_t w0, w1
    cdef double out
    if st.have:
        st.have = 0
        st.pos += 1
        return st.pending
    _philox_words(st.k0, st.k1, st.block, st.s_lo, st.s_hi, &w0, &w1)
    st.block += 1
    if st.pos & 1:
        st.pos += 1
        return _unit(w1)
    out = _unit(w0)
    st.pending = _unit(w1)
    st.have = 1
    st.pos += 1
    return out


cdef inline double _stream_normal(Stream* st) nogil:
    cdef double ua = _stream_next(st)
    cdef double ub = _stream_next(st)
    return sqrt(-2.0 * log(ua)) * cos(TAU * ub)


cdef inline uint32_t _key0(uint64_t seed) nogil:
    return <uint32_t>(_splitmix64(seed) & <uint64_t>0xFFFFFFFF)


cdef inline uint32_t _key1(uint64_t seed) nogil:
    return <uint32_t>(_splitmix64(seed) >> 32)


def uniforms(seed, sample_index, start, count):
    """1-D block of stream doubles for one sample."""
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t sample = <uint64_t>(int(sample_index) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t pos = <uint64_t>int(start)
    cdef Py_ssize_t n = int(count)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] mv = out
    cdef Stream st
    cdef Py_ssize_t i
    with nogil:
        _stream_init(&st, _key0(sd), _key1(sd), sample, pos)
        for i in range(n):
            mv[i] = _stream_next(&st)
    return out


def cycle_time_totals(seed, sample0, n_samples, n_cycles, double lam_plus,
                      double lam_minus, bint start_minus):
    """T_{2n} for n_samples independent skeletons of n_cycles full cycles."""
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t first = <uint64_t>(int(sample0) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = int(n_samples)
    cdef Py_ssize_t n_legs = 2 * int(n_cycles) + (1 if start_minus else 0)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] mv = out
    cdef uint32_t k0 = _key0(sd), k1 = _key1(sd)
    cdef Stream st
    cdef Py_ssize_t i, j
    cdef double t, rate
    cdef bint plus
    with nogil:
        for i in range(n):
            _stream_init(&st, k0, k1, first + <uint64_t>i, 0)
            t = 0.0
            plus = not start_minus
            for j in range(n_legs):
                rate = lam_plus if plus else lam_minus
                t = t + (-log(_stream_next(&st)) / rate)
                plus = not plus
            mv[i] = t
    return out


def cycle_terminal_state(seed, sample0, n_samples, n_cycles, double lam_plus,
                         double lam_minus, bint start_minus, double b_plus,
                         double b_minus, double x0):
    """(X at T_{2n}, T_{2n}) for constant-drift models."""
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t first = <uint64_t>(int(sample0) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = int(n_samples)
    cdef Py_ssize_t n_legs = 2 * int(n_cycles) + (1 if start_minus else 0)
    xs = np.empty(n, dtype=np.float64)
    ts = np.empty(n, dtype=np.float64)
    scratch = np.empty(n_legs, dtype=np.float64)
    cdef double[::1] xv = xs
    cdef double[::1] tv = ts
    cdef double[::1] legs = scratch
    cdef uint32_t k0 = _key0(sd), k1 = _key1(sd)
    cdef Stream st
    cdef Py_ssize_t i, j
    cdef double t, x, d, rate, b
    cdef bint plus
    with nogil:
        for i in range(n):
            _stream_init(&st, k0, k1, first + <uint64_t>i, 0)
            t = 0.0
            plus = not start_minus
            for j in range(n_legs):
                rate = lam_plus if plus else lam_minus
                d = -log(_stream_next(&st)) / rate
                legs[j] = d
                t = t + d
                plus = not plus
            x = x0
            plus = not start_minus
            for j in range(n_legs):
                b = b_plus if plus else b_minus
                d = legs[j]
                x = x + (b * d + sqrt(d) * _stream_normal(&st))
                plus = not plus
            xv[i] = x
            tv[i] = t
    return xs, ts


def horizon_terminal_exact(seed, sample0, n_samples, double horizon,
                           double lam_plus, double lam_minus,
                           bint start_minus, double b_plus, double b_minus,
                           double x0):
    """X at a fixed horizon via exact Gaussian transitions (constant drifts)."""
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t first = <uint64_t>(int(sample0) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = int(n_samples)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] mv = out
    cdef uint32_t k0 = _key0(sd), k1 = _key1(sd)
    cdef Stream legs_st, norm_st
    cdef Py_ssize_t i
    cdef uint64_t n_legs, j
    cdef double t, x, d, seg, rate, b
    cdef bint plus
    with nogil:
        for i in range(n):
            # pass 1: count holding times needed to cover the horizon
            _stream_init(&legs_st, k0, k1, first + <uint64_t>i, 0)
            t = 0.0
            n_legs = 0
            plus = not start_minus
            while t < horizon:
                rate = lam_plus if plus else lam_minus
                t = t + (-log(_stream_next(&legs_st)) / rate)
                n_legs += 1
                plus = not plus
            # pass 2: replay the legs, integrate with truncation at horizon
            _stream_init(&legs_st, k0, k1, first + <uint64_t>i, 0)
            _stream_init(&norm_st, k0, k1, first + <uint64_t>i, n_legs)
            t = 0.0
            x = x0
            plus = not start_minus
            for j in range(n_legs):
                rate = lam_plus if plus else lam_minus
                b = b_plus if plus else b_minus
                d = -log(_stream_next(&legs_st)) / rate
                seg = d
                if horizon - t < seg:
                    seg = horizon - t
                x = x + (b * seg + sqrt(seg) * _stream_normal(&norm_st))
                t = t + seg
                plus = not plus
            mv[i] = x
    return out


def horizon_terminal_em(seed, sample0, n_samples, double horizon, double dt,
                        double lam_plus, double lam_minus, bint start_minus,
                        double b_plus, double b_minus, double x0):
    """X at a fixed horizon via switch-aligned Euler-Maruyama steps."""
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t first = <uint64_t>(int(sample0) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = int(n_samples)
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] mv = out
    cdef uint32_t k0 = _key0(sd), k1 = _key1(sd)
    cdef Stream legs_st, norm_st
    cdef Py_ssize_t i
    cdef uint64_t n_legs, sw_idx, k_next
    cdef double t, x, h, rate, b, next_sw, tn, target
    cdef bint plus
    with nogil:
        for i in range(n):
            _stream_init(&legs_st, k0, k1, first + <uint64_t>i, 0)
            t = 0.0
            n_legs = 0
            plus = not start_minus
            while t < horizon:
                rate = lam_plus if plus else lam_minus
                t = t + (-log(_stream_next(&legs_st)) / rate)
                n_legs += 1
                plus = not plus
            _stream_init(&legs_st, k0, k1, first + <uint64_t>i, 0)
            _stream_init(&norm_st, k0, k1, first + <uint64_t>i, n_legs)
            plus = not start_minus
            next_sw = -log(_stream_next(&legs_st)) / (lam_plus if plus else lam_minus)
            sw_idx = 0
            k_next = 1
            t = 0.0
            x = x0
            while t < horizon:
                target = horizon
                tn = (<double>k_next) * dt
                if tn < target:
                    target = tn
                if sw_idx < n_legs and next_sw < target:
                    target = next_sw
                h = target - t
                b = b_plus if plus else b_minus
                x = x + (b * h + sqrt(h) * _stream_normal(&norm_st))
                t = target
                if target == tn:
                    k_next += 1
                if sw_idx < n_legs and target == next_sw:
                    sw_idx += 1
                    plus = not plus
                    if sw_idx < n_legs:
                        rate = lam_plus if plus else lam_minus
                        next_sw = next_sw + (-log(_stream_next(&legs_st)) / rate)
                    else:
                        next_sw = INF
            mv[i] = x
    return out
