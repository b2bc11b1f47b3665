# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the propagation hot loop.

Drop-in replacement for ``boundmon._kernels_py`` (see that module for the
semantics, including generator column order and zero-column dropping).
Generators are held transposed internally — one generator per *row* — so the
per-step column appends are contiguous writes.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


cdef void _hull(const double[::1] c, const double[:, ::1] GT, int m,
                double[::1] lo, double[::1] hi) noexcept nogil:
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t i, g
    cdef double s, v
    for i in range(n):
        s = 0.0
        for g in range(m):
            v = GT[g, i]
            s += v if v >= 0.0 else -v
        lo[i] = c[i] - s
        hi[i] = c[i] + s


cdef int _step(const double[:, ::1] C, const double[:, ::1] R,
               const double[::1] c_in, const double[:, ::1] GT_in, int m_in,
               double[::1] c_out, double[:, ::1] GT_out,
               double[::1] mag, double[::1] d) noexcept nogil:
    """One propagation step; returns the new generator count."""
    cdef Py_ssize_t n = c_in.shape[0]
    cdef Py_ssize_t i, j, g
    cdef int m_out = 0
    cdef double s, v
    cdef bint nonzero
    for i in range(n):
        v = c_in[i]
        mag[i] = v if v >= 0.0 else -v
    for g in range(m_in):
        for i in range(n):
            v = GT_in[g, i]
            mag[i] += v if v >= 0.0 else -v
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += R[i, j] * mag[j]
        d[i] = s
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += C[i, j] * c_in[j]
        c_out[i] = s
    for g in range(m_in):
        nonzero = False
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += C[i, j] * GT_in[g, j]
            GT_out[m_out, i] = s
            if s != 0.0:
                nonzero = True
        if nonzero:
            m_out += 1
    for i in range(n):
        if d[i] > 0.0:
            for j in range(n):
                GT_out[m_out, j] = 0.0
            GT_out[m_out, i] = d[i]
            m_out += 1
    return m_out


cdef int _reduce_box_inplace(double[:, ::1] GT, int m_in,
                             double[::1] spread) noexcept nogil:
    """Replace the generators by their interval hull's axis generators."""
    cdef Py_ssize_t n = GT.shape[1]
    cdef Py_ssize_t i, j, g
    cdef int m_out = 0
    cdef double s, v
    for i in range(n):
        s = 0.0
        for g in range(m_in):
            v = GT[g, i]
            s += v if v >= 0.0 else -v
        spread[i] = s
    for i in range(n):
        if spread[i] > 0.0:
            for j in range(n):
                GT[m_out, j] = 0.0
            GT[m_out, i] = spread[i]
            m_out += 1
    return m_out


cdef bint _candidate(const double[::1] lo, const double[::1] hi,
                     const double[:, ::1] reg_lo, const double[:, ::1] reg_hi,
                     double eps) noexcept nogil:
    cdef Py_ssize_t k = reg_lo.shape[0]
    cdef Py_ssize_t n = lo.shape[0]
    cdef Py_ssize_t r, i
    cdef bint ok
    for r in range(k):
        ok = True
        for i in range(n):
            if reg_lo[r, i] > hi[i] + eps or lo[i] > reg_hi[r, i] + eps:
                ok = False
                break
        if ok:
            return True
    return False


def hull_bounds(c, G):
    """Interval hull of a zonotope: ``(lower, upper)`` arrays."""
    cdef cnp.ndarray[double, ndim=1] c_arr = np.ascontiguousarray(c, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] GT = np.ascontiguousarray(
        np.asarray(G, dtype=np.float64).T
    )
    cdef Py_ssize_t n = c_arr.shape[0]
    lo = np.empty(n)
    hi = np.empty(n)
    cdef double[::1] lo_v = lo
    cdef double[::1] hi_v = hi
    _hull(c_arr, GT, <int> GT.shape[0], lo_v, hi_v)
    return lo, hi


def reach_step_arrays(C, R, c, G):
    """One sound propagation step; see the reference backend for the contract."""
    cdef cnp.ndarray[double, ndim=2] C_arr = np.ascontiguousarray(C, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] R_arr = np.ascontiguousarray(R, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] c_arr = np.ascontiguousarray(c, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] GT_in = np.ascontiguousarray(
        np.asarray(G, dtype=np.float64).T
    )
    cdef Py_ssize_t n = c_arr.shape[0]
    cdef int m_in = <int> GT_in.shape[0]
    GT_out = np.empty((m_in + n, n))
    c_out = np.empty(n)
    mag = np.empty(n)
    d = np.empty(n)
    cdef double[:, ::1] GT_out_v = GT_out
    cdef double[::1] c_out_v = c_out
    cdef double[::1] mag_v = mag
    cdef double[::1] d_v = d
    cdef int m_out = _step(C_arr, R_arr, c_arr, GT_in, m_in, c_out_v, GT_out_v, mag_v, d_v)
    return c_out, np.ascontiguousarray(GT_out[:m_out].T)


def propagate_run(C, R, c, G, max_steps, reg_lo, reg_hi, eps, reduce_at):
    """Propagate up to ``max_steps`` steps, stopping at the first candidate step.

    Same contract as the reference backend: returns
    ``(steps_done, stopped, c, G, lo_hist, hi_hist)``.
    """
    cdef cnp.ndarray[double, ndim=2] C_arr = np.ascontiguousarray(C, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] R_arr = np.ascontiguousarray(R, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] c0 = np.ascontiguousarray(c, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] GT0 = np.ascontiguousarray(
        np.asarray(G, dtype=np.float64).T
    )
    cdef Py_ssize_t n = c0.shape[0]
    cdef int m0 = <int> GT0.shape[0]
    cdef int n_steps = int(max_steps)
    cdef int reduce_threshold = int(reduce_at)
    cdef double tol = float(eps)
    cdef cnp.ndarray[double, ndim=2] rlo = np.ascontiguousarray(reg_lo, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] rhi = np.ascontiguousarray(reg_hi, dtype=np.float64)
    cdef bint have_regions = rlo.shape[0] > 0

    if n_steps <= 0:
        empty = np.empty((0, n))
        return 0, False, np.asarray(c0), np.ascontiguousarray(GT0.T), empty, empty.copy()

    cdef Py_ssize_t cap
    if reduce_threshold > 0:
        cap = max(m0, reduce_threshold) + n + 1
    else:
        cap = m0 + n * <Py_ssize_t> n_steps + 1

    buf_a = np.zeros((cap, n))
    buf_b = np.zeros((cap, n))
    c_a = c0.copy()
    c_b = np.empty(n)
    buf_a[:m0] = GT0
    lo_hist = np.empty((n_steps, n))
    hi_hist = np.empty((n_steps, n))
    mag = np.empty(n)
    d = np.empty(n)

    # Bind memoryviews while the GIL is held; only these are touched in the loop.
    cdef const double[:, ::1] C_v = C_arr
    cdef const double[:, ::1] R_v = R_arr
    cdef const double[:, ::1] rlo_v = rlo
    cdef const double[:, ::1] rhi_v = rhi
    cdef double[:, ::1] GT_a = buf_a
    cdef double[:, ::1] GT_b = buf_b
    cdef double[::1] ca_v = c_a
    cdef double[::1] cb_v = c_b
    cdef double[:, ::1] lo_h = lo_hist
    cdef double[:, ::1] hi_h = hi_hist
    cdef double[::1] mag_v = mag
    cdef double[::1] d_v = d

    cdef int m = m0
    cdef int steps = 0
    cdef bint stopped = False
    cdef bint current_is_a = True
    with nogil:
        while steps < n_steps:
            if current_is_a:
                m = _step(C_v, R_v, ca_v, GT_a, m, cb_v, GT_b, mag_v, d_v)
            else:
                m = _step(C_v, R_v, cb_v, GT_b, m, ca_v, GT_a, mag_v, d_v)
            current_is_a = not current_is_a
            if reduce_threshold > 0 and m > reduce_threshold:
                if current_is_a:
                    m = _reduce_box_inplace(GT_a, m, mag_v)
                else:
                    m = _reduce_box_inplace(GT_b, m, mag_v)
            if current_is_a:
                _hull(ca_v, GT_a, m, lo_h[steps], hi_h[steps])
            else:
                _hull(cb_v, GT_b, m, lo_h[steps], hi_h[steps])
            steps += 1
            if have_regions and _candidate(lo_h[steps - 1], hi_h[steps - 1], rlo_v, rhi_v, tol):
                stopped = True
                break

    c_final = c_a if current_is_a else c_b
    GT_final = buf_a if current_is_a else buf_b
    return (
        steps,
        bool(stopped),
        c_final.copy(),
        np.ascontiguousarray(GT_final[:m].T),
        lo_hist[:steps],
        hi_hist[:steps],
    )
