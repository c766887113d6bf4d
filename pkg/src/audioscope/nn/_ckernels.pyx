# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled conv/pool kernels: float32 in and out, float64 accumulation."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def conv2d_forward(cnp.float32_t[:, :, ::1] x,
                   cnp.float32_t[:, :, :, ::1] w,
                   cnp.float32_t[::1] b):
    cdef Py_ssize_t c_out = w.shape[0], c_in = w.shape[1], k = w.shape[2]
    cdef Py_ssize_t h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t ho = h - k + 1, wo = wd - k + 1
    cdef Py_ssize_t o, c, i, j, y, xx
    cdef double wv
    acc_arr = np.zeros((c_out, ho, wo), dtype=np.float64)
    cdef double[:, :, ::1] acc = acc_arr
    with nogil:
        for o in range(c_out):
            for c in range(c_in):
                for i in range(k):
                    for j in range(k):
                        wv = w[o, c, i, j]
                        for y in range(ho):
                            for xx in range(wo):
                                acc[o, y, xx] += wv * x[c, y + i, xx + j]
            for y in range(ho):
                for xx in range(wo):
                    acc[o, y, xx] += b[o]
    return acc_arr.astype(np.float32)


def conv2d_backward(cnp.float32_t[:, :, ::1] x,
                    cnp.float32_t[:, :, :, ::1] w,
                    cnp.float32_t[:, :, ::1] gy):
    cdef Py_ssize_t c_out = w.shape[0], c_in = w.shape[1], k = w.shape[2]
    cdef Py_ssize_t h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t ho = gy.shape[1], wo = gy.shape[2]
    cdef Py_ssize_t o, c, i, j, y, xx
    cdef double wv, acc

    gx_arr = np.zeros((c_in, h, wd), dtype=np.float64)
    gw_arr = np.zeros((c_out, c_in, k, k), dtype=np.float64)
    gb_arr = np.zeros(c_out, dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr

    # separate reduction (gw/gb) and scatter (gx) sweeps so both vectorize
    with nogil:
        for o in range(c_out):
            acc = 0.0
            for y in range(ho):
                for xx in range(wo):
                    acc += gy[o, y, xx]
            gb[o] = acc
            for c in range(c_in):
                for i in range(k):
                    for j in range(k):
                        acc = 0.0
                        for y in range(ho):
                            for xx in range(wo):
                                acc += gy[o, y, xx] * x[c, y + i, xx + j]
                        gw[o, c, i, j] = acc
        for o in range(c_out):
            for c in range(c_in):
                for i in range(k):
                    for j in range(k):
                        wv = w[o, c, i, j]
                        for y in range(ho):
                            for xx in range(wo):
                                gx[c, y + i, xx + j] += wv * gy[o, y, xx]
    return (gx_arr.astype(np.float32), gw_arr.astype(np.float32),
            gb_arr.astype(np.float32))


def maxpool2_forward(cnp.float32_t[:, :, ::1] x):
    cdef Py_ssize_t c = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef Py_ssize_t ho = h // 2, wo = wd // 2
    cdef Py_ssize_t ci, y, xx, i, j, besti
    cdef float best, v
    out_arr = np.empty((c, ho, wo), dtype=np.float32)
    idx_arr = np.empty((c, ho, wo), dtype=np.int32)
    cdef cnp.float32_t[:, :, ::1] out = out_arr
    cdef cnp.int32_t[:, :, ::1] idx = idx_arr
    with nogil:
        for ci in range(c):
            for y in range(ho):
                for xx in range(wo):
                    best = x[ci, 2 * y, 2 * xx]
                    besti = 0
                    for i in range(2):
                        for j in range(2):
                            v = x[ci, 2 * y + i, 2 * xx + j]
                            if v > best:
                                best = v
                                besti = 2 * i + j
                    out[ci, y, xx] = best
                    idx[ci, y, xx] = <cnp.int32_t>besti
    return out_arr, idx_arr


def maxpool2_backward(cnp.int32_t[:, :, ::1] idx,
                      cnp.float32_t[:, :, ::1] gy,
                      Py_ssize_t h, Py_ssize_t w):
    cdef Py_ssize_t c = gy.shape[0], ho = gy.shape[1], wo = gy.shape[2]
    cdef Py_ssize_t ci, y, xx, p
    gx_arr = np.zeros((c, h, w), dtype=np.float32)
    cdef cnp.float32_t[:, :, ::1] gx = gx_arr
    with nogil:
        for ci in range(c):
            for y in range(ho):
                for xx in range(wo):
                    p = idx[ci, y, xx]
                    gx[ci, 2 * y + p // 2, 2 * xx + p % 2] = gy[ci, y, xx]
    return gx_arr
