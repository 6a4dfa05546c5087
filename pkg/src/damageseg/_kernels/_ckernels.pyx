# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the _pykernels functions.

Floating point expressions mirror the numpy fallback term-for-term
(and the build disables FP contraction), so both backends return
bit-identical arrays.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor

cnp.import_array()

cdef double TAN22_5 = 0.41421356237309503
cdef double TAN67_5 = 2.414213562373095


def convolve2d(const double[:, ::1] plane, const double[:, ::1] kernel):
    cdef Py_ssize_t h = plane.shape[0], w = plane.shape[1]
    cdef Py_ssize_t kh = kernel.shape[0], kw = kernel.shape[1]
    cdef Py_ssize_t ch = kh // 2, cw = kw // 2
    out = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t r, s, i, j, rr, cc
    cdef double acc
    for r in range(h):
        for s in range(w):
            acc = 0.0
            for i in range(kh):
                rr = r - i + ch
                if rr < 0:
                    rr = 0
                elif rr >= h:
                    rr = h - 1
                for j in range(kw):
                    cc = s - j + cw
                    if cc < 0:
                        cc = 0
                    elif cc >= w:
                        cc = w - 1
                    acc = acc + kernel[i, j] * plane[rr, cc]
            o[r, s] = acc
    return out


def dilate_square(const cnp.uint8_t[:, ::1] mask, Py_ssize_t radius):
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    out = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    horiz_arr = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] horiz = horiz_arr
    cdef Py_ssize_t r, c, d, lo, hi
    if radius == 0:
        return np.asarray(mask).copy()
    for r in range(h):
        for c in range(w):
            lo = c - radius
            if lo < 0:
                lo = 0
            hi = c + radius
            if hi >= w:
                hi = w - 1
            for d in range(lo, hi + 1):
                if mask[r, d]:
                    horiz[r, c] = 1
                    break
    for r in range(h):
        for c in range(w):
            lo = r - radius
            if lo < 0:
                lo = 0
            hi = r + radius
            if hi >= h:
                hi = h - 1
            for d in range(lo, hi + 1):
                if horiz[d, c]:
                    o[r, c] = 1
                    break
    return out


def dilate_offsets(const cnp.uint8_t[:, ::1] mask, const cnp.int64_t[:, ::1] offsets):
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    cdef Py_ssize_t n = offsets.shape[0]
    out = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    cdef Py_ssize_t r, c, k, rr, cc
    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                for k in range(n):
                    rr = r + offsets[k, 0]
                    cc = c + offsets[k, 1]
                    if 0 <= rr < h and 0 <= cc < w:
                        o[rr, cc] = 1
    return out


def boundary4(const cnp.uint8_t[:, ::1] mask):
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    out = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    cdef Py_ssize_t r, c
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            if r == 0 or r == h - 1 or c == 0 or c == w - 1:
                o[r, c] = 1
            elif (
                mask[r - 1, c] == 0
                or mask[r + 1, c] == 0
                or mask[r, c - 1] == 0
                or mask[r, c + 1] == 0
            ):
                o[r, c] = 1
    return out


def confusion_binary(const cnp.uint8_t[:, ::1] gt, const cnp.uint8_t[:, ::1] pred):
    cdef Py_ssize_t h = gt.shape[0], w = gt.shape[1]
    cdef long long tp = 0, fp = 0, fn = 0
    cdef Py_ssize_t r, c
    cdef bint g, p
    for r in range(h):
        for c in range(w):
            g = gt[r, c] != 0
            p = pred[r, c] != 0
            if g and p:
                tp += 1
            elif p:
                fp += 1
            elif g:
                fn += 1
    return int(tp), int(fp), int(fn), int(h * w - tp - fp - fn)


cdef inline double _mag_at(const double[:, ::1] mag, Py_ssize_t r, Py_ssize_t c,
                           Py_ssize_t h, Py_ssize_t w) noexcept:
    if r < 0 or r >= h or c < 0 or c >= w:
        return 0.0
    return mag[r, c]


def nms(const double[:, ::1] mag, const double[:, ::1] gx, const double[:, ::1] gy):
    cdef Py_ssize_t h = mag.shape[0], w = mag.shape[1]
    out = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t r, c, dr, dc
    cdef double ax, ay, m, n1, n2
    for r in range(h):
        for c in range(w):
            ax = fabs(gx[r, c])
            ay = fabs(gy[r, c])
            if ay <= ax * TAN22_5:
                dr = 0
                dc = 1
            elif ay >= ax * TAN67_5:
                dr = 1
                dc = 0
            elif gx[r, c] * gy[r, c] > 0.0:
                dr = 1
                dc = 1
            else:
                dr = 1
                dc = -1
            m = mag[r, c]
            n1 = _mag_at(mag, r + dr, c + dc, h, w)
            n2 = _mag_at(mag, r - dr, c - dc, h, w)
            if m >= n1 and m >= n2:
                o[r, c] = m
    return out


def hysteresis(const cnp.uint8_t[:, ::1] strong, const cnp.uint8_t[:, ::1] weak):
    cdef Py_ssize_t h = strong.shape[0], w = strong.shape[1]
    out = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    stack_arr = np.empty(h * w, dtype=np.int64)
    cdef cnp.int64_t[::1] stack = stack_arr
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t r, c, rr, cc, idx
    for r in range(h):
        for c in range(w):
            if strong[r, c]:
                o[r, c] = 1
                stack[top] = r * w + c
                top += 1
    while top > 0:
        top -= 1
        idx = stack[top]
        r = idx // w
        c = idx % w
        for rr in range(r - 1, r + 2):
            if rr < 0 or rr >= h:
                continue
            for cc in range(c - 1, c + 2):
                if cc < 0 or cc >= w:
                    continue
                if o[rr, cc]:
                    continue
                if strong[rr, cc] or weak[rr, cc]:
                    o[rr, cc] = 1
                    stack[top] = rr * w + cc
                    top += 1
    return out


def zero_crossings(const double[:, ::1] resp, double thresh):
    cdef Py_ssize_t h = resp.shape[0], w = resp.shape[1]
    out = np.zeros((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    cdef Py_ssize_t r, c
    cdef double a0, a1
    for r in range(h):
        for c in range(w - 1):
            a0 = resp[r, c]
            a1 = resp[r, c + 1]
            if a0 * a1 < 0.0 and fabs(a0 - a1) > thresh:
                if fabs(a0) <= fabs(a1):
                    o[r, c] = 1
                else:
                    o[r, c + 1] = 1
    for r in range(h - 1):
        for c in range(w):
            a0 = resp[r, c]
            a1 = resp[r + 1, c]
            if a0 * a1 < 0.0 and fabs(a0 - a1) > thresh:
                if fabs(a0) <= fabs(a1):
                    o[r, c] = 1
                else:
                    o[r + 1, c] = 1
    return out


cdef inline Py_ssize_t _clampi(Py_ssize_t v, Py_ssize_t lo, Py_ssize_t hi) noexcept:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def resize_bilinear_u8(img, Py_ssize_t out_h, Py_ssize_t out_w):
    arr = np.ascontiguousarray(img)
    if arr.ndim == 2:
        return _bilinear2d(arr, out_h, out_w)
    return _bilinear3d(arr, out_h, out_w)


cdef _bilinear2d(const cnp.uint8_t[:, ::1] img, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    out = np.zeros((out_h, out_w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    cdef double scale_y = h / <double>out_h
    cdef double scale_x = w / <double>out_w
    cdef Py_ssize_t r, c, yi, xi, y0, y1, x0, x1
    cdef double sy, sx, fy, fx, top, bot, v
    for r in range(out_h):
        sy = (r + 0.5) * scale_y - 0.5
        yi = <Py_ssize_t>floor(sy)
        fy = sy - floor(sy)
        y0 = _clampi(yi, 0, h - 1)
        y1 = _clampi(yi + 1, 0, h - 1)
        for c in range(out_w):
            sx = (c + 0.5) * scale_x - 0.5
            xi = <Py_ssize_t>floor(sx)
            fx = sx - floor(sx)
            x0 = _clampi(xi, 0, w - 1)
            x1 = _clampi(xi + 1, 0, w - 1)
            top = (1.0 - fx) * <double>img[y0, x0] + fx * <double>img[y0, x1]
            bot = (1.0 - fx) * <double>img[y1, x0] + fx * <double>img[y1, x1]
            v = floor((1.0 - fy) * top + fy * bot + 0.5)
            if v < 0.0:
                v = 0.0
            elif v > 255.0:
                v = 255.0
            o[r, c] = <cnp.uint8_t>v
    return out


cdef _bilinear3d(const cnp.uint8_t[:, :, ::1] img, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], nch = img.shape[2]
    out = np.zeros((out_h, out_w, nch), dtype=np.uint8)
    cdef cnp.uint8_t[:, :, ::1] o = out
    cdef double scale_y = h / <double>out_h
    cdef double scale_x = w / <double>out_w
    cdef Py_ssize_t r, c, k, yi, xi, y0, y1, x0, x1
    cdef double sy, sx, fy, fx, top, bot, v
    for r in range(out_h):
        sy = (r + 0.5) * scale_y - 0.5
        yi = <Py_ssize_t>floor(sy)
        fy = sy - floor(sy)
        y0 = _clampi(yi, 0, h - 1)
        y1 = _clampi(yi + 1, 0, h - 1)
        for c in range(out_w):
            sx = (c + 0.5) * scale_x - 0.5
            xi = <Py_ssize_t>floor(sx)
            fx = sx - floor(sx)
            x0 = _clampi(xi, 0, w - 1)
            x1 = _clampi(xi + 1, 0, w - 1)
            for k in range(nch):
                top = (1.0 - fx) * <double>img[y0, x0, k] + fx * <double>img[y0, x1, k]
                bot = (1.0 - fx) * <double>img[y1, x0, k] + fx * <double>img[y1, x1, k]
                v = floor((1.0 - fy) * top + fy * bot + 0.5)
                if v < 0.0:
                    v = 0.0
                elif v > 255.0:
                    v = 255.0
                o[r, c, k] = <cnp.uint8_t>v
    return out


def resize_nearest_u8(const cnp.uint8_t[:, ::1] img, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    out = np.zeros((out_h, out_w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    cdef double scale_y = h / <double>out_h
    cdef double scale_x = w / <double>out_w
    cdef Py_ssize_t r, c, sy, sx
    for r in range(out_h):
        sy = _clampi(<Py_ssize_t>floor((r + 0.5) * scale_y), 0, h - 1)
        for c in range(out_w):
            sx = _clampi(<Py_ssize_t>floor((c + 0.5) * scale_x), 0, w - 1)
            o[r, c] = img[sy, sx]
    return out
