"""Numpy implementations of the hot kernels.

This is the fallback backend used when the compiled extension is not
available. Both backends must produce bit-identical outputs: floating
point expressions here are written tap-by-tap / term-by-term in the
same order the C loops evaluate them, so tests may compare the two
with exact equality.
"""

import numpy as np

TAN22_5 = 0.41421356237309503
TAN67_5 = 2.414213562373095


def convolve2d(plane, kernel):
    """True 2-D convolution with replicate borders.

    out[r, s] = sum_{i,j} kernel[i, j] * plane[r - i + ch, s - j + cw]
    with out-of-range plane samples replaced by the nearest edge sample.
    Accumulates over kernel taps in ascending (i, j) order.
    """
    kh, kw = kernel.shape
    ch, cw = kh // 2, kw // 2
    padded = np.pad(plane, ((ch, ch), (cw, cw)), mode="edge")
    h, w = plane.shape
    out = np.zeros((h, w), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            r0 = kh - 1 - i
            c0 = kw - 1 - j
            out += kernel[i, j] * padded[r0 : r0 + h, c0 : c0 + w]
    return out


def dilate_square(mask, radius):
    """Binary dilation with a (2*radius+1) square structuring element."""
    if radius == 0:
        return mask.copy()
    # separable: horizontal max run, then vertical
    h, w = mask.shape
    pad = np.pad(mask, ((0, 0), (radius, radius)), mode="constant")
    horiz = np.zeros((h, w), dtype=np.uint8)
    for d in range(2 * radius + 1):
        np.maximum(horiz, pad[:, d : d + w], out=horiz)
    pad = np.pad(horiz, ((radius, radius), (0, 0)), mode="constant")
    out = np.zeros((h, w), dtype=np.uint8)
    for d in range(2 * radius + 1):
        np.maximum(out, pad[d : d + h, :], out=out)
    return out


def dilate_offsets(mask, offsets):
    """Binary dilation with an explicit offset list (rows of (dr, dc))."""
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for dr, dc in offsets:
        src_r0 = max(0, -dr)
        src_r1 = min(h, h - dr)
        src_c0 = max(0, -dc)
        src_c1 = min(w, w - dc)
        if src_r0 >= src_r1 or src_c0 >= src_c1:
            continue
        dst = out[src_r0 + dr : src_r1 + dr, src_c0 + dc : src_c1 + dc]
        np.maximum(dst, mask[src_r0:src_r1, src_c0:src_c1], out=dst)
    return out


def boundary4(mask):
    """Boundary pixels of a binary region.

    A set pixel is boundary if any 4-neighbor is unset or the pixel lies
    on the image border.
    """
    h, w = mask.shape
    out = np.zeros((h, w), dtype=np.uint8)
    if h == 0 or w == 0:
        return out
    inner = mask[1 : h - 1, 1 : w - 1]
    if inner.size:
        neighbor_unset = (
            (mask[0 : h - 2, 1 : w - 1] == 0)
            | (mask[2:h, 1 : w - 1] == 0)
            | (mask[1 : h - 1, 0 : w - 2] == 0)
            | (mask[1 : h - 1, 2:w] == 0)
        )
        out[1 : h - 1, 1 : w - 1] = (inner != 0) & neighbor_unset
    out[0, :] = mask[0, :] != 0
    out[h - 1, :] = mask[h - 1, :] != 0
    out[:, 0] = mask[:, 0] != 0
    out[:, w - 1] = mask[:, w - 1] != 0
    return out


def confusion_binary(gt, pred):
    """Pixel tallies (tp, fp, fn, tn) with "set" as the positive class."""
    g = gt != 0
    p = pred != 0
    tp = int(np.count_nonzero(g & p))
    fp = int(np.count_nonzero(~g & p))
    fn = int(np.count_nonzero(g & ~p))
    tn = gt.size - tp - fp - fn
    return tp, fp, fn, tn


def _shifted(mag, dr, dc):
    """mag sampled at (r+dr, c+dc) with out-of-range values set to 0."""
    h, w = mag.shape
    out = np.zeros((h, w), dtype=np.float64)
    src_r0 = max(0, dr)
    src_r1 = min(h, h + dr)
    src_c0 = max(0, dc)
    src_c1 = min(w, w + dc)
    if src_r0 >= src_r1 or src_c0 >= src_c1:
        return out
    out[src_r0 - dr : src_r1 - dr, src_c0 - dc : src_c1 - dc] = mag[
        src_r0:src_r1, src_c0:src_c1
    ]
    return out


def nms(mag, gx, gy):
    """Non-maximum suppression with direction quantized to 4 bins."""
    ax = np.abs(gx)
    ay = np.abs(gy)
    bin0 = ay <= ax * TAN22_5
    bin90 = ~bin0 & (ay >= ax * TAN67_5)
    diag = ~bin0 & ~bin90
    diag_main = diag & (gx * gy > 0.0)
    diag_anti = diag & ~(gx * gy > 0.0)

    n1 = np.zeros_like(mag)
    n2 = np.zeros_like(mag)
    for sel, (dr, dc) in (
        (bin0, (0, 1)),
        (bin90, (1, 0)),
        (diag_main, (1, 1)),
        (diag_anti, (1, -1)),
    ):
        fwd = _shifted(mag, dr, dc)
        bwd = _shifted(mag, -dr, -dc)
        n1[sel] = fwd[sel]
        n2[sel] = bwd[sel]
    keep = (mag >= n1) & (mag >= n2)
    out = np.where(keep, mag, 0.0)
    return out


def hysteresis(strong, weak):
    """Strong pixels plus weak pixels 8-connected to a strong pixel."""
    mask = (strong != 0) | (weak != 0)
    reach = (strong != 0).copy()
    while True:
        p = np.pad(reach, 1, mode="constant")
        grown = np.zeros_like(reach)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                grown |= p[1 + dr : 1 + dr + reach.shape[0], 1 + dc : 1 + dc + reach.shape[1]]
        grown &= mask
        if np.array_equal(grown, reach):
            return grown.astype(np.uint8)
        reach = grown


def zero_crossings(resp, thresh):
    """Zero-crossing pixels of a filter response.

    For each horizontal and vertical neighbor pair whose responses have
    opposite signs and differ by more than `thresh`, the pixel with the
    smaller absolute response is marked (ties go to the first pixel in
    raster order).
    """
    h, w = resp.shape
    out = np.zeros((h, w), dtype=np.uint8)
    a = np.abs(resp)
    # horizontal pairs (r, c) - (r, c+1)
    prod = resp[:, : w - 1] * resp[:, 1:]
    diff = np.abs(resp[:, : w - 1] - resp[:, 1:])
    cross = (prod < 0.0) & (diff > thresh)
    first = cross & (a[:, : w - 1] <= a[:, 1:])
    second = cross & ~first
    out[:, : w - 1] |= first.astype(np.uint8)
    out[:, 1:] |= second.astype(np.uint8)
    # vertical pairs (r, c) - (r+1, c)
    prod = resp[: h - 1, :] * resp[1:, :]
    diff = np.abs(resp[: h - 1, :] - resp[1:, :])
    cross = (prod < 0.0) & (diff > thresh)
    first = cross & (a[: h - 1, :] <= a[1:, :])
    second = cross & ~first
    out[: h - 1, :] |= first.astype(np.uint8)
    out[1:, :] |= second.astype(np.uint8)
    return out


def _source_grid(n_out, n_in):
    scale = n_in / n_out
    s = (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5
    return s


def resize_bilinear_u8(img, out_h, out_w):
    """Bilinear resize of an 8-bit image (H, W) or (H, W, C).

    Half-pixel-center sampling, edge clamp, round half up.
    """
    h, w = img.shape[:2]
    sy = _source_grid(out_h, h)
    sx = _source_grid(out_w, w)
    y0f = np.floor(sy)
    x0f = np.floor(sx)
    fy = sy - y0f
    fx = sx - x0f
    y0 = np.clip(y0f.astype(np.int64), 0, h - 1)
    y1 = np.clip(y0f.astype(np.int64) + 1, 0, h - 1)
    x0 = np.clip(x0f.astype(np.int64), 0, w - 1)
    x1 = np.clip(x0f.astype(np.int64) + 1, 0, w - 1)

    data = img.astype(np.float64)
    fy_col = fy[:, None]
    fx_row = fx[None, :]
    if data.ndim == 3:
        fy_col = fy_col[:, :, None]
        fx_row = fx_row[:, :, None]
    a = data[np.ix_(y0, x0)]
    b = data[np.ix_(y0, x1)]
    c = data[np.ix_(y1, x0)]
    d = data[np.ix_(y1, x1)]
    top = (1.0 - fx_row) * a + fx_row * b
    bot = (1.0 - fx_row) * c + fx_row * d
    v = (1.0 - fy_col) * top + fy_col * bot
    return np.clip(np.floor(v + 0.5), 0.0, 255.0).astype(np.uint8)


def resize_nearest_u8(img, out_h, out_w):
    """Nearest-neighbor resize of an 8-bit (H, W) image."""
    h, w = img.shape[:2]
    sy = np.clip(np.floor((np.arange(out_h) + 0.5) * (h / out_h)).astype(np.int64), 0, h - 1)
    sx = np.clip(np.floor((np.arange(out_w) + 0.5) * (w / out_w)).astype(np.int64), 0, w - 1)
    return img[np.ix_(sy, sx)]
