"""Hot numeric kernels.

Every kernel exists twice: a numba ``_nb`` variant written as explicit loops and
a vectorized pure-numpy ``_np`` variant.  The public names bind to one or the
other at import time according to ``RFSWEEP_NUMBA`` (see ``_accel``).  Both
variants are importable directly so tests and the benchmark can compare them.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

_EPS = 1e-9


# --------------------------------------------------------------------------
# root-raised-cosine pulse, time in symbol periods
# --------------------------------------------------------------------------

@njit
def _rrc_scalar(t, beta):
    at = abs(t)
    if at < 1e-12:
        return 1.0 - beta + 4.0 * beta / math.pi
    if beta > 0.0 and abs(at - 1.0 / (4.0 * beta)) < 1e-9:
        return beta / math.sqrt(2.0) * (
            (1.0 + 2.0 / math.pi) * math.sin(math.pi / (4.0 * beta))
            + (1.0 - 2.0 / math.pi) * math.cos(math.pi / (4.0 * beta))
        )
    num = math.sin(math.pi * t * (1.0 - beta)) + 4.0 * beta * t * math.cos(math.pi * t * (1.0 + beta))
    den = math.pi * t * (1.0 - (4.0 * beta * t) ** 2)
    return num / den


def rrc_pulse(t, beta):
    """Unit-symbol-period RRC impulse response evaluated at ``t`` (vectorized)."""
    t = np.asarray(t, dtype=np.float64)
    at = np.abs(t)
    out = np.empty_like(t)
    centre = at < 1e-12
    if beta > 0:
        sing = np.abs(at - 1.0 / (4.0 * beta)) < 1e-9
    else:
        sing = np.zeros_like(centre)
    reg = ~(centre | sing)
    tr = t[reg]
    out[reg] = (np.sin(np.pi * tr * (1 - beta)) + 4 * beta * tr * np.cos(np.pi * tr * (1 + beta))) / (
        np.pi * tr * (1 - (4 * beta * tr) ** 2)
    )
    out[centre] = 1 - beta + 4 * beta / np.pi
    if beta > 0:
        out[sing] = beta / np.sqrt(2) * (
            (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
        )
    return out


# --------------------------------------------------------------------------
# fractional-rate pulse shaping
#   out[n] = sum_k sym[k] * rrc(((n + t0) - k*sps - span*sps/2) / sps)
# over 0 <= (n + t0) - k*sps <= span*sps
# --------------------------------------------------------------------------

@njit
def shape_symbols_nb(symbols, sps, rolloff, span, n_out, t0):
    out = np.zeros(n_out, dtype=np.complex128)
    nsym = symbols.shape[0]
    width = span * sps
    centre = 0.5 * width
    for n in range(n_out):
        pos = n + t0
        k_hi = int(math.floor(pos / sps + _EPS))
        k_lo = int(math.ceil((pos - width) / sps - _EPS))
        if k_lo < 0:
            k_lo = 0
        if k_hi > nsym - 1:
            k_hi = nsym - 1
        acc = 0.0 + 0.0j
        for k in range(k_lo, k_hi + 1):
            m = pos - k * sps
            if m < -_EPS or m > width + _EPS:
                continue
            acc += symbols[k] * _rrc_scalar((m - centre) / sps, rolloff)
        out[n] = acc
    return out


def shape_symbols_np(symbols, sps, rolloff, span, n_out, t0):
    symbols = np.asarray(symbols, dtype=np.complex128)
    nsym = symbols.shape[0]
    width = span * sps
    pos = np.arange(n_out, dtype=np.float64) + t0
    k_hi = np.floor(pos / sps + _EPS).astype(np.int64)
    n_taps = int(math.ceil(span)) + 2
    k = k_hi[:, None] - np.arange(n_taps)[None, :]
    m = pos[:, None] - k * sps
    valid = (m >= -_EPS) & (m <= width + _EPS) & (k >= 0) & (k < nsym)
    taps = np.where(valid, rrc_pulse((m - 0.5 * width) / sps, rolloff), 0.0)
    return np.sum(symbols[np.clip(k, 0, max(nsym - 1, 0))] * taps, axis=1) if nsym else np.zeros(n_out, complex)


# --------------------------------------------------------------------------
# continuous-time OFDM evaluated on an arbitrary sample grid
#   symbol s occupies [s*sym_len, (s+1)*sym_len); useful part starts cp_len in
#   out[n] = sum_j grid[s, j] * exp(2j*pi*freqs[j]*(n - s*sym_len - cp_len))
# freqs are in cycles per output sample
# --------------------------------------------------------------------------

@njit
def ofdm_synth_nb(grid, freqs, sym_len, cp_len, n_out):
    out = np.zeros(n_out, dtype=np.complex128)
    nsym, nsc = grid.shape
    for n in range(n_out):
        s = int(math.floor(n / sym_len + _EPS))
        if s >= nsym:
            break
        tau = n - s * sym_len - cp_len
        acc = 0.0 + 0.0j
        for j in range(nsc):
            ph = 2.0 * math.pi * freqs[j] * tau
            acc += grid[s, j] * complex(math.cos(ph), math.sin(ph))
        out[n] = acc
    return out


def ofdm_synth_np(grid, freqs, sym_len, cp_len, n_out):
    n = np.arange(n_out, dtype=np.float64)
    s = np.floor(n / sym_len + _EPS).astype(np.int64)
    keep = s < grid.shape[0]
    out = np.zeros(n_out, dtype=np.complex128)
    n, s = n[keep], s[keep]
    tau = n - s * sym_len - cp_len
    phase = np.exp(2j * np.pi * tau[:, None] * np.asarray(freqs)[None, :])
    out[keep] = np.sum(grid[s] * phase, axis=1)
    return out


# --------------------------------------------------------------------------
# 8-connected component labeling; labels 1..n in raster order of first pixel
# --------------------------------------------------------------------------

@njit
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit
def label_components_nb(mask):
    rows, cols = mask.shape
    labels = np.zeros((rows, cols), dtype=np.int64)
    parent = np.arange(rows * cols + 1)
    nxt = 1
    for r in range(rows):
        for c in range(cols):
            if not mask[r, c]:
                continue
            best = 0
            # already-visited neighbours: W, NW, N, NE
            for dr, dc in ((0, -1), (-1, -1), (-1, 0), (-1, 1)):
                rr = r + dr
                cc = c + dc
                if rr < 0 or cc < 0 or cc >= cols:
                    continue
                lab = labels[rr, cc]
                if lab == 0:
                    continue
                if best == 0:
                    best = lab
                else:
                    a = _find(parent, best)
                    b = _find(parent, lab)
                    if a != b:
                        if a < b:
                            parent[b] = a
                        else:
                            parent[a] = b
            if best == 0:
                best = nxt
                nxt += 1
            labels[r, c] = best
    remap = np.zeros(nxt, dtype=np.int64)
    count = 0
    for r in range(rows):
        for c in range(cols):
            lab = labels[r, c]
            if lab == 0:
                continue
            root = _find(parent, lab)
            if remap[root] == 0:
                count += 1
                remap[root] = count
            labels[r, c] = remap[root]
    return labels, count


def label_components_np(mask):
    mask = np.asarray(mask, dtype=bool)
    rows, cols = mask.shape
    # each cell holds the smallest flat index seen so far in its component
    lab = np.where(mask, np.arange(rows * cols).reshape(rows, cols), rows * cols)
    big = rows * cols
    while True:
        padded = np.pad(lab, 1, constant_values=big)
        nb = lab.copy()
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr or dc:
                    nb = np.minimum(nb, padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols])
        nb = np.where(mask, nb, big)
        # pointer jumping: follow the chain of representatives
        flat = nb.ravel()
        jumped = np.where(mask.ravel(), flat[np.minimum(flat, big - 1)], big)
        jumped = np.minimum(jumped, flat).reshape(rows, cols)
        if np.array_equal(jumped, lab):
            break
        lab = jumped
    out = np.zeros((rows, cols), dtype=np.int64)
    if not mask.any():
        return out, 0
    roots = lab[mask]
    uniq, first = np.unique(roots, return_index=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[order] = np.arange(1, len(uniq) + 1)
    out[mask] = rank[np.searchsorted(uniq, roots)]
    return out, len(uniq)


# --------------------------------------------------------------------------
# bilinear resize with half-pixel centres (identity when shapes match)
# --------------------------------------------------------------------------

@njit
def bilinear_resize_nb(img, out_h, out_w):
    in_h, in_w = img.shape
    out = np.empty((out_h, out_w), dtype=np.float64)
    sy = in_h / out_h
    sx = in_w / out_w
    for i in range(out_h):
        y = (i + 0.5) * sy - 0.5
        if y < 0.0:
            y = 0.0
        if y > in_h - 1:
            y = in_h - 1.0
        y0 = int(math.floor(y))
        y1 = min(y0 + 1, in_h - 1)
        fy = y - y0
        for j in range(out_w):
            x = (j + 0.5) * sx - 0.5
            if x < 0.0:
                x = 0.0
            if x > in_w - 1:
                x = in_w - 1.0
            x0 = int(math.floor(x))
            x1 = min(x0 + 1, in_w - 1)
            fx = x - x0
            top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
            bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
            out[i, j] = top * (1.0 - fy) + bot * fy
    return out


def _axis_weights(n_in, n_out):
    pos = np.clip((np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5, 0.0, n_in - 1)
    i0 = np.floor(pos).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, pos - i0


def bilinear_resize_np(img, out_h, out_w):
    img = np.asarray(img, dtype=np.float64)
    y0, y1, fy = _axis_weights(img.shape[0], out_h)
    x0, x1, fx = _axis_weights(img.shape[1], out_w)
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bot = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    return top * (1 - fy)[:, None] + bot * fy[:, None]


# --------------------------------------------------------------------------
# greedy detection-to-ground-truth matching for one class
#   detections must already be sorted by descending score
#   boxes are (x0, y0, x1, y1); ground truth is grouped by image via offsets
# returns tp[t, d] = detection d is a true positive at thresholds[t]
# --------------------------------------------------------------------------

@njit
def _iou_xyxy(a0, a1, a2, a3, b0, b1, b2, b3):
    iw = min(a2, b2) - max(a0, b0)
    ih = min(a3, b3) - max(a1, b1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (a2 - a0) * (a3 - a1) + (b2 - b0) * (b3 - b1) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


@njit
def match_greedy_nb(det_img, det_boxes, gt_offsets, gt_boxes, thresholds):
    n_thr = thresholds.shape[0]
    n_det = det_img.shape[0]
    tp = np.zeros((n_thr, n_det), dtype=np.bool_)
    for t in range(n_thr):
        thr = thresholds[t]
        matched = np.zeros(gt_boxes.shape[0], dtype=np.bool_)
        for d in range(n_det):
            im = det_img[d]
            best = -1
            best_iou = thr
            for g in range(gt_offsets[im], gt_offsets[im + 1]):
                if matched[g]:
                    continue
                v = _iou_xyxy(det_boxes[d, 0], det_boxes[d, 1], det_boxes[d, 2], det_boxes[d, 3],
                              gt_boxes[g, 0], gt_boxes[g, 1], gt_boxes[g, 2], gt_boxes[g, 3])
                if v >= best_iou and (best < 0 or v > best_iou):
                    best_iou = v
                    best = g
            if best >= 0:
                matched[best] = True
                tp[t, d] = True
    return tp


def iou_matrix(a, b):
    """Pairwise IoU between two stacks of xyxy boxes."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.where((iw > 0) & (ih > 0), iw * ih, 0.0)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where((union > 0) & (inter > 0), inter / np.where(union > 0, union, 1.0), 0.0)


def match_greedy_np(det_img, det_boxes, gt_offsets, gt_boxes, thresholds):
    n_thr = len(thresholds)
    tp = np.zeros((n_thr, len(det_img)), dtype=bool)
    # IoU rows depend only on the detection, so compute once per detection
    rows = []
    for d, im in enumerate(det_img):
        lo, hi = gt_offsets[im], gt_offsets[im + 1]
        rows.append((lo, iou_matrix(det_boxes[d], gt_boxes[lo:hi])[0]))
    for t, thr in enumerate(thresholds):
        matched = np.zeros(len(gt_boxes), dtype=bool)
        for d, (lo, ious) in enumerate(rows):
            if ious.size == 0:
                continue
            cand = np.where(matched[lo:lo + ious.size] | (ious < thr), -1.0, ious)
            g = int(np.argmax(cand))
            if cand[g] >= 0.0:
                matched[lo + g] = True
                tp[t, d] = True
    return tp


if USE_NUMBA:
    shape_symbols = shape_symbols_nb
    ofdm_synth = ofdm_synth_nb
    label_components = label_components_nb
    bilinear_resize = bilinear_resize_nb
    match_greedy = match_greedy_nb
else:
    shape_symbols = shape_symbols_np
    ofdm_synth = ofdm_synth_np
    label_components = label_components_np
    bilinear_resize = bilinear_resize_np
    match_greedy = match_greedy_np

BACKEND = "numba" if USE_NUMBA else "numpy"
