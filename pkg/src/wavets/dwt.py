"""Single- and multi-level decimated wavelet transform and its inverse.

Analysis convolves the decomposition filters with a boundary-extended
signal and keeps every second output; synthesis upsamples, convolves with
the reconstruction filters and crops. Two boundary modes are supported:

* ``"symmetric"`` (default): half-sample reflection. Each level of an
  input of length ``n`` yields ``(n + L - 1) // 2`` coefficients per band,
  where ``L`` is the filter length, so the coefficient count can slightly
  exceed the signal length.
* ``"periodization"``: circular extension with odd-length inputs padded by
  repeating the last sample. Each level yields ``ceil(n / 2)`` coefficients
  per band, giving exact-length layouts, and the transform of an
  orthogonal family is an orthonormal map for even lengths.

Filters are short (at most 8 taps here), so convolution is direct; the
cascade halves the work per level and total runtime stays linear in the
input length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .families import WaveletFamily

BOUNDARY_MODES = ("symmetric", "periodization")


@dataclass(frozen=True)
class CoefficientPyramid:
    """Multi-level transform output: approximation plus per-level details.

    ``details`` is ordered coarsest-first, matching the coarse-to-fine
    token layout used downstream.
    """

    approx: np.ndarray
    details: tuple[np.ndarray, ...]
    level: int
    input_length: int
    family_name: str
    boundary_mode: str

    @property
    def total_coefficients(self) -> int:
        return len(self.approx) + sum(len(d) for d in self.details)

    def segment_lengths(self) -> list[int]:
        return [len(self.approx)] + [len(d) for d in self.details]


def _check_mode(mode: str) -> str:
    if mode not in BOUNDARY_MODES:
        raise ValueError(f"unknown boundary mode {mode!r}; expected one of {BOUNDARY_MODES}")
    return mode


_CHUNK = 4096  # accumulation block; keeps scratch buffers cache- and allocator-friendly


def _fold_index(i: int, n: int, mode: str) -> int:
    """Map an out-of-range sample index into [0, n) for the boundary mode."""
    if mode == "symmetric":
        j = i % (2 * n)
        return j if j < n else 2 * n - 1 - j
    return i % n


def _analysis_step(x: np.ndarray, family: WaveletFamily, mode: str):
    """One level of filtering + dyadic downsampling. Returns (approx, detail).

    Output ``k`` of each band is the convolution of the boundary-extended
    signal with the decomposition filter, evaluated at sample ``2k + 1``;
    its window covers signal indices ``[2k + 2 - L, 2k + 1]``. Windows that
    stay inside the signal are computed with vectorized strided reads of
    ``x`` itself, chunked so scratch stays small; only the few boundary
    windows gather reflected (or wrapped) samples explicitly.
    """
    filt_len = family.filter_length
    if mode == "periodization" and len(x) % 2 == 1:
        x = np.append(x, x[-1])
    n = len(x)
    if mode == "symmetric":
        out_len = (n + filt_len - 1) // 2
    else:
        out_len = n // 2
    dec_lo, dec_hi = family.dec_lo, family.dec_hi

    buf = np.empty(2 * out_len)
    lo, hi = buf[:out_len], buf[out_len:]
    k_first = (filt_len - 1) // 2
    k_last = min((n - 2) // 2, out_len - 1)

    tmp = np.empty(min(_CHUNK, max(k_last - k_first + 1, 1)))
    for c0 in range(k_first, k_last + 1, _CHUNK):
        c1 = min(c0 + _CHUNK, k_last + 1)
        w = c1 - c0
        s0 = 2 * c0 + 1
        np.multiply(x[s0 : s0 + 2 * w : 2], dec_lo[0], out=lo[c0:c1])
        np.multiply(x[s0 : s0 + 2 * w : 2], dec_hi[0], out=hi[c0:c1])
        t = tmp[:w]
        for m in range(1, filt_len):
            window = x[s0 - m : s0 - m + 2 * w : 2]
            np.multiply(window, dec_lo[m], out=t)
            np.add(lo[c0:c1], t, out=lo[c0:c1])
            np.multiply(window, dec_hi[m], out=t)
            np.add(hi[c0:c1], t, out=hi[c0:c1])

    left_stop = min(k_first, out_len)
    boundary = list(range(0, left_stop)) + list(range(max(k_last + 1, left_stop), out_len))
    for k in boundary:
        acc_lo = 0.0
        acc_hi = 0.0
        for m in range(filt_len):
            v = x[_fold_index(2 * k + 1 - m, n, mode)]
            acc_lo += dec_lo[m] * v
            acc_hi += dec_hi[m] * v
        lo[k] = acc_lo
        hi[k] = acc_hi
    return lo, hi


def _upsampled_filter(coeffs: np.ndarray, taps: np.ndarray, shift: int, out_len: int) -> np.ndarray:
    """Zero-stuffed upsampling followed by filtering and cropping.

    Equals ``np.convolve(upsample(coeffs), taps)[shift : shift + out_len]``.
    """
    filt_len = len(taps)
    nc = len(coeffs)
    pad = filt_len  # headroom so every tap's slice stays in bounds
    up = np.zeros(2 * nc + 2 * pad)
    up[pad : pad + 2 * nc : 2] = coeffs
    out = np.zeros(out_len)
    for m in range(filt_len):
        start = pad + shift - m
        out += taps[m] * up[start : start + out_len]
    return out


def _synthesis_step(
    approx: np.ndarray,
    detail: np.ndarray,
    family: WaveletFamily,
    target_len: int,
    mode: str,
) -> np.ndarray:
    """Inverse of one analysis step; yields ``target_len`` samples."""
    if len(approx) != len(detail):
        raise ValueError(
            f"length-inconsistent pyramid: approximation band has {len(approx)} "
            f"coefficients but detail band has {len(detail)}"
        )
    filt_len = family.filter_length
    nc = len(approx)
    shift = filt_len - 2
    if mode == "symmetric":
        return _upsampled_filter(approx, family.rec_lo, shift, target_len) + _upsampled_filter(
            detail, family.rec_hi, shift, target_len
        )
    up_a = np.zeros(2 * nc)
    up_a[::2] = approx
    up_d = np.zeros(2 * nc)
    up_d[::2] = detail
    full = np.convolve(up_a, family.rec_lo) + np.convolve(up_d, family.rec_hi)
    acc = np.zeros(2 * nc)
    np.add.at(acc, (np.arange(len(full)) - shift) % (2 * nc), full)
    return acc[:target_len]


def _stage_lengths(n: int, filt_len: int, level: int, mode: str) -> list[int]:
    """Signal length at each cascade stage: ``[n, n_1, ..., n_level]``."""
    lengths = [n]
    for _ in range(level):
        prev = lengths[-1]
        if mode == "symmetric":
            lengths.append((prev + filt_len - 1) // 2)
        else:
            lengths.append((prev + 1) // 2)
    return lengths


def max_level(n: int, family: WaveletFamily, boundary_mode: str = "symmetric") -> int:
    """Largest decomposition level accepted for an input of length ``n``.

    Uses the standard toolbox rule ``floor(log2(n / (L - 1)))``: below it
    every cascade stage is longer than the filter, above it boundary
    handling dominates the coefficients.
    """
    _check_mode(boundary_mode)
    step = max(family.filter_length - 1, 1)
    if n < step:
        return 0
    return max((int(n) // step).bit_length() - 1, 0)


def decompose(
    x: np.ndarray,
    family: WaveletFamily,
    level: int,
    boundary_mode: str = "symmetric",
) -> CoefficientPyramid:
    """Cascade decomposition of ``x`` down to ``level`` stages.

    Each stage re-decomposes the previous approximation band; the result
    holds the final approximation plus all detail bands, coarsest first.
    """
    mode = _check_mode(boundary_mode)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input signal contains non-finite values")
    if not isinstance(level, (int, np.integer)) or level < 1:
        raise ValueError(f"decomposition level must be a positive integer, got {level!r}")
    allowed = max_level(len(x), family, mode)
    if level > allowed:
        raise ValueError(
            f"signal of length {len(x)} is too short for level {level} with "
            f"family {family.name!r} (max level {allowed})"
        )

    details: list[np.ndarray] = []
    approx = x
    for _ in range(level):
        approx, detail = _analysis_step(approx, family, mode)
        details.append(detail)
    details.reverse()
    return CoefficientPyramid(
        approx=approx,
        details=tuple(details),
        level=level,
        input_length=len(x),
        family_name=family.name,
        boundary_mode=mode,
    )


def reconstruct(pyramid: CoefficientPyramid, family: WaveletFamily) -> np.ndarray:
    """Invert :func:`decompose`; returns exactly ``input_length`` samples."""
    mode = _check_mode(pyramid.boundary_mode)
    lengths = _stage_lengths(pyramid.input_length, family.filter_length, pyramid.level, mode)
    expected = coefficient_layout(pyramid.input_length, family, pyramid.level, mode)
    actual = pyramid.segment_lengths()
    if actual != expected:
        raise ValueError(
            f"length-inconsistent pyramid: bands have lengths {actual}, "
            f"expected {expected} for input length {pyramid.input_length}"
        )
    current = pyramid.approx
    for i, detail in enumerate(pyramid.details):
        target = lengths[pyramid.level - 1 - i]
        if mode == "periodization" and target % 2 == 1:
            current = _synthesis_step(current, detail, family, target + 1, mode)[:target]
        else:
            current = _synthesis_step(current, detail, family, target, mode)
    return current


def coefficient_layout(
    n: int,
    family: WaveletFamily,
    level: int,
    boundary_mode: str = "symmetric",
) -> list[int]:
    """Per-band coefficient counts ``[a_level, d_level, ..., d_1]``.

    Agrees exactly with the shapes :func:`decompose` produces, without
    computing any transform.
    """
    mode = _check_mode(boundary_mode)
    if not isinstance(level, (int, np.integer)) or level < 1:
        raise ValueError(f"decomposition level must be a positive integer, got {level!r}")
    allowed = max_level(n, family, mode)
    if level > allowed:
        raise ValueError(
            f"signal of length {n} is too short for level {level} with "
            f"family {family.name!r} (max level {allowed})"
        )
    lengths = _stage_lengths(n, family.filter_length, level, mode)
    return [lengths[level]] + [lengths[j] for j in range(level, 0, -1)]
