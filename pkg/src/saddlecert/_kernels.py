"""Hot kernels for bivariate truncated-series interval arithmetic.

A series truncated at total degree d stores one coefficient interval per
multi-index (ms, mu) with ms+mu <= d, flattened in triangular order::

    index(ms, mu) = T(ms + mu) + mu,   T(k) = k*(k+1)//2

so each total-order level is contiguous.  Lower and upper endpoints live in
two float64 arrays.  The truncated product below is the inner loop of the
whole certifier (it runs tens of thousands of times per certificate), hence
the jitted backend; interval endpoints are widened one ulp per operation
except for error-free sums and products with zero, exactly as in
:mod:`saddlecert.interval`.

Backend selection: numba-jitted by default, pure numpy when numba is not
importable or ``SADDLECERT_BACKEND=numpy`` is set in the environment.  Both
paths produce bit-identical output (same operations in the same order);
``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

_INF = np.inf


def tri(k: int) -> int:
    return k * (k + 1) // 2


def ncoeffs(degree: int) -> int:
    return tri(degree + 1)


def flat_index(ms: int, mu: int) -> int:
    return tri(ms + mu) + mu


def _mul_into_loops(alo, ahi, da, blo, bhi, db, clo, chi, dc):
    """c += a*b truncated at total degree dc (interval endpoints, outward)."""
    for ka in range(min(da, dc) + 1):
        abase = ka * (ka + 1) // 2
        for ia in range(ka + 1):
            al = alo[abase + ia]
            ah = ahi[abase + ia]
            if al == 0.0 and ah == 0.0:
                continue
            for kb in range(min(db, dc - ka) + 1):
                bbase = kb * (kb + 1) // 2
                cbase = (ka + kb) * (ka + kb + 1) // 2 + ia
                for ib in range(kb + 1):
                    bl = blo[bbase + ib]
                    bh = bhi[bbase + ib]
                    if bl == 0.0 and bh == 0.0:
                        continue
                    p1 = al * bl
                    p2 = al * bh
                    p3 = ah * bl
                    p4 = ah * bh
                    plo = min(min(p1, p2), min(p3, p4))
                    phi = max(max(p1, p2), max(p3, p4))
                    plo = np.nextafter(plo, -_INF)
                    phi = np.nextafter(phi, _INF)
                    ci = cbase + ib
                    old = clo[ci]
                    s = old + plo
                    if not (s - old == plo and s - plo == old):
                        s = np.nextafter(s, -_INF)
                    clo[ci] = s
                    old = chi[ci]
                    s = old + phi
                    if not (s - old == phi and s - phi == old):
                        s = np.nextafter(s, _INF)
                    chi[ci] = s


_LEVEL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _level_maps(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays k_of[j], i_of[j] giving the (level, offset) of flat index j < n."""
    cached = _LEVEL_CACHE.get(n)
    if cached is not None:
        return cached
    k_of = np.empty(n, dtype=np.int64)
    i_of = np.empty(n, dtype=np.int64)
    k = 0
    j = 0
    while j < n:
        take = min(k + 1, n - j)
        k_of[j : j + take] = k
        i_of[j : j + take] = np.arange(take)
        j += take
        k += 1
    _LEVEL_CACHE[n] = (k_of, i_of)
    return k_of, i_of


def _mul_into_numpy(alo, ahi, da, blo, bhi, db, clo, chi, dc):
    """Vectorised fallback; same operation order as the loop kernel."""
    nb_all = ncoeffs(min(db, dc))
    kb_of, ib_of = _level_maps(nb_all)
    for ka in range(min(da, dc) + 1):
        abase = tri(ka)
        nb = ncoeffs(min(db, dc - ka))
        if nb <= 0:
            continue
        bl_full = blo[:nb]
        bh_full = bhi[:nb]
        nz = (bl_full != 0.0) | (bh_full != 0.0)
        if not nz.any():
            continue
        bl = bl_full[nz]
        bh = bh_full[nz]
        ksum = ka + kb_of[:nb][nz]
        tgt0 = ksum * (ksum + 1) // 2 + ib_of[:nb][nz]
        for ia in range(ka + 1):
            al = alo[abase + ia]
            ah = ahi[abase + ia]
            if al == 0.0 and ah == 0.0:
                continue
            p1 = al * bl
            p2 = al * bh
            p3 = ah * bl
            p4 = ah * bh
            plo = np.nextafter(np.minimum(np.minimum(p1, p2), np.minimum(p3, p4)), -_INF)
            phi = np.nextafter(np.maximum(np.maximum(p1, p2), np.maximum(p3, p4)), _INF)
            tgt = tgt0 + ia
            old = clo[tgt]
            s = old + plo
            exact = (s - old == plo) & (s - plo == old)
            clo[tgt] = np.where(exact, s, np.nextafter(s, -_INF))
            old = chi[tgt]
            s = old + phi
            exact = (s - old == phi) & (s - phi == old)
            chi[tgt] = np.where(exact, s, np.nextafter(s, _INF))


def _pick_backend() -> tuple[str, object]:
    choice = os.environ.get("SADDLECERT_BACKEND", "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"SADDLECERT_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba":
        try:
            import numba
        except ImportError:
            return "numpy", _mul_into_numpy
        jitted = numba.njit(cache=True)(_mul_into_loops)
        return "numba", jitted
    return "numpy", _mul_into_numpy


BACKEND, mul_into = _pick_backend()
