"""Bit-basis kernels for parity-sector Hamiltonians.

Two interchangeable backends build the same COO triplets: a numba-compiled
loop and a vectorized numpy path.  Set ``DIMERMF_DISABLE_NUMBA=1`` to force
the numpy path (numba is also skipped when it cannot be imported).

Configurations are N-bit integers with bit ``N - 1 - site`` holding the spin
at ``site`` (1 = up), so site 0 is the most significant bit and a full state
vector indexed by configuration matches ``np.kron`` ordering.  Within a fixed
parity sector the configurations ``2m`` and ``2m + 1`` have opposite parity,
hence the sector index of configuration ``c`` is ``c >> 1``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and os.environ.get(
    "DIMERMF_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes")


def sector_configs(n_sites: int, parity: int) -> np.ndarray:
    """Sorted configurations whose up-spin count has parity ``parity`` (+1 even)."""
    c = np.arange(1 << n_sites, dtype=np.int64)
    pop = np.zeros_like(c)
    for s in range(n_sites):
        pop += (c >> s) & 1
    want = 0 if parity > 0 else 1
    return c[(pop & 1) == want]


def _build_numpy(n_sites, configs, bi, bj, bxy_plus, bxy_minus, bzz, hz):
    dim = configs.size
    rows = [np.arange(dim, dtype=np.int64)]
    cols = [np.arange(dim, dtype=np.int64)]
    diag = np.zeros(dim)
    for s in range(n_sites):
        up = (configs >> (n_sites - 1 - s)) & 1
        diag += hz[s] * (up - 0.5)
    vals = [diag]
    for b in range(bi.size):
        si = n_sites - 1 - bi[b]
        sj = n_sites - 1 - bj[b]
        ui = (configs >> si) & 1
        uj = (configs >> sj) & 1
        aligned = ui == uj
        if bzz[b] != 0.0:
            diag -= bzz[b] * np.where(aligned, 0.25, -0.25)
        flipped = configs ^ ((1 << si) | (1 << sj))
        amp = np.where(aligned, -bxy_minus[b], -bxy_plus[b])
        keep = amp != 0.0
        if keep.any():
            rows.append(np.nonzero(keep)[0].astype(np.int64))
            cols.append(flipped[keep] >> 1)
            vals.append(amp[keep])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def _build_loop(n_sites, configs, bi, bj, bxy_plus, bxy_minus, bzz, hz):
    dim = configs.size
    nb = bi.size
    rows = np.empty(dim * (nb + 1), dtype=np.int64)
    cols = np.empty(dim * (nb + 1), dtype=np.int64)
    vals = np.empty(dim * (nb + 1), dtype=np.float64)
    k = 0
    for a in range(dim):
        c = configs[a]
        d = 0.0
        for s in range(n_sites):
            up = (c >> (n_sites - 1 - s)) & 1
            d += hz[s] * (up - 0.5)
        for b in range(nb):
            si = n_sites - 1 - bi[b]
            sj = n_sites - 1 - bj[b]
            ui = (c >> si) & 1
            uj = (c >> sj) & 1
            if ui == uj:
                d -= 0.25 * bzz[b]
                amp = -bxy_minus[b]
            else:
                d += 0.25 * bzz[b]
                amp = -bxy_plus[b]
            if amp != 0.0:
                rows[k] = a
                cols[k] = (c ^ ((1 << si) | (1 << sj))) >> 1
                vals[k] = amp
                k += 1
        rows[k] = a
        cols[k] = a
        vals[k] = d
        k += 1
    return rows[:k], cols[:k], vals[:k]


if USE_NUMBA:
    _build_compiled = numba.njit(cache=True, nogil=True)(_build_loop)
else:  # pragma: no cover
    _build_compiled = None


def build_sector_coo(n_sites, configs, bi, bj, bxy_plus, bxy_minus, bzz, hz,
                     backend: str | None = None):
    """COO triplets of H restricted to one parity sector.

    ``bxy_plus[b] = (Jx + Jy)/4``-type combination is passed premultiplied:
    the hopping amplitude between anti-aligned spins is ``-bxy_plus`` and
    between aligned spins ``-bxy_minus``.
    """
    backend = backend or ("numba" if USE_NUMBA else "numpy")
    args = (int(n_sites), np.ascontiguousarray(configs, dtype=np.int64),
            np.asarray(bi, dtype=np.int64), np.asarray(bj, dtype=np.int64),
            np.asarray(bxy_plus, dtype=np.float64), np.asarray(bxy_minus, dtype=np.float64),
            np.asarray(bzz, dtype=np.float64), np.asarray(hz, dtype=np.float64))
    if backend == "numba":
        if _build_compiled is None:
            raise RuntimeError("numba backend requested but unavailable")
        return _build_compiled(*args)
    if backend == "numpy":
        return _build_numpy(*args)
    if backend == "python":
        return _build_loop(*args)
    raise ValueError(f"unknown backend {backend!r}")
