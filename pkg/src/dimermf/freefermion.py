"""Exact solution of the cyclic dimerized XY chain through free fermions.

Within a fixed S_z-parity sector the Jordan-Wigner fermions obey
antiperiodic (parity +1) or periodic (parity -1) boundary conditions, so the
momenta run over half-integers or integers.  Site ``2i`` is the first spin of
pair ``i`` (mode ``a``), site ``2i + 1`` the second (mode ``b``).  With the
Nambu vector ``(a_k, b_k, a_-k^dag, b_-k^dag)`` the Hamiltonian is
``1/2 sum_k Psi_k^dag H_k Psi_k`` with the 4x4 blocks of :func:`block_matrix`.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.optimize

from .model import Boundary, SystemSpec, Topology

SIGMA = {
    "1": np.eye(2),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, 1.0j], [-1.0j, 0.0]]),
    "z": np.diag([-1.0, 1.0]),
}


class ResolutionWarning(UserWarning):
    """A finer scan found parity crossings missed at the requested resolution."""


def _check(spec: SystemSpec):
    if spec.topology is not Topology.CHAIN or spec.boundary is not Boundary.CYCLIC:
        raise ValueError("free-fermion solution needs a cyclic dimerized chain")
    if spec.jz != 0.0:
        raise ValueError("free-fermion solution needs Jz = 0")


def momenta(n: int, parity: int) -> np.ndarray:
    """``K_+`` (half-integers) for parity +1, ``K_-`` (integers) for -1."""
    return np.arange(n) + (0.5 if parity > 0 else 0.0)


def _couplings(k: float, spec: SystemSpec):
    e = np.exp(-2j * np.pi * k / spec.n_pairs)
    return spec.j_plus * (1 + spec.alpha * e), spec.j_minus * (1 - spec.alpha * e)


def block_matrix(k: float, spec: SystemSpec) -> np.ndarray:
    """Bogoliubov-de Gennes block for momentum ``k``."""
    _check(spec)
    jp, jm = _couplings(k, spec)
    b = spec.b
    return np.array([
        [b, -jp, 0, -jm],
        [-np.conj(jp), b, np.conj(jm), 0],
        [0, jm, -b, jp],
        [-np.conj(jm), 0, np.conj(jp), -b],
    ], dtype=complex)


def lambda_closed_form(k: float, spec: SystemSpec) -> tuple[float, float]:
    """Moduli ``(|lambda+|, |lambda-|)`` of the block eigenvalues."""
    jp, jm = _couplings(k, spec)
    delta = spec.b ** 2 + abs(jp) ** 2 + abs(jm) ** 2
    prod = abs(spec.b ** 2 - (jp + jm) * (np.conj(jp) - np.conj(jm)))
    root = math.sqrt(max(delta * delta - prod * prod, 0.0))
    lp = math.sqrt(delta + root)
    # lambda+ lambda- = prod; avoids cancellation in delta - root
    return lp, (prod / lp if lp > 0 else 0.0)


def _self_conjugate(k: float, n: int) -> bool:
    return round(2 * k) % n == 0


@dataclass(frozen=True)
class SectorSpectrum:
    """Quasiparticle content of the lowest state of one parity sector.

    ``lambdas[i] = (lambda+, lambda-)`` for momentum ``ks[i]``.  Momenta with
    ``k = -k`` carry their own two-mode parity; ``block_parities`` maps them
    to the parity chosen for the sector minimum.  ``flipped`` holds the
    momentum index whose softest quasiparticle is occupied, if any.
    """

    parity: int
    ks: np.ndarray
    lambdas: np.ndarray
    vacuum_parity: int
    block_parities: dict
    flipped: int | None
    ground_energy: float
    degenerate: bool

    @property
    def modes(self):
        return [(float(k), float(lp), float(lm)) for k, (lp, lm) in zip(self.ks, self.lambdas)]


def _blocks(spec: SystemSpec, parity: int):
    n = spec.n_pairs
    ks = momenta(n, parity)
    vals, vecs = [], []
    for k in ks:
        w, v = np.linalg.eigh(block_matrix(k, spec))
        vals.append(w)
        vecs.append(v)
    return ks, np.array(vals), np.array(vecs)


# two-mode Fock space for a self-conjugate momentum: basis |n_a n_b>
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])
_FA = np.kron(_LOWER, np.eye(2))
_FB = np.kron(np.diag([1.0, -1.0]), _LOWER)
_FOCK_PARITY = np.array([1, -1, -1, 1])


def _two_mode_state(k: float, spec: SystemSpec, block_parity: int):
    """Lowest two-mode state of given parity: ``(energy, <Psi Psi^dag>)``."""
    jp, jm = _couplings(k, spec)
    jp, jm = jp.real, jm.real  # k = 0 or n/2 makes both real
    a, b = _FA, _FB
    h = (spec.b * (a.T @ a + b.T @ b) - jp * (a.T @ b + b.T @ a)
         - jm * (a.T @ b.T + b @ a))
    keep = np.nonzero(_FOCK_PARITY == block_parity)[0]
    w, v = np.linalg.eigh(h[np.ix_(keep, keep)])
    psi = np.zeros(4)
    psi[keep] = v[:, 0]
    ops = [a, b, a.T, b.T]
    gam = np.array([[psi @ x @ y.T @ psi for y in ops] for x in ops])
    return float(w[0] - spec.b), gam


def _fourier(ks, n):
    """Unitary ``F`` with real-space Nambu = ``F`` @ stacked momentum Nambu."""
    size = 2 * n
    f = np.zeros((2 * size, 4 * n), dtype=complex)
    pos = np.arange(n)
    for idx, k in enumerate(ks):
        ph = np.exp(2j * np.pi * k * pos / n) / math.sqrt(n)
        for x in (0, 1):
            f[2 * pos + x, 4 * idx + x] = ph
            f[size + 2 * pos + x, 4 * idx + 2 + x] = ph
    return f


@lru_cache(maxsize=64)
def _sector_data(spec: SystemSpec, parity: int):
    n = spec.n_pairs
    ks, vals, vecs = _blocks(spec, parity)
    selfc = [i for i, k in enumerate(ks) if _self_conjugate(k, n)]
    other = [i for i in range(n) if i not in selfc]
    base = -0.5 * float(vals[other, 2:].sum()) if other else 0.0
    two_mode = {i: {p: _two_mode_state(ks[i], spec, p) for p in (1, -1)} for i in selfc}
    vacuum = 1
    for i in selfc:
        vacuum *= 1 if two_mode[i][1][0] <= two_mode[i][-1][0] else -1

    # candidate configurations: parities of the self-conjugate blocks plus
    # at most one quasiparticle in a k != -k block
    soft = min(other, key=lambda i: vals[i, 2]) if other else None
    configs = []
    for choice in itertools.product((1, -1), repeat=len(selfc)):
        e = base + sum(two_mode[i][p][0] for i, p in zip(selfc, choice))
        par = int(np.prod(choice)) if choice else 1
        if par == parity:
            configs.append((e, choice, None))
        elif soft is not None:
            configs.append((e + float(vals[soft, 2]), choice, soft))
    if not configs:
        raise ArithmeticError("no state of the requested parity")
    emin = min(c[0] for c in configs)
    tol = 1e-12 * max(1.0, abs(emin))
    best = [c for c in configs if c[0] <= emin + tol]
    return ks, vals, vecs, selfc, two_mode, vacuum, best, emin


def sector_spectrum(spec: SystemSpec, parity: int) -> SectorSpectrum:
    """Lowest state of the sector: filled Fermi sea plus, if needed, one
    quasiparticle of the smallest energy to fix the number parity."""
    _check(spec)
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")
    ks, vals, _, selfc, _, vacuum, best, energy = _sector_data(spec, parity)
    lam = np.stack([vals[:, 3], vals[:, 2]], axis=1)
    _, choice, flip = best[0]
    degenerate = len(best) > 1 or flip is not None
    return SectorSpectrum(parity, ks, lam, vacuum,
                          {float(ks[i]): p for i, p in zip(selfc, choice)},
                          flip, energy, degenerate)


def sector_energies(spec: SystemSpec) -> dict[int, float]:
    return {p: sector_spectrum(spec, p).ground_energy for p in (1, -1)}


def ground_parity(spec: SystemSpec) -> int:
    e = sector_energies(spec)
    return 1 if e[1] <= e[-1] else -1


def exact_critical_fields(spec: SystemSpec) -> tuple[float | None, float | None]:
    """Fields where the softest quasiparticle gap closes at ``k = n/2`` and ``k = 0``."""
    jx, jy, a = spec.jx, spec.jy, spec.alpha
    r1 = (jy - a * jx) * (jx - a * jy)
    r2 = (a * jx + jy) * (jx + a * jy)
    ok1 = r1 >= 0 and jy - a * jx >= 0
    ok2 = r2 >= 0 and a * jx + jy >= 0
    return (0.5 * math.sqrt(r1) if ok1 else None,
            0.5 * math.sqrt(r2) if ok2 else None)


# ---------------------------------------------------------------------------
# contractions and correlators


@dataclass(frozen=True)
class CorrelationSet:
    """``f_ij = <c_i^dag c_j> - delta_ij / 2`` and ``g_ij = <c_i^dag c_j^dag>``."""

    parity: int
    f: np.ndarray
    g: np.ndarray

    @property
    def fermion_number(self) -> float:
        return float(np.trace(self.f) + self.f.shape[0] / 2)


def _nambu_states(spec: SystemSpec, parity: int):
    """Real-space ``<Psi Psi^dag>`` for every degenerate sector minimum."""
    n = spec.n_pairs
    ks, _, vecs, selfc, two_mode, _, best, _ = _sector_data(spec, parity)
    fmat = _fourier(ks, n)
    size = 2 * n
    out = []
    for _, choice, flip in best:
        gam = np.einsum("kai,kbi->kab", vecs[:, :, 2:], vecs[:, :, 2:].conj())
        for i, p in zip(selfc, choice):
            gam[i] = two_mode[i][p][1]
        stacked = np.zeros((4 * n, 4 * n), dtype=complex)
        for idx in range(n):
            stacked[4 * idx:4 * idx + 4, 4 * idx:4 * idx + 4] = gam[idx]
        g_real = (fmat @ stacked @ fmat.conj().T).real
        if flip is None:
            out.append(g_real)
            continue
        w = np.zeros(4 * n, dtype=complex)
        w[4 * flip:4 * flip + 4] = vecs[flip, :, 2]
        mode = fmat @ w
        # the +k and -k quasiparticles are degenerate: use the real pair
        for part in (mode.real, mode.imag):
            if np.linalg.norm(part) < 1e-8:
                continue
            v = part / np.linalg.norm(part)
            tv = np.concatenate([v[size:], v[:size]])
            out.append(g_real - np.outer(v, v) + np.outer(tv, tv))
    return out


@lru_cache(maxsize=64)
def _contraction_options(spec: SystemSpec, parity: int) -> tuple[CorrelationSet, ...]:
    size = spec.n_sites
    out = []
    for gam in _nambu_states(spec, parity):
        f = 0.5 * np.eye(size) - gam[:size, :size].T
        g = gam[:size, size:].T.copy()
        f.setflags(write=False)
        g.setflags(write=False)
        out.append(CorrelationSet(parity, f, g))
    return tuple(out)


def contractions(spec: SystemSpec, parity: int) -> CorrelationSet:
    """Fermionic contractions of the lowest state of the sector.

    When that state is degenerate (the parity-fixing quasiparticle can sit at
    ``k`` or ``-k``) the first option is returned; :func:`exact_rdm` averages
    over all options.
    """
    _check(spec)
    return _contraction_options(spec, parity)[0]


def _string_dets(cs: CorrelationSet, i: int, j: int) -> tuple[float, float]:
    """``(<sx_i sx_j>, <sy_i sy_j>)`` in Pauli units for ``i < j``."""
    m = 2 * (cs.f + cs.g)
    rows = np.arange(i, j)
    a_plus = m[np.ix_(rows, rows + 1)]
    a_minus = m[np.ix_(rows + 1, rows)]
    return float(np.linalg.det(a_plus)), float(np.linalg.det(a_minus))


def correlators_from(cs: CorrelationSet, i: int, j: int) -> dict[str, float]:
    if not i < j:
        raise ValueError("need i < j")
    f, g = cs.f, cs.g
    dp, dm = _string_dets(cs, i, j)
    return {
        "sz_i": float(f[i, i]),
        "sz_j": float(f[j, j]),
        "szsz": float(f[i, i] * f[j, j] - f[i, j] ** 2 + g[i, j] ** 2),
        "spsm": 0.25 * (dp + dm),
        "spsp": 0.25 * (dp - dm),
        "sxsx": 0.25 * dp,
        "sysy": 0.25 * dm,
    }


def spin_correlators(spec: SystemSpec, parity: int, i: int, j: int) -> dict[str, float]:
    """Wick-theorem spin correlators between sites ``i < j`` (0-based)."""
    return correlators_from(contractions(spec, parity), i, j)


def _rdm_from(cs: CorrelationSet, sites) -> np.ndarray:
    if len(sites) == 1:
        (i,) = sites
        return np.diag([0.5 - cs.f[i, i], 0.5 + cs.f[i, i]]).astype(complex)
    i, j = sites
    c = correlators_from(cs, i, j)
    s = SIGMA
    rho = (np.kron(s["1"], s["1"]) + 2 * c["sz_i"] * np.kron(s["z"], s["1"])
           + 2 * c["sz_j"] * np.kron(s["1"], s["z"]) + 4 * c["szsz"] * np.kron(s["z"], s["z"])
           + 4 * c["sxsx"] * np.kron(s["x"], s["x"]) + 4 * c["sysy"] * np.kron(s["y"], s["y"]))
    return rho / 4


def exact_rdm(spec: SystemSpec, parity: int, sites) -> np.ndarray:
    """One- or two-site reduced density of the lowest state of a sector.

    Sites are 0-based and the result is in ascending site order.  For a
    degenerate sector minimum the equal mixture over the degenerate states
    is returned.
    """
    _check(spec)
    sites = sorted(set(int(s) for s in sites))
    if not 1 <= len(sites) <= 2 or sites[0] < 0 or sites[-1] >= spec.n_sites:
        raise ValueError("need one or two distinct in-range sites")
    opts = _contraction_options(spec, parity)
    return sum(_rdm_from(cs, sites) for cs in opts) / len(opts)


def ground_rdm(spec: SystemSpec, sites) -> np.ndarray:
    return exact_rdm(spec, ground_parity(spec), sites)


# ---------------------------------------------------------------------------
# parity crossings


def _gap(spec: SystemSpec, b: float) -> float:
    e = sector_energies(spec.replace(b=float(b)))
    return e[1] - e[-1]


def _golden_min(fun, a, b, xtol=1e-13):
    # golden-section search: robust for the kinked |E+ - E-| at a touch
    r = (math.sqrt(5) - 1) / 2
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = fun(d)
    return float((a + b) / 2)


def _scan(spec, lo, hi, points, touch_tol):
    grid = np.linspace(lo, hi, points)
    d = np.array([_gap(spec, b) for b in grid])
    found = []
    for a, b, da, db in zip(grid[:-1], grid[1:], d[:-1], d[1:]):
        if da == 0.0:
            found.append(float(a))
        elif da * db < 0:
            found.append(scipy.optimize.brentq(lambda x: _gap(spec, x), a, b, xtol=1e-13,
                                               rtol=4 * np.finfo(float).eps))
    if d[-1] == 0.0:
        found.append(float(grid[-1]))
    # touching points where the two sectors meet without exchanging order
    ad = np.abs(d)
    for m in range(1, points - 1):
        if ad[m] <= ad[m - 1] and ad[m] <= ad[m + 1] and d[m - 1] * d[m + 1] > 0 and d[m] != 0:
            x = _golden_min(lambda v: abs(_gap(spec, v)), grid[m - 1], grid[m + 1])
            if abs(_gap(spec, x)) < touch_tol:
                found.append(x)
    return sorted(found)


def parity_crossings(spec: SystemSpec, b_interval: tuple[float, float],
                     resolution: int = 400, touch_tol: float = 1e-9) -> list[float]:
    """Fields in ``b_interval`` where the lowest levels of the two sectors cross."""
    _check(spec)
    lo, hi = b_interval
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    found = _scan(spec, lo, hi, resolution, touch_tol)
    fine = _scan(spec, lo, hi, 2 * resolution - 1, touch_tol)
    if len(fine) > len(found):
        warnings.warn(f"{len(fine) - len(found)} crossing(s) only resolved at double "
                      "resolution", ResolutionWarning, stacklevel=2)
        found = fine
    return found
