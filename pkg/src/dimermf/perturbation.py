"""First-order corrections on top of the pair mean field (chains only).

The residual interaction between neighbouring pairs ``k`` and ``k + 1`` is
the inter-pair bond ``-alpha J_mu s^mu_2(k) s^mu_1(k+1)`` with the mean-field
part removed.  To first order it mixes two-pair excitations ``|n_k n'_k+1>``
into the product of pair ground states with amplitudes

    A[n, n'] = sum_mu alpha J_mu <n|s^mu_2|0> <n'|s^mu_1|0> / (de_n + de_n')

Reduced densities are built from the normalized cluster-local form
``|0><0| + A A^dag`` so that they do not depend on the chain length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import pairmf
from .entanglement import partial_trace
from .model import SystemSpec, Topology, effective_alpha
from .pairmf import I2, PAIR_PARITY, SX, SY, SZ, Phase

DENOM_TOL = 1e-12
_SITE_OPS = {mu: (np.kron(op, I2), np.kron(I2, op)) for mu, op in
             (("x", SX), ("y", SY), ("z", SZ))}


@dataclass(frozen=True)
class PairSpectrum:
    """Eigen-decomposition of the 4x4 mean-field pair Hamiltonian.

    ``vectors[:, m]`` is level ``m``; ``parities[m]`` its eigenvalue of the
    pair parity ``(-1)^(number of up spins)`` (0 when the level has no
    definite parity, as in the parity-breaking window).
    """

    energies: np.ndarray
    vectors: np.ndarray
    parities: np.ndarray
    residual: float

    def elements(self, op: np.ndarray) -> np.ndarray:
        """``<m|op|0>`` for ``m = 0..3``."""
        return self.vectors.T @ op @ self.vectors[:, 0]


def pair_spectrum(spec: SystemSpec, mean_fields=None) -> PairSpectrum:
    """Diagonalize the pair Hamiltonian with the inter-pair mean fields.

    ``mean_fields`` is ``(<s^x>, <s^z>)``, a :class:`pairmf.PairMFSolution`,
    or None to use the pair mean-field minimum of ``spec``.
    """
    if mean_fields is None:
        mean_fields = pairmf.pairmf_solve(spec)
    if isinstance(mean_fields, pairmf.PairMFSolution):
        mean_fields = (mean_fields.mean_sx, mean_fields.mean_sz)
    sx, sz = mean_fields
    h = pairmf.pair_hamiltonian(spec, sx, sz)
    w, v = np.linalg.eigh(h)
    for m in range(4):
        i = np.argmax(np.abs(v[:, m]))
        if v[i, m] < 0:
            v[:, m] = -v[:, m]
    par = np.einsum("im,i,im->m", v, np.diag(PAIR_PARITY), v)
    par = np.where(np.abs(np.abs(par) - 1) < 1e-9, np.round(par), 0.0)
    res = float(np.max(np.abs(h @ v - v * w)))
    return PairSpectrum(w, v, par, res)


@dataclass(frozen=True)
class PerturbedGS:
    """First-order two-pair amplitudes on a cyclic chain.

    ``amplitudes[(k, k2)]`` is the 3x3 matrix over excitations ``n, n' = 1..3``
    of pairs ``k`` and ``k2``.  ``excluded`` lists ``(n, n')`` dropped for a
    vanishing energy denominator.
    """

    spectrum: PairSpectrum
    n_clusters: int
    amplitudes: dict
    excluded: tuple

    def neighbours(self, k: int) -> list[tuple[int, int]]:
        return [key for key in self.amplitudes if k in key]

    def cluster_block(self, k: int) -> np.ndarray:
        """``sum alpha alpha^dag`` restricted to excitations of pair ``k``."""
        out = np.zeros((3, 3), dtype=complex)
        for (a, b), amp in self.amplitudes.items():
            if a == k:
                out += amp @ amp.conj().T
            if b == k:
                out += amp.T @ amp.conj()
        return out


def _check(spec: SystemSpec):
    if spec.topology is not Topology.CHAIN:
        raise ValueError("perturbative corrections are implemented for chains only")
    if spec.pair_count < 2:
        raise ValueError("need at least two pairs")


def _branches(spec: SystemSpec):
    sol = pairmf.pairmf_solve(spec)
    fields = [(sol.mean_sx, sol.mean_sz)]
    if sol.phase is Phase.PARITY_BREAKING:
        fields.append((-sol.mean_sx, sol.mean_sz))
    return sol, fields


def _bond_matrix(spec: SystemSpec, ps: PairSpectrum, swap: bool = False):
    alpha = effective_alpha(spec)
    de = ps.energies - ps.energies[0]
    num = np.zeros((3, 3), dtype=complex)
    for mu, j in (("x", spec.jx), ("y", spec.jy), ("z", spec.jz)):
        if j == 0.0:
            continue
        s1, s2 = _SITE_OPS[mu]
        left, right = (s1, s2) if swap else (s2, s1)
        num += alpha * j * np.outer(ps.elements(left)[1:], ps.elements(right)[1:])
    denom = de[1:, None] + de[None, 1:]
    bad = np.abs(denom) < DENOM_TOL
    amp = np.where(bad, 0.0, num / np.where(bad, 1.0, denom))
    excluded = tuple((int(a) + 1, int(b) + 1) for a, b in zip(*np.nonzero(bad & (num != 0))))
    return amp, excluded


def residual_amplitudes(spec: SystemSpec, branch: int = 1) -> PerturbedGS:
    """Two-pair excitation amplitudes of the cyclic chain.

    ``branch`` selects the sign of ``<s^x>`` in the parity-breaking window.
    """
    _check(spec)
    _, fields = _branches(spec)
    mf = fields[0] if branch > 0 or len(fields) == 1 else fields[1]
    ps = pair_spectrum(spec, mf)
    n = spec.n_pairs
    amp, excluded = _bond_matrix(spec, ps)
    amps = {}
    if n == 2:
        # both bonds join the same two pairs
        back, ex2 = _bond_matrix(spec, ps, swap=True)
        amps[(0, 1)] = amp + back
        excluded = excluded + ex2
    else:
        for k in range(n):
            amps[(k, (k + 1) % n)] = amp
    return PerturbedGS(ps, n, amps, excluded)


def _cluster_density(pgs: PerturbedGS, k: int = 0) -> np.ndarray:
    block = np.zeros((4, 4), dtype=complex)
    block[0, 0] = 1.0
    block[1:, 1:] = pgs.cluster_block(k)
    v = pgs.spectrum.vectors
    rho = v @ block @ v.T
    return rho / np.trace(rho).real


def perturbed_cluster_density(spec: SystemSpec) -> np.ndarray:
    """Perturbed reduced state of one pair, averaged over degenerate branches."""
    _check(spec)
    _, fields = _branches(spec)
    rhos = [_cluster_density(residual_amplitudes(spec, b)) for b in (1, -1)[:len(fields)]]
    return sum(rhos) / len(rhos)


def _two_cluster_state(pgs: PerturbedGS) -> np.ndarray:
    """Reduced 16x16 state of pairs 0 and 1 from the amplitudes touching them."""
    v = pgs.spectrum.vectors.astype(complex)
    ground = v[:, 0]
    # each component of the environment gets its own vector on pairs 0, 1
    env: dict = {"vac": np.kron(ground, ground)}
    for (a, b), amp in pgs.amplitudes.items():
        inside = {a, b} & {0, 1}
        if not inside:
            continue
        if {a, b} == {0, 1}:
            exc = amp if (a, b) == (0, 1) else amp.T
            env["vac"] = env["vac"] + np.einsum("nm,in,jm->ij", exc, v[:, 1:], v[:, 1:]).ravel()
            continue
        # one observed pair ``p`` excited together with outside pair ``q``
        p = a if a in (0, 1) else b
        q = b if p == a else a
        for e in range(3):
            col = amp[:, e] if p == a else amp[e, :]
            local = v[:, 1:] @ col
            vec = np.kron(local, ground) if p == 0 else np.kron(ground, local)
            key = (q, e)
            env[key] = env.get(key, 0) + vec
    rho = sum(np.outer(x, x.conj()) for x in env.values())
    return rho / np.trace(rho).real


def perturbed_cross_pair_density(spec: SystemSpec) -> np.ndarray:
    """Perturbed state of spin 2 of pair 0 and spin 1 of pair 1."""
    _check(spec)
    _, fields = _branches(spec)
    rhos = []
    for b in (1, -1)[:len(fields)]:
        rho16 = _two_cluster_state(residual_amplitudes(spec, b))
        rhos.append(partial_trace(rho16, [1, 2]))
    return sum(rhos) / len(rhos)


def excitation_band(spec: SystemSpec, k: int) -> np.ndarray:
    """Perturbed one-pair excitation energies ``E_m(k)`` for ``m = 1, 2, 3``."""
    _check(spec)
    sol, fields = _branches(spec)
    if sol.phase is Phase.PARITY_BREAKING:
        raise ValueError("excitation band is only defined outside the parity-breaking window")
    ps = pair_spectrum(spec, fields[0])
    alpha = effective_alpha(spec)
    n = spec.n_pairs
    hop = np.zeros(4)
    for mu, j in (("x", spec.jx), ("y", spec.jy), ("z", spec.jz)):
        if j == 0.0:
            continue
        s1, s2 = _SITE_OPS[mu]
        m1 = ps.vectors.T @ s1 @ ps.vectors[:, 0]
        m2 = ps.vectors.T @ s2 @ ps.vectors[:, 0]
        hop += j * np.real(np.conj(m1) * m2)
    de = ps.energies - ps.energies[0]
    band = de - 2 * alpha * hop * math.cos(2 * math.pi * k / n)
    return band[1:]
