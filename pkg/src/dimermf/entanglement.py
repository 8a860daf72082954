"""Density-matrix utilities: partial trace, entropy, concurrence, fidelity and
parity restoration of product (cluster) states.

Two-qubit densities use the product basis ``(dd, du, ud, uu)`` with the first
factor as the most significant bit, matching ``np.kron``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pairmf import PAIR_PARITY, PairState

PSD_TOL = 1e-10
CLIP = 1e-12

SPIN = {
    "x": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    "y": np.array([[0.0, 0.5j], [-0.5j, 0.0]], dtype=complex),
    "z": np.array([[-0.5, 0.0], [0.0, 0.5]], dtype=complex),
    "1": np.eye(2, dtype=complex),
}
SIGMA_Y = 2 * SPIN["y"]
LOCAL_PARITY = np.diag([1.0, -1.0])


def validate_density(rho, tol: float = PSD_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array after checking trace, Hermiticity and PSD."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density must be a square matrix")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density trace {np.trace(rho).real:.3g} != 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValueError("density has negative eigenvalues")
    return rho


def _clipped_eig(rho):
    w, v = np.linalg.eigh(rho)
    w = np.where(w < CLIP, 0.0, w)
    return w, v


def entropy(rho, base: float = 2.0) -> float:
    """Von Neumann entropy, in bits by default."""
    w, _ = _clipped_eig(validate_density(rho))
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)) / math.log(base))


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density.

    Uses the decomposition ``rho = W W^dagger`` and the singular values of
    ``W^T (sy x sy) W``, which are the square roots of the eigenvalues of
    ``rho rho~`` without forming a matrix square root.
    """
    rho = validate_density(rho)
    if rho.shape != (4, 4):
        raise ValueError("concurrence needs a 4x4 density")
    w, v = _clipped_eig(rho)
    wmat = v * np.sqrt(w)
    tau = wmat.T @ np.kron(SIGMA_Y, SIGMA_Y) @ wmat
    lam = np.sort(np.linalg.svd(tau, compute_uv=False))[::-1]
    return float(max(0.0, lam[0] - lam[1:].sum()))


def _sqrtm_psd(rho):
    w, v = _clipped_eig(rho)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))``."""
    rho, sigma = validate_density(rho), validate_density(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("fidelity needs densities of equal dimension")
    s = np.linalg.svd(_sqrtm_psd(rho) @ _sqrtm_psd(sigma), compute_uv=False)
    return float(min(1.0, s.sum()))


def partial_trace(state_or_density, keep_sites: Sequence[int]) -> np.ndarray:
    """Reduced density on ``keep_sites`` (0-based, returned in ascending order).

    Accepts a pure state of length ``2**N`` or a ``2**N x 2**N`` density.
    """
    arr = np.asarray(state_or_density)
    pure = arr.ndim == 1
    dim = arr.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim or (not pure and arr.shape != (dim, dim)):
        raise ValueError("input dimension is not a power of two")
    keep = sorted(set(int(s) for s in keep_sites))
    if len(keep) != len(keep_sites) or any(s < 0 or s >= n for s in keep):
        raise ValueError(f"keep_sites must be distinct sites in [0, {n})")
    rest = [s for s in range(n) if s not in keep]
    dk = 1 << len(keep)
    if pure:
        m = arr.reshape((2,) * n).transpose(keep + rest).reshape(dk, -1)
        return m @ m.conj().T
    t = arr.reshape((2,) * (2 * n))
    t = t.transpose(keep + rest + [n + s for s in keep] + [n + s for s in rest])
    dr = dim // dk
    return np.einsum("ajbj->ab", t.reshape(dk, dr, dk, dr))


# ---------------------------------------------------------------------------
# restored states of mean-field solutions


def pair_single_spin(state: PairState) -> np.ndarray:
    """Marginal of one spin of a symmetric pair state (both spins are equal)."""
    return partial_trace(state.amplitudes.astype(complex), [0]).real


def gmf_reduced_states(theta: float, phi: float):
    """Parity-restored ``(rho12, rho1, rho23)`` of the pair mean-field state.

    ``rho12`` is the equal mixture of the ``+theta`` and ``-theta`` pair
    states, ``rho1`` its single-spin marginal and ``rho23`` the state of two
    spins in neighbouring pairs, the mixture of the two branch products.
    """
    plus = PairState.from_angles(theta, phi)
    minus = plus.parity_image()
    rho12 = 0.5 * (plus.density() + minus.density())
    rho1 = partial_trace(rho12, [0]).real
    r_plus, r_minus = pair_single_spin(plus), pair_single_spin(minus)
    rho23 = 0.5 * (np.kron(r_plus, r_plus) + np.kron(r_minus, r_minus))
    return rho12, rho1, rho23


def gmf_concurrence12(theta: float, phi: float) -> tuple[float, str]:
    """Closed-form concurrence of the restored pair state and its alignment type."""
    v = math.cos(theta / 2) ** 2 * (1 + math.sin(phi))
    if abs(v - 1) < 1e-14:
        return 0.0, "none"
    return abs(v - 1), "parallel" if v > 1 else "antiparallel"


def single_spin_product(theta: float) -> np.ndarray:
    """Single-spin state ``cos(theta/2)|d> + sin(theta/2)|u>`` as a vector."""
    return np.array([math.cos(theta / 2), math.sin(theta / 2)])


@dataclass(frozen=True)
class RestoredPair:
    """Definite-parity combination of a product state and its parity image.

    ``overlap`` is the full product of cluster overlaps, ``group_overlap``
    the part over the observed group.  ``eigen_probs`` are the two nonzero
    eigenvalues (larger first) of the restored group density ``density``.
    """

    plus_states: tuple
    minus_states: tuple
    overlap: float
    group_overlap: float
    rest_overlap: float
    eigen_probs: tuple[float, float]
    density: np.ndarray
    mode: str


def _align(plus: PairState, minus: PairState) -> PairState:
    # a cluster phase is free: pick it so every overlap is nonnegative
    return minus if plus.overlap(minus) >= 0 else PairState(-minus.amplitudes)


def restore_parity(plus_states: Sequence[PairState], overlap_mode: str = "neglect",
                   group: Sequence[int] = (0,),
                   minus_states: Sequence[PairState] | None = None) -> RestoredPair:
    """Reduced state of ``group`` in the parity-restored global state.

    ``overlap_mode="neglect"`` treats the overlap of the unobserved clusters
    as zero (equal mixture of the two branches); ``"keep"`` retains the full
    product of overlaps.
    """
    if overlap_mode not in ("neglect", "keep"):
        raise ValueError("overlap_mode must be 'neglect' or 'keep'")
    plus_states = tuple(plus_states)
    if minus_states is None:
        minus_states = tuple(s.parity_image() for s in plus_states)
    elif len(minus_states) != len(plus_states):
        raise ValueError("plus and minus families differ in length")
    minus_states = tuple(_align(p, m) for p, m in zip(plus_states, minus_states))
    ov = np.array([p.overlap(m) for p, m in zip(plus_states, minus_states)])
    group = sorted(set(group))
    if any(g < 0 or g >= len(plus_states) for g in group):
        raise ValueError("group index out of range")
    rest = [k for k in range(len(plus_states)) if k not in group]
    o_g = float(np.prod(ov[group]))
    o_r = float(np.prod(ov[rest])) if rest else 1.0
    if overlap_mode == "neglect":
        o_r = 0.0 if rest else 1.0
    total = o_g * o_r

    gp = np.ones(1)
    gm = np.ones(1)
    for k in group:
        gp = np.kron(gp, plus_states[k].amplitudes)
        gm = np.kron(gm, minus_states[k].amplitudes)
    rho = (np.outer(gp, gp) + np.outer(gm, gm)
           + o_r * (np.outer(gp, gm) + np.outer(gm, gp))) / (2 * (1 + total))
    p_even = (1 + o_g) * (1 + o_r) / (2 * (1 + total))
    probs = (max(p_even, 1 - p_even), min(p_even, 1 - p_even))
    return RestoredPair(plus_states, minus_states, float(np.prod(ov)), o_g,
                        o_r, probs, rho, overlap_mode)


def commutes_with_parity(rho, tol: float = 1e-12) -> bool:
    """True when ``rho`` has only parity-allowed matrix elements."""
    rho = np.asarray(rho)
    n = rho.shape[0].bit_length() - 1
    par = np.ones(1)
    for _ in range(n):
        par = np.kron(par, LOCAL_PARITY)
    par = np.diag(par)
    return bool(np.max(np.abs(par @ rho - rho @ par)) < tol)


__all__ = [
    "SPIN", "validate_density", "entropy", "concurrence", "fidelity",
    "partial_trace", "gmf_reduced_states", "gmf_concurrence12", "RestoredPair",
    "restore_parity", "commutes_with_parity", "PAIR_PARITY",
]
