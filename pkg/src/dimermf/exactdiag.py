"""Exact diagonalization in S_z-parity sectors for up to 16 spins."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import entanglement
from ._kernels import build_sector_coo, sector_configs
from .model import CouplingGraph, SystemSpec, coupling_graph

MAX_SITES = 16
DENSE_MAX_SITES = 12
DEGENERACY_GAP = 1e-12


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class ParityBasis:
    n_sites: int
    sector: int
    states: np.ndarray

    @property
    def dim(self) -> int:
        return self.states.size

    def index(self, configs):
        """Sector position of configurations belonging to this sector."""
        return np.asarray(configs) >> 1

    def to_full(self, vec: np.ndarray) -> np.ndarray:
        full = np.zeros(1 << self.n_sites, dtype=vec.dtype)
        full[self.states] = vec
        return full


@lru_cache(maxsize=8)
def _cached_configs(n_sites: int, sector: int) -> np.ndarray:
    configs = sector_configs(n_sites, sector)
    configs.setflags(write=False)
    return configs


def parity_basis(n_sites: int, sector: int) -> ParityBasis:
    if sector not in (1, -1):
        raise ValueError("sector must be +1 or -1")
    return ParityBasis(n_sites, sector, _cached_configs(n_sites, sector))


def _bond_arrays(graph: CouplingGraph):
    per_pair: dict[tuple[int, int], list[float]] = {}
    for bd in graph.bonds:
        slot = per_pair.setdefault((bd.i, bd.j), [0.0, 0.0, 0.0])
        slot["xyz".index(bd.axis)] += bd.strength
    keys = sorted(per_pair)
    bi = np.array([k[0] for k in keys], dtype=np.int64)
    bj = np.array([k[1] for k in keys], dtype=np.int64)
    s = np.array([per_pair[k] for k in keys], dtype=float).reshape(-1, 3)
    hz = np.zeros(graph.n_sites)
    for site, b in graph.field_terms:
        hz[site] += b
    return bi, bj, (s[:, 0] + s[:, 1]) / 4.0, (s[:, 0] - s[:, 1]) / 4.0, s[:, 2], hz


def build_operator(graph: CouplingGraph | SystemSpec, sector: int,
                   backend: str | None = None) -> scipy.sparse.csr_matrix:
    """Sparse Hamiltonian restricted to the parity sector ``sector``."""
    if isinstance(graph, SystemSpec):
        graph = coupling_graph(graph)
    n = graph.n_sites
    if n > MAX_SITES:
        raise ValueError(f"{n} sites exceeds the exact-diagonalization cap of {MAX_SITES}")
    basis = parity_basis(n, sector)
    rows, cols, vals = build_sector_coo(n, basis.states, *_bond_arrays(graph),
                                        backend=backend)
    h = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))
    return h.tocsr()


@dataclass
class SpectrumResult:
    sector: int
    energies: np.ndarray
    vectors: np.ndarray
    basis: ParityBasis
    residual: float
    method: str

    def full_vector(self, level: int = 0) -> np.ndarray:
        return self.basis.to_full(self.vectors[:, level])


def _fix_sign(vecs: np.ndarray) -> np.ndarray:
    # deterministic global sign: largest component positive
    for k in range(vecs.shape[1]):
        i = np.argmax(np.abs(vecs[:, k]))
        if vecs[i, k] < 0:
            vecs[:, k] = -vecs[:, k]
    return vecs


def lowest_states(spec: SystemSpec | CouplingGraph, sector: int, count: int = 1,
                  backend: str | None = None) -> SpectrumResult:
    """Lowest ``count`` eigenpairs of one parity sector."""
    graph = coupling_graph(spec) if isinstance(spec, SystemSpec) else spec
    h = build_operator(graph, sector, backend=backend)
    basis = parity_basis(graph.n_sites, sector)
    dim = basis.dim
    count = min(count, dim)
    method = "dense"
    if graph.n_sites <= DENSE_MAX_SITES or dim <= count + 1:
        w, v = scipy.linalg.eigh(h.toarray(), subset_by_index=[0, count - 1])
    else:
        method = "lanczos"
        if count == 1:
            v0 = np.ones(dim) / np.sqrt(dim)
        else:
            # an all-ones seed cannot reach other momentum sectors
            v0 = np.random.default_rng(20140606).standard_normal(dim)
        try:
            w, v = scipy.sparse.linalg.eigsh(h, k=count, which="SA", v0=v0, tol=0.0,
                                             ncv=max(2 * count + 1, 24))
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            if graph.n_sites > 14:
                raise SolverError("Lanczos did not converge") from exc
            method = "dense-fallback"
            w, v = scipy.linalg.eigh(h.toarray(), subset_by_index=[0, count - 1])
        order = np.argsort(w)
        w, v = w[order], v[:, order]
    v = _fix_sign(np.array(v))
    norm = abs(h).sum(axis=1).max() or 1.0
    res = float(np.max(np.linalg.norm(h @ v - v * w, axis=0))) / norm
    if res > 1e-10:
        raise SolverError(f"eigen-residual {res:.2e} above tolerance")
    return SpectrumResult(sector, np.asarray(w), v, basis, res, method)


def spectrum(spec: SystemSpec, count: int = 4) -> np.ndarray:
    """Lowest ``count`` levels of each sector merged and sorted."""
    levels = [lowest_states(spec, p, count).energies for p in (1, -1)]
    return np.sort(np.concatenate(levels))[:count]


@dataclass
class GroundState:
    """Exact ground state(s) of both parity sectors."""

    spec: SystemSpec
    sectors: dict[int, SpectrumResult] = field(repr=False)

    @property
    def sector_energies(self) -> dict[int, float]:
        return {p: float(r.energies[0]) for p, r in self.sectors.items()}

    @property
    def parity(self) -> int:
        e = self.sector_energies
        return 1 if e[1] <= e[-1] + DEGENERACY_GAP else -1

    @property
    def energy(self) -> float:
        return min(self.sector_energies.values())

    @property
    def gap(self) -> float:
        e = self.sector_energies
        return abs(e[1] - e[-1])

    @property
    def near_degenerate(self) -> bool:
        return self.gap < DEGENERACY_GAP

    def vector(self, sector: int | None = None) -> np.ndarray:
        return self.sectors[sector or self.parity].full_vector(0)

    def rdm(self, sites, sector: int | None = None) -> np.ndarray:
        return entanglement.partial_trace(self.vector(sector), sites)

    def correlator(self, i: int, j: int, mu: str, nu: str,
                   sector: int | None = None) -> float:
        rho = self.rdm([i, j], sector)
        if i > j:
            mu, nu = nu, mu
        op = np.kron(entanglement.SPIN[mu], entanglement.SPIN[nu])
        return float(np.real(np.trace(rho @ op)))

    def magnetization(self, sector: int | None = None) -> np.ndarray:
        psi = self.vector(sector)
        prob = np.abs(psi) ** 2
        n = self.spec.n_sites
        configs = np.arange(psi.size)
        return np.array([np.dot(prob, ((configs >> (n - 1 - s)) & 1) - 0.5)
                         for s in range(n)])

    def entropy(self, sites, sector: int | None = None) -> float:
        return entanglement.entropy(self.rdm(sites, sector))

    def concurrence(self, i: int, j: int, sector: int | None = None) -> float:
        return entanglement.concurrence(self.rdm([i, j], sector))


def gs_observables(spec: SystemSpec, backend: str | None = None) -> GroundState:
    return GroundState(spec, {p: lowest_states(spec, p, 1, backend) for p in (1, -1)})
