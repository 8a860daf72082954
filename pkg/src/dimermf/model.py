"""System specifications for dimerized spin-1/2 chains, ladders and lattices.

Conventions used throughout the package:

* Sites are 0-based.  Pair ``i`` of a chain or ladder holds sites ``2i`` and
  ``2i + 1``; in a lattice the pair ``(i, j)`` holds columns ``2i, 2i + 1`` of
  row ``j`` and the site index is ``row * 2 * n1 + column``.
* The Hamiltonian is ``H = B sum_i s^z_i - sum_bonds J_b s^mu_i s^mu_j`` so a
  bond strength is the coefficient of ``-s^mu_i s^mu_j``.
"""
from __future__ import annotations

import dataclasses
import enum
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np


class Topology(str, enum.Enum):
    CHAIN = "chain"
    LADDER = "ladder"
    LATTICE = "lattice"


class Boundary(str, enum.Enum):
    CYCLIC = "cyclic"
    OPEN = "open"


class GaugeError(ValueError):
    """A requested sign change has no implementing local rotation."""


class AnalyticRangeWarning(UserWarning):
    """Parameters fall outside the range assumed by the analytic solvers."""


_N_ALPHAS = {Topology.CHAIN: 1, Topology.LADDER: 3, Topology.LATTICE: 2}


@dataclass(frozen=True)
class SystemSpec:
    """Complete description of a dimerized spin-1/2 system.

    ``alphas`` holds ``(alpha1,)`` for a chain, ``(alpha1, alpha2, alpha3)``
    for a ladder and ``(alpha1, alpha2)`` for a lattice.  ``n_pairs`` is an
    int for chains and ladders and an ``(n1, n2)`` tuple for lattices.
    """

    topology: Topology = Topology.CHAIN
    n_pairs: int | tuple[int, int] = 4
    boundary: Boundary = Boundary.CYCLIC
    jx: float = 1.0
    jy: float = 0.5
    jz: float = 0.0
    b: float = 0.0
    alphas: tuple[float, ...] = (0.1,)

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        for name in ("jx", "jy", "jz", "b"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if len(self.alphas) != _N_ALPHAS[self.topology]:
            raise ValueError(
                f"{self.topology.value} needs {_N_ALPHAS[self.topology]} alphas, "
                f"got {len(self.alphas)}"
            )
        if self.topology is Topology.LATTICE:
            n1, n2 = (int(v) for v in self.n_pairs)
            if n1 < 2 or n2 < 2:
                raise ValueError("lattice grid dimensions must both be >= 2")
            object.__setattr__(self, "n_pairs", (n1, n2))
        else:
            if isinstance(self.n_pairs, tuple):
                raise ValueError("n_pairs must be an integer for chains and ladders")
            if int(self.n_pairs) < 1:
                raise ValueError("n_pairs must be >= 1")
            object.__setattr__(self, "n_pairs", int(self.n_pairs))

    @classmethod
    def chain(cls, n_pairs=4, jx=1.0, jy=0.5, b=0.0, alpha=0.1, jz=0.0,
              boundary=Boundary.CYCLIC) -> SystemSpec:
        return cls(Topology.CHAIN, n_pairs, boundary, jx, jy, jz, b, (alpha,))

    @classmethod
    def ladder(cls, n_pairs=8, jx=1.0, jy=0.5, b=0.0, alphas=(0.05, 0.05, 0.05),
               jz=0.0, boundary=Boundary.CYCLIC) -> SystemSpec:
        return cls(Topology.LADDER, n_pairs, boundary, jx, jy, jz, b, tuple(alphas))

    @classmethod
    def lattice(cls, n_pairs=(2, 4), jx=1.0, jy=0.5, b=0.0, alphas=(0.1, 0.05),
                jz=0.0, boundary=Boundary.CYCLIC) -> SystemSpec:
        return cls(Topology.LATTICE, tuple(n_pairs), boundary, jx, jy, jz, b,
                   tuple(alphas))

    @property
    def alpha(self) -> float:
        return self.alphas[0]

    @property
    def pair_count(self) -> int:
        if self.topology is Topology.LATTICE:
            return self.n_pairs[0] * self.n_pairs[1]
        return self.n_pairs

    @property
    def n_sites(self) -> int:
        return 2 * self.pair_count

    @property
    def j_plus(self) -> float:
        return (self.jx + self.jy) / 4.0

    @property
    def j_minus(self) -> float:
        return (self.jx - self.jy) / 4.0

    def replace(self, **changes) -> SystemSpec:
        """Copy with changed fields; ``alpha=`` sets ``alpha1`` alone for chains."""
        if "alpha" in changes:
            if self.topology is not Topology.CHAIN:
                raise ValueError("alpha= shortcut only applies to chains; pass alphas=")
            changes["alphas"] = (changes.pop("alpha"),)
        return dataclasses.replace(self, **changes)


# ---------------------------------------------------------------------------
# gauge rotations


@dataclass(frozen=True)
class GaugeRecord:
    """Local pi rotations mapping an original model onto its canonical form.

    ``site_rotations[i]`` is ``(z, x)`` with each entry 1 when a pi rotation
    about that axis was applied at site ``i``.
    """

    site_rotations: tuple[tuple[int, int], ...] = ()
    sign_flips: frozenset[str] = frozenset()
    warnings: tuple[str, ...] = ()

    @property
    def is_identity(self) -> bool:
        return not self.sign_flips

    def sign(self, site: int, axis: str) -> int:
        """Sign acquired by ``s^axis`` at ``site`` under the recorded rotations."""
        if not self.site_rotations:
            return 1
        z, x = self.site_rotations[site]
        s = 1
        if z and axis in ("x", "y"):
            s = -s
        if x and axis in ("y", "z"):
            s = -s
        return s

    def map_expectation(self, site: int, axis: str, value: float) -> float:
        """Translate a canonical-model expectation back to the original model."""
        return self.sign(site, axis) * value

    def rotation_matrix(self) -> np.ndarray:
        """Full-space unitary ``U`` with ``H_canonical = U H_original U^dagger``."""
        rz = np.diag([1.0, -1.0]).astype(complex)
        rx = np.array([[0, 1], [1, 0]], dtype=complex)
        u = np.ones((1, 1), dtype=complex)
        for z, x in self.site_rotations:
            m = np.eye(2, dtype=complex)
            if z:
                m = rz @ m
            if x:
                m = rx @ m
            u = np.kron(u, m)
        return u


def _even_site_mask(spec: SystemSpec) -> np.ndarray:
    """True at sites that are even in the 1-based labelling within a pair row."""
    sites = np.arange(spec.n_sites)
    if spec.topology is Topology.LATTICE:
        cols = sites % (2 * spec.n_pairs[0])
        return cols % 2 == 1
    return sites % 2 == 1


def canonicalize(spec: SystemSpec) -> tuple[SystemSpec, GaugeRecord]:
    """Bring ``spec`` to ``Jx >= 0, B >= 0`` and, for chains, ``alpha >= 0``.

    Raises :class:`GaugeError` when a negative chain alpha cannot be rotated
    away (cyclic chain with an odd number of pairs, or ``Jz != 0``).
    """
    n = spec.n_sites
    zrot = np.zeros(n, dtype=int)
    xrot = np.zeros(n, dtype=int)
    flips: set[str] = set()
    notes: list[str] = []
    jx, jy, b = spec.jx, spec.jy, spec.b
    alphas = list(spec.alphas)

    if jx < 0:
        zrot ^= _even_site_mask(spec).astype(int)
        jx, jy = -jx, -jy
        flips |= {"jx", "jy"}
        # same-parity bonds do not pick up the sign: absorb it into alpha2
        if spec.topology in (Topology.LADDER, Topology.LATTICE):
            alphas[1] = -alphas[1]
    if b < 0:
        xrot ^= 1
        b = -b
        flips.add("b")
    if spec.topology is Topology.CHAIN and alphas[0] < 0:
        npairs = spec.n_pairs
        if spec.boundary is Boundary.CYCLIC and npairs % 2 == 1:
            raise GaugeError("alpha sign flip needs an even number of pairs in a cyclic chain")
        if spec.jz != 0.0:
            raise GaugeError("alpha sign flip does not preserve the Jz coupling")
        pair_of_site = np.arange(n) // 2
        zrot ^= (pair_of_site % 2 == 1).astype(int)
        alphas[0] = -alphas[0]
        flips.add("alpha")
    if abs(jy) > jx:
        notes.append("|Jy| > Jx: analytic solvers assume |Jy| < Jx")
    elif abs(jy) == jx and jx > 0:
        notes.append("|Jy| = Jx: degenerate in-plane direction, analytic solvers reject it")
    if any(a < 0 for a in alphas):
        notes.append("negative alpha_k: analytic formulas need alpha_k >= 0 or small")

    if not flips:
        return spec, GaugeRecord((), frozenset(), tuple(notes))
    new = spec.replace(jx=jx, jy=jy, b=b, alphas=tuple(alphas))
    rotations = tuple((int(z), int(x)) for z, x in zip(zrot, xrot))
    return new, GaugeRecord(rotations, frozenset(flips), tuple(notes))


def effective_alpha(spec: SystemSpec) -> float:
    """Scalar inter-pair coupling entering the analytic mean-field formulas."""
    a = spec.alphas
    if any(v < 0 for v in a) and spec.topology is not Topology.CHAIN:
        warnings.warn("negative alpha_k: analytic result only valid for small |alpha_k|",
                      AnalyticRangeWarning, stacklevel=2)
    if spec.topology is Topology.CHAIN:
        return a[0]
    if spec.topology is Topology.LADDER:
        return a[0] + 2.0 * a[1] + a[2]
    return a[0] + 2.0 * a[1]


# ---------------------------------------------------------------------------
# coupling graph


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    axis: str
    strength: float
    kind: str


@dataclass(frozen=True)
class CouplingGraph:
    n_sites: int
    bonds: tuple[Bond, ...]
    field_terms: tuple[tuple[int, float], ...] = field(default=())

    def bonds_of(self, axis: str, kind: str | None = None) -> list[Bond]:
        return [bd for bd in self.bonds
                if bd.axis == axis and (kind is None or bd.kind == kind)]


def _pair_bonds(spec: SystemSpec) -> list[tuple[int, int, float, str]]:
    """Unit-free bond list ``(i, j, multiplier, kind)`` before axis expansion."""
    n = spec.n_sites
    cyclic = spec.boundary is Boundary.CYCLIC
    out = []

    def add(i, j, w, kind, period=n, base=0):
        if j - base >= period:
            if not cyclic:
                return
            j = base + (j - base) % period
        out.append((i, j, w, kind))

    if spec.topology is Topology.CHAIN:
        (a1,) = spec.alphas
        for p in range(spec.n_pairs):
            s = 2 * p
            add(s, s + 1, 1.0, "intra")
            add(s + 1, s + 2, a1, "alpha1")
    elif spec.topology is Topology.LADDER:
        a1, a2, a3 = spec.alphas
        for p in range(spec.n_pairs):
            s = 2 * p
            add(s, s + 1, 1.0, "intra")
            add(s + 1, s + 2, a1, "alpha1")
            add(s, s + 2, a2, "alpha2")
            add(s + 1, s + 3, a2, "alpha2")
            add(s, s + 3, a3, "alpha3")
    else:
        a1, a2 = spec.alphas
        n1, n2 = spec.n_pairs
        width = 2 * n1
        for row in range(n2):
            base = row * width
            for p in range(n1):
                c = 2 * p
                add(base + c, base + c + 1, 1.0, "intra")
                add(base + c + 1, base + c + 2, a1, "alpha1", width, base)
                for cc in (c, c + 1):
                    if row + 1 < n2:
                        out.append((base + cc, base + width + cc, a2, "alpha2"))
                    elif cyclic:
                        out.append((base + cc, cc, a2, "alpha2"))
    return out


def coupling_graph(spec: SystemSpec) -> CouplingGraph:
    """Enumerate every bond and field term of the Hamiltonian.

    Terms landing on the same unordered site pair (only possible for very
    small cyclic systems) are merged by summing their strengths.
    """
    couplings = {"x": spec.jx, "y": spec.jy, "z": spec.jz}
    active = [ax for ax in "xyz" if couplings[ax] != 0.0]
    merged: dict[tuple[int, int, str], list] = {}
    for i, j, w, kind in _pair_bonds(spec):
        if i == j:
            continue
        key_ij = (min(i, j), max(i, j))
        for ax in active:
            key = key_ij + (ax,)
            if key in merged:
                merged[key][0] += w * couplings[ax]
            else:
                merged[key] = [w * couplings[ax], kind]
    bonds = tuple(Bond(i, j, ax, s, kind) for (i, j, ax), (s, kind) in merged.items())
    fields = tuple((site, spec.b) for site in range(spec.n_sites))
    return CouplingGraph(spec.n_sites, bonds, fields)


# ---------------------------------------------------------------------------
# flat key = value config format

CONFIG_KEYS = ("topology", "n_pairs", "boundary", "jx", "jy", "jz", "b",
               "alpha1", "alpha2", "alpha3")


def parse_config(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.lower()] = value
    return out


def format_config(mapping: Mapping[str, object]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in mapping.items())


def spec_to_config(spec: SystemSpec) -> dict[str, str]:
    if spec.topology is Topology.LATTICE:
        n_pairs = f"{spec.n_pairs[0]}x{spec.n_pairs[1]}"
    else:
        n_pairs = str(spec.n_pairs)
    out = {
        "topology": spec.topology.value,
        "n_pairs": n_pairs,
        "boundary": spec.boundary.value,
        "jx": repr(spec.jx),
        "jy": repr(spec.jy),
        "jz": repr(spec.jz),
        "b": repr(spec.b),
    }
    for k, a in enumerate(spec.alphas, 1):
        out[f"alpha{k}"] = repr(a)
    return out


def spec_from_config(mapping: Mapping[str, str],
                     defaults: SystemSpec | None = None) -> SystemSpec:
    """Build a spec from config keys; keys outside ``CONFIG_KEYS`` are ignored."""
    base = defaults or SystemSpec()
    topology = Topology(mapping.get("topology", base.topology.value).lower())
    if "n_pairs" in mapping:
        raw = mapping["n_pairs"].lower()
        n_pairs: int | tuple[int, int]
        n_pairs = tuple(int(v) for v in raw.split("x")) if "x" in raw else int(raw)
    elif topology is base.topology:
        n_pairs = base.n_pairs
    else:
        n_pairs = (2, 4) if topology is Topology.LATTICE else base.pair_count
    nalpha = _N_ALPHAS[topology]
    old = list(base.alphas) + [0.0] * 3
    alphas = tuple(float(mapping.get(f"alpha{k + 1}", old[k])) for k in range(nalpha))
    return SystemSpec(
        topology=topology,
        n_pairs=n_pairs,
        boundary=Boundary(mapping.get("boundary", base.boundary.value).lower()),
        jx=float(mapping.get("jx", base.jx)),
        jy=float(mapping.get("jy", base.jy)),
        jz=float(mapping.get("jz", base.jz)),
        b=float(mapping.get("b", base.b)),
        alphas=alphas,
    )
