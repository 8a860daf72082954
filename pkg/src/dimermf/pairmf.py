"""Pair (two-spin cluster) mean field at zero temperature.

The variational pair state is parameterized by ``theta`` and ``phi``::

    |0_p> = cos(theta/2) (cos(phi/2)|dd> + sin(phi/2)|uu>)
            + sin(theta/2) (|du> + |ud>) / sqrt(2)

``theta = pi`` is the dimerized (Bell pair) phase, ``theta = 0`` the partially
aligned phase and intermediate values break the S_z parity.  Internally the
solver works with ``u = cos^2(theta/2)`` where the energy is a polynomial.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .model import Boundary, SystemSpec, effective_alpha

TIE_TOL = 1e-12

# single-spin operators in the (down, up) basis
SX = np.array([[0.0, 0.5], [0.5, 0.0]])
SY = np.array([[0.0, 0.5j], [-0.5j, 0.0]])
SZ = np.diag([-0.5, 0.5])
I2 = np.eye(2)
PAIR_PARITY = np.diag([1.0, -1.0, -1.0, 1.0])


class Phase(str, enum.Enum):
    DIMERIZED = "dimerized"
    PARITY_BREAKING = "parity_breaking"
    ALIGNED = "aligned"


@dataclass(frozen=True)
class PairState:
    """Real pair amplitudes in the basis ``(dd, du, ud, uu)``."""

    amplitudes: np.ndarray

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> PairState:
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        amp = np.array([c * math.cos(phi / 2), s / math.sqrt(2), s / math.sqrt(2),
                        c * math.sin(phi / 2)])
        return cls(amp)

    def parity_image(self) -> PairState:
        return PairState(PAIR_PARITY @ self.amplitudes)

    def overlap(self, other: PairState) -> float:
        return float(np.dot(self.amplitudes, other.amplitudes))

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes)

    def angles(self) -> tuple[float, float]:
        """Return ``(theta, phi)``; ``theta`` carries the sign of the odd part."""
        a = self.amplitudes.real
        if a[0] < 0 or (a[0] == 0 and a[3] < 0):
            a = -a
        even = math.hypot(a[0], a[3])
        odd = (a[1] + a[2]) / math.sqrt(2)
        theta = 2 * math.atan2(odd, even)
        phi = 2 * math.atan2(a[3], a[0]) if even > 1e-15 else 0.0
        if phi > math.pi / 2 + 1e-12:
            phi -= 2 * math.pi
        return theta, phi


@dataclass(frozen=True)
class PairMFSolution:
    theta: float
    phi: float
    phase: Phase
    energy_per_pair: float
    degenerate: bool
    mean_sx: float
    mean_sz: float = 0.0
    fallback: bool = False
    converged: bool = True
    iterations: int = 0

    @property
    def state(self) -> PairState:
        return PairState.from_angles(self.theta, self.phi)


def _check_analytic(spec: SystemSpec):
    if spec.boundary is not Boundary.CYCLIC:
        raise ValueError("analytic pair mean field assumes a cyclic, uniform system")
    if spec.jx <= 0 or abs(spec.jy) >= spec.jx or spec.b < 0:
        raise ValueError("analytic pair mean field needs a canonical spec with |Jy| < Jx, B >= 0")
    alpha = effective_alpha(spec)
    if alpha < 0:
        raise ValueError("negative alpha: canonicalize the system first")
    return alpha


def pair_energy(theta: float, phi: float, spec: SystemSpec) -> float:
    """Variational energy per pair of the uniform pair product state."""
    alpha = effective_alpha(spec)
    jp, jm = spec.j_plus, spec.j_minus
    c2 = math.cos(theta / 2) ** 2
    s2 = 1.0 - c2
    e = -((spec.b * math.cos(phi) + jm * math.sin(phi)) * c2 + jp * s2
          + alpha * spec.jx / 8 * math.sin(theta) ** 2 * (1 + math.sin(phi)))
    if spec.jz:
        e -= spec.jz / 4 * (math.cos(theta) + alpha * math.cos(phi) ** 2 * c2 ** 2)
    return e


class _Functional:
    """Energy per pair as a function of ``u = cos^2(theta/2)`` and ``phi``."""

    def __init__(self, spec: SystemSpec, alpha: float):
        self.b, self.jx, self.jz = spec.b, spec.jx, spec.jz
        self.jp, self.jm = spec.j_plus, spec.j_minus
        self.a = alpha

    def energy(self, u, phi):
        c, s = np.cos(phi), np.sin(phi)
        return (-((self.b * c + self.jm * s) * u + self.jp * (1 - u)
                  + self.a * self.jx / 2 * u * (1 - u) * (1 + s))
                - self.jz / 4 * ((2 * u - 1) + self.a * c * c * u * u))

    def gradient(self, u, phi):
        c, s = math.cos(phi), math.sin(phi)
        a, jx, jz = self.a, self.jx, self.jz
        eu = (-((self.b * c + self.jm * s - self.jp) + a * jx / 2 * (1 - 2 * u) * (1 + s))
              - jz / 2 * (1 + a * c * c * u))
        ep = (-u * (self.jm * c - self.b * s + a * jx / 2 * (1 - u) * c)
              + jz * a / 2 * u * u * c * s)
        return np.array([eu, ep])

    def hessian(self, u, phi):
        c, s = math.cos(phi), math.sin(phi)
        a, jx, jz = self.a, self.jx, self.jz
        euu = a * jx * (1 + s) - jz / 2 * a * c * c
        eup = (-(self.jm * c - self.b * s + a * jx / 2 * (1 - 2 * u) * c)
               + jz * a * u * c * s)
        epp = (u * (self.jm * s + self.b * c + a * jx / 2 * (1 - u) * s)
               + jz * a / 2 * u * u * (c * c - s * s))
        return np.array([[euu, eup], [eup, epp]])

    def aligned_phi(self) -> float:
        """Stationary ``phi`` at ``theta = 0``: ``tan(phi) = J- / (B + a Jz cos(phi) / 2)``."""
        if self.jz == 0.0:
            return math.atan2(self.jm, self.b)

        def g(p):
            return (self.b * math.sin(p) - self.jm * math.cos(p)
                    + self.a * self.jz / 2 * math.sin(p) * math.cos(p))

        lo, hi = (0.0, math.pi / 2) if self.jm >= 0 else (-math.pi / 2, 0.0)
        if g(lo) * g(hi) > 0:
            grid = np.linspace(-math.pi / 2, math.pi / 2, 721)
            return float(grid[np.argmin(self.energy(1.0, grid))])
        return scipy.optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    def branch_update(self, x, phi):
        """One pass of the parity-breaking stationarity equations in ``x = cos(theta)``."""
        c, s = math.cos(phi), math.sin(phi)
        a = self.a
        num = 2 * (self.b * c + self.jm * s - self.jp) + self.jz * (1 + a / 2 * c * c)
        den = a * (self.jx * (1 + s) - self.jz / 2 * c * c)
        x_new = min(1.0, max(-1.0, num / den)) if den > 0 else x
        phi_new = math.atan2(self.jm + a * self.jx * (1 - x_new) / 4,
                             self.b + a * self.jz * c * (1 + x_new) / 4)
        return x_new, phi_new


def _newton(fun: _Functional, u, phi, max_iter=60):
    for _ in range(max_iter):
        g = fun.gradient(u, phi)
        if np.max(np.abs(g)) < 1e-15:
            break
        try:
            step = np.linalg.solve(fun.hessian(u, phi), g)
        except np.linalg.LinAlgError:
            return u, phi, False
        u, phi = u - step[0], phi - step[1]
        if not (0.0 < u < 1.0) or abs(phi) > math.pi:
            return u, phi, False
    g = fun.gradient(u, phi)
    return u, phi, bool(np.max(np.abs(g)) < 1e-11)


def _interior_branch(fun: _Functional, max_iter=500):
    """Parity-breaking stationary point via damped iteration plus Newton polish."""
    x, phi = 0.0, math.atan2(fun.jm + fun.a * fun.jx / 4, fun.b)
    omega, last = 1.0, 0.0
    for _ in range(max_iter):
        x_new, phi_new = fun.branch_update(x, phi)
        dx = x_new - x
        if dx * last < 0:
            omega = max(0.5 * omega, 0.05)
        last = dx
        x = x + omega * dx
        phi = phi + omega * (phi_new - phi)
        if abs(dx) < 1e-10 and abs(phi_new - phi) < 1e-10:
            break
    if abs(x) >= 1.0 - 1e-12:
        return None
    u, phi, ok = _newton(fun, (1 + x) / 2, phi)
    if ok and 0.0 < u < 1.0 and np.all(np.linalg.eigvalsh(fun.hessian(u, phi)) >= -1e-12):
        return u, phi
    return False


def _grid_minimum(fun: _Functional, n=61):
    """Dense grid over (theta, phi) followed by a bounded local polish."""
    th = np.linspace(0.0, math.pi, n)
    ph = np.linspace(-math.pi / 2, math.pi / 2, n)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    uu = np.cos(tt / 2) ** 2
    e = fun.energy(uu, pp)
    k = np.unravel_index(np.argmin(e), e.shape)
    res = scipy.optimize.minimize(
        lambda v: fun.energy(v[0], v[1]), x0=[uu[k], pp[k]],
        jac=lambda v: fun.gradient(v[0], v[1]), method="L-BFGS-B",
        bounds=[(0.0, 1.0), (-math.pi / 2, math.pi / 2)],
        options={"ftol": 1e-16, "gtol": 1e-13, "maxiter": 2000})
    u, phi = float(res.x[0]), float(res.x[1])
    if 0.0 < u < 1.0:
        u2, phi2, ok = _newton(fun, u, phi)
        if ok:
            u, phi = u2, phi2
    return u, phi


def _mean_fields(state: PairState) -> tuple[float, float]:
    a = state.amplitudes
    sx1 = float(a @ np.kron(SX, I2) @ a)
    sz1 = float(a @ np.kron(SZ, I2) @ a)
    return sx1, sz1


def _solution(fun, u, phi, fallback=False, iterations=0) -> PairMFSolution:
    u = min(1.0, max(0.0, u))
    theta = 2 * math.acos(math.sqrt(u))
    if u == 0.0:
        phase, phi = Phase.DIMERIZED, 0.0
    elif u == 1.0:
        phase = Phase.ALIGNED
    else:
        phase = Phase.PARITY_BREAKING
    state = PairState.from_angles(theta, phi)
    sx, sz = _mean_fields(state)
    return PairMFSolution(theta, phi, phase, float(fun.energy(u, phi)),
                          phase is Phase.PARITY_BREAKING, sx, sz, fallback,
                          True, iterations)


def pairmf_solve(spec: SystemSpec) -> PairMFSolution:
    """Global minimizer of the pair energy functional with phase label."""
    alpha = _check_analytic(spec)
    fun = _Functional(spec, alpha)
    phi_al = fun.aligned_phi()
    candidates = [(float(fun.energy(0.0, 0.0)), 0.0, 0.0),
                  (float(fun.energy(1.0, phi_al)), 1.0, phi_al)]
    fallback = False
    if alpha > 0:
        inner = _interior_branch(fun)
        if inner is False:
            fallback = True
            inner = _grid_minimum(fun)
            if not 0.0 < inner[0] < 1.0:
                inner = None
        if inner is not None:
            u, phi = inner
            candidates.append((float(fun.energy(u, phi)), u, phi))
    best = min(c[0] for c in candidates)
    # parity-preserving candidates come first and win ties
    for e, u, phi in candidates:
        if e <= best + TIE_TOL:
            return _solution(fun, u, phi, fallback)
    raise AssertionError("unreachable")


def critical_fields(spec: SystemSpec) -> tuple[float | None, float | None]:
    """``(B_c1, B_c2)`` bounding the parity-breaking window; None if absent."""
    alpha = effective_alpha(spec)
    jx, jy, jz = spec.jx, spec.jy, spec.jz
    r1 = (jx - jz) * (jy - jz - 2 * alpha * jx)
    bc1 = 0.5 * math.sqrt(r1) if r1 >= 0 and jx > jz else None
    if jz == 0.0:
        jp, jm = spec.j_plus, spec.j_minus
        q = jp + alpha * jx / 2
        inner = q * q + 2 * alpha * jx * jm
        bc2 = None
        if inner >= 0:
            r2 = (q + math.sqrt(inner)) ** 2 - 4 * jm * jm
            bc2 = 0.5 * math.sqrt(r2) if r2 >= 0 else None
    else:
        bc2 = _bc2_numeric(spec, alpha)
    return bc1, bc2


def _bc2_numeric(spec: SystemSpec, alpha: float | None = None) -> float | None:
    """Field where the ``theta -> 0`` limit of the parity-breaking branch is met."""
    alpha = effective_alpha(spec) if alpha is None else alpha

    def excess(b):
        fun = _Functional(spec.replace(b=b), alpha)
        phi = fun.aligned_phi()
        c, s = math.cos(phi), math.sin(phi)
        num = 2 * (b * c + fun.jm * s - fun.jp) + spec.jz * (1 + alpha / 2 * c * c)
        den = alpha * (spec.jx * (1 + s) - spec.jz / 2 * c * c)
        return num - den

    hi = 4.0 * (abs(spec.jx) + abs(spec.jy) + abs(spec.jz)) + 1.0
    lo_val, hi_val = excess(0.0), excess(hi)
    if lo_val >= 0 or hi_val <= 0:
        return None
    return scipy.optimize.brentq(excess, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def alpha_critical(spec: SystemSpec) -> float:
    """Largest alpha with a dimerized phase: ``(Jy - Jz) / (2 Jx)``."""
    return (spec.jy - spec.jz) / (2 * spec.jx)


def no_window_threshold(spec: SystemSpec) -> float | None:
    """For ``Jy < 0``: alpha at or below which no parity-breaking phase exists."""
    if spec.jy >= 0:
        return None
    return -spec.jy / (2 * spec.jx)


def parity_window_absent(spec: SystemSpec) -> bool:
    return critical_fields(spec)[1] is None


# ---------------------------------------------------------------------------
# self-consistent iteration on the 4x4 pair Hamiltonian


def pair_operator(op1: np.ndarray, op2: np.ndarray) -> np.ndarray:
    return np.kron(op1, op2)


def pair_hamiltonian(spec: SystemSpec, sx: float, sz: float = 0.0) -> np.ndarray:
    """Mean-field pair Hamiltonian with the inter-pair couplings as fields."""
    alpha = effective_alpha(spec)
    h = spec.b * (np.kron(SZ, I2) + np.kron(I2, SZ))
    h = h - spec.jx * np.kron(SX, SX) - np.real(spec.jy * np.kron(SY, SY))
    h = h - spec.jz * np.kron(SZ, SZ)
    h = h - alpha * spec.jx * sx * (np.kron(SX, I2) + np.kron(I2, SX))
    h = h - alpha * spec.jz * sz * (np.kron(SZ, I2) + np.kron(I2, SZ))
    return np.real(h)


def state_energy(spec: SystemSpec, amplitudes: np.ndarray) -> float:
    """Energy per pair of a uniform product of identical pair states."""
    alpha = effective_alpha(spec)
    a = amplitudes
    sz = float(a @ np.kron(SZ, I2) @ a)
    sx = float(a @ np.kron(SX, I2) @ a)
    intra = (spec.jx * (a @ np.kron(SX, SX) @ a)
             + spec.jy * np.real(a @ np.kron(SY, SY) @ a)
             + spec.jz * (a @ np.kron(SZ, SZ) @ a))
    return float(2 * spec.b * sz - intra - alpha * (spec.jx * sx ** 2 + spec.jz * sz ** 2))


def selfconsistent_iterate(spec: SystemSpec, seed_sx: float, tol: float = 1e-12,
                           max_iter: int = 10_000, seed_sz: float = -0.5) -> PairMFSolution:
    """Iterate diagonalize-and-update of the pair Hamiltonian to a fixed point."""
    alpha = _check_analytic(spec)
    sx, sz = float(seed_sx), float(seed_sz)
    omega, last = 1.0, 0.0
    converged = False
    vec = None
    it = 0
    for it in range(1, max_iter + 1):
        _, v = np.linalg.eigh(pair_hamiltonian(spec, sx, sz))
        vec = v[:, 0]
        new_sx, new_sz = _mean_fields(PairState(vec))
        delta = new_sx - sx
        if delta * last < 0:
            omega = 0.5
        last = delta
        if abs(delta) < tol and abs(new_sz - sz) < tol:
            sx, sz = new_sx, new_sz
            converged = True
            break
        sx += omega * delta
        sz += omega * (new_sz - sz)
    state = PairState(vec)
    theta, phi = state.angles()
    fun = _Functional(spec, alpha)
    u = math.cos(theta / 2) ** 2
    if abs(theta) < 1e-9:
        phase = Phase.ALIGNED
    elif abs(abs(theta) - math.pi) < 1e-9:
        phase = Phase.DIMERIZED
    else:
        phase = Phase.PARITY_BREAKING
    msx, msz = _mean_fields(state)
    return PairMFSolution(abs(theta), phi, phase, float(fun.energy(u, phi)),
                          phase is Phase.PARITY_BREAKING, msx, msz, False,
                          converged, it)
