"""Conventional single-spin mean field at zero temperature.

Each spin is the product state ``cos(theta/2)|d> + sin(theta/2)|u>`` tilted
from the field direction by ``theta`` in the x-z plane (``<s^y> = 0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entanglement import single_spin_product
from .model import Boundary, SystemSpec, effective_alpha


@dataclass(frozen=True)
class MFSolution:
    theta: float
    energy_per_pair: float
    b_c: float
    parity_broken: bool
    degenerate: bool
    no_parity_phase: bool = False

    @property
    def mean_sx(self) -> float:
        return math.sin(self.theta) / 2

    @property
    def mean_sz(self) -> float:
        return -math.cos(self.theta) / 2


def _check(spec: SystemSpec):
    if spec.boundary is not Boundary.CYCLIC:
        raise ValueError("mean field assumes a cyclic, uniform system")
    if spec.jx <= 0 or abs(spec.jy) >= spec.jx or spec.b < 0:
        raise ValueError("mean field needs a canonical spec with |Jy| < Jx, B >= 0")


def critical_field(spec: SystemSpec) -> float:
    """Field below which ``<s^x> != 0``: ``(Jx - Jz)(1 + alpha)/2``."""
    return (spec.jx - spec.jz) * (1 + effective_alpha(spec)) / 2


def product_energy(theta: float, spec: SystemSpec) -> float:
    """Energy per pair of the uniform tilted product state."""
    alpha = effective_alpha(spec)
    c, s = math.cos(theta), math.sin(theta)
    return -spec.b * c - (1 + alpha) * (spec.jx * s * s + spec.jz * c * c) / 4


def mf_solve(spec: SystemSpec) -> MFSolution:
    _check(spec)
    bc = critical_field(spec)
    if bc <= 0:
        return MFSolution(0.0, product_energy(0.0, spec), bc, False, False, True)
    cos_t = min(1.0, spec.b / bc)
    theta = math.acos(cos_t)
    broken = theta > 0
    return MFSolution(theta, product_energy(theta, spec), bc, broken, broken)


def factorizing_field(spec: SystemSpec, allow_eigenstate: bool = False) -> float | None:
    """Field at which a uniform product state is an exact eigenstate.

    Returns None when the product state is not a ground state unless
    ``allow_eigenstate`` is set and the state is still an eigenstate.
    """
    alpha = effective_alpha(spec)
    jx, jy, jz = spec.jx, spec.jy, spec.jz
    if jz == 0.0:
        if jy < 0:
            return None
        return math.sqrt(jy * jx) * (1 + alpha) / 2
    radicand = (jx - jz) * (jy - jz)
    if radicand < 0:
        return None
    value = math.sqrt(radicand) * (1 + alpha) / 2
    if jz < jy:
        return value
    return value if allow_eigenstate else None


def factorizing_status(spec: SystemSpec) -> str:
    """``"ground"``, ``"eigenstate only, not GS"`` or ``"absent"``."""
    if factorizing_field(spec) is not None:
        return "ground"
    if factorizing_field(spec, allow_eigenstate=True) is not None:
        return "eigenstate only, not GS"
    return "absent"


def mf_restored_states(theta: float):
    """Parity-restored ``(rho12, rho1)`` of the single-spin mean-field state."""
    plus = single_spin_product(theta)
    minus = single_spin_product(-theta)
    pp, mm = np.kron(plus, plus), np.kron(minus, minus)
    rho12 = 0.5 * (np.outer(pp, pp) + np.outer(mm, mm))
    rho1 = np.diag([(1 + math.cos(theta)) / 2, (1 - math.cos(theta)) / 2])
    return rho12, rho1
