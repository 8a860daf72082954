import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dimermf import SystemSpec
from dimermf import exactdiag as ed
from dimermf import meanfield as mf
from dimermf import pairmf as pmf
from dimermf.pairmf import Phase


def chain(b=0.0, alpha=0.1, jy=0.5, jz=0.0, n=50):
    return SystemSpec.chain(n_pairs=n, jx=1.0, jy=jy, b=b, alpha=alpha, jz=jz)


def test_phases_along_field():
    assert pmf.pairmf_solve(chain(0.1)).phase is Phase.DIMERIZED
    assert pmf.pairmf_solve(chain(0.35)).phase is Phase.PARITY_BREAKING
    assert pmf.pairmf_solve(chain(0.6)).phase is Phase.ALIGNED


def test_limit_energies():
    # dimerized: odd pair state at -J+; aligned: -sqrt(B^2 + J-^2)
    assert pmf.pairmf_solve(chain(0.0)).energy_per_pair == pytest.approx(-0.375, abs=1e-14)
    sol = pmf.pairmf_solve(chain(1.0))
    assert sol.energy_per_pair == pytest.approx(-math.hypot(1.0, 0.125), abs=1e-12)
    assert sol.theta == 0.0 and sol.mean_sx == 0.0
    assert math.tan(sol.phi) == pytest.approx(0.125, abs=1e-12)


def test_critical_fields_closed_form():
    bc1, bc2 = pmf.critical_fields(chain())
    assert bc1 == pytest.approx(0.5 * math.sqrt(0.3), abs=1e-14)
    assert bc2 == pytest.approx(0.42107, abs=5e-6)


def test_window_closes_at_zero_alpha():
    bc1, bc2 = pmf.critical_fields(chain(alpha=0.0))
    assert bc1 == pytest.approx(bc2, abs=1e-14)
    assert bc1 == pytest.approx(0.5 * math.sqrt(0.5), abs=1e-14)


def test_window_edges_are_phase_boundaries():
    bc1, bc2 = pmf.critical_fields(chain())
    assert pmf.pairmf_solve(chain(bc1 - 1e-6)).phase is Phase.DIMERIZED
    assert pmf.pairmf_solve(chain(bc1 + 1e-6)).phase is Phase.PARITY_BREAKING
    assert pmf.pairmf_solve(chain(bc2 - 1e-6)).phase is Phase.PARITY_BREAKING
    assert pmf.pairmf_solve(chain(bc2 + 1e-6)).phase is Phase.ALIGNED


def test_factorizing_point():
    bs = mf.factorizing_field(chain())
    sol = pmf.pairmf_solve(chain(bs))
    assert math.cos(sol.theta) == pytest.approx(0.5, abs=1e-9)
    assert math.tan(sol.phi) == pytest.approx(1 / (2 * math.sqrt(2)), abs=1e-9)
    assert math.tan(sol.theta / 2) ** 2 == pytest.approx(math.sin(sol.phi), abs=1e-10)


def test_xyz_fields():
    spec = chain(jz=0.2)
    assert pmf.critical_fields(spec)[0] == pytest.approx(0.5 * math.sqrt(0.8 * 0.1), abs=1e-14)
    assert pmf.alpha_critical(spec) == pytest.approx(0.15)
    bc1, bc2 = pmf.critical_fields(spec)
    assert bc1 < bc2
    assert pmf.pairmf_solve(chain(bc2 + 1e-4, jz=0.2)).phase is Phase.ALIGNED
    assert pmf.pairmf_solve(chain(bc2 - 1e-4, jz=0.2)).phase is Phase.PARITY_BREAKING


def test_negative_jy_threshold():
    spec = chain(jy=-0.2, alpha=0.05)
    assert pmf.no_window_threshold(spec) == pytest.approx(0.1)
    assert pmf.parity_window_absent(spec)
    assert not pmf.parity_window_absent(chain(jy=-0.2, alpha=0.3))
    assert pmf.no_window_threshold(chain()) is None


def test_rejects_non_canonical():
    with pytest.raises(ValueError):
        pmf.pairmf_solve(SystemSpec.chain(jx=-1.0))
    with pytest.raises(ValueError):
        pmf.pairmf_solve(SystemSpec.chain(boundary="open"))
    with pytest.raises(ValueError):
        pmf.pairmf_solve(SystemSpec.chain(jy=1.2))


@pytest.mark.parametrize("seed", [0.3, -0.3])
def test_selfconsistent_matches_variational(seed):
    spec = chain(0.35)
    sol = pmf.pairmf_solve(spec)
    it = pmf.selfconsistent_iterate(spec, seed)
    assert it.converged
    assert it.energy_per_pair == pytest.approx(sol.energy_per_pair, abs=1e-10)
    assert abs(it.mean_sx) == pytest.approx(abs(sol.mean_sx), abs=1e-8)
    assert math.copysign(1, it.mean_sx) == math.copysign(1, seed)


def test_pair_hamiltonian_ground_state_is_stationary():
    sol = pmf.pairmf_solve(chain(0.3))
    h = pmf.pair_hamiltonian(chain(0.3), sol.mean_sx, sol.mean_sz)
    w, v = np.linalg.eigh(h)
    assert abs(abs(v[:, 0] @ sol.state.amplitudes) - 1) < 1e-8


def test_degenerate_branches_in_window():
    sol = pmf.pairmf_solve(chain(0.35))
    assert sol.degenerate and sol.mean_sx != 0
    twin = pmf.PairState.from_angles(-sol.theta, sol.phi)
    assert pmf.state_energy(chain(0.35), twin.amplitudes) == pytest.approx(
        sol.energy_per_pair, abs=1e-12)


@given(theta=st.floats(-math.pi, math.pi), phi=st.floats(-math.pi / 2, math.pi / 2),
       b=st.floats(0, 1.5), alpha=st.floats(0, 1), jy=st.floats(-0.9, 0.9),
       jz=st.floats(-0.5, 0.5))
def test_functional_matches_expectation(theta, phi, b, alpha, jy, jz):
    spec = chain(b, alpha, jy, jz)
    amp = pmf.PairState.from_angles(theta, phi).amplitudes
    assert pmf.pair_energy(theta, phi, spec) == pytest.approx(
        pmf.state_energy(spec, amp), abs=1e-12)


@given(b=st.floats(0, 1.5), alpha=st.floats(0, 1), jy=st.floats(-0.9, 0.9),
       jz=st.floats(-0.5, 0.5), theta=st.floats(-math.pi, math.pi),
       phi=st.floats(-math.pi, math.pi))
def test_solution_is_global_minimum(b, alpha, jy, jz, theta, phi):
    spec = chain(b, alpha, jy, jz)
    sol = pmf.pairmf_solve(spec)
    assert sol.energy_per_pair <= pmf.pair_energy(theta, phi, spec) + 1e-10
    assert sol.energy_per_pair <= mf.mf_solve(spec).energy_per_pair + 1e-10
    assert abs(sol.energy_per_pair - pmf.pair_energy(sol.theta, sol.phi, spec)) < 1e-12


@given(b=st.floats(0, 1.2), alpha=st.floats(0, 1), jy=st.floats(-0.9, 0.9),
       jz=st.floats(-0.5, 0.5))
def test_variational_bound_property(b, alpha, jy, jz):
    spec = chain(b, alpha, jy, jz, n=3)
    e_ed = ed.gs_observables(spec).energy / 3
    assert e_ed <= pmf.pairmf_solve(spec).energy_per_pair + 1e-9


@given(theta=st.floats(-3.1, 3.1), phi=st.floats(-1.5, 1.5))
def test_angles_round_trip(theta, phi):
    assume(abs(math.cos(theta / 2)) > 1e-6)
    t, p = pmf.PairState.from_angles(theta, phi).angles()
    back = pmf.PairState.from_angles(t, p).amplitudes
    ref = pmf.PairState.from_angles(theta, phi).amplitudes
    assert min(np.abs(back - ref).max(), np.abs(back + ref).max()) < 1e-10


@given(jy=st.floats(0.05, 0.95), alpha=st.floats(0.0, 0.45))
def test_critical_field_ordering(jy, alpha):
    spec = chain(jy=jy, alpha=alpha)
    bc1, bc2 = pmf.critical_fields(spec)
    assume(bc1 is not None)
    bs = mf.factorizing_field(spec)
    assert bc1 <= bs + 1e-12 <= bc2 + 2e-12
