import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dimermf import SystemSpec
from dimermf import entanglement as ent
from dimermf import meanfield as mf


def chain(b=0.0, alpha=0.1, jy=0.5, jz=0.0):
    return SystemSpec.chain(n_pairs=50, jx=1.0, jy=jy, b=b, alpha=alpha, jz=jz)


def test_critical_field():
    assert mf.critical_field(chain()) == pytest.approx(0.55)
    assert mf.critical_field(chain(jz=0.2)) == pytest.approx(0.44)


def test_solution_branches():
    low = mf.mf_solve(chain(0.0))
    assert low.theta == pytest.approx(math.pi / 2)
    assert low.energy_per_pair == pytest.approx(-1.1 / 4)
    high = mf.mf_solve(chain(0.8))
    assert high.theta == 0.0 and not high.parity_broken
    assert high.energy_per_pair == pytest.approx(-0.8)
    mid = mf.mf_solve(chain(0.275))
    assert math.cos(mid.theta) == pytest.approx(0.5)
    assert mid.mean_sx == pytest.approx(math.sin(mid.theta) / 2)


def test_factorizing_field_cases():
    assert mf.factorizing_field(chain()) == pytest.approx(0.5 * math.sqrt(0.5) * 1.1)
    assert mf.factorizing_field(chain(jz=0.2)) == pytest.approx(0.5 * math.sqrt(0.8 * 0.3) * 1.1)
    assert mf.factorizing_field(chain(jy=-0.2)) is None
    # Jy < Jz < Jx: no real solution
    assert mf.factorizing_status(chain(jz=0.7)) == "absent"
    # Jz above both couplings: eigenstate but not a ground state
    spec = SystemSpec.chain(n_pairs=50, jx=1.0, jy=0.5, jz=1.5)
    assert mf.factorizing_field(spec) is None
    assert mf.factorizing_field(spec, allow_eigenstate=True) == pytest.approx(
        0.5 * math.sqrt(0.5) * 1.1)
    assert mf.factorizing_status(spec) == "eigenstate only, not GS"
    assert mf.factorizing_status(chain()) == "ground"


def test_rejects_open_boundary():
    with pytest.raises(ValueError):
        mf.mf_solve(SystemSpec.chain(boundary="open"))


@given(theta=st.floats(0, math.pi))
def test_restored_states_are_separable(theta):
    rho12, rho1 = mf.mf_restored_states(theta)
    assert abs(np.trace(rho12) - 1) < 1e-12
    assert ent.concurrence(rho12) < 1e-10
    assert np.allclose(ent.partial_trace(rho12, [0]), rho1, atol=1e-12)
    assert ent.commutes_with_parity(rho1)


@given(b=st.floats(0, 2), alpha=st.floats(0, 1), jy=st.floats(-0.9, 0.9),
       jz=st.floats(-0.5, 0.5), theta=st.floats(0, math.pi))
def test_minimizes_product_energy(b, alpha, jy, jz, theta):
    spec = chain(b, alpha, jy, jz)
    sol = mf.mf_solve(spec)
    assert sol.energy_per_pair <= mf.product_energy(theta, spec) + 1e-12
