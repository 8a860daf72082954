import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dimermf import entanglement as ent
from dimermf.pairmf import PairState

BELL = np.array([0, 1, 1, 0]) / math.sqrt(2)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    a = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_bell_state():
    rho = np.outer(BELL, BELL)
    assert ent.concurrence(rho) == pytest.approx(1.0)
    assert ent.entropy(ent.partial_trace(rho, [0])) == pytest.approx(1.0)
    assert ent.entropy(rho) == pytest.approx(0.0, abs=1e-12)


def test_werner_concurrence():
    # Werner state p|Bell><Bell| + (1-p) I/4 has C = max(0, (3p - 1)/2)
    for p in (0.2, 1 / 3, 0.5, 0.9):
        rho = p * np.outer(BELL, BELL) + (1 - p) * np.eye(4) / 4
        assert ent.concurrence(rho) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-12)


def test_entropy_of_maximally_mixed():
    assert ent.entropy(np.eye(4) / 4) == pytest.approx(2.0)
    assert ent.entropy(np.eye(2) / 2, base=math.e) == pytest.approx(math.log(2))


def test_fidelity_limits():
    rng = np.random.default_rng(3)
    rho = random_density(rng, 4)
    assert ent.fidelity(rho, rho) == pytest.approx(1.0)
    a = np.diag([1.0, 0, 0, 0])
    b = np.diag([0, 1.0, 0, 0])
    assert ent.fidelity(a, b) == pytest.approx(0.0, abs=1e-12)
    # pure states: modulus of the overlap
    psi = np.array([1, 1, 0, 0]) / math.sqrt(2)
    assert ent.fidelity(np.outer(psi, psi), a) == pytest.approx(1 / math.sqrt(2))


def test_partial_trace_ordering():
    up, dn = np.array([0, 1.0]), np.array([1.0, 0])
    psi = np.kron(np.kron(up, dn), up)
    assert np.allclose(ent.partial_trace(psi, [1]), np.diag([1.0, 0]))
    assert np.allclose(ent.partial_trace(psi, [2, 0]), np.diag([0, 0, 0, 1.0]))


def test_validate_density_rejects():
    with pytest.raises(ValueError):
        ent.validate_density(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        ent.validate_density(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        ent.validate_density(np.eye(2))
    with pytest.raises(ValueError):
        ent.validate_density(np.ones(4) / 4)


def test_gmf_states_limits():
    # dimerized pair state is a Bell state
    rho12, rho1, rho23 = ent.gmf_reduced_states(math.pi, 0.0)
    assert ent.concurrence(rho12) == pytest.approx(1.0)
    assert np.allclose(rho1, np.eye(2) / 2)
    assert ent.concurrence(rho23) == pytest.approx(0.0, abs=1e-12)
    value, kind = ent.gmf_concurrence12(math.pi, 0.0)
    assert value == pytest.approx(1.0) and kind == "antiparallel"


def test_restore_parity_modes():
    st_ = PairState.from_angles(1.0, 0.3)
    neglect = ent.restore_parity([st_] * 6, "neglect", group=(0,))
    rho12 = ent.gmf_reduced_states(1.0, 0.3)[0]
    assert np.allclose(neglect.density, rho12, atol=1e-12)
    assert neglect.eigen_probs == pytest.approx((0.5 * (1 + abs(math.cos(1.0))),
                                                 0.5 * (1 - abs(math.cos(1.0)))))
    keep = ent.restore_parity([st_] * 6, "keep", group=(0,))
    assert keep.rest_overlap == pytest.approx(math.cos(1.0) ** 5)
    assert abs(np.trace(keep.density) - 1) < 1e-12
    with pytest.raises(ValueError):
        ent.restore_parity([st_], "other")


@given(theta=st.floats(-math.pi, math.pi), phi=st.floats(-math.pi, math.pi),
       n=st.integers(2, 8), mode=st.sampled_from(["keep", "neglect"]),
       group=st.sampled_from([(0,), (0, 1)]))
def test_restored_density_structure(theta, phi, n, mode, group):
    r = ent.restore_parity([PairState.from_angles(theta, phi)] * n, mode, group=group)
    rho = r.density
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-12
    assert ent.commutes_with_parity(rho)
    assert np.linalg.matrix_rank(rho, tol=1e-10) <= 2
    w = np.sort(np.linalg.eigvalsh(rho))[::-1][:2]
    assert np.allclose(w, r.eigen_probs, atol=1e-10)


@given(seed=st.integers(0, 2 ** 31), rank=st.integers(1, 4))
def test_measures_bounded(seed, rank):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4, rank)
    sigma = random_density(rng, 4)
    assert -1e-12 <= ent.concurrence(rho) <= 1 + 1e-12
    assert -1e-12 <= ent.entropy(rho) <= 2 + 1e-12
    f = ent.fidelity(rho, sigma)
    assert -1e-12 <= f <= 1 + 1e-12
    assert f == pytest.approx(ent.fidelity(sigma, rho), abs=1e-9)


@given(seed=st.integers(0, 2 ** 31))
def test_concurrence_invariant_under_local_unitaries(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, 4, 2)

    def unitary():
        q, r = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        return q * (np.diag(r) / np.abs(np.diag(r)))

    u = np.kron(unitary(), unitary())
    assert ent.concurrence(u @ rho @ u.conj().T) == pytest.approx(ent.concurrence(rho), abs=1e-9)


@given(seed=st.integers(0, 2 ** 31))
def test_pure_state_entropies_match(seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    assert ent.entropy(ent.partial_trace(psi, [0])) == pytest.approx(
        ent.entropy(ent.partial_trace(psi, [1, 2])), abs=1e-9)


@given(theta=st.sampled_from([0.0, math.pi, -math.pi]), phi=st.floats(-math.pi, math.pi))
def test_cross_pair_entropy_doubles_outside_window(theta, phi):
    # parity-preserving pair states: rho23 is the product of two single-spin states
    _, rho1, rho23 = ent.gmf_reduced_states(theta, phi)
    assert ent.entropy(rho23) == pytest.approx(2 * ent.entropy(rho1), abs=1e-9)
