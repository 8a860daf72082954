import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dimermf import SystemSpec
from dimermf import exactdiag as ed
from dimermf import freefermion as ff


def chain(n=4, b=0.0, alpha=0.1, jy=0.5):
    return SystemSpec.chain(n_pairs=n, jx=1.0, jy=jy, b=b, alpha=alpha)


def test_momenta():
    assert np.array_equal(ff.momenta(4, 1), [0.5, 1.5, 2.5, 3.5])
    assert np.array_equal(ff.momenta(4, -1), [0, 1, 2, 3])


def test_rejects_unsupported():
    with pytest.raises(ValueError):
        ff.sector_energies(SystemSpec.chain(jz=0.1))
    with pytest.raises(ValueError):
        ff.sector_energies(SystemSpec.chain(boundary="open"))
    with pytest.raises(ValueError):
        ff.sector_energies(SystemSpec.ladder())


def test_gap_closes_at_exact_fields():
    spec = chain(n=8)
    bc1x, bc2x = ff.exact_critical_fields(spec)
    assert ff.lambda_closed_form(4, spec.replace(b=bc1x))[1] == pytest.approx(0, abs=1e-7)
    assert ff.lambda_closed_form(0, spec.replace(b=bc2x))[1] == pytest.approx(0, abs=1e-7)
    assert ff.lambda_closed_form(0, spec.replace(b=bc1x))[1] > 1e-3


def test_isolated_pairs():
    # alpha = 0: n independent pairs, ground energy n * min(-sqrt(B^2+J-^2), -J+)
    spec = chain(n=5, b=0.2, alpha=0.0)
    e = ff.sector_energies(spec)
    assert min(e.values()) == pytest.approx(-5 * 0.375, abs=1e-12)


def test_single_touch_without_coupling():
    spec = chain(n=4, alpha=0.0)
    found = ff.parity_crossings(spec, (0.2, 0.5))
    assert found == [pytest.approx(0.5 * math.sqrt(0.5), abs=1e-8)]


def test_crossings_n4():
    spec = chain(n=4)
    lo, hi = ff.exact_critical_fields(spec)
    found = ff.parity_crossings(spec, (lo, hi))
    assert len(found) == 4
    assert found[-1] == pytest.approx(0.5 * math.sqrt(0.5) * 1.1, abs=1e-8)
    assert ff.parity_crossings(spec, (hi + 1e-3, 2.0)) == []


def test_resolution_argument():
    with pytest.raises(ValueError):
        ff.parity_crossings(chain(), (0.0, 1.0), resolution=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", ff.ResolutionWarning)
        ff.parity_crossings(chain(), (0.0, 1.0))


def test_string_correlators_match_ed():
    spec = chain(n=5, b=0.3, alpha=0.4)
    gs = ed.gs_observables(spec)
    p = gs.parity
    for i, j in [(0, 1), (0, 5), (2, 9), (3, 7)]:
        c = ff.spin_correlators(spec, p, i, j)
        assert c["sxsx"] == pytest.approx(gs.correlator(i, j, "x", "x"), abs=1e-10)
        assert c["sysy"] == pytest.approx(gs.correlator(i, j, "y", "y"), abs=1e-10)


def test_large_chain_is_translation_invariant():
    spec = chain(n=50, b=0.35)
    assert np.allclose(ff.ground_rdm(spec, [0, 1]), ff.ground_rdm(spec, [10, 11]), atol=1e-10)
    cs = ff.contractions(spec, ff.ground_parity(spec))
    rho1 = ff.ground_rdm(spec, [7])
    assert cs.f[7, 7] == pytest.approx((rho1[1, 1] - rho1[0, 0]).real / 2, abs=1e-12)


@given(jy=st.floats(-0.95, 0.95), b=st.floats(0, 1.5), alpha=st.floats(0, 1.5),
       k=st.floats(0, 8))
def test_block_eigenvalues_property(jy, b, alpha, k):
    spec = chain(n=8, b=b, alpha=alpha, jy=jy)
    w = np.linalg.eigvalsh(ff.block_matrix(k, spec))
    lp, lm = ff.lambda_closed_form(k, spec)
    assert np.allclose(np.sort(w), np.sort([-lp, -lm, lm, lp]), atol=1e-10)


@given(n=st.sampled_from([2, 3, 4]), jy=st.floats(-0.95, 0.95), b=st.floats(-1, 1.5),
       alpha=st.floats(-1, 1.5), jx=st.sampled_from([1.0, 0.7]))
def test_matches_ed_property(n, jy, b, alpha, jx):
    spec = SystemSpec.chain(n_pairs=n, jx=jx, jy=jy, b=b, alpha=alpha)
    gs = ed.gs_observables(spec)
    e = ff.sector_energies(spec)
    for p in (1, -1):
        assert e[p] == pytest.approx(gs.sector_energies[p], abs=1e-9)
        levels = ed.lowest_states(spec, p, 2).energies
        if levels[1] - levels[0] < 1e-6:
            continue  # degenerate sector minimum: the reduced state is not unique
        for sites in ([0, 1], [1, 2], [0, 3]):
            assert np.allclose(ff.exact_rdm(spec, p, sites), gs.rdm(sites, p), atol=1e-8)
