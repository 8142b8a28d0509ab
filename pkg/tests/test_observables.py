import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lgi_optics.analytic import k_coherent, k_dephasing, k_thermal
from lgi_optics.fock import Coherent, DephasedCoherent, Fock, FockCutoff, InputSpec, Mode, Thermal
from lgi_optics.observables import (MAX_DENSE_CUTOFF, ClickPattern, ExperimentConfig, Setup,
                                    intermediate_q2, assign_q, click_distribution, evolve,
                                    intermediate_state, k_exact, projected_rho3,
                                    projected_rho3_closed_form, q2_operator, q3_operator,
                                    rho2_closed_form)

from conftest import LAMBDA_M, LN2

# (t2, t3 left, t3 right) -> (q2, q3, case, discarded)
TABLE = [
    ((False, False, False), 0, -1, "1a", False),
    ((False, False, True), 1, -1, "1b", False),
    ((False, True, False), 1, 1, "1b", False),
    ((False, True, True), 1, 0, "1b", False),
    ((True, False, False), 1, -1, "2a", True),
    ((True, False, True), 0, -1, "2b", False),
    ((True, True, False), 0, 1, "2b", False),
    ((True, True, True), 0, 0, "2b", False),
]


@pytest.mark.parametrize("clicks,q2,q3,case,discarded", TABLE)
def test_value_assignment_table(clicks, q2, q3, case, discarded):
    a = assign_q(ClickPattern(*clicks))
    assert (a.q1, a.q2, a.q3, a.case, a.discarded) == (1, q2, q3, case, discarded)


@pytest.mark.parametrize("left,right,q3", [(False, False, -1), (True, False, -1),
                                          (False, True, 1), (True, True, 0)])
def test_mirrored_q3(left, right, q3):
    assert assign_q(ClickPattern(None, left, right), mirrored=True).q3 == q3


@pytest.mark.parametrize("setup", list(Setup))
def test_pattern_index_roundtrip(setup):
    for i in range(setup.n_patterns):
        assert ClickPattern.from_index(i, setup).index == i


def test_operators_on_small_basis():
    cut = FockCutoff(2)
    states = [cut.state(i) for i in range(cut.size)]
    q2 = dict(zip(states, q2_operator(cut)))
    q3 = dict(zip(states, q3_operator(cut)))
    assert q2 == {(0, 0): 0, (0, 1): 1, (1, 0): 1, (0, 2): 1, (1, 1): 0, (2, 0): 1}
    assert q3 == {(0, 0): -1, (0, 1): -1, (1, 0): 1, (0, 2): -1, (1, 1): 0, (2, 0): 1}


@pytest.mark.parametrize("method", ["dense", "fock"])
def test_single_photon(method):
    r = k_exact(Fock(1), method=method)
    assert (r.c12, r.c23, r.c13, r.k) == pytest.approx((1, 0, -1, 2), abs=1e-12)
    assert r.violated


def test_single_photon_click_patterns():
    p = click_distribution(Fock(1), setup=Setup.DETECTOR_R)
    idx = {ClickPattern(*c).index: v for c, v in [((True, False, False), 0.5),
                                                  ((False, False, True), 0.25),
                                                  ((False, True, False), 0.25)]}
    expected = np.zeros(8)
    for i, v in idx.items():
        expected[i] = v
    assert np.allclose(p, expected, atol=1e-15)
    # without the intermediate detector the photon always leaves on the right
    p_n = click_distribution(Fock(1), setup=Setup.NO_DETECTOR)
    assert p_n[ClickPattern(None, False, True).index] == pytest.approx(1.0)


@pytest.mark.parametrize("setup", list(Setup))
def test_vacuum_never_clicks(setup):
    p = click_distribution(Fock(0), setup=setup)
    assert p[0] == pytest.approx(1.0)


@given(st.sampled_from([Coherent(1.2), DephasedCoherent(0.7), Thermal(0.9), Fock(3)]),
       st.sampled_from(list(Setup)), st.floats(0, 1))
def test_patterns_are_distributions(dist, setup, gamma):
    p = click_distribution(dist, ExperimentConfig(gamma=gamma), setup)
    assert p.min() > -1e-14
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


@given(st.sampled_from([DephasedCoherent(math.sqrt(1.7)), Thermal(1.3),
                        Thermal(0.9, ), Fock(4)]),
       st.floats(0, 1), st.sampled_from([Mode.LEFT, Mode.RIGHT]))
def test_dense_and_fock_routes_agree(dist, gamma, mode):
    spec = InputSpec(dist, mode)
    cfg = ExperimentConfig(gamma=gamma)
    a, b = evolve(spec, cfg, "dense"), evolve(spec, cfg, "fock")
    for name in ("c12", "c13", "sector_r", "sector_l"):
        assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-12)
    for setup in Setup:
        assert np.allclose(a.patterns[setup], b.patterns[setup], atol=1e-12)


@given(st.floats(0.05, 5.0), st.floats(0, 1))
def test_thermal_mode_does_not_change_k(lam, gamma):
    cfg = ExperimentConfig(gamma=gamma)
    left = k_exact(InputSpec(Thermal(lam), Mode.LEFT), cfg).k
    right = k_exact(InputSpec(Thermal(lam), Mode.RIGHT), cfg).k
    assert left == pytest.approx(right, abs=1e-12)


@given(st.floats(0, 2 * math.pi), st.floats(0.0, 1.0))
def test_coherent_phase_is_irrelevant(phi, gamma):
    cfg = ExperimentConfig(gamma=gamma)
    a = k_exact(Coherent(1.1), cfg)
    b = k_exact(Coherent(1.1 * np.exp(1j * phi)), cfg)
    assert a.k == pytest.approx(b.k, abs=1e-12)


@given(st.floats(0.0, 6.0), st.floats(0.0, 1.0))
def test_coherent_matches_closed_form(x, gamma):
    r = k_exact(Coherent(math.sqrt(x)), ExperimentConfig(gamma=gamma))
    assert r.k == pytest.approx(k_dephasing(x, gamma), abs=1e-10)
    assert abs(r.c23) < 1e-12


@given(st.floats(0.05, 5.0))
def test_thermal_matches_closed_form(lam):
    assert k_exact(Thermal(lam)).k == pytest.approx(k_thermal(lam), abs=1e-10)


def test_small_lambda_thermal_needs_large_cutoff():
    r = k_exact(Thermal(0.05))
    assert evolve(Thermal(0.05)).n_max == 552
    assert r.k == pytest.approx(k_thermal(0.05), abs=1e-10)


@pytest.mark.parametrize("mode", [Mode.LEFT, Mode.RIGHT])
def test_dephased_mode_choice_is_irrelevant(mode):
    x, g = 1.1, 0.35
    r = k_exact(Coherent(math.sqrt(x)), ExperimentConfig(gamma=g, dephase_mode=mode))
    assert r.k == pytest.approx(k_dephasing(x, g), abs=1e-12)


def test_dephasing_both_modes_acts_like_gamma_squared():
    x, g = 1.1, 0.6
    r = k_exact(Coherent(math.sqrt(x)), ExperimentConfig(gamma=g, dephase_mode=None))
    assert r.k == pytest.approx(k_dephasing(x, g * g), abs=1e-12)


def test_coherent_and_dephased_inputs_coincide():
    for x in (0.0, 0.4, 2 * LN2, 5.0):
        a = k_exact(Coherent(math.sqrt(x))).k
        b = k_exact(DephasedCoherent(math.sqrt(x))).k
        assert a == pytest.approx(b, abs=1e-13) == k_coherent(x)


def test_maximum_values():
    assert k_exact(Coherent(math.sqrt(2 * LN2))).k == pytest.approx(1.5, abs=1e-13)
    assert k_exact(Thermal(LAMBDA_M)).k == pytest.approx(1.3431457505076199, abs=1e-11)


@pytest.mark.parametrize("n", range(0, 9))
@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0])
def test_intermediate_state_closed_form(n, gamma):
    cfg = ExperimentConfig(gamma=gamma, n_max=max(n, 1), auto_cutoff=False)
    rho2 = intermediate_state(InputSpec(Fock(n)), cfg)
    assert np.allclose(rho2.matrix, rho2_closed_form(n, gamma, rho2.cutoff), atol=1e-13)


@pytest.mark.parametrize("n", range(0, 13))
def test_q2_on_intermediate_state(n):
    expected = 0.0 if n == 0 else 2.0 ** (1 - n)
    for gamma in (0.0, 0.7):
        assert intermediate_q2(n, gamma) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("n", range(0, 11))
@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0])
def test_projected_output_state(n, gamma):
    rho = projected_rho3(n, gamma)
    assert np.allclose(rho.matrix, projected_rho3_closed_form(n, gamma, rho.cutoff), atol=1e-12)


def test_dense_route_refuses_huge_cutoff():
    with pytest.raises(ValueError):
        evolve(Thermal(0.05), method="dense")
    with pytest.raises(ValueError):
        evolve(Coherent(1.0), method="fock")
    with pytest.raises(ValueError):
        evolve(Fock(1), method="magic")
    assert MAX_DENSE_CUTOFF >= 40


def test_config_validation():
    for kw in ({"gamma": 1.2}, {"epsilon": 1.0}, {"n_max": 0}):
        with pytest.raises(ValueError):
            ExperimentConfig(**kw)


def test_report_as_dict():
    d = k_exact(Fock(1)).as_dict()
    assert set(d) >= {"c12", "c23", "c13", "k", "violated", "stderr_k"}
