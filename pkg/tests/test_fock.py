import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import geom, poisson

from lgi_optics.fock import (Coherent, DephasedCoherent, Fock, FockCutoff, InputSpec, Mode,
                             Thermal, TruncationError, TwoModeState, build_input_state,
                             photon_weights, poisson_weight, required_cutoff, tail_mass,
                             thermal_weight)


@given(st.integers(1, 60).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (n + 1) * (n + 2) // 2 - 1))))
def test_index_state_roundtrip(args):
    n, i = args
    cut = FockCutoff(n)
    k, l = cut.state(i)
    assert k + l <= n
    assert cut.index(k, l) == i


def test_blocks_tile_the_basis():
    cut = FockCutoff(7)
    covered = np.concatenate([np.arange(cut.size)[sl] for _, sl in cut.blocks()])
    assert np.array_equal(covered, np.arange(cut.size))
    assert cut.size == 36
    assert np.all(cut.left_counts + cut.right_counts
                  == np.repeat(np.arange(8), np.arange(1, 9)))


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_cutoff_validation(bad):
    with pytest.raises(ValueError):
        FockCutoff(bad)


def test_index_outside_cutoff():
    with pytest.raises(IndexError):
        FockCutoff(3).index(2, 2)


@pytest.mark.parametrize("x", [0.0, 0.3, 1.386, 6.0, 20.0])
def test_poisson_weights_and_tail_against_scipy(x):
    dist = Coherent(math.sqrt(x))
    w = photon_weights(dist, 40)
    assert np.allclose(w, poisson.pmf(np.arange(41), x), rtol=1e-12, atol=1e-300)
    assert tail_mass(dist, 40) == pytest.approx(poisson.sf(40, x), rel=1e-9, abs=1e-300)
    assert poisson_weight(dist.alpha, 3) == pytest.approx(w[3], rel=1e-13)


@pytest.mark.parametrize("lam", [0.05, 0.5348, 2.0])
def test_thermal_weights_and_tail_against_scipy(lam):
    dist = Thermal(lam)
    p = 1.0 - math.exp(-lam)
    w = photon_weights(dist, 100)
    # scipy's geometric distribution starts at 1
    assert np.allclose(w, geom.pmf(np.arange(101) + 1, p), rtol=1e-12)
    assert tail_mass(dist, 100) == pytest.approx(geom.sf(101, p), rel=1e-10)
    assert thermal_weight(lam, 4) == pytest.approx(w[4], rel=1e-13)


def test_thermal_mean_photons():
    assert Thermal(math.log(2.0)).mean_photons == pytest.approx(1.0)


@pytest.mark.parametrize("make", [lambda: Thermal(0.0), lambda: Thermal(-1.0), lambda: Fock(-1),
                                  lambda: Fock(1.5)])
def test_invalid_distributions(make):
    with pytest.raises(ValueError):
        make()


def test_thermal_weight_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        thermal_weight(0.0, 1)


def test_required_cutoff_thermal_small_lambda():
    n = required_cutoff(Thermal(0.05), 1e-12)
    assert tail_mass(Thermal(0.05), n) <= 1e-12 < tail_mass(Thermal(0.05), n - 1)
    assert n == 552


@pytest.mark.parametrize("x", [0.5, 6.0, 30.0])
def test_required_cutoff_coherent_is_minimal(x):
    dist = Coherent(math.sqrt(x))
    n = required_cutoff(dist, 1e-12, minimum=1)
    assert tail_mass(dist, n) <= 1e-12 < tail_mass(dist, n - 1)


def test_required_cutoff_respects_minimum_and_fock():
    assert required_cutoff(Coherent(1.0), minimum=40) == 40
    assert required_cutoff(Fock(55), minimum=40) == 55


@pytest.mark.parametrize("dist", [Coherent(1.1 + 0.4j), DephasedCoherent(1.1), Thermal(0.7),
                                  Fock(3)])
def test_input_state_is_a_density_matrix(dist):
    rho = build_input_state(dist, 40)
    assert rho.is_hermitian()
    assert rho.trace() + rho.trace_deficit == pytest.approx(1.0, abs=1e-13)
    assert np.linalg.eigvalsh(rho.matrix).min() > -1e-13


def test_default_modes():
    assert InputSpec(Thermal(1.0)).input_mode is Mode.RIGHT
    assert InputSpec(Coherent(1.0)).input_mode is Mode.LEFT
    assert InputSpec(Thermal(1.0), Mode.LEFT).input_mode is Mode.LEFT
    rho = build_input_state(Thermal(1.0), 30)
    assert rho.element((0, 2), (0, 2)) == pytest.approx(thermal_weight(1.0, 2))
    assert rho.element((2, 0), (2, 0)) == 0


def test_coherent_state_is_pure_with_phase():
    alpha = 0.8 * np.exp(0.6j)
    rho = build_input_state(Coherent(alpha), 30)
    assert np.trace(rho.matrix @ rho.matrix).real == pytest.approx(1.0, abs=1e-12)
    expected = alpha * math.exp(-abs(alpha) ** 2)
    assert rho.element((1, 0), (0, 0)) == pytest.approx(expected, abs=1e-14)


def test_dephased_coherent_has_no_coherences():
    rho = build_input_state(DephasedCoherent(1.2), 30)
    assert np.count_nonzero(rho.matrix - np.diag(np.diag(rho.matrix))) == 0


def test_truncation_errors():
    with pytest.raises(TruncationError):
        build_input_state(Fock(41), 40)
    with pytest.raises(TruncationError):
        build_input_state(Thermal(0.05), 40)
    rho = build_input_state(Thermal(0.05), 40, allow_truncation=True)
    assert rho.trace_deficit == pytest.approx(math.exp(-41 * 0.05))


def test_state_shape_validation():
    with pytest.raises(ValueError):
        TwoModeState(FockCutoff(2), np.eye(5))
