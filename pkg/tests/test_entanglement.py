"""Concurrence, partial transpose and phase-averaged pair states.

The averaged reduced states are cross-checked against the dense engine:
build a noisy chain realization, partial-trace, average over samples.
"""

import math

import numpy as np
import pytest

from noisycluster.clusters import build_cluster, chain_graph
from noisycluster.entanglement import (
    PairAnalysis,
    averaged_pair_state,
    concurrence,
    pair_scan,
    ppt_min_eigenvalue,
    sampled_mean_concurrence,
)
from noisycluster.phasenoise import PhaseDistribution
from noisycluster.states import DensityMatrix, PureState, partial_trace, pure_to_density

SEED = 777


def bell_density():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / math.sqrt(2.0)
    return pure_to_density(PureState(2, v))


def werner(w):
    return DensityMatrix(2, w * bell_density().entries + (1.0 - w) * np.eye(4) / 4.0)


def random_two_qubit_density(rng, rank):
    rho = np.zeros((4, 4), dtype=complex)
    weights = rng.dirichlet(np.ones(rank))
    for p in weights:
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        rho += p * np.outer(v, v.conj())
    return DensityMatrix(2, rho)


# --- concurrence and partial transpose ---


def test_concurrence_bell_and_product():
    assert concurrence(bell_density()) == pytest.approx(1.0, abs=1e-10)
    product = pure_to_density(PureState(2, np.array([1.0, 0, 0, 0], dtype=complex)))
    assert concurrence(product) == pytest.approx(0.0, abs=1e-10)


def test_concurrence_pure_state_formula():
    # C = 2 |ad - bc| for amplitudes (a, b, c, d)
    rng = np.random.default_rng(SEED)
    for _ in range(10):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        expect = 2.0 * abs(v[0] * v[3] - v[1] * v[2])
        assert concurrence(pure_to_density(PureState(2, v))) == pytest.approx(
            expect, abs=1e-9
        )


def test_werner_state_closed_forms():
    for w in np.linspace(0.0, 1.0, 11):
        rho = werner(float(w))
        assert concurrence(rho) == pytest.approx(max(0.0, (3.0 * w - 1.0) / 2.0), abs=1e-9)
        assert ppt_min_eigenvalue(rho) == pytest.approx((1.0 - 3.0 * w) / 4.0, abs=1e-9)


def test_ppt_bell():
    assert ppt_min_eigenvalue(bell_density()) == pytest.approx(-0.5, abs=1e-10)


def test_ppt_and_concurrence_agree_on_entanglement():
    # for two qubits both criteria are necessary and sufficient
    rng = np.random.default_rng(SEED + 1)
    checked = 0
    for _ in range(40):
        rho = random_two_qubit_density(rng, int(rng.integers(1, 5)))
        c = concurrence(rho)
        e = ppt_min_eigenvalue(rho)
        if c > 1e-7 or e < -1e-7:  # skip numerically borderline states
            assert (c > 1e-7) == (e < -1e-7)
            checked += 1
    assert checked > 10


def test_two_qubit_guards():
    one = DensityMatrix(1, np.eye(2) / 2.0)
    with pytest.raises(ValueError, match="two qubits"):
        concurrence(one)
    with pytest.raises(ValueError, match="two qubits"):
        ppt_min_eigenvalue(one)


# --- averaged pair states ---


def test_averaged_pair_state_fixed_matches_dense_trace():
    # a point distribution reduces the average to one noisy realization
    for n in (3, 4, 6):
        for theta in (0.0, 0.8, 2.5):
            g = chain_graph(n, [theta] * (n - 1))
            state = build_cluster(g)
            for pair in ((1, 2), (1, n), (2, n - 1) if n > 3 else (2, 3)):
                expect = partial_trace(state, pair).entries
                got = averaged_pair_state(n, PhaseDistribution.fixed(theta), pair)
                np.testing.assert_allclose(got.entries, expect, atol=1e-10)


def test_averaged_pair_state_matches_sampled_average():
    n, pair = 4, (2, 4)
    dist = PhaseDistribution.gaussian(0.6)
    rng = np.random.default_rng(SEED + 2)
    acc = np.zeros((4, 4), dtype=complex)
    n_samples = 3000
    for _ in range(n_samples):
        thetas = [dist.sample(rng) for _ in range(n - 1)]
        state = build_cluster(chain_graph(n, thetas))
        acc += partial_trace(state, pair).entries
    acc /= n_samples
    exact = averaged_pair_state(n, dist, pair).entries
    # entrywise Monte Carlo tolerance, generous at 3000 samples
    assert np.max(np.abs(acc - exact)) < 0.05


def test_averaged_pair_state_ideal_chain_pairs_unentangled():
    ideal = PhaseDistribution.fixed(0.0)
    for n in (3, 5):
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                rho = averaged_pair_state(n, ideal, (i, j))
                assert concurrence(rho) <= 1e-9
                assert ppt_min_eigenvalue(rho) >= -1e-9


def test_averaged_pair_state_guards():
    d = PhaseDistribution.gaussian(0.5)
    with pytest.raises(ValueError, match="chain size"):
        averaged_pair_state(1, d, (1, 2))
    with pytest.raises(ValueError, match="chain size"):
        averaged_pair_state(17, d, (1, 2))
    with pytest.raises(ValueError, match="pair"):
        averaged_pair_state(5, d, (3, 3))
    with pytest.raises(ValueError, match="pair"):
        averaged_pair_state(5, d, (2, 6))


def test_nearest_neighbor_symmetry():
    for n in (4, 6):
        for sigma in (0.4, 1.0):
            d = PhaseDistribution.gaussian(sigma)
            first = concurrence(averaged_pair_state(n, d, (1, 2)))
            last = concurrence(averaged_pair_state(n, d, (n - 1, n)))
            assert first == pytest.approx(last, abs=1e-10)


def test_pair_scan_shape_and_consistency():
    n = 4
    scans = pair_scan(n, PhaseDistribution.gaussian(0.5))
    assert [a.pair for a in scans] == [
        (i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)
    ]
    for a in scans:
        assert isinstance(a, PairAnalysis)
        assert a.entangled == (a.ppt_min_eig < -1e-9)
        rho = averaged_pair_state(n, PhaseDistribution.gaussian(0.5), a.pair)
        assert a.concurrence == pytest.approx(concurrence(rho), abs=1e-12)


def test_pair_scan_size_cap():
    with pytest.raises(ValueError, match="capped"):
        pair_scan(11, PhaseDistribution.gaussian(0.5))


# --- sampled concurrence ---


def test_sampled_mean_concurrence_deterministic():
    d = PhaseDistribution.gaussian(0.7)
    a = sampled_mean_concurrence(4, d, (1, 2), 25, seed=5)
    b = sampled_mean_concurrence(4, d, (1, 2), 25, seed=5)
    assert a == b
    c = sampled_mean_concurrence(4, d, (1, 2), 25, seed=6)
    assert a != c


def test_sampled_mean_concurrence_fixed_dist():
    # every draw is the same realization, so the mean equals the averaged case
    d = PhaseDistribution.fixed(1.2)
    got = sampled_mean_concurrence(4, d, (1, 2), 3, seed=1)
    expect = concurrence(averaged_pair_state(4, d, (1, 2)))
    assert got == pytest.approx(expect, abs=1e-12)


def test_sampled_mean_concurrence_guard():
    with pytest.raises(ValueError, match="at least one sample"):
        sampled_mean_concurrence(4, PhaseDistribution.gaussian(0.5), (1, 2), 0, seed=1)
