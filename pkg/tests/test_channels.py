import numpy as np
import pytest

from cfmonitor.channels import (
    effective_matrix_channel, effective_sap_ue_channel, los_channel, reflected_matrix_channel,
    sample_rayleigh_vector, sample_self_interference, steering_vector,
)


def test_rayleigh_moments(rng):
    g = sample_rayleigh_vector(0.3, 4, rng, size=100_000)
    assert np.mean(np.sum(np.abs(g) ** 2, axis=-1)) / 4 == pytest.approx(0.3, rel=0.02)
    assert np.var(g.real) == pytest.approx(0.15, rel=0.02)
    assert np.var(g.imag) == pytest.approx(0.15, rel=0.02)
    e = np.abs(sample_rayleigh_vector(1.0, 1, rng, size=100_000)) ** 2
    assert e.mean() == pytest.approx(1.0, rel=0.02)
    # exponential: P(|g|^2 > 1) = e^-1
    assert np.mean(e > 1) == pytest.approx(np.exp(-1), abs=0.01)


def test_self_interference(rng):
    assert not np.any(sample_self_interference(0.0, 4, rng))
    G = sample_self_interference(0.5, 4, rng, size=100_000)
    assert np.mean(np.abs(G) ** 2) == pytest.approx(0.5, rel=0.02)
    flat = G.reshape(len(G), -1)
    cross = np.mean(flat[:, 0] * np.conj(flat[:, 5]))
    assert abs(cross) < 0.02


@pytest.mark.parametrize("az,el", [(0.0, 0.3), (1.1, np.pi / 2)])
def test_steering_trivial_cases(az, el):
    assert np.allclose(steering_vector(az, el, 6), 1.0)


def test_steering_norm_and_los(rng):
    for az, el in rng.uniform(-np.pi, np.pi, size=(20, 2)):
        a = steering_vector(az, el, 8)
        assert np.sum(np.abs(a) ** 2) == pytest.approx(8.0)
        h = los_channel(2.5, a)
        assert np.sum(np.abs(h) ** 2) == pytest.approx(2.5 * 8)
    a = steering_vector(0.4, 0.2, 5)
    assert np.allclose(los_channel(1.0, a), a)
    assert np.allclose(np.abs(los_channel(4.0, a)), 2.0)


def test_effective_channels(rng):
    g = sample_rayleigh_vector(1.0, 4, rng)
    h_mt = los_channel(0.3, steering_vector(0.2, 0.7, 4))
    assert np.allclose(effective_sap_ue_channel(g, 0.5 + 0.1j, h_mt, 0.0), g)
    pure = effective_sap_ue_channel(np.zeros(4), 0.5 + 0.1j, h_mt, 7.0)
    assert np.sum(np.abs(pure) ** 2) == pytest.approx(7.0 * abs(0.5 + 0.1j) ** 2 * np.sum(np.abs(h_mt) ** 2))
    hand = np.array([g[i] + np.sqrt(7.0) * (0.5 + 0.1j) * h_mt[i] for i in range(4)])
    assert np.allclose(effective_sap_ue_channel(g, 0.5 + 0.1j, h_mt, 7.0), hand)
    with pytest.raises(ValueError):
        effective_sap_ue_channel(g, 1.0, h_mt[:3], 1.0)

    h_rx, h_tx = steering_vector(0.1, 0.2, 3), steering_vector(0.3, 0.4, 2)
    D = rng.standard_normal((3, 2)) + 0j
    assert np.allclose(effective_matrix_channel(D, h_rx, h_tx, 4.0), D + 2.0 * np.outer(h_rx, h_tx))
    assert np.allclose(reflected_matrix_channel(h_rx, h_tx, 4.0), 2.0 * np.outer(h_rx, h_tx))
    with pytest.raises(ValueError):
        effective_matrix_channel(D.T, h_rx, h_tx, 1.0)
