import pytest

import clusterfeat as cf


def test_sampling_shapes_and_labels():
    model = cf.bsc_model(3, 12, 0.2, "parity")
    x, y = cf.sample(model, 64, seed=1)
    assert x.shape == (64, 12)
    assert y.shape == (64,)
    assert set(y.tolist()) <= {-1.0, 1.0}


def test_sampling_deterministic():
    model = cf.bsc_model(3, 12, 0.2, "parity")
    x1, y1 = cf.sample(model, 16, seed=7)
    x2, y2 = cf.sample(model, 16, seed=7)
    assert (x1 == x2).all() and (y1 == y2).all()


def test_signal_stats_homogeneous():
    model = cf.bsc_model(3, 12, 0.2, "parity")
    stats = cf.signal_stats(model)
    assert stats["v_sum"] == pytest.approx(12 * 0.36)
    assert stats["mu"] == pytest.approx(0.64)


def test_majority_coefficient_closed_form():
    # N=3 table: singletons carry 1/2, the full set -1/2
    assert cf.majority_coefficient(3, 1) == pytest.approx(0.5)
    assert cf.majority_coefficient(3, 3) == pytest.approx(-0.5)


def test_walsh_hadamard_parity():
    # parity of 2 bits: the only nonzero coefficient sits on the full set
    table = [1.0, -1.0, -1.0, 1.0]
    coeffs = cf.walsh_hadamard(table)
    assert coeffs == pytest.approx([0.0, 0.0, 0.0, 1.0])


def test_margin_values():
    assert cf.majority_margin(cf.named_target("parity", 3)) == pytest.approx(0.0)
    assert cf.majority_margin(cf.named_target("majority", 3)) == pytest.approx(1.0)
    assert cf.majority_margin(cf.named_target("dictator", 3)) == pytest.approx(2.0)


def test_population_covariance_clustering():
    model = cf.bsc_model(3, 12, 0.2, "parity")
    cov = cf.population_covariance(model)
    labels = cf.covariance_threshold_cluster(cov, cf.bsc_edge_threshold(0.2))
    truth = [i // 4 for i in range(12)]
    assert cf.partition_error(labels, truth) == 0.0


def test_spectral_cluster_population():
    model = cf.bsc_model(3, 12, 0.1, "parity")
    cov = cf.population_covariance(model)
    labels = cf.spectral_cluster(cov, 3, seed=3)
    truth = [i // 4 for i in range(12)]
    assert cf.partition_error(labels, truth) == 0.0


def test_joint_train_reduces_loss():
    model = cf.bsc_model(2, 8, 0.1, "parity")
    trace = cf.joint_train(model, hidden=64, max_samples=200000, seed=5)
    assert not trace["diverged"]
    assert trace["mse"][-1] < trace["mse"][0]


def test_hermite_coeff_variance_example():
    assert cf.hermite_coeff_variance(0, 1.0, 1.0, 2) == pytest.approx(2.0)


def test_selfcheck_clean():
    assert cf.selfcheck(0) == 0
