import numpy as np
import pytest

from facar import (
    CovSpec,
    DesignInstance,
    FormatError,
    NumericError,
    ParameterError,
    RareWeakSpec,
    gen_response_linear,
    gen_response_logistic,
    load_design_csv,
    materialize_cov,
    sample_beta_fixed,
    sample_beta_rw,
    sample_design,
)


def test_autoregressive_entries():
    sigma = materialize_cov(CovSpec("autoregressive", p=3, rho=0.6))
    expected = np.array([[1.0, 0.6, 0.36], [0.6, 1.0, 0.6], [0.36, 0.6, 1.0]])
    np.testing.assert_allclose(sigma, expected, rtol=0, atol=1e-15)


def test_identity():
    np.testing.assert_array_equal(materialize_cov(CovSpec("identity", p=2)), np.eye(2))


def test_two_factor_small_expansion():
    # hand expansion at p=2: factor off-diagonals cancel (+rho/2 - rho/2),
    # leaving (1 - rho) * rho1 = 0.5 * 0.6 = 0.3
    sigma = materialize_cov(CovSpec("two_factor", p=2, rho=0.5, rho1=0.6))
    np.testing.assert_allclose(sigma, [[1.0, 0.3], [0.3, 1.0]], atol=1e-15)


@pytest.mark.parametrize("kind,kw", [
    ("identity", {}),
    ("tridiagonal", {"rho": 0.5}),
    ("autoregressive", {"rho": 0.6}),
    ("equal_correlation", {"rho": 0.6}),
    ("two_factor", {"rho": 0.5, "rho1": 0.6}),
    ("blockwise", {"h": 0.5}),
])
def test_cov_exactly_symmetric_unit_diagonal(kind, kw):
    sigma = materialize_cov(CovSpec(kind, p=8, **kw))
    assert np.array_equal(sigma, sigma.T)  # bitwise
    np.testing.assert_array_equal(np.diag(sigma), np.ones(8))


def test_blockwise_structure():
    sigma = materialize_cov(CovSpec("blockwise", p=6, h=-0.3))
    for b in range(3):
        np.testing.assert_array_equal(sigma[2 * b : 2 * b + 2, 2 * b : 2 * b + 2],
                                      [[1.0, -0.3], [-0.3, 1.0]])
    mask = np.ones((6, 6), dtype=bool)
    for b in range(3):
        mask[2 * b : 2 * b + 2, 2 * b : 2 * b + 2] = False
    assert np.all(sigma[mask] == 0.0)


@pytest.mark.parametrize("kind,kw", [
    ("tridiagonal", {"rho": 1.0}),
    ("autoregressive", {"rho": -1.0}),
    ("equal_correlation", {"rho": 0.0}),
    ("two_factor", {"rho": 1.2, "rho1": 0.5}),
    ("two_factor", {"rho": 0.5, "rho1": 1.0}),
    ("blockwise", {"h": 1.5}),
])
def test_bad_parameters_rejected(kind, kw):
    with pytest.raises(ParameterError):
        materialize_cov(CovSpec(kind, p=4, **kw))


def test_blockwise_odd_p_rejected():
    with pytest.raises(ParameterError):
        materialize_cov(CovSpec("blockwise", p=5, h=0.5))


def test_sample_design_deterministic():
    a = sample_design(np.eye(2), 4, seed=7)
    b = sample_design(np.eye(2), 4, seed=7)
    np.testing.assert_array_equal(a, b)


def test_sample_design_not_psd():
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues -1, 3
    with pytest.raises(NumericError):
        sample_design(bad, 5, seed=0)


def test_sample_design_identity_moments():
    X = sample_design(np.eye(3), 10000, seed=11)
    emp = X.T @ X / X.shape[0]
    np.testing.assert_allclose(emp, np.eye(3), atol=0.05)


def test_sample_design_ar_moments():
    sigma = materialize_cov(CovSpec("autoregressive", p=3, rho=0.6))
    X = sample_design(sigma, 20000, seed=12)
    emp = X.T @ X / X.shape[0]
    np.testing.assert_allclose(emp, sigma, atol=0.05)


def test_rw_spec_quantities():
    spec = RareWeakSpec(vartheta=0.5, r=2.0, sigma=1.0)
    assert spec.epsilon(10000) == pytest.approx(0.01)
    assert spec.tau(10000, 200) == pytest.approx(np.sqrt(4 * np.log(10000) / 200))
    assert spec.tau(10000, 200) == pytest.approx(0.4292, abs=2e-4)


def test_rw_nonzero_count_near_expectation():
    # vartheta -> 1: expected nonzeros p * p**-vartheta = p**(1-vartheta)
    spec = RareWeakSpec(vartheta=0.99, r=1.0)
    counts = [np.count_nonzero(sample_beta_rw(spec, 100, 50, seed=s)) for s in range(400)]
    assert np.mean(counts) == pytest.approx(100 ** 0.01, abs=0.25)


def test_rw_magnitudes_and_signs():
    spec = RareWeakSpec(vartheta=0.3, r=1.5, sigma=2.0)
    beta = sample_beta_rw(spec, 500, 100, seed=3)
    nz = beta[beta != 0]
    assert nz.size > 0
    np.testing.assert_allclose(np.abs(nz), spec.tau(500, 100), rtol=1e-12)
    assert (nz > 0).any() and (nz < 0).any()
    pos = sample_beta_rw(RareWeakSpec(0.3, 1.5, 2.0, "positive"), 500, 100, seed=3)
    assert np.all(pos[pos != 0] > 0)


def test_beta_fixed_support_and_variance():
    beta = sample_beta_fixed(5, 3.0, 1000, seed=0)
    np.testing.assert_array_equal(np.flatnonzero(beta), np.arange(5))
    draws = np.array([sample_beta_fixed(1, 3.0, 10, seed=s)[0] for s in range(10000)])
    assert np.var(draws) == pytest.approx(9.0, rel=0.1)


def test_beta_fixed_bounds():
    with pytest.raises(ParameterError):
        sample_beta_fixed(0, 1.0, 10, seed=0)
    with pytest.raises(ParameterError):
        sample_beta_fixed(11, 1.0, 10, seed=0)
    dense = sample_beta_fixed(10, 1.0, 10, seed=0)
    assert np.count_nonzero(dense) == 10


def test_linear_response_noiseless():
    X = np.arange(12, dtype=float).reshape(4, 3)
    np.testing.assert_array_equal(gen_response_linear(X, np.zeros(3), 0.0, seed=0), np.zeros(4))
    beta = np.array([1.0, -2.0, 0.5])
    np.testing.assert_array_equal(gen_response_linear(X, beta, 0.0, seed=0), X @ beta)


def test_linear_response_noise_variance():
    X = np.zeros((10000, 2))
    y = gen_response_linear(X, np.zeros(2), 1.0, seed=5)
    assert np.var(y) == pytest.approx(1.0, rel=0.05)


def test_logistic_response_rates():
    X = np.zeros((10000, 2))
    y = gen_response_logistic(X, np.zeros(2), 0.0, seed=6)
    assert set(np.unique(y)) <= {0.0, 1.0}
    assert np.mean(y) == pytest.approx(0.5, abs=0.02)
    y75 = gen_response_logistic(X, np.zeros(2), np.log(3.0), seed=7)
    assert np.mean(y75) == pytest.approx(0.75, abs=0.02)
    saturated = gen_response_logistic(X, np.zeros(2), 50.0, seed=8)
    assert np.all(saturated == 1.0)


def test_design_instance_support():
    inst = DesignInstance(X=np.zeros((3, 4)), y=np.zeros(3),
                          beta=np.array([0.0, 1.0, 0.0, -2.0]), sigma=1.0)
    np.testing.assert_array_equal(inst.support, [1, 3])
    with pytest.raises(ParameterError):
        DesignInstance(X=np.zeros((3, 4)), y=np.zeros(2))


def test_load_csv_basic(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\n3,4\n")
    inst = load_design_csv(path)
    np.testing.assert_array_equal(inst.X, [[1.0, 2.0], [3.0, 4.0]])
    assert inst.y is None and inst.beta is None


def test_load_csv_header_autodetect(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("gene1,gene2\r\n1,2\r\n3,4\r\n")
    inst = load_design_csv(path)
    np.testing.assert_array_equal(inst.X, [[1.0, 2.0], [3.0, 4.0]])


def test_load_csv_ragged(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(FormatError, match="row 2"):
        load_design_csv(path)


def test_load_csv_non_numeric_cell(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\n3,x\n")
    with pytest.raises(FormatError, match="row 2, column 2"):
        load_design_csv(path)


def test_load_csv_empty(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("")
    with pytest.raises(FormatError):
        load_design_csv(path)


def test_load_csv_with_response(tmp_path):
    d = tmp_path / "d.csv"
    d.write_text("1,2\n3,4\n")
    r = tmp_path / "y.csv"
    r.write_text("0.5\n-1.5\n")
    inst = load_design_csv(d, r)
    np.testing.assert_array_equal(inst.y, [0.5, -1.5])
    r_bad = tmp_path / "bad.csv"
    r_bad.write_text("0.5\n")
    with pytest.raises(FormatError):
        load_design_csv(d, r_bad)
