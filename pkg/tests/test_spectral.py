import math

import numpy as np
import pytest

from dwigner.ensembles import (
    EnsembleConfig,
    MatrixSample,
    RegimeError,
    deformation_matrix,
    regime_of,
    sample_deformed,
    sample_wigner,
)
from dwigner.spectral import (
    Spectrum,
    eigenvalues,
    interlacing_check,
    outlier_census,
    rescaled_fluctuation,
    spectrum_to_csv,
    trace_power,
    trace_power_dense,
)


def matrix_of(arr):
    arr = np.asarray(arr, dtype=np.float64)
    return MatrixSample(dim=arr.shape[0], entries=arr, provenance=("test", 0))


def spectrum_of(values):
    vals = np.asarray(sorted(values, reverse=True), dtype=np.float64)
    return Spectrum(values=vals, dim=len(vals), residual_tol=1e-12)


def test_swap_matrix_eigenvalues():
    s = eigenvalues(matrix_of([[0, 1], [1, 0]]))
    assert np.allclose(s.values, [1.0, -1.0], atol=1e-12)


def test_rank_one_eigenvalues():
    s = eigenvalues(deformation_matrix(3, 1.5))
    assert np.allclose(s.values, [1.5, 0.0, 0.0], atol=1e-12)


def test_trace_invariance_random_sample():
    cfg = EnsembleConfig.create(n=50, sigma=1.0, theta=2.0, law="rademacher",
                                symmetry="complex", master_seed=1)
    m = sample_deformed(cfg, 0)
    s = eigenvalues(m)
    bound = 1e-10 * m.dim * float(np.max(np.abs(m.entries)))
    assert abs(math.fsum(s.values) - float(np.trace(m.entries).real)) <= bound
    assert np.all(np.diff(s.values) <= 0)


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eigenvalues(matrix_of([[0, 1], [2, 0]]))


def test_trace_power_examples():
    ident = matrix_of(np.eye(2))
    assert trace_power(ident, 3) == pytest.approx(2.0)
    swap = matrix_of([[0, 1], [1, 0]])
    assert trace_power(swap, 2) == pytest.approx(2.0)
    assert trace_power(swap, 3) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        trace_power(swap, 0)


@pytest.mark.parametrize("power", [2, 3, 4, 6, 8])
def test_trace_power_dual_route(power):
    cfg = EnsembleConfig.create(n=30, sigma=1.0, theta=2.0, law="gaussian",
                                symmetry="complex", master_seed=7)
    m = sample_deformed(cfg, 1)
    via_spectrum = trace_power(m, power)
    via_product = trace_power_dense(m, power)
    assert via_spectrum == pytest.approx(via_product, rel=1e-8)


def test_permutation_invariance():
    cfg = EnsembleConfig.create(n=20, sigma=1.0, theta=1.0, law="uniform-symmetric",
                                symmetry="real", master_seed=3)
    m = sample_deformed(cfg, 0)
    rng = np.random.Generator(np.random.Philox(key=np.array([1, 2], dtype=np.uint64)))
    perm = rng.permutation(20)
    permuted = MatrixSample(dim=20, entries=m.entries[np.ix_(perm, perm)],
                            provenance=("test", 0))
    assert np.allclose(eigenvalues(m).values, eigenvalues(permuted).values, atol=1e-10)


def test_interlacing_zero_wigner():
    # W = 0: deformed spectrum is (theta, 0, ..., 0), base is all zeros
    n, theta = 5, 2.0
    deformed = eigenvalues(deformation_matrix(n, theta))
    base = spectrum_of([0.0] * n)
    assert interlacing_check(deformed, base).ok


def test_interlacing_identical_spectra():
    s = spectrum_of([3.0, 1.0, -2.0])
    assert interlacing_check(s, s).ok


def test_interlacing_paired_draws():
    cfg = EnsembleConfig.create(n=50, sigma=1.0, theta=2.0, law="gaussian",
                                symmetry="complex", master_seed=11)
    for i in range(20):
        w = sample_wigner(cfg, i)
        scaled = MatrixSample(dim=50, entries=w.entries / math.sqrt(50), provenance=("t", i))
        deformed = MatrixSample(dim=50, entries=scaled.entries + cfg.theta / 50,
                                provenance=("t", i))
        assert interlacing_check(eigenvalues(deformed), eigenvalues(scaled)).ok


def test_interlacing_detects_violation():
    deformed = spectrum_of([1.0, 0.5])
    base = spectrum_of([2.0, 0.0])
    report = interlacing_check(deformed, base)
    assert not report.ok and report.max_violation > 0.9


def test_interlacing_dimension_mismatch():
    with pytest.raises(ValueError):
        interlacing_check(spectrum_of([1.0]), spectrum_of([1.0, 0.0]))


def test_rescaled_fluctuation_supercritical():
    n = 100
    reg = regime_of(2.0, 1.0)
    rho = reg.rho_theta
    s = spectrum_of([rho] + [0.1] * (n - 1))
    fl = rescaled_fluctuation(s, reg, n, 1)
    assert fl.sqrt_n_dev[0] == pytest.approx(0.0, abs=1e-12)
    assert fl.xi[0] == pytest.approx(0.0, abs=1e-12)

    s2 = spectrum_of([rho * (1 + 1 / (2 * math.sqrt(n)))] + [0.1] * (n - 1))
    fl2 = rescaled_fluctuation(s2, reg, n, 1)
    assert fl2.xi[0] == pytest.approx(1.0)
    # lambda recoverable from xi
    lam = rho * (1 + fl2.xi[0] / (2 * math.sqrt(n)))
    assert lam == pytest.approx(float(s2.values[0]), rel=1e-14)


def test_rescaled_fluctuation_subcritical():
    n = 64
    reg = regime_of(0.5, 1.0)
    s = spectrum_of([2.0] + [0.0] * 3 + [-1.0])
    fl = rescaled_fluctuation(s, reg, n, 2)
    assert fl.edge_u[0] == pytest.approx(0.0, abs=1e-12)
    assert fl.xi is None
    with pytest.raises(RegimeError):
        fl.require_xi()
    # tau rescales negative eigenvalues around -2 sigma
    assert fl.tau[0] == pytest.approx(n ** (2 / 3) * (-1.0 + 2.0))


def test_outlier_census():
    n = 10
    s = spectrum_of([2.5] + [0.0] * (n - 1))
    assert outlier_census(s, 2.0, 1.0, n) == (0, 0)

    s2 = spectrum_of([2.5, 2.3] + [0.0] * (n - 2))  # threshold is 2.25
    count_mid, _ = outlier_census(s2, 2.0, 1.0, n)
    assert count_mid == 1

    with pytest.raises(RegimeError):
        outlier_census(s, 0.5, 1.0, n)


def test_spectrum_csv():
    text = spectrum_to_csv(spectrum_of([1.5, -0.5]))
    assert text == "index,lambda\n1,1.5\n2,-0.5\n"
