import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specgap.eigen import (
    Spectrum,
    balance,
    eigenvalues,
    hessenberg,
    spectrum_checks,
    symmetric_tridiagonal_eigenvalues,
)
from specgap.errors import InputError
from specgap.models import BdmcSpec, bdmc_chain, linear_geometric_target, mh_chain, proposal_rw, rw_g2d1
from specgap.truncation import truncate

import oracles


def _stochastic(rng, n):
    a = rng.random((n, n)) ** 3
    return a / a.sum(axis=1, keepdims=True)


def test_diagonal():
    s = eigenvalues(np.diag([0.2, 0.9, 1.0]))
    assert sorted(s.values.real) == pytest.approx([0.2, 0.9, 1.0], abs=1e-15)


def test_rotation():
    s = eigenvalues([[0.0, -1.0], [1.0, 0.0]])
    assert sorted(s.values, key=lambda z: z.imag) == pytest.approx([-1j, 1j], abs=1e-15)


def test_one_by_one():
    s = eigenvalues([[0.3]])
    assert s.values[0] == 0.3 and len(s) == 1


def test_rejects_bad_input():
    with pytest.raises(InputError):
        eigenvalues(np.ones((2, 3)))
    with pytest.raises(InputError):
        eigenvalues([[np.nan]])
    with pytest.raises(InputError):
        eigenvalues(np.eye(5), max_order=4)


@pytest.mark.parametrize("seed", range(20))
def test_small_stochastic_matches_charpoly_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 4
    m = _stochastic(rng, n)
    got = eigenvalues(m, tridiagonal="never").values
    ref = oracles.charpoly_roots(m)
    assert oracles.match_error(got, ref) <= 1e-10
    assert np.min(np.abs(got - 1.0)) <= 1e-12


@pytest.mark.parametrize("n", [5, 12, 30])
def test_nonsymmetric_against_mpmath(n):
    rng = np.random.default_rng(n)
    m = rng.standard_normal((n, n))
    got = np.sort_complex(eigenvalues(m).values)
    ref = np.sort_complex(np.array(oracles.mp_eigenvalues(m)))
    assert np.max(np.abs(got - ref)) <= 1e-9 * max(1.0, np.abs(ref).max())


def test_defective_and_repeated():
    jordan = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 2.0]])
    assert np.allclose(eigenvalues(jordan).values, 2.0, atol=1e-5)
    assert np.allclose(eigenvalues(np.eye(6)).values, 1.0)
    zero = eigenvalues(np.zeros((4, 4)))
    assert np.allclose(zero.values, 0.0)


def test_trace_and_det_gaps_small():
    rng = np.random.default_rng(3)
    m = rng.random((8, 8))
    s = eigenvalues(m)
    assert s.trace_gap <= 1e-8 * 8 * np.abs(m).sum(axis=1).max()
    assert s.det_gap is not None and s.det_gap <= 1e-6
    d = spectrum_checks(m, s)
    assert d.ok and d.pairing_violations == 0
    assert abs(float(oracles.leibniz_det(m)) - np.prod(s.values).real) <= 1e-9


def test_spectrum_checks_flags_perturbation():
    m = np.array([[0.7, 0.3], [0.4, 0.6]])
    s = eigenvalues(m)
    assert spectrum_checks(m, s).ok
    assert spectrum_checks(m, s).perron_distance <= 1e-12
    bad = Spectrum(s.values + 0.01, s.iterations, 0.0, None)
    d = spectrum_checks(m, bad)
    assert not d.ok and d.trace_gap > 0.01


def test_balance_is_similarity():
    rng = np.random.default_rng(7)
    d = 2.0 ** rng.integers(-20, 20, size=10)
    m = rng.random((10, 10))
    skewed = m * (d[None, :] / d[:, None])
    b, scale = balance(skewed)
    assert np.allclose(b, skewed * (scale[None, :] / scale[:, None]))
    assert np.abs(b).max() < np.abs(skewed).max()


def test_hessenberg_shape_and_spectrum():
    rng = np.random.default_rng(11)
    m = rng.random((9, 9))
    h = hessenberg(m)
    assert np.all(np.tril(h, -2) == 0)
    assert np.trace(h) == pytest.approx(np.trace(m))
    assert np.linalg.norm(h) == pytest.approx(np.linalg.norm(m))


def test_tridiagonal_bisection_matches_general_path():
    ch = mh_chain(linear_geometric_target(0.5), proposal_rw(0.5, 0.3))
    m = truncate(ch, 60)
    fast = eigenvalues(m)
    slow = eigenvalues(m, tridiagonal="never")
    assert fast.method == "tridiagonal-bisection" and slow.method == "francis"
    assert np.allclose(np.sort(fast.values.real), np.sort(slow.values.real), atol=1e-8)


def test_symmetric_tridiagonal_direct():
    d = np.array([2.0, 2.0, 2.0, 2.0])
    e2 = np.ones(3)
    vals, _ = symmetric_tridiagonal_eigenvalues(d, e2)
    k = np.arange(1, 5)
    assert vals == pytest.approx(np.sort(2 + 2 * np.cos(k * np.pi / 5)), abs=1e-14)


def test_reversible_truncation_has_real_spectrum():
    ch = bdmc_chain(BdmcSpec.constant(0.6, 0.25, 0.15, 0.4))
    s = eigenvalues(truncate(ch, 40), tridiagonal="never")
    assert np.abs(s.values.imag).max() <= 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_stochastic_perron_root(n, seed):
    m = _stochastic(np.random.default_rng(seed), n)
    v = eigenvalues(m).values
    assert np.abs(v).max() == pytest.approx(1.0, abs=1e-8)
    assert np.min(np.abs(v - 1.0)) <= 1e-8


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**31 - 1))
def test_diagonal_similarity_invariance(n, seed):
    rng = np.random.default_rng(seed)
    m = _stochastic(rng, n)
    d = np.exp(rng.uniform(-3, 3, n))
    a = np.sort_complex(eigenvalues(m).values)
    b = np.sort_complex(eigenvalues(m * (d[None, :] / d[:, None])).values)
    if n <= 6:
        assert oracles.match_error(a, b) <= 1e-8
    else:
        assert np.allclose(np.sort(np.abs(a)), np.sort(np.abs(b)), atol=1e-8)


def test_g2d1_truncation_against_mpmath():
    m = truncate(rw_g2d1(0.5, 0.5), 40)
    s = 0.4248063
    scaled = m * np.exp((np.arange(40)[:, None] - np.arange(40)[None, :]) * np.log(s))
    got = np.sort_complex(eigenvalues(scaled).values)
    ref = np.sort_complex(np.array(oracles.mp_eigenvalues(m)))
    assert np.max(np.abs(got - ref)) <= 1e-8
