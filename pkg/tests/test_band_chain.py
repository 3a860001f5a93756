import math

import numpy as np
import pytest

from specgap.band_chain import (
    BandChain,
    LimitProfile,
    StationaryDist,
    adjoint_entry,
    check_invariance,
    is_reversible,
    row,
    stationary_truncated,
    validate,
)
from specgap.errors import InconsistentTauZero, InputError, OutOfWindow, SingularSystem
from specgap.models import BdmcSpec, bdmc_chain, rw_g2d1

import oracles


def test_rows_are_lazy_and_sparse():
    calls = []

    def band(i):
        calls.append(i)
        return (0.5, 0.0, 0.5)

    ch = BandChain(1, 1, [{0: 0.5, 1: 0.5}], band)
    assert calls == []
    assert row(ch, 5) == {4: 0.5, 6: 0.5}
    assert ch.row(5) == {4: 0.5, 6: 0.5}
    assert calls == [5]  # cached
    assert ch.entry(5, 5) == 0.0
    assert ch.entry(0, -1) == 0.0


def test_band_row_mapping_and_sequence_agree():
    a = BandChain(1, 1, [{0: 0.3, 1: 0.7}], lambda i: (0.6, 0.1, 0.3))
    b = BandChain(1, 1, [{0: 0.3, 1: 0.7}], lambda i: {-1: 0.6, 0: 0.1, 1: 0.3})
    for i in range(6):
        assert a.row(i) == b.row(i)


def test_wrong_band_length_rejected():
    ch = BandChain(1, 0, [], lambda i: (0.5, 0.5))
    with pytest.raises(InputError):
        ch.row(3)


def test_boundary_row_count_checked():
    with pytest.raises(InputError):
        BandChain(1, 2, [{0: 1.0}], lambda i: (0.5, 0, 0.5))


def test_reach_includes_boundary():
    ch = BandChain(1, 1, [{0: 0.5, 4: 0.5}], lambda i: (0.5, 0, 0.5))
    assert ch.reach == 4


def test_validate_flags_each_violation_kind():
    ch = BandChain(1, 1, [{0: 0.5, 1: 0.4}], lambda i: {-1: 0.5, 0: -0.1, 1: 0.4, 3: 0.2})
    rep = validate(ch, 5)
    assert not rep.ok
    assert rep.row_sum_violations[0][0] == 0
    assert rep.negativity_violations
    assert rep.band_violations
    assert rep.checked_rows == 6


def test_validate_clean_chain():
    rep = validate(rw_g2d1(0.1, 0.1), 200)
    assert rep.ok and rep.max_row_sum_deviation <= 1e-12


def test_validate_window_must_cover_boundary():
    with pytest.raises(InputError):
        validate(rw_g2d1(0.1, 0.1), 1)


def test_limit_profile_validation():
    LimitProfile(1, np.array([0.5, 0.2, 0.3]))
    with pytest.raises(InputError):
        LimitProfile(1, np.array([0.5, 0.2, 0.2]))
    with pytest.raises(InputError):
        LimitProfile(1, np.array([1.2, -0.2, 0.0]))
    with pytest.raises(InconsistentTauZero):
        LimitProfile(1, np.array([0.5, 0.2, 0.3]), tail_ratio=0.0)
    p = LimitProfile.from_offsets({-2: 0.5, -1: 1 / 3, 1: 1 / 6})
    assert p.N == 2 and p.a(2) == 0.0 and p.a(-2) == 0.5 and p.a(7) == 0.0


def test_stationary_dist_ratio_and_V():
    pi = StationaryDist.from_weights([0.5, 0.25, 0.25])
    assert pi.normalized
    assert pi.ratio(0, 1) == pytest.approx(2.0)
    assert pi.V(1) == pytest.approx(2.0)
    with pytest.raises(OutOfWindow):
        pi.ratio(0, 3)
    with pytest.raises(InputError):
        StationaryDist.from_weights([1.0, 0.0])


def test_stationary_truncated_matches_closed_form_bdmc():
    p, q, r, r0 = 0.6, 0.25, 0.15, 0.4
    ch = bdmc_chain(BdmcSpec.constant(p, q, r, r0))
    k = 30
    pi = stationary_truncated(ch, k)
    # the augmented last state keeps the detailed-balance ratios; compare ratios
    exact = oracles.bdmc_weights_exact(p, q, r, r0, k)
    for i in range(k - 1):
        assert pi.ratio(i + 1, i) == pytest.approx(float(exact[i + 1] / exact[i]), rel=1e-12)


def test_stationary_truncated_deep_tail_stays_finite():
    # tail ratio about 0.18: weights near 1e-300 at k = 400
    pi = stationary_truncated(rw_g2d1(0.5, 0.5), 400)
    assert np.all(np.isfinite(pi.log_weights))
    assert pi.log_weights[-50] < -500
    tau = (math.sqrt(37) - 5) / 6
    assert pi.ratio(301, 300) == pytest.approx(tau, rel=1e-9)


def test_stationary_truncated_needs_window():
    with pytest.raises(InputError):
        stationary_truncated(rw_g2d1(0.5, 0.5), 3)


def test_stationary_truncated_reducible():
    ch = BandChain(1, 1, [{0: 1.0}], lambda i: (0.0, 0.5, 0.5))
    with pytest.raises(SingularSystem):
        stationary_truncated(ch, 6)


def test_adjoint_and_invariance():
    ch = rw_g2d1(0.3, 0.6)
    pi = stationary_truncated(ch, 300)
    for i in range(0, 100):
        assert check_invariance(ch, pi, i) < 1e-10
        total = sum(adjoint_entry(ch, pi, i, j) for j in range(max(0, i - 3), i + 4))
        assert total == pytest.approx(1.0, abs=1e-10)


def test_reversibility_detection():
    ch = bdmc_chain(BdmcSpec.constant(0.6, 0.25, 0.15, 0.4))
    pi = stationary_truncated(ch, 60)
    assert is_reversible(ch, pi, 50)
    rw = rw_g2d1(0.3, 0.6)
    assert not is_reversible(rw, stationary_truncated(rw, 80), 50, tol=1e-6, relative=True)


def test_row_sums_of_g2d1_match_fractions():
    ch = rw_g2d1(0.1, 0.1)
    for i in range(50):
        assert math.fsum(ch.row(i).values()) == pytest.approx(1.0, abs=1e-15)
