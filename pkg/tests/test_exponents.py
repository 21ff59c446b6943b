"""Exponent optimizers: closed forms, search anchors, bounds, and witnesses."""

import numpy as np
import pytest

from privexp import (
    AlphabetMismatch,
    Channel,
    DimensionMismatch,
    DomainError,
    JointPmf,
    NonpositiveAlternative,
    SearchConfig,
    binary_entropy,
    binary_tai_exponent,
    chain_joint,
    corollary2_bound,
    mutual_information,
    star,
    tai_exponent,
    theorem1_lower_bound,
    zero_rate_exponent,
)

# search values frozen from deterministic runs of this package's optimizer;
# the (1, 1) anchor coincides with the closed form 1 - h_b(0.1)
TAI_R1_L1 = 0.5310044064107188
TAI_R05_L05 = 0.17854234231423172
THM1_PRODUCT_R1_L1 = 0.5310044064107192
THM1_PRODUCT_R05_L05 = 0.16115613439575888
# independent numeric minimization of the zero-rate objective agrees to 5e-17
ZERO_RATE_MIXED = 0.15521622802476653


def dsbs(eps: float) -> JointPmf:
    half = eps / 2.0
    return JointPmf(np.array([[0.5 - half, half], [half, 0.5 - half]]), ("X", "Y"))


# ---------------------------------------------------------------------------
# binary closed form


def test_closed_form_full_budgets():
    assert binary_tai_exponent(0.1, 1.0, 1.0) == pytest.approx(
        1.0 - binary_entropy(0.1), abs=1e-14
    )


def test_closed_form_zero_budget_kills_exponent():
    assert binary_tai_exponent(0.1, 0.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    assert binary_tai_exponent(0.1, 1.0, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_closed_form_symmetric_and_monotone():
    grid = [0.1, 0.3, 0.6, 1.0]
    for r in grid:
        for l in grid:
            assert binary_tai_exponent(0.1, r, l) == pytest.approx(
                binary_tai_exponent(0.1, l, r), abs=1e-14
            )
    vals = [binary_tai_exponent(0.1, r, 0.5) for r in grid]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_closed_form_domain_checks():
    with pytest.raises(DomainError):
        binary_tai_exponent(1.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        binary_tai_exponent(0.1, -0.2, 1.0)


# ---------------------------------------------------------------------------
# full search


def test_search_attains_closed_form_at_full_budgets():
    res = tai_exponent(dsbs(0.1), 1.0, 1.0)
    assert res.theta == pytest.approx(TAI_R1_L1, abs=1e-9)
    assert res.bound_kind == "exact"
    assert res.rate_mi <= 1.0 + 1e-9
    assert res.leak_mi <= 1.0 + 1e-9


def test_search_frozen_midpoint_anchor():
    res = tai_exponent(dsbs(0.1), 0.5, 0.5)
    assert res.theta == pytest.approx(TAI_R05_L05, abs=1e-9)
    # reported witness channels must actually satisfy both budgets
    chain = chain_joint(dsbs(0.1), res.mechanism, res.quantizer)
    assert mutual_information(chain.marginal("X", "Xh"), "X") <= 0.5 + 1e-6
    assert mutual_information(chain.marginal("U", "Xh")) <= 0.5 + 1e-6


def test_search_vanishes_at_zero_budgets():
    assert tai_exponent(dsbs(0.1), 0.0, 1.0).theta <= 1e-6
    assert tai_exponent(dsbs(0.1), 1.0, 0.0).theta <= 1e-6


def test_search_dominates_closed_form_on_sample_points():
    for r, l in [(0.25, 0.3), (0.5, 0.7)]:
        assert tai_exponent(dsbs(0.1), r, l).theta >= (
            binary_tai_exponent(0.1, r, l) - 1e-2
        )


def test_asymmetric_mechanism_beats_symmetric_closed_form():
    """A hand-built feasible point exceeds the all-symmetric value at R >> L.

    The mechanism leaks through a rare output symbol, leaving H(Xh) below the
    rate budget so a near-lossless ternary quantizer fits. The optimizer must
    do at least as well as this witness.
    """
    rate, leak = 0.5, 0.1
    mech = Channel(np.array([[0.0, 1.0], [0.18618897, 0.81381103]]))
    quant = Channel(np.array([[0.0, 1.0 / 3.0, 2.0 / 3.0], [1.0, 0.0, 0.0]]))
    chain = chain_joint(dsbs(0.1), mech, quant)
    leak_mi = mutual_information(chain.marginal("X", "Xh"), "X")
    rate_mi = mutual_information(chain.marginal("U", "Xh"))
    value = mutual_information(chain.marginal("U", "Y"))
    assert leak_mi <= leak
    assert rate_mi <= rate
    closed = binary_tai_exponent(0.1, rate, leak)
    assert value >= closed + 1.4e-2
    assert tai_exponent(dsbs(0.1), rate, leak).theta >= value - 5e-4


def test_bsc_restricted_search_recovers_closed_form():
    for r, l in [(0.5, 0.1), (0.5, 0.5)]:
        got = tai_exponent(dsbs(0.1), r, l, SearchConfig(restrict_bsc=True)).theta
        assert got == pytest.approx(binary_tai_exponent(0.1, r, l), abs=1e-9)


def test_search_monotone_in_budgets():
    lo = tai_exponent(dsbs(0.1), 0.25, 0.25).theta
    mid = tai_exponent(dsbs(0.1), 0.5, 0.5).theta
    hi = tai_exponent(dsbs(0.1), 1.0, 1.0).theta
    assert lo <= mid + 1e-9 <= hi + 2e-9


def test_search_input_validation():
    with pytest.raises(DomainError):
        tai_exponent(dsbs(0.1), -1.0, 0.5)
    three = JointPmf(np.full((2, 2, 2), 0.125), ("X", "Y", "Z"))
    with pytest.raises(DimensionMismatch):
        tai_exponent(three, 1.0, 1.0)


# ---------------------------------------------------------------------------
# lower bound against a general alternative


def test_lower_bound_vanishes_when_laws_coincide():
    res = theorem1_lower_bound(dsbs(0.1), dsbs(0.1), 1.0, 1.0)
    assert res.bound_kind == "lower_bound"
    assert res.theta <= 1e-9


def test_lower_bound_recovers_independence_case(product_uniform):
    res = theorem1_lower_bound(dsbs(0.1), product_uniform, 1.0, 1.0)
    assert res.theta == pytest.approx(THM1_PRODUCT_R1_L1, abs=1e-9)
    assert res.theta == pytest.approx(TAI_R1_L1, abs=1e-6)


def test_lower_bound_is_below_the_search_value(product_uniform):
    res = theorem1_lower_bound(dsbs(0.1), product_uniform, 0.5, 0.5)
    assert res.theta == pytest.approx(THM1_PRODUCT_R05_L05, abs=1e-9)
    assert res.theta <= TAI_R05_L05 + 1e-9
    assert res.inner_witness is not None


def test_lower_bound_validation(product_uniform):
    with pytest.raises(DomainError):
        theorem1_lower_bound(dsbs(0.1), product_uniform, -0.5, 0.5)
    wide = JointPmf(np.full((2, 3), 1.0 / 6.0), ("X", "Y"))
    with pytest.raises(AlphabetMismatch):
        theorem1_lower_bound(dsbs(0.1), wide, 0.5, 0.5)


# ---------------------------------------------------------------------------
# unconstrained-leak bound and zero-rate floor


def test_unconstrained_leak_bound_recovers_full_budget_value(product_uniform):
    res = corollary2_bound(dsbs(0.1), product_uniform, 1.0)
    assert res.theta == pytest.approx(THM1_PRODUCT_R1_L1, abs=1e-9)
    assert res.leak is None


def test_unconstrained_leak_bound_vanishes_when_laws_coincide():
    assert corollary2_bound(dsbs(0.1), dsbs(0.1), 1.0).theta <= 1e-9


def test_zero_rate_vanishes_for_independence_instances(dsbs01, product_uniform):
    assert zero_rate_exponent(dsbs01, product_uniform).theta == pytest.approx(
        0.0, abs=1e-12
    )


def test_zero_rate_mixed_instance_anchor(product_uniform):
    skew = JointPmf(np.outer([0.7, 0.3], [0.4, 0.6]), ("X", "Y"))
    res = zero_rate_exponent(product_uniform, skew)
    assert res.theta == pytest.approx(ZERO_RATE_MIXED, abs=1e-9)


def test_zero_rate_vanishes_when_alternative_matches_marginals(dsbs01):
    # an alternative sharing both marginals sits inside the feasible set
    assert zero_rate_exponent(dsbs01, dsbs(0.4)).theta <= 1e-9


def test_zero_rate_requires_positive_alternative(dsbs01):
    degenerate = JointPmf(np.array([[0.5, 0.0], [0.0, 0.5]]), ("X", "Y"))
    with pytest.raises(NonpositiveAlternative):
        zero_rate_exponent(dsbs01, degenerate)
    wide = JointPmf(np.full((2, 3), 1.0 / 6.0), ("X", "Y"))
    with pytest.raises(AlphabetMismatch):
        zero_rate_exponent(dsbs01, wide)
