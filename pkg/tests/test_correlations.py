import random
from fractions import Fraction

import pytest

from rankone.blocks import BlockDag
from rankone.construction import chacon, generalized_chacon, katok, von_neumann_kakutani
from rankone.correlations import (
    correlation,
    half_spacer_shift_candidates,
    verify_half_spacer_mixing,
    verify_rigid_one_spacer,
    verify_weak_limit_prediction,
)
from rankone.errors import InputError, RangeError, Refusal

from conftest import random_bounded_params


def test_exact_examples():
    dag = BlockDag(chacon(6))
    assert correlation(dag, "0", "0", 0, 3).value == Fraction(9, 13)
    assert correlation(dag, "0", "1", 0, 3).value == 0
    assert correlation(dag, "0", "0", 1, 3).value == Fraction(4, 12)


def test_lag_out_of_range():
    dag = BlockDag(chacon(6))
    with pytest.raises(RangeError):
        correlation(dag, "0", "0", 13, 3)


def test_alignment_identity(rng):
    # aligned self-correlation is exactly the word frequency
    for _ in range(10):
        params = random_bounded_params(rng, depth=5)
        dag = BlockDag(params)
        stage = params.depth
        for word in ("0", "01", "00"):
            if len(word) > dag.height(stage):
                continue
            est = correlation(dag, word, word, 0, stage)
            assert est.value == dag.frequency(word, stage).frequency


def test_joint_count_bound(rng):
    # a joint occurrence is an occurrence of either word alone
    for _ in range(10):
        params = random_bounded_params(rng, depth=5)
        dag = BlockDag(params)
        stage = params.depth
        h = dag.height(stage)
        lag = rng.randrange(1, max(2, h // 3))
        est = correlation(dag, "0", "00", lag, stage)
        valid = h - max(1, lag + 2) + 1
        for word in ("0", "00"):
            assert est.value <= Fraction(dag.count_occurrences(word, stage), valid)


def test_sampled_seeded_reproducibility():
    dag = BlockDag(chacon(12))
    a = correlation(dag, "0", "0", 5, 10, method="sampled", sample_budget=5000, seed=7)
    b = correlation(dag, "0", "0", 5, 10, method="sampled", sample_budget=5000, seed=7)
    c = correlation(dag, "0", "0", 5, 10, method="sampled", sample_budget=5000, seed=8)
    assert a.value == b.value and a.ci == b.ci
    assert c.value != a.value or c.seed != a.seed


def test_sampled_matches_exact_within_hoeffding():
    dag = BlockDag(chacon(14))
    exact = correlation(dag, "0", "0", 3, 12).value
    misses = 0
    trials = 100
    for seed in range(trials):
        est = correlation(
            dag, "0", "0", 3, 12, method="sampled", sample_budget=2000, seed=seed
        )
        if abs(est.value - exact) > est.ci:
            misses += 1
    # Hoeffding 95% is conservative; allow generous slack over the nominal 5%
    assert misses <= 15


def test_sampled_needs_budget():
    dag = BlockDag(chacon(8))
    with pytest.raises(InputError):
        correlation(dag, "0", "0", 1, 5, method="sampled")


def test_weak_limit_prediction_zero_spacer():
    # full rigidity: the lag-h correlation equals the lag-0 correlation
    vnk = von_neumann_kakutani(16)
    rows = verify_weak_limit_prediction(vnk, 6, 1, [("0", "0")], depth=8)
    (row,) = rows
    assert row.observed == 1 and row.abs_error < 0.01


def test_weak_limit_prediction_chacon_small():
    rows = verify_weak_limit_prediction(chacon(26), 9, 1, [("0", "0")], depth=12)
    (row,) = rows
    assert abs(row.predicted - Fraction(1, 2)) < Fraction(1, 50)
    assert row.abs_error <= 0.02


def test_rigid_refusals():
    gc = generalized_chacon(8)
    with pytest.raises(Refusal):
        verify_rigid_one_spacer(gc, Fraction(1, 2), 5, [("0", "0")], powers=(2,))
    with pytest.raises(InputError):
        verify_rigid_one_spacer(gc, Fraction(3, 2), 5, [("0", "0")])
    with pytest.raises(InputError):
        verify_rigid_one_spacer(chacon(8), Fraction(1, 2), 5, [("0", "0")])


def test_rigid_lag_structure():
    gc = generalized_chacon(8)
    rows = verify_rigid_one_spacer(gc, Fraction(1, 2), 5, [("0", "0")], powers=(1,))
    (row,) = rows
    # floor(alpha * p_5) * h_5 with p_5 = 12, h_5 = 2491
    assert row.lag == 6 * 2491
    assert row.abs_error <= 0.05


def test_half_spacer_candidates_and_refusal():
    kat = katok(cuts=(100, 30000))
    valid, cands, slack = half_spacer_shift_candidates(kat, Fraction(1, 2), 1)
    assert 26 in valid and all(c % 2 == 0 for c in cands)
    with pytest.raises(Refusal) as err:
        verify_half_spacer_mixing(kat, Fraction(1, 2), 1, 25, [("0", "1")], sample_budget=10)
    assert "26" in str(err.value)


def test_half_spacer_small_run():
    kat = katok(cuts=(100, 30000))
    rows = verify_half_spacer_mixing(
        kat, Fraction(1, 2), 1, 26, [("0", "1")], sample_budget=20_000, seed=3
    )
    (row,) = rows
    assert row.method == "SAMPLED" and row.seed == 3
    dag = BlockDag(kat)
    f0 = dag.frequency("0", 3).frequency
    f1 = dag.frequency("1", 3).frequency
    assert row.predicted == Fraction(1, 2) * f0 * f1  # disjoint pair: no identity part
    assert row.abs_error <= 0.08
