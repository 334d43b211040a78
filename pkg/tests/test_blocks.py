import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone.blocks import (
    BlockDag,
    abc_decompose,
    abc_threshold,
    block_occurrence,
    count_overlapping,
    cylinder_words,
    empirical_cylinder_map,
    all_ones_cylinder_map,
    eventual_period,
    max_spacer_run,
    measure_distance,
    spacer_order,
)
from rankone.construction import (
    ConstructionParams,
    chacon,
    generalized_chacon,
    heights,
    katok,
    spacer_stats,
    von_neumann_kakutani,
)
from rankone.errors import InputError, RangeError, Refusal

from conftest import random_bounded_params

CHACON_B3 = "0010001010010"


def test_materialize_examples():
    assert BlockDag(chacon(4)).materialize(3) == CHACON_B3
    assert BlockDag(von_neumann_kakutani(4)).materialize(3) == "0000"
    one_spacer = generalized_chacon(1, cuts=(3,), spacer_index=0)
    assert BlockDag(one_spacer).materialize(2) == "0100"


def test_materialize_cap_refusal():
    dag = BlockDag(chacon(30), cap=1000)
    with pytest.raises(Refusal):
        dag.materialize(9)


def test_lengths_match_heights():
    for params in (chacon(10), von_neumann_kakutani(12), katok(cuts=(4, 8, 16))):
        dag = BlockDag(params)
        seq = heights(params, params.depth)
        for n in range(1, params.depth + 2):
            if seq.h(n) <= 100_000:
                assert len(dag.materialize(n)) == seq.h(n)


def test_symbol_at_examples():
    dag = BlockDag(chacon(4))
    assert dag.symbol_at(3, 9) == 1
    assert dag.symbol_at(3, 1) == 0
    assert dag.symbol_at(3, 13) == 0
    with pytest.raises(RangeError):
        dag.symbol_at(3, 14)


def test_extract_matches_materialize():
    dag = BlockDag(chacon(8), memo_limit=8)
    word = BlockDag(chacon(8)).materialize(6)
    for start, length in [(1, 10), (5, 100), (300, 64), (1, len(word))]:
        assert dag.extract(6, start, length) == word[start - 1 : start - 1 + length]


def test_count_examples():
    dag = BlockDag(chacon(4))
    assert dag.count_occurrences("0010", 3) == 3
    assert dag.count_occurrences("0010", 2) == 1
    assert dag.count_occurrences("00", 3) == 4
    with pytest.raises(RangeError):
        dag.count_occurrences("0" * 14, 3)
    with pytest.raises(InputError):
        dag.count_occurrences("02", 3)


@given(
    st.integers(0, 2**32 - 1),
    st.integers(1, 6),
    st.integers(0, 2**6 - 1),
)
@settings(max_examples=120, deadline=None)
def test_count_recursion_equals_naive_scan(seed, wlen, wbits):
    params = random_bounded_params(random.Random(seed), depth=6)
    word = format(wbits, f"0{wlen}b")[:wlen]
    seq = heights(params, params.depth)
    stage = max(n for n in range(1, params.depth + 2) if seq.h(n) <= 100_000)
    if seq.h(stage) < len(word):
        return
    # memo_limit forced tiny so counting exercises the recursion
    dag = BlockDag(params, memo_limit=8)
    reference = BlockDag(params).materialize(stage)
    assert dag.count_occurrences(word, stage) == count_overlapping(reference, word)


def test_frequency_closed_form_chacon():
    dag = BlockDag(chacon(12))
    for n in range(1, 13):
        est = dag.frequency("0", n)
        h = dag.height(n)
        assert est.count == 3 ** (n - 1)
        assert est.frequency == Fraction(3 ** (n - 1), h)
    # converges to 2/3 from the exact closed form h_n = (3^n - 1) / 2
    assert abs(dag.frequency("0", 12).frequency - Fraction(2, 3)) < Fraction(1, 3**11)


def test_frequency_trivial_cases():
    zero = BlockDag(von_neumann_kakutani(6))
    assert zero.frequency("1", 5).frequency == 0
    dag = BlockDag(chacon(4))
    assert dag.frequency("00", 3).frequency == Fraction(1, 3)


def test_frequency_cauchy_trend():
    for params in (chacon(14), katok(cuts=(4, 8, 16, 32))):
        dag = BlockDag(params)
        freqs = [
            dag.frequency("01", n).frequency for n in range(2, params.depth + 1)
        ]
        deltas = [abs(a - b) for a, b in zip(freqs, freqs[1:])]
        assert deltas[-1] <= deltas[0]


def test_measure_distance():
    dag = BlockDag(chacon(12))
    mu = empirical_cylinder_map(dag, 12)
    d, tail = measure_distance(mu, mu, 8)
    assert d == 0 and tail == Fraction(1, 128)
    d, tail = measure_distance(all_ones_cylinder_map, {"0": Fraction(2, 3)}, 1)
    assert d == Fraction(2, 3)
    d, tail = measure_distance(mu, mu, 0)
    assert d == 0 and tail == 2


def test_cylinder_enumeration_order():
    assert cylinder_words(7) == ["0", "1", "00", "01", "10", "11", "000"]


def test_eventual_period():
    assert eventual_period(BlockDag(von_neumann_kakutani(8)), 64, 8) == 1
    assert eventual_period(BlockDag(chacon(10)), 10_000, 1000) is None
    alternating = ConstructionParams(cuts=(2,) * 8, spacers=((1, 0),) * 8)
    assert eventual_period(BlockDag(alternating), 100, 4) == 2
    # one spacer after *each* column breaks 2-periodicity at the junctions
    dense = ConstructionParams(cuts=(2,) * 8, spacers=((1, 1),) * 8)
    assert eventual_period(BlockDag(dense), 100, 4) is None


def test_spacer_order_examples():
    dag = BlockDag(chacon(4))
    assert spacer_order(dag, 3, 9) == 3
    assert spacer_order(dag, 3, 3) == 2
    assert spacer_order(dag, 4, 3) == 2  # inside the first embedded copy
    with pytest.raises(InputError):
        spacer_order(dag, 3, 1)


def test_spacer_run_bound(rng):
    # the longest spacer run in a block is at most the summed per-stage maxima
    for _ in range(20):
        params = random_bounded_params(rng, depth=5)
        dag = BlockDag(params)
        ts, _, _ = spacer_stats(params, params.depth)
        for n in range(1, params.depth + 1):
            if dag.height(n + 1) > 50_000:
                break
            assert max_spacer_run(dag.materialize(n + 1)) <= sum(ts[:n])


def _canonical_offsets(dag, m, n):
    offsets = [0]
    for stage in range(m, n, -1):
        starts = dag._child_starts(stage)
        offsets = [o + s for o in offsets for s in starts]
    return offsets


def test_every_zero_in_embedded_copy(rng):
    # cover reconstruction: each 0 of B_m sits inside a canonical B_n copy
    for _ in range(10):
        params = random_bounded_params(rng, depth=5)
        dag = BlockDag(params)
        m = max(n for n in range(1, params.depth + 2) if dag.height(n) <= 20_000)
        word = dag.materialize(m)
        for n in range(1, m):
            covered = bytearray(len(word))
            h = dag.height(n)
            for off in _canonical_offsets(dag, m, n):
                for i in range(off, off + h):
                    covered[i] = 1
            assert all(covered[i] for i, ch in enumerate(word) if ch == "0")


def test_block_occurrence():
    dag = BlockDag(chacon(10))
    assert block_occurrence(dag, CHACON_B3) == (3, 1)
    assert block_occurrence(dag, "0110") is None
    assert block_occurrence(dag, "10010") == (3, 9)


def test_abc_word_is_block():
    dag = BlockDag(chacon(10))
    dec = abc_decompose(dag, CHACON_B3, Fraction(1, 4), 2)
    assert dec.valid and dec.b == "" and dec.c == ""
    assert dec.cover == ((1, 3),)
    assert dec.uncovered == 0


def test_abc_all_spacers():
    dag = BlockDag(chacon(10))
    dec = abc_decompose(dag, "1111", Fraction(1, 4), 2)
    assert dec.a == "" and dec.b == "1111" and dec.c == ""
    assert dec.uncovered == 0
    assert not dec.valid  # runs of four spacers never occur in this language


def test_abc_huge_run_between_blocks():
    # construction whose language contains B_2 . 1^7 . B_2 with the run of
    # order two above the covered blocks
    params = ConstructionParams(
        cuts=(2, 2, 2, 2), spacers=((0, 0), (0, 0), (0, 7), (0, 0))
    )
    dag = BlockDag(params)
    word = "00" + "1" * 7 + "00"
    assert block_occurrence(dag, word) == (5, 7)
    dec = abc_decompose(dag, word, Fraction(1, 4), 2)
    assert dec.valid
    assert (dec.a, dec.b, dec.c) == ("00", "1" * 7, "00")
    assert dec.uncovered == 0
    assert {stage for _, stage in dec.cover} == {2}


def test_abc_low_order_run_stays_uncovered():
    # same window shape, but the run order is just one above the cover, so it
    # is charged to the uncovered budget instead of the middle part
    params = ConstructionParams(cuts=(3, 3), spacers=((0, 7, 0), (0, 7, 0)))
    dag = BlockDag(params)
    word = dag.extract(3, 11, 27)
    assert word == "0011111110" + "1" * 7 + "0011111110"
    dec = abc_decompose(dag, word, Fraction(1, 4), 2)
    assert dec.valid and dec.b == ""
    assert dec.uncovered == 27 - 20


def test_abc_threshold():
    params = chacon(20)
    eps = Fraction(1, 8)
    threshold = abc_threshold(params, eps, 8)
    h8 = heights(params, 8).h(8)
    assert threshold == int(4 * h8 / eps) + 1
    # ratios too large at ell = 1
    assert abc_threshold(params, Fraction(1, 8), 1) is None


def test_abc_postcondition_smoke(rng):
    eps = Fraction(1, 8)
    params = chacon(18)
    dag = BlockDag(params)
    ell = 6
    need = abc_threshold(params, eps, ell)
    stage = 12
    for _ in range(25):
        length = need + rng.randrange(200)
        off = rng.randrange(dag.height(stage) - length) + 1
        word = dag.extract(stage, off, length)
        dec = abc_decompose(dag, word, eps, ell, occurrence=(stage, off))
        assert dec.valid
        assert set(dec.b) <= {"1"}
        # cover blocks are disjoint, verified occurrences inside A and C
        seen = []
        for pos, k in dec.cover:
            lo, hi = pos, pos + dag.height(k)
            assert word[lo - 1 : hi - 1] == dag.materialize(k)
            b_lo = len(dec.a) + 1
            b_hi = b_lo + len(dec.b)
            assert hi <= b_lo or lo >= b_hi
            for a, b in seen:
                assert hi <= a or lo >= b
            seen.append((lo, hi))
        assert dec.uncovered <= eps * length


def test_abc_invalid_symbols():
    dag = BlockDag(chacon(6))
    with pytest.raises(InputError):
        abc_decompose(dag, "01x", Fraction(1, 4), 2)


def test_count_with_long_spacer_runs():
    # spacer runs much longer than the word exercise the run-crossing branches
    params = ConstructionParams(
        cuts=(2, 3, 2), spacers=((5, 12), (0, 7, 9), (1, 0))
    )
    dag = BlockDag(params, memo_limit=4)
    reference = BlockDag(params).materialize(4)
    for word in ("1", "11", "11111", "0110", "1110", "011111", "101"):
        assert dag.count_occurrences(word, 4) == count_overlapping(reference, word), word


def test_count_word_spanning_many_children():
    # h_2 = 2 with single-symbol children: words span several junctions
    params = ConstructionParams(cuts=(2, 2, 2, 2), spacers=((0, 0), (1, 0), (0, 1), (1, 1)))
    dag = BlockDag(params, memo_limit=2)
    reference = BlockDag(params).materialize(5)
    for word in ("0010", "00100", "010010", "0000", "1001"):
        assert dag.count_occurrences(word, 5) == count_overlapping(reference, word), word
