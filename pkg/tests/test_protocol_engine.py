import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latcomm import (
    TargetFunction,
    bit_exchange_protocol,
    induced_partition,
    is_zero_error,
    make_leaf,
    make_node,
    monte_carlo,
    one_round_quadrant_protocol,
    partition_entropy,
    run_protocol,
    sample_inputs,
    sum_rate,
    trivial_protocol,
    rate_matches_partition_entropy,
)
from latcomm.protocol_engine import ProtocolTree

from oracles import closed_form_truncated_bits, first_differ_round

unit_floats = st.floats(min_value=1e-6, max_value=1.0 - 1e-6, allow_nan=False)


def test_run_examples():
    tree = bit_exchange_protocol(30)
    t = run_protocol(tree, 0.25, 0.75)
    assert t.stopping_time == 2 and t.output == 0
    t = run_protocol(tree, 0.1, 0.2)
    assert t.stopping_time == 6 and t.output == 0
    # expansions 0.1001100..., 0.1000110...: first differing bit pair is the
    # fourth, so eight messages are exchanged
    t = run_protocol(tree, 0.6, 0.55)
    assert t.stopping_time == 8 and t.output == 1
    assert first_differ_round(0.6, 0.55, 30) == 4


def test_equal_inputs_stay_undecided():
    tree = bit_exchange_protocol(8)
    t = run_protocol(tree, 0.3, 0.3)
    assert t.output is None
    assert t.stopping_time == 16


def test_run_validates_inputs():
    tree = bit_exchange_protocol(2)
    for bad in ((0.0, 0.5), (0.5, 1.0), (-0.1, 0.5), (0.5, 1.5)):
        with pytest.raises(ValueError):
            run_protocol(tree, *bad)


@settings(max_examples=300, deadline=None)
@given(unit_floats, unit_floats)
def test_run_matches_bit_expansion_oracle(x1, x2):
    depth = 24
    tree = bit_exchange_protocol(depth)
    t = run_protocol(tree, x1, x2)
    k = first_differ_round(x1, x2, depth)
    if k is None:
        assert t.output is None
        assert t.stopping_time == 2 * depth
    else:
        assert t.stopping_time == 2 * k
        assert t.output == (1 if x1 > x2 else 0)


def test_first_bits_differ_means_two_messages():
    tree = bit_exchange_protocol(4)
    for x1, x2 in ((0.1, 0.9), (0.75, 0.25), (0.499, 0.501)):
        assert run_protocol(tree, x1, x2).stopping_time == 2


def test_induced_partition_depth1():
    part = induced_partition(bit_exchange_protocol(1), 1)
    decided = sorted((r.corner_key(), lbl) for r, lbl in part.cells)
    assert decided == [
        ((0.0, 0.5, 0.5, 1.0), "q"),
        ((0.5, 0.0, 1.0, 0.5), "p"),
    ]
    assert sorted(r.corner_key() for r in part.residual) == [
        (0.0, 0.0, 0.5, 0.5),
        (0.5, 0.5, 1.0, 1.0),
    ]
    assert partition_entropy(part) == 2.0


def test_induced_partition_depth2():
    part = induced_partition(bit_exchange_protocol(2), 2)
    assert len(part.cells) == 6
    assert len(part.residual) == 4
    assert partition_entropy(part) == 3.0


def test_trivial_tree():
    part = induced_partition(trivial_protocol(), 0)
    assert len(part.cells) == 0 and len(part.residual) == 1
    assert partition_entropy(part) == 0.0
    assert rate_matches_partition_entropy(trivial_protocol(), 0)


def test_leaf_level_probabilities():
    # 2^k decided leaves of probability 4^-k at round k;
    # 2^d undecided leaves of probability 4^-d at the cap.
    d = 6
    part = induced_partition(bit_exchange_protocol(d), d)
    for k in range(1, d + 1):
        decided_k = [r for r, _ in part.cells if abs(r.area - 4.0**-k) < 1e-15]
        assert len(decided_k) == 2**k
    assert all(abs(r.area - 4.0**-d) < 1e-15 for r in part.residual)
    assert len(part.residual) == 2**d


def test_decided_leaves_are_zero_error():
    for d in (1, 3, 6):
        part = induced_partition(bit_exchange_protocol(d), d)
        assert is_zero_error(part, TargetFunction.MIN_INDICATOR)


@pytest.mark.parametrize("d", range(1, 13))
def test_sum_rate_closed_form(d):
    tree = bit_exchange_protocol(d)
    assert abs(sum_rate(tree, d) - closed_form_truncated_bits(d)) < 1e-12


def test_sum_rate_values_and_convergence():
    assert sum_rate(bit_exchange_protocol(1), 1) == 2.0
    assert sum_rate(bit_exchange_protocol(2), 2) == 3.0
    rates = [sum_rate(bit_exchange_protocol(d), d) for d in range(1, 16)]
    for d, (a, b) in enumerate(zip(rates, rates[1:]), start=1):
        assert b >= a
        assert b - a <= 2.0**-d * (2 * d + 2) + 1e-15
    assert abs(sum_rate(bit_exchange_protocol(30), 30) - 4.0) < 1e-7


@pytest.mark.parametrize("d", range(1, 13))
def test_rate_identity_bit_exchange(d):
    assert rate_matches_partition_entropy(bit_exchange_protocol(d), d)


def test_rate_identity_quadrant():
    tree = one_round_quadrant_protocol()
    assert sum_rate(tree, 1) == 1.5
    part = induced_partition(tree, 1)
    assert sorted(part.all_probs()) == [0.25, 0.25, 0.5]
    assert is_zero_error(part, TargetFunction.QUADRANT)
    assert rate_matches_partition_entropy(tree, 1)


def test_markov_structure_messages_depend_only_on_own_input():
    tree = bit_exchange_protocol(16)
    rng = np.random.default_rng(13)
    for _ in range(100):
        x1, x2 = rng.random(2)
        t = run_protocol(tree, x1, x2)
        # replay against a fresh input from the same admissible leaf interval
        node = tree.root
        for msg in t.messages:
            node = tree.child(node, msg)
        lo, hi = node.i2
        x2_alt = lo + (hi - lo) * 0.37
        if not 0.0 < x2_alt < 1.0:
            continue
        t_alt = run_protocol(tree, x1, x2_alt)
        assert t_alt.messages == t.messages
        assert t_alt.messages[0::2] == t.messages[0::2]


def test_speaker_alternation_enforced():
    unit = (0.0, 1.0)
    inner = make_node(1, unit, unit, (0.0, 0.5, 1.0),
                      [make_leaf(0, (0.0, 0.5), unit), make_leaf(1, (0.5, 1.0), unit)])
    with pytest.raises(ValueError, match="alternate"):
        make_node(1, unit, unit, (0.0, 0.5, 1.0), [inner, make_leaf(1, (0.5, 1.0), unit)])


def test_message_map_must_partition_interval():
    unit = (0.0, 1.0)
    with pytest.raises(ValueError, match="partition"):
        make_node(1, unit, unit, (0.0, 0.5, 0.9), [make_leaf(0, unit, unit)] * 2)


def test_ternary_alphabet_protocol():
    # one 3-way message: sum rate is log2(3)
    unit = (0.0, 1.0)
    thirds = (0.0, 1 / 3, 2 / 3, 1.0)
    children = [make_leaf(i % 2, (thirds[i], thirds[i + 1]), unit) for i in range(3)]
    tree = ProtocolTree(make_node(1, unit, unit, thirds, children), 1, name="ternary")
    assert abs(sum_rate(tree, 1) - math.log2(3)) < 1e-12
    t = run_protocol(tree, 0.5, 0.5)
    assert t.messages == (1,) and t.stopping_time == 1


def test_monte_carlo_deterministic_and_thread_independent():
    tree = bit_exchange_protocol(30)
    a = monte_carlo(tree, 150_000, seed=0x5EED, threads=1)
    b = monte_carlo(tree, 150_000, seed=0x5EED, threads=4)
    assert a == b
    c = monte_carlo(tree, 150_000, seed=7, threads=1)
    assert c != a


def test_monte_carlo_single_sample_reproducible():
    tree = bit_exchange_protocol(30)
    stats = monte_carlo(tree, 1, seed=42)
    pairs = next(sample_inputs(42, 1))
    t = run_protocol(tree, pairs[0, 0], pairs[0, 1])
    assert stats.mean_bits == t.stopping_time
    assert stats.mean_rounds == (t.stopping_time + 1) // 2
    assert monte_carlo(tree, 1, seed=42) == stats


def test_monte_carlo_matches_expectations():
    tree = bit_exchange_protocol(30)
    stats = monte_carlo(tree, 400_000, seed=0x5EED)
    assert abs(stats.mean_bits - 4.0) < 0.02
    assert abs(stats.mean_rounds - 2.0) < 0.01


def test_monte_carlo_validates_samples():
    with pytest.raises(ValueError):
        monte_carlo(bit_exchange_protocol(2), 0, seed=1)


def test_depth_limits():
    with pytest.raises(ValueError):
        bit_exchange_protocol(0)
    with pytest.raises(ValueError):
        bit_exchange_protocol(51)
    with pytest.raises(ValueError):
        induced_partition(bit_exchange_protocol(30), 30)  # enumeration refused
    with pytest.raises(ValueError):
        sum_rate(bit_exchange_protocol(5), 4)  # deeper than stated bound
