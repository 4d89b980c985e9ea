"""Block-by-block traces of the quick partitioner, worked out by hand.

Each trace was worked through by hand against the procedure (execution order,
SQ/AQ selection, blocking, closure and merge) before the partitioner was
written. The comments record the decisive steps.
"""

import pytest

from quickpart.partition import quick_partition

from helpers import circuit_from_lines, describe_blocks

TRACES = {
    # Execution order is g1, g2, g4, g3 (g4 = cx01 runs in cycle 2 with lower qubit than cx23).
    # g1, g2, g4 share partition {0,1,2}; cx23 cannot join (union 4 > 3) and opens {2,3}.
    # Flush in birth order; {2,3} shares q2 with {0,1,2} without a subset relation.
    "chain4_bs3": (
        ["cx 0 1", "cx 1 2", "cx 2 3", "cx 0 1"],
        3,
        [((0, 1, 2), ["cx 0 1", "cx 1 2", "cx 0 1"]), ((2, 3), ["cx 2 3"])],
    ),
    # cx02 -> X{0,2}; cx01 -> Y{0,1}, blocks 0,1 in X; h0 -> Y; cx13 -> Z{1,3};
    # cx04 -> W{0,4} fully blocks Y. Y depends on the still-open X (shared q0),
    # so X closes first. Flushing Z and W then appends both.
    "forced_predecessor_close_bs2": (
        ["cx 0 2", "cx 0 1", "cx 1 3", "h 0", "cx 0 4"],
        2,
        [((0, 2), ["cx 0 2"]), ((0, 1), ["cx 0 1", "h 0"]), ((1, 3), ["cx 1 3"]), ((0, 4), ["cx 0 4"])],
    ),
    # h0 -> X{0}; h1 -> Y{1} (blocks 1 in X); cx01 skips X (q1 blocked) and joins Y,
    # which fully blocks X. X is closed, then Y flushes and X{0} is a subset of Y{0,1}: merge.
    "merge_into_tail_bs2": (
        ["h 0", "h 1", "cx 0 1"],
        2,
        [((0, 1), ["h 0", "h 1", "cx 0 1"])],
    ),
    # h0 and x0 stay in X{0}; h1 lives in Y{1}; disjoint blocks never merge.
    "single_qubit_lanes_bs2": (
        ["h 0", "h 1", "x 0"],
        2,
        [((0,), ["h 0", "x 0"]), ((1,), ["h 1"])],
    ),
    # GHZ ladder: every cx widens past 2 qubits and opens a new partition.
    "ghz4_bs2": (
        ["h 0", "cx 0 1", "cx 1 2", "cx 2 3"],
        2,
        [((0, 1), ["h 0", "cx 0 1"]), ((1, 2), ["cx 1 2"]), ((2, 3), ["cx 2 3"])],
    ),
    # W{0,1} flushes after Y{2,3} was already closed; Y is disjoint and does not
    # shadow, so W merges into the earlier block X{0}.
    "merge_past_disjoint_block_bs2": (
        ["h 0", "h 1", "cx 2 3", "cx 0 1", "cx 2 4", "cx 3 5"],
        2,
        [
            ((0, 1), ["h 0", "h 1", "cx 0 1"]),
            ((2, 3), ["cx 2 3"]),
            ((2, 4), ["cx 2 4"]),
            ((3, 5), ["cx 3 5"]),
        ],
    ),
    # Three-qubit gate fills X; h3 opens Y and blocks q3 in X, so cx23 joins Y.
    "toffoli_bs3": (
        ["ccx 0 1 2", "h 3", "cx 2 3"],
        3,
        [((0, 1, 2), ["ccx 0 1 2"]), ((2, 3), ["h 3", "cx 2 3"])],
    ),
}


@pytest.mark.parametrize("name", sorted(TRACES))
def test_hand_trace(name):
    lines, block_size, expected = TRACES[name]
    result = quick_partition(circuit_from_lines(lines), block_size)
    assert describe_blocks(result) == expected


def test_single_block_when_everything_fits():
    lines = ["h 0", "cx 0 1", "cx 1 2", "rz(0.5) 2", "cx 0 2"]
    result = quick_partition(circuit_from_lines(lines), 3)
    assert describe_blocks(result) == [((0, 1, 2), lines)]


def test_empty_circuit():
    result = quick_partition(circuit_from_lines([], qubit_count=3), 4)
    assert result.blocks == ()
