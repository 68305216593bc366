"""Interactive two-party protocols over the open unit square.

A protocol is a finite tree of speaking turns.  Each internal node belongs to
one speaker and partitions that speaker's current admissible interval into
finitely many subintervals (the message alphabet); each child is either
another turn or a leaf that both parties can decide.  Message ``i`` of a node
depends only on the speaker's input and the transcript so far, so the Markov
message structure holds by construction.

Trees are expanded lazily: the classic bit-exchange protocol at depth 30
describes ~10^9 transcripts, but only the nodes actually visited are ever
materialized.  Aggregate quantities (the transcript entropy) are computed by
a recursion that merges structurally identical subtrees via node signatures,
so they stay exact and cheap at any depth.

All interval endpoints encountered here are dyadic rationals, which binary
floating point represents exactly; interval walks therefore never drift.
"""

from __future__ import annotations

import math
import os
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .partition_core import LabeledPartition, Rect, partition_entropy

__all__ = [
    "Transcript",
    "RunStats",
    "ProtocolTree",
    "make_leaf",
    "make_node",
    "bit_exchange_protocol",
    "one_round_quadrant_protocol",
    "trivial_protocol",
    "run_protocol",
    "induced_partition",
    "sum_rate",
    "rate_matches_partition_entropy",
    "monte_carlo",
    "sample_inputs",
]

MAX_TREE_DEPTH = 50
_ENUM_DEPTH_LIMIT = 20
_CHUNK = 1 << 16


@dataclass(frozen=True)
class Transcript:
    """One execution: message symbols, stopping time, decided value or None."""

    messages: tuple[int, ...]
    stopping_time: int
    output: Optional[int]

    def __post_init__(self) -> None:
        if self.stopping_time != len(self.messages):
            raise ValueError("stopping time must equal the transcript length")


@dataclass(frozen=True)
class RunStats:
    sample_count: int
    mean_bits: float
    mean_rounds: float
    seed: int

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.mean_bits < 0.0:
            raise ValueError("mean_bits must be nonnegative")


class _Leaf:
    __slots__ = ("value", "i1", "i2")

    def __init__(self, value: Optional[int], i1: tuple[float, float], i2: tuple[float, float]):
        self.value = value
        self.i1 = i1
        self.i2 = i2


class _Node:
    __slots__ = ("speaker", "i1", "i2", "bounds", "children", "sig", "tag")

    def __init__(self, speaker, i1, i2, bounds, children=None, sig=None, tag=None):
        if speaker not in (1, 2):
            raise ValueError("speaker must be 1 or 2")
        own = i1 if speaker == 1 else i2
        if abs(bounds[0] - own[0]) > 0.0 or abs(bounds[-1] - own[1]) > 0.0:
            raise ValueError("message map must partition the speaker's interval")
        if any(a >= b for a, b in zip(bounds, bounds[1:])):
            raise ValueError("message cuts must be strictly increasing")
        self.speaker = speaker
        self.i1 = i1
        self.i2 = i2
        self.bounds = bounds
        self.children = children if children is not None else [None] * (len(bounds) - 1)
        self.sig = sig
        self.tag = tag


def make_leaf(value: Optional[int], i1: tuple[float, float], i2: tuple[float, float]) -> _Leaf:
    """Leaf with a decided value (1, 0) or None for undecided."""
    return _Leaf(value, i1, i2)


def make_node(speaker, i1, i2, bounds, children) -> _Node:
    """Eagerly built protocol node; children align with the message intervals."""
    for child in children:
        if isinstance(child, _Node) and child.speaker == speaker:
            raise ValueError("speakers must alternate between consecutive turns")
    return _Node(speaker, i1, i2, tuple(bounds), list(children))


class ProtocolTree:
    """Protocol root plus the expansion rule for lazily built trees."""

    def __init__(self, root, max_depth: int, name: str = "custom", expander=None):
        if max_depth < 0 or max_depth > MAX_TREE_DEPTH:
            raise ValueError(f"max_depth must be in [0, {MAX_TREE_DEPTH}]")
        self.root = root
        self.max_depth = max_depth
        self.name = name
        self._expander = expander

    def child(self, node: _Node, i: int):
        ch = node.children[i]
        if ch is None:
            if self._expander is None:
                raise ValueError("node has unexpanded children and no expander")
            ch = self._expander(self, node, i)
            node.children[i] = ch
        return ch


def _interval_split(lo: float, hi: float) -> tuple[float, float, float]:
    return (lo, (lo + hi) / 2.0, hi)


def _bx_expander(tree: ProtocolTree, node: _Node, i: int):
    kind, k = node.tag[0], node.tag[1]
    lo, hi = node.bounds[i], node.bounds[i + 1]
    if kind == "s1":
        # node 1 sent bit i; node 2 answers over its own (unhalved) interval.
        return _Node(
            2,
            (lo, hi),
            node.i2,
            _interval_split(*node.i2),
            sig=("s2", k),
            tag=("s2", k, i),
        )
    sent = node.tag[2]
    if i != sent:
        return _Leaf(1 if sent > i else 0, node.i1, (lo, hi))
    if k >= tree.max_depth:
        return _Leaf(None, node.i1, (lo, hi))
    return _Node(
        1,
        node.i1,
        (lo, hi),
        _interval_split(*node.i1),
        sig=("s1", k + 1),
        tag=("s1", k + 1),
    )


def bit_exchange_protocol(max_depth: int) -> ProtocolTree:
    """Alternating binary-expansion bits until the bits of a round differ.

    Differing bits at round k order the inputs: the strings share a prefix, so
    whichever party sent the 1 holds the larger value, and both sides stop
    after message 2k.  Equal inputs never separate; the tree caps at
    ``max_depth`` rounds with undecided leaves beyond.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if max_depth > MAX_TREE_DEPTH:
        raise ValueError(f"max_depth must be <= {MAX_TREE_DEPTH}")
    unit = (0.0, 1.0)
    root = _Node(1, unit, unit, _interval_split(*unit), sig=("s1", 1), tag=("s1", 1))
    return ProtocolTree(root, max_depth, name="bit-exchange", expander=_bx_expander)


def one_round_quadrant_protocol() -> ProtocolTree:
    """Three-transcript scheme deciding the upper-right-quadrant indicator.

    Node 1 reports which half holds x1.  The low half settles the function
    with a single message; the high half needs node 2's half as well.
    """
    unit = (0.0, 1.0)
    lo_leaf = make_leaf(0, (0.0, 0.5), unit)
    inner = make_node(
        2,
        (0.5, 1.0),
        unit,
        (0.0, 0.5, 1.0),
        [make_leaf(0, (0.5, 1.0), (0.0, 0.5)), make_leaf(1, (0.5, 1.0), (0.5, 1.0))],
    )
    root = make_node(1, unit, unit, (0.0, 0.5, 1.0), [lo_leaf, inner])
    return ProtocolTree(root, 1, name="one-round-quadrant")


def trivial_protocol() -> ProtocolTree:
    """Zero-message tree: a single undecided leaf covering the square."""
    unit = (0.0, 1.0)
    return ProtocolTree(make_leaf(None, unit, unit), 0, name="trivial")


def run_protocol(tree: ProtocolTree, x1: float, x2: float) -> Transcript:
    """Deterministic execution on inputs in the open unit interval."""
    if not (0.0 < x1 < 1.0 and 0.0 < x2 < 1.0):
        raise ValueError(f"inputs must lie in (0, 1), got ({x1!r}, {x2!r})")
    node = tree.root
    messages: list[int] = []
    while type(node) is not _Leaf:
        x = x1 if node.speaker == 1 else x2
        i = bisect_right(node.bounds, x) - 1
        messages.append(i)
        node = tree.child(node, i)
    return Transcript(tuple(messages), len(messages), node.value)


def _iter_leaves(tree: ProtocolTree) -> Iterator[_Leaf]:
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if type(node) is _Leaf:
            yield node
            continue
        for i in reversed(range(len(node.bounds) - 1)):
            stack.append(tree.child(node, i))


def induced_partition(tree: ProtocolTree, max_depth: int) -> LabeledPartition:
    """One rectangle per leaf: the product of the two admissible intervals.

    Decided leaves become p/q cells, undecided leaves residual cells.  Leaf
    enumeration is exponential in depth, so trees deeper than
    ``_ENUM_DEPTH_LIMIT`` rounds are rejected; aggregate quantities of deep
    trees are available through :func:`sum_rate` instead.
    """
    if tree.max_depth > max_depth:
        raise ValueError("tree is deeper than the stated max_depth")
    if tree.max_depth > _ENUM_DEPTH_LIMIT:
        raise ValueError(
            f"refusing to enumerate ~4^{tree.max_depth} leaves; "
            f"limit is {_ENUM_DEPTH_LIMIT} rounds"
        )
    cells: list[tuple[Rect, str]] = []
    residual: list[Rect] = []
    for leaf in _iter_leaves(tree):
        rect = Rect(leaf.i1[0], leaf.i1[1], leaf.i2[0], leaf.i2[1])
        if leaf.value is None:
            residual.append(rect)
        elif leaf.value == 1:
            cells.append((rect, "p"))
        else:
            cells.append((rect, "q"))
    return LabeledPartition(tuple(cells), tuple(residual))


def _leaf_profile(tree: ProtocolTree) -> dict[float, int]:
    """Multiset {leaf probability: count} under uniform independent inputs.

    Recursion over turns; subtrees sharing a signature contribute identical
    conditional profiles and are evaluated once.
    """
    memo: dict[object, dict[float, int]] = {}

    def prof(node) -> dict[float, int]:
        if type(node) is _Leaf:
            return {1.0: 1}
        key = node.sig if node.sig is not None else id(node)
        cached = memo.get(key)
        if cached is not None:
            return cached
        bounds = node.bounds
        width = bounds[-1] - bounds[0]
        out: dict[float, int] = {}
        for i in range(len(bounds) - 1):
            w = (bounds[i + 1] - bounds[i]) / width
            for p, count in prof(tree.child(node, i)).items():
                wp = w * p
                out[wp] = out.get(wp, 0) + count
        memo[key] = out
        return out

    return prof(tree.root)


def sum_rate(tree: ProtocolTree, max_depth: int) -> float:
    """Entropy in bits of the (transcript, stopping time) pair.

    The stopping time is a function of the transcript, so this equals the
    entropy of the leaf-probability vector.
    """
    if tree.max_depth > max_depth:
        raise ValueError("tree is deeper than the stated max_depth")
    profile = _leaf_profile(tree)
    return math.fsum(-count * p * math.log2(p) for p, count in profile.items() if p > 0.0)


def rate_matches_partition_entropy(tree: ProtocolTree, max_depth: int) -> bool:
    """Sum rate equals the induced-partition entropy, to 1e-12."""
    rate = sum_rate(tree, max_depth)
    ent = partition_entropy(induced_partition(tree, max_depth))
    return abs(rate - ent) <= 1e-12


def sample_inputs(seed: int, samples: int) -> Iterator[np.ndarray]:
    """Deterministic chunked stream of i.i.d. uniform input pairs.

    Chunks are fixed-size and seeded by (seed, chunk index) through a
    splittable generator, so the stream does not depend on how many workers
    later consume it.
    """
    n_chunks = (samples + _CHUNK - 1) // _CHUNK
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for j, child in enumerate(children):
        n = min(_CHUNK, samples - j * _CHUNK)
        yield np.random.default_rng(child).random((n, 2))


def _walk_totals(tree: ProtocolTree, pairs: np.ndarray) -> tuple[int, int]:
    root = tree.root
    expand = tree.child
    total_msgs = 0
    total_rounds = 0
    x1s = pairs[:, 0].tolist()
    x2s = pairs[:, 1].tolist()
    for x1, x2 in zip(x1s, x2s):
        node = root
        t = 0
        while True:
            x = x1 if node.speaker == 1 else x2
            i = bisect_right(node.bounds, x) - 1
            t += 1
            ch = node.children[i]
            if ch is None:
                ch = expand(node, i)
            if type(ch) is _Leaf:
                break
            node = ch
        total_msgs += t
        total_rounds += (t + 1) // 2
    return total_msgs, total_rounds


def _resolve_threads(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("LATCOMM_THREADS", "").strip()
    return max(1, int(env)) if env else 1


def monte_carlo(
    tree: ProtocolTree,
    samples: int,
    seed: int,
    threads: Optional[int] = None,
) -> RunStats:
    """Mean message and round counts over i.i.d. uniform input pairs.

    Deterministic given the seed: per-chunk integer tallies are combined in
    chunk order, so the result is byte-identical for any worker count
    (``threads`` argument, else the LATCOMM_THREADS environment variable).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if type(tree.root) is _Leaf:
        return RunStats(samples, 0.0, 0.0, seed)
    n_chunks = (samples + _CHUNK - 1) // _CHUNK
    children = np.random.SeedSequence(seed).spawn(n_chunks)

    def work(j: int) -> tuple[int, int]:
        n = min(_CHUNK, samples - j * _CHUNK)
        pairs = np.random.default_rng(children[j]).random((n, 2))
        return _walk_totals(tree, pairs)

    workers = _resolve_threads(threads)
    if workers == 1 or n_chunks == 1:
        results = [work(j) for j in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, range(n_chunks)))
    total_msgs = sum(r[0] for r in results)
    total_rounds = sum(r[1] for r in results)
    return RunStats(samples, total_msgs / samples, total_rounds / samples, seed)
