"""Weight-balanced ternary trees over weighted leaves, plus the canonical
covering-set selections used by the query algorithm.

The split index mu is the smallest index whose weight prefix sum strictly
exceeds half of the total, compared in exact integers as ``2*prefix > total``.
Zero-weight referents are never inserted; callers map them to the surrounding
present leaves.
"""

from __future__ import annotations

from typing import Any

from .core import KerrataError


class EmptyInput(KerrataError, ValueError):
    pass


class InvalidWeight(KerrataError, ValueError):
    pass


class WbtNode:
    __slots__ = ("weight", "leaf_lo", "leaf_hi", "left", "mid", "right", "leaf_index", "tree")

    def __init__(self, weight: int, leaf_lo: int, leaf_hi: int):
        self.weight = weight
        self.leaf_lo = leaf_lo  # covered leaf span [leaf_lo, leaf_hi)
        self.leaf_hi = leaf_hi
        self.left: WbtNode | None = None
        self.mid: WbtNode | None = None
        self.right: WbtNode | None = None
        self.leaf_index: int | None = None  # set on leaves
        self.tree: Any = None  # external payload (child errata trie)

    def is_leaf(self) -> bool:
        return self.leaf_index is not None

    def span(self) -> tuple[int, int]:
        return self.leaf_lo, self.leaf_hi


class WeightBalancedTree:
    __slots__ = ("root", "weights", "leaves", "all_nodes")

    def __init__(self, root: WbtNode, weights: list[int], leaves: list[WbtNode], all_nodes: list[WbtNode]):
        self.root = root
        self.weights = weights
        self.leaves = leaves
        self.all_nodes = all_nodes

    def n_leaves(self) -> int:
        return len(self.leaves)


def build_wbt(weights: list[int]) -> WeightBalancedTree:
    """Build the ternary weight-balanced tree for positive leaf weights."""
    if not weights:
        raise EmptyInput("weight list is empty")
    if any(w < 1 for w in weights):
        raise InvalidWeight("all weights must be >= 1")
    prefix = [0]
    for w in weights:
        prefix.append(prefix[-1] + w)
    leaves: list[WbtNode] = [None] * len(weights)  # type: ignore[list-item]
    all_nodes: list[WbtNode] = []

    def make(lo: int, hi: int) -> WbtNode:
        node = WbtNode(prefix[hi] - prefix[lo], lo, hi)
        all_nodes.append(node)
        return node

    root = make(0, len(weights))
    work = [root]
    while work:
        node = work.pop()
        lo, hi = node.leaf_lo, node.leaf_hi
        if hi - lo == 1:
            node.leaf_index = lo
            leaves[lo] = node
            continue
        total = prefix[hi] - prefix[lo]
        # smallest mu in [lo, hi) with 2*(prefix sum through mu) > total
        lo_i, hi_i = lo, hi - 1
        while lo_i < hi_i:
            mid = (lo_i + hi_i) // 2
            if 2 * (prefix[mid + 1] - prefix[lo]) > total:
                hi_i = mid
            else:
                lo_i = mid + 1
        mu = lo_i
        if mu > lo:
            node.left = make(lo, mu)
            work.append(node.left)
        node.mid = make(mu, mu + 1)
        work.append(node.mid)
        if mu + 1 < hi:
            node.right = make(mu + 1, hi)
            work.append(node.right)
    return WeightBalancedTree(root, list(weights), leaves, all_nodes)


def range_cover(t: WeightBalancedTree, lo: int, hi: int) -> list[WbtNode]:
    """Minimal canonical node set whose leaf spans partition ``[lo, hi)``."""
    if lo < 0 or hi > t.n_leaves() or lo > hi:
        raise KerrataError(f"cover range [{lo}, {hi}) invalid for {t.n_leaves()} leaves")
    out: list[WbtNode] = []
    work = [t.root] if lo < hi else []
    while work:
        node = work.pop()
        a, b = node.leaf_lo, node.leaf_hi
        if lo <= a and b <= hi:
            out.append(node)
            continue
        if b <= lo or hi <= a:
            continue
        for ch in (node.left, node.mid, node.right):
            if ch is not None:
                work.append(ch)
    out.sort(key=lambda nd: nd.leaf_lo)
    return out


def left_cover(t: WeightBalancedTree, target: int) -> list[WbtNode]:
    """Disjoint nodes covering exactly the leaves left of ``target``."""
    return range_cover(t, 0, target)


def off_path_cover(t: WeightBalancedTree, excluded: int | None) -> list[WbtNode]:
    """Disjoint nodes covering every leaf except ``excluded`` (all if None)."""
    if excluded is None:
        return [t.root]
    return range_cover(t, 0, excluded) + range_cover(t, excluded + 1, t.n_leaves())
