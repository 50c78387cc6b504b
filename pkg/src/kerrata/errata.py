"""The modified recursive mismatch index and its query algorithm.

Construction: a compact trie over the dictionary, heavy paths, and per heavy
path two families of child tries.  Vertical children hang off weight-balanced
tree nodes built over the heavy-path members weighted by diverging-string
counts; horizontal children hang off weight-balanced trees over each member's
non-heavy children.  Child strings are truncated past the forced mismatch
position and carry a reduced mismatch credit; strings whose credit would go
negative are dropped.

Queries walk the structure recursively.  One prefix search per frame locates
the heavy paths crossed; diverging strings are dispatched to covering sets of
child tries, and the search continues in the same trie past one charged
mismatch with a raised reporting threshold.  All prefix searches are routed
through a pluggable backend and drained longest-first so a word-packed
backend can reuse work between the searches.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from math import comb
from typing import Any, Iterator

from .core import (
    Dictionary,
    LengthMismatch,
    PackedString,
    QueryStats,
    hamming,
    lcp,
    unpack,
)
from .trie import CompactTrie, Position, build_compact_trie, naive_prefix_search
from .wbt import WbtNode, WeightBalancedTree, build_wbt, off_path_cover, range_cover

ROOT_POS = Position(0, 0)


@dataclass(frozen=True)
class CreditedString:
    """A dictionary suffix with its remaining mismatch budget."""

    sid: int
    start: int
    credit: int


class _VerticalPath:
    __slots__ = ("wbt", "member_prefix")

    def __init__(self, wbt: WeightBalancedTree, member_prefix: list[int]):
        self.wbt = wbt
        self.member_prefix = member_prefix  # member idx -> count of present members before it


class _HorizontalNode:
    __slots__ = ("wbt", "child_leaf_index")

    def __init__(self, wbt: WeightBalancedTree, child_leaf_index: dict[int, int]):
        self.wbt = wbt
        self.child_leaf_index = child_leaf_index


def _mismatches_capped(
    a: PackedString, a_from: int, b: PackedString, b_from: int, length: int, cap: int
) -> int | None:
    """Hamming distance of two windows if <= cap, else None (word jumps)."""
    pos = 0
    cnt = 0
    while pos < length:
        pos += lcp(a, a_from + pos, b, b_from + pos, max_len=length - pos)
        if pos >= length:
            break
        cnt += 1
        if cnt > cap:
            return None
        pos += 1
    return cnt


class ErrataTrie:
    """One trie of the recursive structure plus its child-trie machinery."""

    __slots__ = (
        "tree",
        "tid",
        "level",
        "start",
        "slen",
        "n_strings",
        "trie",
        "leaf_of_sid",
        "vertical",
        "horizontal",
    )

    def __init__(self, tree: "ErrataTree", creds: list[CreditedString], level: int):
        self.tree = tree
        self.tid = len(tree.tries)
        tree.tries.append(self)
        self.level = level
        self.start = creds[0].start
        self.slen = tree.dictionary.m - self.start
        self.n_strings = len(creds)
        tree.total_strings += len(creds)
        store = tree.dictionary.strings
        self.trie = build_compact_trie(store, [(c.sid, c.start, c) for c in creds])
        assert all(c.start == self.start for c in creds)
        # leaf payloads ordered by credit descending so reporting is a prefix scan
        self.leaf_of_sid: dict[int, int] = {}
        for leaf in self.trie.leaves:
            pl = self.trie.payload[leaf]
            if pl:
                pl.sort(key=lambda cs: -cs.credit)
                for cs in pl:
                    self.leaf_of_sid[cs.sid] = leaf
        self.vertical: list[_VerticalPath | None] = []
        self.horizontal: dict[int, _HorizontalNode] = {}
        if level > 0 and self.slen > 0:
            self._build_children()

    # ------------------------------------------------------------------
    def _payloads_below(self, v: int) -> Iterator[CreditedString]:
        t = self.trie
        for li in range(t.leaf_lo[v], t.leaf_hi[v] + 1):
            pl = t.payload[t.leaves[li]]
            if pl:
                yield from pl

    def _rep_payload(self, v: int) -> CreditedString:
        t = self.trie
        return t.payload[t.leaves[t.leaf_lo[v]]][0]

    def _build_children(self) -> None:
        t = self.trie
        store = self.tree.dictionary.strings
        # vertical: per heavy path, a WBT over members weighted by diverging strings
        for pid, members in enumerate(t.path_members):
            weights = []
            for v in members:
                hc = t.heavy_child[v]
                w = 0
                for c in t.children[v]:
                    if c != hc:
                        w += t.string_count[c]
                weights.append(w)
            present = [i for i, w in enumerate(weights) if w > 0]
            member_prefix = [0] * (len(members) + 1)
            for i in range(len(members)):
                member_prefix[i + 1] = member_prefix[i] + (1 if weights[i] > 0 else 0)
            if not present:
                self.vertical.append(None)
                continue
            wbt = build_wbt([weights[i] for i in present])
            self.vertical.append(_VerticalPath(wbt, member_prefix))
            for nd in wbt.all_nodes:
                v_j = members[present[nd.leaf_hi - 1]]
                cut = t.depth[v_j] + 1
                ref = self._rep_payload(t.heavy_child[v_j])
                new_creds = []
                for pi in present[nd.leaf_lo : nd.leaf_hi]:
                    v = members[pi]
                    hcv = t.heavy_child[v]
                    for c in t.children[v]:
                        if c == hcv:
                            continue
                        for cs in self._payloads_below(c):
                            charge = _mismatches_capped(
                                store[cs.sid], cs.start, store[ref.sid], ref.start, cut, cs.credit
                            )
                            if charge is not None:
                                new_creds.append(
                                    CreditedString(cs.sid, cs.start + cut, cs.credit - charge)
                                )
                nd.tree = ErrataTrie(self.tree, new_creds, self.level - 1) if new_creds else None
        # horizontal: per node, a WBT over its non-heavy children
        for v in range(t.n_nodes()):
            hc = t.heavy_child[v]
            if hc < 0:
                continue
            cut = t.depth[v] + 1
            sets: list[tuple[int, list[CreditedString]]] = []
            for c in t.children[v]:
                if c == hc:
                    continue
                cut_set = [
                    CreditedString(cs.sid, cs.start + cut, cs.credit - 1)
                    for cs in self._payloads_below(c)
                    if cs.credit >= 1
                ]
                if cut_set:
                    sets.append((c, cut_set))
            if not sets:
                continue
            wbt = build_wbt([len(s) for _, s in sets])
            child_leaf_index = {c: i for i, (c, _) in enumerate(sets)}
            self.horizontal[v] = _HorizontalNode(wbt, child_leaf_index)
            for nd in wbt.all_nodes:
                union: list[CreditedString] = []
                for _, cut_set in sets[nd.leaf_lo : nd.leaf_hi]:
                    union.extend(cut_set)
                nd.tree = ErrataTrie(self.tree, union, self.level - 1)


class ErrataTree:
    """The whole recursive index for one dictionary and mismatch bound."""

    __slots__ = ("dictionary", "k", "tries", "total_strings", "root")

    def __init__(self, dictionary: Dictionary, k: int):
        if k < 0:
            raise ValueError("mismatch bound k must be >= 0")
        self.dictionary = dictionary
        self.k = k
        self.tries: list[ErrataTrie] = []
        self.total_strings = 0
        creds = [CreditedString(i, 0, k) for i in range(dictionary.d)]
        self.root = ErrataTrie(self, creds, k)


def build(dictionary: Dictionary, k: int) -> ErrataTree:
    return ErrataTree(dictionary, k)


def _next_pow2(d: int) -> int:
    return 1 if d <= 1 else 1 << (d - 1).bit_length()


def prefix_search_budget(d: int, k: int) -> int:
    """Worst-case count of prefix-search operations per query, exact integers."""
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    dp = _next_pow2(d)
    lg = dp.bit_length() - 1
    return 2 * 9**k * comb(lg + k, lg) - 1


def stored_strings_bound(d: int, k: int) -> int:
    """Upper bound on total strings stored across all tries, exact integers."""
    if d < 1 or k < 0:
        raise ValueError("need d >= 1 and k >= 0")
    dp = _next_pow2(d)
    lg = dp.bit_length() - 1
    return 2 * 4**k * dp * comb(lg + k, lg) - dp


def report_at(etrie: ErrataTrie, pos: Position, mu: int) -> list[int]:
    """Ids at an exact-match endpoint with credit >= mu (prefix scan)."""
    if pos.off != 0:
        return []
    out = []
    pl = etrie.trie.payload[pos.node]
    if pl:
        for cs in pl:
            if cs.credit < mu:
                break
            out.append(cs.sid)
    return out


# ----------------------------------------------------------------------
# query side


class NaiveBackend:
    """Prefix searches by direct letter walks; reference backend."""

    def new_query(self, P: PackedString, stats: QueryStats) -> "NaiveQuery":
        return NaiveQuery(P)


class NaiveQuery:
    def __init__(self, P: PackedString):
        self.q = unpack(P)

    def answer(self, start: int):  # pragma: no cover - never requested
        raise AssertionError("naive backend issues no suffix requests")

    def rooted(self, etrie: ErrataTrie, qstart: int):
        if False:  # generator protocol
            yield
        return naive_prefix_search(etrie.trie, ROOT_POS, self.q, qstart)

    def unrooted(self, etrie: ErrataTrie, pos: Position, qstart: int):
        if False:  # generator protocol
            yield
        return naive_prefix_search(etrie.trie, pos, self.q, qstart)


class _LookupCtx:
    __slots__ = ("m", "stats", "results", "query", "fp", "pending")

    def __init__(self, m: int, stats: QueryStats, query: Any, fp: Any):
        self.m = m
        self.stats = stats
        self.results: set[int] = set()
        self.query = query
        self.fp = fp
        self.pending: deque = deque()

    def spawn(self, etrie: ErrataTrie, pos: Position, qstart: int, kp: int, mu: int) -> None:
        self.pending.append(_frame(self, etrie, pos, qstart, kp, mu))

    def report_node(self, etrie: ErrataTrie, node: int, mu: int) -> None:
        pl = etrie.trie.payload[node]
        if not pl:
            return
        for cs in pl:
            if cs.credit < mu:
                break
            self.results.add(cs.sid)


def _heavy_chain(trie: CompactTrie, start_pos: Position, end_pos: Position):
    """Heavy paths crossed from start to end.

    Returns ``(segs, exits)`` where each seg is ``(path_id, lo_mem, hi_mem)``
    over member indices whose diverging strings the caller must cover, and
    each exit is ``(node, entered_child)`` for mid-chain path switches.
    """
    start_node = start_pos.node
    start_path = trie.node_path[start_node]
    anchor = end_pos.node
    paths = []
    x = anchor
    while True:
        p = trie.node_path[x]
        paths.append(p)
        if p == start_path:
            break
        x = trie.parent[trie.path_members[p][0]]
    paths.reverse()
    segs = []
    exits = []
    for i, p in enumerate(paths):
        lo_mem = trie.node_path_idx[start_node] if i == 0 else 0
        if i + 1 < len(paths):
            nxt_head = trie.path_members[paths[i + 1]][0]
            u = trie.parent[nxt_head]
            segs.append((p, lo_mem, trie.node_path_idx[u]))
            exits.append((u, nxt_head))
        else:
            segs.append((p, lo_mem, trie.node_path_idx[anchor]))
    return segs, exits


def _advance_into(trie: CompactTrie, child: int) -> Position:
    return Position(child, 1) if trie.edge_len(child) > 1 else Position(child, 0)


def _advance_on_edge(trie: CompactTrie, pos: Position) -> Position:
    if pos.off + 1 == trie.edge_len(pos.node):
        return Position(pos.node, 0)
    return Position(pos.node, pos.off + 1)


def _frame(ctx: _LookupCtx, etrie: ErrataTrie, pos: Position, qstart: int, kp: int, mu: int):
    trie = etrie.trie
    qlen = ctx.m - qstart
    assert kp <= etrie.level
    assert qlen == etrie.slen - trie.pos_depth(pos)
    if qlen == 0:
        assert pos.off == 0
        ctx.report_node(etrie, pos.node, mu)
        return
    if pos == ROOT_POS:
        ans = yield from ctx.query.rooted(etrie, qstart)
    else:
        ans = yield from ctx.query.unrooted(etrie, pos, qstart)
    ctx.stats.prefix_search_ops += 1
    end_pos, matched = ans
    if kp == 0:
        if matched == qlen:
            assert end_pos.off == 0
            ctx.report_node(etrie, end_pos.node, mu)
        return

    segs, exits = _heavy_chain(trie, pos, end_pos)
    fp_probe = ctx.fp if (ctx.fp is not None and kp == 1) else None

    for pid, lo_mem, hi_mem in segs:
        vp = etrie.vertical[pid]
        if vp is None:
            continue
        lo_p = vp.member_prefix[lo_mem]
        hi_p = vp.member_prefix[hi_mem]
        if lo_p >= hi_p:
            continue
        for nd in range_cover(vp.wbt, lo_p, hi_p):
            child = nd.tree
            if child is None:
                continue
            if fp_probe is not None:
                fp_probe.probe_rooted(ctx, child, ctx.m - child.slen, mu)
            else:
                ctx.spawn(child, ROOT_POS, ctx.m - child.slen, kp - 1, mu)

    for u, entered in exits:
        hz = etrie.horizontal.get(u)
        if hz is not None:
            for nd in off_path_cover(hz.wbt, hz.child_leaf_index.get(entered)):
                child = nd.tree
                if fp_probe is not None:
                    fp_probe.probe_rooted(ctx, child, ctx.m - child.slen, mu)
                else:
                    ctx.spawn(child, ROOT_POS, ctx.m - child.slen, kp - 1, mu)
        cont_qstart = qstart + (trie.depth[u] + 1 - trie.pos_depth(pos))
        if fp_probe is not None:
            fp_probe.probe_continuation(ctx, etrie, u, cont_qstart, mu + 1)
        else:
            hc = trie.heavy_child[u]
            ctx.spawn(etrie, _advance_into(trie, hc), cont_qstart, kp - 1, mu + 1)

    if matched == qlen:
        assert end_pos.off == 0
        ctx.report_node(etrie, end_pos.node, mu)
        return
    if end_pos.off != 0:
        ctx.spawn(etrie, _advance_on_edge(trie, end_pos), qstart + matched + 1, kp - 1, mu + 1)
    else:
        u = end_pos.node
        hz = etrie.horizontal.get(u)
        if hz is not None:
            child = hz.wbt.root.tree
            if fp_probe is not None:
                fp_probe.probe_rooted(ctx, child, ctx.m - child.slen, mu)
            else:
                ctx.spawn(child, ROOT_POS, ctx.m - child.slen, kp - 1, mu)
        hc = trie.heavy_child[u]
        ctx.spawn(etrie, _advance_into(trie, hc), qstart + matched + 1, kp - 1, mu + 1)


def lookup(
    tree: ErrataTree,
    P: PackedString,
    backend: Any,
    fp_layer: Any = None,
) -> tuple[list[int], QueryStats]:
    """All dictionary ids within Hamming distance k of ``P``, plus counters."""
    stats = QueryStats()
    dct = tree.dictionary
    if P.length != dct.m:
        raise LengthMismatch(f"query length {P.length} != m == {dct.m}")
    if dct.d <= 2:
        # tiny dictionaries skip the recursion; a word-level scan is exact
        ids = [sid for sid, s in enumerate(dct.strings) if hamming(P, s, tree.k, stats) is not None]
        stats.reported = len(ids)
        return ids, stats

    query = backend.new_query(P, stats)
    fp = fp_layer.new_query(P, stats) if (fp_layer is not None and tree.k >= 2) else None
    ctx = _LookupCtx(dct.m, stats, query, fp)
    ctx.spawn(tree.root, ROOT_POS, 0, tree.k, 0)

    heap: list[tuple[int, int, Any, Any]] = []
    seq = 0
    while ctx.pending or heap:
        while ctx.pending:
            gen = ctx.pending.popleft()
            try:
                req = next(gen)
            except StopIteration:
                continue
            heapq.heappush(heap, (req.start, seq, gen, req))
            seq += 1
        if not heap:
            break
        _, _, gen, req = heapq.heappop(heap)
        ans = ctx.query.answer(req.start)
        try:
            req2 = gen.send(ans)
        except StopIteration:
            continue
        heapq.heappush(heap, (req2.start, seq, gen, req2))
        seq += 1

    ids = sorted(ctx.results)
    stats.reported = len(ids)
    return ids, stats
