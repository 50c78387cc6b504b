"""Compact tries over (suffixes of) dictionary strings.

Nodes are integer ids into parallel arrays.  Edge labels never copy letters;
they reference the backing store as (string id, start, end) triples.  The
build sorts entries by packed word keys (padded groups compare like the
letters they hold), then assembles the trie with the classic stack algorithm
driven by adjacent longest-common-prefix values.

A :class:`Position` is either a node (``off == 0``) or a spot inside the edge
leading into ``node`` after consuming ``off`` of its letters.
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Any, NamedTuple, Sequence

from .core import KerrataError, PackedString, QueryStats, extract_window, lcp


class MixedLengths(KerrataError, ValueError):
    """Entries of unequal length where equal lengths are required."""


class Position(NamedTuple):
    node: int
    off: int  # 0 == at node; else letters consumed into node's incoming edge


class CompactTrie:
    """Compact trie with heavy-path decomposition and query preprocessing."""

    def __init__(self, store: Sequence[PackedString], string_length: int | None):
        self.store = store
        self.string_length = string_length  # None for mixed-length tries
        self.alphabet = store[0].alphabet
        # node arrays; node 0 is the root
        self.parent = [-1]
        self.depth = [0]
        self.edge_sid = [-1]
        self.edge_lo = [0]
        self.edge_hi = [0]
        self.children: list[list[int]] = [[]]
        self.child_letters: list[list[int]] = [[]]
        self.payload: list[list[Any] | None] = [None]
        # filled by _preprocess
        self.leaf_count: list[int] = []
        self.string_count: list[int] = []
        self.heavy_child: list[int] = []
        self.node_path: list[int] = []
        self.node_path_idx: list[int] = []
        self.path_members: list[list[int]] = []
        self.path_depths: list[list[int]] = []
        self.leaf_lo: list[int] = []
        self.leaf_hi: list[int] = []
        self.leaves: list[int] = []
        self._euler = None
        self._sparse = None
        self._string_rank_data = None
        self.lca_impl = "sparse"

    # ------------------------------------------------------------------
    def n_nodes(self) -> int:
        return len(self.parent)

    def edge_len(self, v: int) -> int:
        return self.edge_hi[v] - self.edge_lo[v]

    def edge_letter(self, v: int, t: int) -> int:
        return self.store[self.edge_sid[v]].letter_at(self.edge_lo[v] + t)

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    def child_by_letter(self, v: int, letter: int) -> int | None:
        letters = self.child_letters[v]
        i = bisect_right(letters, letter) - 1
        if i >= 0 and letters[i] == letter:
            return self.children[v][i]
        return None

    def pos_depth(self, pos: Position) -> int:
        if pos.off == 0:
            return self.depth[pos.node]
        return self.depth[self.parent[pos.node]] + pos.off

    def position_at(self, v: int, off: int) -> Position:
        """Canonical position ``off`` letters into the edge entering ``v``."""
        if off == self.edge_len(v):
            return Position(v, 0)
        return Position(v, off)

    def node_label_ref(self, v: int) -> tuple[int, int]:
        """(sid, start) such that store[sid][start: start + depth[v]] spells v's label."""
        sid = self.edge_sid[v]
        return sid, self.edge_hi[v] - self.depth[v]

    # ------------------------------------------------------------------
    def _preprocess(self) -> None:
        n = self.n_nodes()
        order = self._dfs_order()
        self.leaf_count = [0] * n
        self.string_count = [0] * n
        self.leaf_lo = [0] * n
        self.leaf_hi = [0] * n
        self.leaves = []
        for v in order:
            if not self.children[v]:
                self.leaf_lo[v] = self.leaf_hi[v] = len(self.leaves)
                self.leaves.append(v)
        for v in reversed(order):
            if self.children[v]:
                self.leaf_count[v] = sum(self.leaf_count[c] for c in self.children[v])
                self.leaf_lo[v] = self.leaf_lo[self.children[v][0]]
                self.leaf_hi[v] = self.leaf_hi[self.children[v][-1]]
            else:
                self.leaf_count[v] = 1
            own = len(self.payload[v]) if self.payload[v] else 0
            self.string_count[v] = own + sum(self.string_count[c] for c in self.children[v])
        # heavy child: max subtree leaf count, ties to the smallest first letter
        self.heavy_child = [-1] * n
        for v in order:
            best = -1
            best_cnt = -1
            for c in self.children[v]:
                if self.leaf_count[c] > best_cnt:
                    best, best_cnt = c, self.leaf_count[c]
            self.heavy_child[v] = best
        # heavy paths, top-down
        self.node_path = [-1] * n
        self.node_path_idx = [-1] * n
        self.path_members = []
        self.path_depths = []
        for v in order:
            if v == 0 or self.heavy_child[self.parent[v]] != v:
                pid = len(self.path_members)
                members = []
                x = v
                while x != -1:
                    self.node_path[x] = pid
                    self.node_path_idx[x] = len(members)
                    members.append(x)
                    x = self.heavy_child[x]
                self.path_members.append(members)
                self.path_depths.append([self.depth[x] for x in members])

    def _dfs_order(self) -> list[int]:
        order = []
        stack = [0]
        children = self.children
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(reversed(children[v]))
        return order

    # -- LCA -----------------------------------------------------------
    def _build_euler(self) -> None:
        n = self.n_nodes()
        euler: list[int] = []
        edepth: list[int] = []
        first = [-1] * n
        depth = self.depth
        children = self.children
        stack: list[tuple[int, int]] = [(0, 0)]
        while stack:
            v, ci = stack[-1]
            if ci == 0:
                first[v] = len(euler)
                euler.append(v)
                edepth.append(depth[v])
            if ci < len(children[v]):
                stack[-1] = (v, ci + 1)
                stack.append((children[v][ci], 0))
            else:
                stack.pop()
                if stack:
                    p = stack[-1][0]
                    euler.append(p)
                    edepth.append(depth[p])
        m = len(euler)
        klev = max(1, m.bit_length())
        table = [list(range(m))]
        for j in range(1, klev):
            half = 1 << (j - 1)
            prev = table[-1]
            width = m - (1 << j) + 1
            if width <= 0:
                break
            row = [0] * width
            for i in range(width):
                a = prev[i]
                b = prev[i + half]
                row[i] = a if edepth[a] <= edepth[b] else b
            table.append(row)
        self._euler = (euler, edepth, first)
        self._sparse = table

    def lca(self, u: int, v: int) -> int:
        if u == v:
            return u
        if self.lca_impl == "heavy":
            return self._lca_heavy(u, v)
        if self._euler is None:
            self._build_euler()
        euler, edepth, first = self._euler
        l, r = first[u], first[v]
        if l > r:
            l, r = r, l
        j = (r - l + 1).bit_length() - 1
        table = self._sparse
        a = table[j][l]
        b = table[j][r - (1 << j) + 1]
        return euler[a] if edepth[a] <= edepth[b] else euler[b]

    def _lca_heavy(self, u: int, v: int) -> int:
        path, head = self.node_path, self.path_members
        depth = self.depth
        while path[u] != path[v]:
            hu = head[path[u]][0]
            hv = head[path[v]][0]
            if depth[hu] >= depth[hv]:
                u = self.parent[hu]
            else:
                v = self.parent[hv]
        return u if depth[u] <= depth[v] else v

    # -- WLA -----------------------------------------------------------
    def wla_node(self, u: int, ell: int, stats: QueryStats | None = None) -> int:
        """Deepest ancestor of ``u`` whose label length is at most ``ell``."""
        if ell > self.depth[u] or ell < 0:
            raise KerrataError(f"label length {ell} outside 0..{self.depth[u]}")
        if stats is not None:
            stats.wla_queries += 1
        x = u
        while self.depth[self.path_members[self.node_path[x]][0]] > ell:
            x = self.parent[self.path_members[self.node_path[x]][0]]
        pid = self.node_path[x]
        depths = self.path_depths[pid]
        i = bisect_right(depths, ell, 0, self.node_path_idx[x] + 1) - 1
        return self.path_members[pid][i]

    def wla_position(self, u: int, ell: int, stats: QueryStats | None = None) -> Position:
        """Exact position at label length ``ell`` on the root-to-``u`` path."""
        if ell > self.depth[u] or ell < 0:
            raise KerrataError(f"label length {ell} outside 0..{self.depth[u]}")
        if stats is not None:
            stats.wla_queries += 1
        x = u
        last = -1
        while self.depth[self.path_members[self.node_path[x]][0]] > ell:
            last = self.path_members[self.node_path[x]][0]
            x = self.parent[last]
        pid = self.node_path[x]
        depths = self.path_depths[pid]
        hi = self.node_path_idx[x] + 1
        i = bisect_right(depths, ell, 0, hi) - 1
        v = self.path_members[pid][i]
        if self.depth[v] == ell:
            return Position(v, 0)
        w = self.path_members[pid][i + 1] if i + 1 < hi else last
        return Position(w, ell - self.depth[self.parent[w]])

    # -- leaf ranges -----------------------------------------------------
    def leaf_range(self, v: int) -> tuple[int, int]:
        return self.leaf_lo[v], self.leaf_hi[v]

    def position_leaf_range(self, pos: Position) -> tuple[int, int]:
        return self.leaf_lo[pos.node], self.leaf_hi[pos.node]

    # -- string ranks (payload nodes in lexicographic order) -------------
    def ensure_string_ranks(self) -> None:
        """Rank all distinct stored strings; a node's payload precedes its subtree."""
        if self._string_rank_data is not None:
            return
        n = self.n_nodes()
        rank_of_node = [-1] * n
        min_rank = [0] * n
        max_rank = [-1] * n
        rank_nodes: list[int] = []
        order = self._dfs_order()
        for v in order:
            if self.payload[v]:
                rank_of_node[v] = len(rank_nodes)
                rank_nodes.append(v)
        for v in reversed(order):
            lo = rank_of_node[v] if self.payload[v] else None
            hi = rank_of_node[v] if self.payload[v] else None
            for c in self.children[v]:
                if min_rank[c] <= max_rank[c]:
                    lo = min_rank[c] if lo is None else min(lo, min_rank[c])
                    hi = max_rank[c] if hi is None else max(hi, max_rank[c])
            min_rank[v] = lo if lo is not None else 0
            max_rank[v] = hi if hi is not None else -1
        self._string_rank_data = (rank_of_node, min_rank, max_rank, rank_nodes)

    @property
    def string_rank_of_node(self) -> list[int]:
        self.ensure_string_ranks()
        return self._string_rank_data[0]

    @property
    def subtree_min_rank(self) -> list[int]:
        self.ensure_string_ranks()
        return self._string_rank_data[1]

    @property
    def subtree_max_rank(self) -> list[int]:
        self.ensure_string_ranks()
        return self._string_rank_data[2]

    @property
    def rank_nodes(self) -> list[int]:
        self.ensure_string_ranks()
        return self._string_rank_data[3]


def _entry_key(store: Sequence[PackedString], sid: int, start: int, n: int) -> tuple[int, ...]:
    """Word-tuple sort key; equal keys iff equal strings, order is lexicographic."""
    s = store[sid]
    L = s.alphabet.letters_per_word
    b = s.alphabet.bits_per_letter
    key = []
    for g in range(0, n, L):
        c = min(L, n - g)
        key.append(extract_window(s, start + g, c) << ((L - c) * b))
    return tuple(key)


def build_compact_trie(
    store: Sequence[PackedString],
    entries: Sequence[tuple[int, int, Any]],
    require_equal_lengths: bool = True,
    entry_len: int | None = None,
) -> CompactTrie:
    """Build a compact trie over suffixes ``store[sid][start:]`` with payloads.

    Each entry is ``(sid, start, payload_item)``.  Entries spelling equal
    strings share a node and their payload items are merged in input order.
    ``entry_len`` caps every entry to a fixed-length substring instead of the
    whole suffix.
    """
    if not entries:
        raise KerrataError("cannot build a trie over zero entries")

    def entry_n(sid: int, start: int) -> int:
        n = store[sid].length - start
        return n if entry_len is None else min(n, entry_len)

    lengths = {entry_n(sid, start) for sid, start, _ in entries}
    if require_equal_lengths and len(lengths) > 1:
        raise MixedLengths(f"entry lengths differ: {sorted(lengths)}")
    slen = lengths.pop() if len(lengths) == 1 else None
    trie = CompactTrie(store, slen)

    decorated = sorted(
        ((_entry_key(store, sid, start, entry_n(sid, start)), sid, start, pl) for sid, start, pl in entries),
        key=lambda t: t[0],
    )
    # merge equal strings
    merged: list[tuple[int, int, int, list[Any]]] = []  # (sid, start, n, payloads)
    prev_key = None
    for key, sid, start, pl in decorated:
        if prev_key is not None and key == prev_key:
            merged[-1][3].append(pl)
        else:
            merged.append((sid, start, entry_n(sid, start), [pl]))
            prev_key = key

    parent, depth = trie.parent, trie.depth
    edge_sid, edge_lo, edge_hi = trie.edge_sid, trie.edge_lo, trie.edge_hi
    children, child_letters, payload = trie.children, trie.child_letters, trie.payload

    def new_node(par: int, dep: int, sid: int, lo: int, hi: int) -> int:
        v = len(parent)
        parent.append(par)
        depth.append(dep)
        edge_sid.append(sid)
        edge_lo.append(lo)
        edge_hi.append(hi)
        children.append([])
        child_letters.append([])
        payload.append(None)
        return v

    stack = [0]
    prev: tuple[int, int, int] | None = None
    for sid, start, n, pls in merged:
        if n == 0:
            payload[0] = (payload[0] or []) + pls
            continue
        if prev is None:
            ell = 0
        else:
            psid, pstart, pn = prev
            ell = lcp(store[psid], pstart, store[sid], start, max_len=min(pn, n))
        last = -1
        while depth[stack[-1]] > ell:
            last = stack.pop()
        top = stack[-1]
        if depth[top] == ell:
            attach = top
        else:
            cut = ell - depth[top]
            mid = new_node(top, ell, edge_sid[last], edge_lo[last], edge_lo[last] + cut)
            children[top][-1] = mid
            parent[last] = mid
            edge_lo[last] += cut
            children[mid].append(last)
            child_letters[mid].append(store[edge_sid[last]].letter_at(edge_lo[last]))
            stack.append(mid)
            attach = mid
        leaf = new_node(attach, n, sid, start + ell, start + n)
        payload[leaf] = pls
        children[attach].append(leaf)
        child_letters[attach].append(store[sid].letter_at(start + ell))
        stack.append(leaf)
        prev = (sid, start, n)

    trie._preprocess()
    return trie


def decompose_heavy_paths(trie: CompactTrie) -> list[list[int]]:
    """Heavy-path members in top-down order (computed at build; exposed for tests)."""
    return trie.path_members


def naive_prefix_search(
    trie: CompactTrie, from_pos: Position, q: Sequence[int], q_from: int = 0
) -> tuple[Position, int]:
    """Reference letter-by-letter prefix search; test oracle for fast paths.

    Returns the deepest position whose path label from ``from_pos`` is a
    prefix of ``q[q_from:]`` and the number of letters matched.
    """
    node, off = from_pos
    matched = 0
    qlen = len(q) - q_from
    while matched < qlen:
        if off == 0:
            c = trie.child_by_letter(node, q[q_from + matched])
            if c is None:
                break
            node, off = c, 0
            elen = trie.edge_len(node)
            # consume the edge from its start
            t = 0
        else:
            elen = trie.edge_len(node)
            t = off
        while t < elen and matched < qlen and trie.edge_letter(node, t) == q[q_from + matched]:
            t += 1
            matched += 1
        if t < elen:
            off = t
            break
        off = 0
    return trie.position_at(node, off) if off else Position(node, 0), matched
