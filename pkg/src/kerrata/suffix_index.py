"""Shared prefix-search backbone over (all or sampled) dictionary suffixes.

The suffix trie is cut at boundary positions whose label length is a multiple
of the word capacity; components with more than two nodes get an exact
dictionary plus a predecessor array over their word-sized leaf labels, so a
search advances one whole word per probe.  Batched searches over
non-decreasing start offsets reuse the previous answer through one weighted
level ancestor jump, which is what keeps the total number of word blocks read
near ``m / letters_per_word`` plus a logarithmic term per query.

Rooted and unrooted prefix searches inside the recursive mismatch structure
reduce to searches here: rank predecessor arrays locate the neighbouring
stored strings, lowest common ancestors convert neighbours into longest
common prefixes, and weighted level ancestors convert lengths back into
positions.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from math import ceil, log2
from typing import Any, NamedTuple

from .core import (
    Dictionary,
    KerrataError,
    PackedString,
    QueryStats,
    extract_window,
    first_mismatch_in_words,
    lcp,
)
from .trie import CompactTrie, Position, build_compact_trie

ROOT_POS = Position(0, 0)


def default_sampling_interval(dictionary: Dictionary) -> int:
    """Word capacity times ceil(log2 d), clamped into ``1..m``."""
    L = dictionary.alphabet.letters_per_word
    lg = max(1, ceil(log2(max(dictionary.d, 2))))
    return max(1, min(L * lg, dictionary.m))


# ----------------------------------------------------------------------
# micro components


class _MicroComp:
    """One stored micro component: sorted word labels of its leaves."""

    __slots__ = ("words", "leaf_pos", "leaf_nlet", "exact")

    def __init__(self, labelled: list[tuple[int, Position, int]]):
        labelled.sort(key=lambda t: t[0])
        self.words = [w for w, _, _ in labelled]
        self.leaf_pos = [p for _, p, _ in labelled]
        self.leaf_nlet = [n for _, _, n in labelled]
        self.exact = {w: i for i, (w, _, _) in enumerate(labelled)}


def build_micro_components(trie: CompactTrie) -> dict[Position, _MicroComp]:
    """Cut the trie at word-aligned boundary positions.

    Only components with more than two nodes are stored; everything else is a
    single unbranching segment the walker compares directly.
    """
    L = trie.alphabet.letters_per_word
    b = trie.alphabet.bits_per_letter
    store = trie.store
    depth = trie.depth
    parent = trie.parent
    children = trie.children

    counts: dict[Position, int] = {ROOT_POS: 1}
    leaf_descr: dict[Position, list[tuple[Position, int]]] = {}
    root_of: list[Position | None] = [None] * trie.n_nodes()
    root_of[0] = ROOT_POS

    def note(r: Position, pos: Position, nlet: int) -> None:
        leaf_descr.setdefault(r, []).append((pos, nlet))

    for c in trie._dfs_order():
        if c == 0:
            continue
        x = parent[c]
        dx = depth[x]
        dc = depth[c]
        r0 = Position(x, 0) if dx % L == 0 else root_of[x]
        assert r0 is not None
        t1 = (dx // L + 1) * L
        if t1 > dc:
            # edge stays inside r0's region
            counts[r0] = counts.get(r0, 1) + 1
            root_of[c] = r0
            if not children[c]:
                note(r0, Position(c, 0), dc - (t1 - L))
            continue
        # the edge crosses the boundary at t1: r0 gains a leaf position there
        counts[r0] = counts.get(r0, 1) + 1
        note(r0, trie.position_at(c, t1 - dx), L)
        if dc % L == 0:
            # c is itself a boundary node; segments past t1 are unbranching
            root_of[c] = Position(c, 0)
            counts.setdefault(Position(c, 0), 1)
        else:
            t_last = (dc // L) * L  # >= t1, strictly inside the edge
            rpos = Position(c, t_last - dx)
            counts[rpos] = counts.get(rpos, 1) + 1
            root_of[c] = rpos
            if not children[c]:
                note(rpos, Position(c, 0), dc - t_last)

    out: dict[Position, _MicroComp] = {}
    for r, cnt in counts.items():
        if cnt <= 2:
            continue
        descr = leaf_descr.get(r)
        if not descr:
            continue
        q_depth = trie.pos_depth(r)
        labelled = []
        for pos, nlet in descr:
            sid, st = trie.node_label_ref(pos.node)
            win = extract_window(store[sid], st + q_depth, nlet)
            labelled.append((win << ((L - nlet) * b), pos, nlet))
        out[r] = _MicroComp(labelled)
    return out


class _ReadSpan:
    """Records the query letter interval touched by one prefix search."""

    __slots__ = ("lo", "hi")

    def __init__(self) -> None:
        self.lo: int | None = None
        self.hi: int | None = None

    def add(self, off: int, count: int) -> None:
        if self.lo is None or off < self.lo:
            self.lo = off
        if self.hi is None or off + count > self.hi:
            self.hi = off + count


def walk_blocks(
    trie: CompactTrie,
    comps: dict[Position, _MicroComp],
    P: PackedString,
    p_base: int,
    start_pos: Position,
    p_limit: int,
    stats: QueryStats,
    span: _ReadSpan | None = None,
) -> tuple[Position, int]:
    """Continue a prefix search from a word-aligned position.

    The query is ``P[p_base : p_limit]`` aligned so that trie depth ``t``
    corresponds to query offset ``p_base + t``.  ``start_pos`` must sit at a
    depth that is a multiple of the word capacity.  Returns the final
    position and the final matched query offset.
    """
    alph = trie.alphabet
    L = alph.letters_per_word
    b = alph.bits_per_letter
    store = trie.store
    pos = start_pos
    while True:
        t = trie.pos_depth(pos)
        p_cur = p_base + t
        rem = p_limit - p_cur
        if rem == 0:
            return pos, p_cur
        comp = comps.get(pos)
        if comp is not None:
            c = min(L, rem)
            qw = extract_window(P, p_cur, c) << ((L - c) * b)
            stats.word_blocks_read += 1
            if span is not None:
                span.add(p_cur, c)
            hit = comp.exact.get(qw)
            if hit is not None:
                nlet = comp.leaf_nlet[hit]
                pos = comp.leaf_pos[hit]
                if nlet < L:
                    return pos, p_cur + nlet
                continue
            i = bisect_left(comp.words, qw)
            best = -1
            best_leaf = -1
            for cand in (i - 1, i):
                if 0 <= cand < len(comp.words):
                    off = first_mismatch_in_words(alph, qw, comp.words[cand], L)
                    assert off is not None
                    eff = min(off, c, comp.leaf_nlet[cand])
                    if eff > best:
                        best = eff
                        best_leaf = cand
            anchor = comp.leaf_pos[best_leaf].node
            return trie.wla_position(anchor, t + best, stats), p_cur + best
        # unbranching segment
        node, off = pos
        if off == 0:
            ch = trie.children[node]
            if not ch:
                return pos, p_cur
            assert len(ch) == 1, "branching boundary node must be a stored component"
            v = ch[0]
            e_from = 0
        else:
            v = node
            e_from = off
        elen = trie.edge_len(v)
        seg = min(elen - e_from, L)
        cmp_len = min(seg, rem)
        qw = extract_window(P, p_cur, cmp_len)
        sid = trie.edge_sid[v]
        ew = extract_window(store[sid], trie.edge_lo[v] + e_from, cmp_len)
        stats.word_blocks_read += 1
        if span is not None:
            span.add(p_cur, cmp_len)
        mis = first_mismatch_in_words(alph, qw, ew, cmp_len)
        if mis is not None:
            if e_from + mis == 0:
                return pos, p_cur
            return trie.position_at(v, e_from + mis), p_cur + mis
        if cmp_len < seg:
            return trie.position_at(v, e_from + cmp_len), p_cur + cmp_len
        pos = trie.position_at(v, e_from + seg)
        if pos.off == 0 and trie.depth[v] % L != 0:
            # landed on an interior node short of the boundary: a trie leaf
            assert not trie.children[v]
            return pos, p_cur + seg


# ----------------------------------------------------------------------
# the suffix index


class SufAnswer(NamedTuple):
    start: int
    pos: Position
    matched: int
    witness_node: int
    witness_identity: tuple[int, int]
    read_lo: int
    read_hi: int


class SuffixIndex:
    """Compact trie over all (mode full) or sampled (mode sampled) suffixes."""

    def __init__(self, dictionary: Dictionary, mode: str = "full", sampling: int | None = None):
        if mode not in ("full", "sampled"):
            raise KerrataError(f"unknown mode {mode!r}")
        self.dictionary = dictionary
        self.mode = mode
        m = dictionary.m
        if mode == "sampled":
            self.B = sampling if sampling is not None else default_sampling_interval(dictionary)
            if self.B < 1:
                raise KerrataError("sampling interval must be >= 1")
            self.B = min(self.B, m)
            starts = range(self.B - 1, m, self.B)
        else:
            self.B = 1
            starts = range(m)
        entries = [(sid, st, (sid, st)) for sid in range(dictionary.d) for st in starts]
        self.trie = build_compact_trie(dictionary.strings, entries, require_equal_lengths=False)
        self.trie.ensure_string_ranks()
        self.node_of: dict[tuple[int, int], int] = {}
        for node in self.trie.rank_nodes:
            for ident in self.trie.payload[node]:
                self.node_of[ident] = node
        # representative stored suffix at or below every node
        n = self.trie.n_nodes()
        self.witness_node = [-1] * n
        order = self.trie._dfs_order()
        for v in reversed(order):
            if self.trie.payload[v]:
                self.witness_node[v] = v
            else:
                self.witness_node[v] = self.witness_node[self.trie.children[v][0]]
        self.comps = build_micro_components(self.trie)

    # -- sampled-position helpers -----------------------------------
    def is_aligned(self, start: int) -> bool:
        return (start + 1) % self.B == 0 if self.mode == "sampled" else True

    def snap_up(self, start: int) -> int:
        """Smallest aligned offset >= start (may be >= m when none remains)."""
        if self.mode == "full":
            return start
        B = self.B
        return ((start + B) // B) * B - 1

    # -- rank machinery ----------------------------------------------
    def total_ranks(self) -> int:
        return len(self.trie.rank_nodes)

    def rank_bounds(self, P: PackedString, qstart: int, ans: SufAnswer) -> tuple[int | None, int | None]:
        """Global ranks of the predecessor and successor of ``P[qstart:]``.

        Predecessor is the largest stored string <= the query, successor the
        smallest >= it; either may be None at the extremes.
        """
        trie = self.trie
        qlen = P.length - qstart
        pos, matched = ans.pos, ans.matched
        rank_of = trie.string_rank_of_node
        min_rank = trie.subtree_min_rank
        max_rank = trie.subtree_max_rank
        total = self.total_ranks()

        def before(r: int) -> int | None:
            return r - 1 if r > 0 else None

        def after(r: int) -> int | None:
            return r + 1 if r + 1 < total else None

        if matched == qlen:
            if pos.off == 0 and trie.payload[pos.node]:
                r = rank_of[pos.node]
                return r, r
            lo = min_rank[pos.node]
            return before(lo), lo
        nxt = P.letter_at(qstart + matched)
        if pos.off != 0:
            e = trie.edge_letter(pos.node, pos.off)
            if nxt < e:
                lo = min_rank[pos.node]
                return before(lo), lo
            hi = max_rank[pos.node]
            return hi, after(hi)
        v = pos.node
        letters = trie.child_letters[v]
        i = bisect_left(letters, nxt)
        if i > 0:
            pred = max_rank[trie.children[v][i - 1]]
        elif trie.payload[v]:
            pred = rank_of[v]
        else:
            pred = before(min_rank[v])
        if i < len(letters):
            succ = min_rank[trie.children[v][i]]
        else:
            succ = after(max_rank[v])
        return pred, succ

    def lcp_with_node(self, node: int, ans: SufAnswer) -> int:
        """Longest common prefix of the query and the string stored at ``node``."""
        d = self.trie.depth[self.trie.lca(node, ans.witness_node)]
        return min(d, ans.matched)

    def lcp_with_rank(self, rank: int, ans: SufAnswer) -> int:
        return self.lcp_with_node(self.trie.rank_nodes[rank], ans)


class BatchCursor:
    """Answers prefix searches for suffixes of one query string.

    Non-decreasing starts reuse the previous answer through a single jump;
    repeated starts are memoized; an out-of-order start falls back to a fresh
    walk from the root (`strict` forbids that, for the batched API whose
    contract requires sorted starts).
    """

    def __init__(self, index: SuffixIndex, P: PackedString, stats: QueryStats, strict: bool = False):
        self.index = index
        self.P = P
        self.stats = stats
        self.strict = strict
        self.prev: SufAnswer | None = None
        self.memo: dict[int, SufAnswer] = {}
        self.answers: list[SufAnswer] = []

    def answer(self, start: int) -> SufAnswer:
        index = self.index
        P = self.P
        m = P.length
        if not 0 <= start < m:
            raise KerrataError(f"suffix start {start} outside 0..{m - 1}")
        if not index.is_aligned(start):
            raise KerrataError(f"suffix start {start} not aligned to sampling interval {index.B}")
        cached = self.memo.get(start)
        if cached is not None:
            return cached
        prev = self.prev
        if prev is not None and start < prev.start:
            if self.strict:
                raise KerrataError("batch starts must be non-decreasing")
            prev = None
        trie = index.trie
        lam0 = 0
        delta = 0
        if prev is not None:
            delta = start - prev.start
            if prev.matched > delta:
                lam0 = prev.matched - delta
        L = trie.alphabet.letters_per_word
        lamp = lam0 - (lam0 % L)
        span = _ReadSpan()
        if lamp == 0:
            pos0 = ROOT_POS
        else:
            w_sid, w_start = prev.witness_identity
            jump_node = index.node_of[(w_sid, w_start + delta)]
            pos0 = trie.wla_position(jump_node, lamp, self.stats)
        pos, p_end = walk_blocks(trie, index.comps, P, start, pos0, m, self.stats, span)
        witness = index.witness_node[pos.node]
        ident = trie.payload[witness][0]
        ans = SufAnswer(
            start,
            pos,
            p_end - start,
            witness,
            ident,
            span.lo if span.lo is not None else start,
            span.hi if span.hi is not None else start,
        )
        self.prev = ans
        self.memo[start] = ans
        self.answers.append(ans)
        return ans


def build_suffix_index(dictionary: Dictionary, mode: str = "full", sampling: int | None = None) -> SuffixIndex:
    return SuffixIndex(dictionary, mode, sampling)


def batched_prefix_search(
    index: SuffixIndex, P: PackedString, starts: list[int], stats: QueryStats | None = None
) -> list[SufAnswer]:
    """Prefix searches for the suffixes of ``P`` at non-decreasing starts."""
    cursor = BatchCursor(index, P, stats if stats is not None else QueryStats(), strict=True)
    return [cursor.answer(s) for s in starts]


# ----------------------------------------------------------------------
# reductions from the recursive structure to the suffix trie


class _FullAnnex:
    __slots__ = ("ranks", "leaves")

    def __init__(self, ranks: list[int], leaves: list[int]):
        self.ranks = ranks  # sorted suffix-trie ranks of this trie's strings
        self.leaves = leaves  # parallel trie leaf node per rank


class _SampledAnnex:
    __slots__ = ("head_len", "heads_trie", "heads_comps", "heads_witness", "leaf_arrays")

    def __init__(self, head_len, heads_trie, heads_comps, heads_witness, leaf_arrays):
        self.head_len = head_len
        self.heads_trie = heads_trie
        self.heads_comps = heads_comps
        self.heads_witness = heads_witness
        self.leaf_arrays = leaf_arrays  # heads leaf node -> (sorted tail ranks, sids)


class SuffixBackend:
    """Answers the recursive structure's prefix searches via the suffix trie."""

    def __init__(self, index: SuffixIndex, tree: Any):
        self.index = index
        self.tree = tree
        self.annexes: list[Any] = []
        for etrie in tree.tries:
            if index.mode == "full":
                self.annexes.append(self._build_full_annex(etrie))
            else:
                self.annexes.append(self._build_sampled_annex(etrie))

    # -- annex construction ------------------------------------------
    def _build_full_annex(self, etrie: Any) -> _FullAnnex | None:
        if etrie.slen == 0:
            return None
        index = self.index
        pairs = []
        t = etrie.trie
        for leaf in t.leaves:
            pl = t.payload[leaf]
            if not pl:
                continue
            cs = pl[0]
            pairs.append((index.trie.string_rank_of_node[index.node_of[(cs.sid, cs.start)]], leaf))
        pairs.sort()
        return _FullAnnex([r for r, _ in pairs], [lf for _, lf in pairs])

    def _build_sampled_annex(self, etrie: Any) -> _SampledAnnex | None:
        index = self.index
        if etrie.slen == 0:
            return None
        qstart = etrie.start
        lprime = index.snap_up(qstart)
        m = index.dictionary.m
        head_len = min(lprime, m) - qstart
        sids = sorted(etrie.leaf_of_sid)
        store = index.dictionary.strings
        if head_len > 0:
            heads_trie = build_compact_trie(
                store, [(sid, qstart, sid) for sid in sids], entry_len=head_len
            )
        else:
            heads_trie = build_compact_trie(store, [(sids[0], qstart, None)], entry_len=0)
            heads_trie.payload[0] = list(sids)
        heads_comps = build_micro_components(heads_trie) if head_len > 0 else {}
        n = heads_trie.n_nodes()
        heads_witness = [-1] * n
        order = heads_trie._dfs_order()
        for v in reversed(order):
            if heads_trie.payload[v]:
                heads_witness[v] = heads_trie.payload[v][0]
            else:
                heads_witness[v] = heads_witness[heads_trie.children[v][0]]
        leaf_arrays: dict[int, tuple[list[int], list[int]]] = {}
        if lprime < m:
            for node in range(n):
                pl = heads_trie.payload[node]
                if not pl:
                    continue
                pairs = sorted(
                    (index.trie.string_rank_of_node[index.node_of[(sid, lprime)]], sid)
                    for sid in pl
                )
                leaf_arrays[node] = ([r for r, _ in pairs], [s for _, s in pairs])
        return _SampledAnnex(head_len, heads_trie, heads_comps, heads_witness, leaf_arrays)

    # -- per-query adapter --------------------------------------------
    def new_query(self, P: PackedString, stats: QueryStats) -> "_SufQuery":
        return _SufQuery(self, P, stats)


class _SufQuery:
    def __init__(self, backend: SuffixBackend, P: PackedString, stats: QueryStats):
        self.backend = backend
        self.index = backend.index
        self.P = P
        self.stats = stats
        self.cursor = BatchCursor(backend.index, P, stats)

    def answer(self, start: int) -> SufAnswer:
        return self.cursor.answer(start)

    # -- rooted -------------------------------------------------------
    def rooted(self, etrie: Any, qstart: int):
        if self.index.mode == "full":
            ans = yield SufRequest(qstart)
            return self._rooted_full(etrie, qstart, ans)
        return (yield from self._rooted_sampled(etrie, qstart))

    def _rooted_full(self, etrie: Any, qstart: int, ans: SufAnswer) -> tuple[Position, int]:
        annex: _FullAnnex = self.backend.annexes[etrie.tid]
        index = self.index
        r_p, r_s = index.rank_bounds(self.P, qstart, ans)
        pred_i = bisect_right(annex.ranks, r_p) - 1 if r_p is not None else -1
        succ_i = bisect_left(annex.ranks, r_s) if r_s is not None else len(annex.ranks)
        if succ_i >= len(annex.ranks):
            succ_i = -1
        return self._locate(etrie, 0, annex.ranks, annex.leaves, pred_i, succ_i, ans)

    def _rooted_sampled(self, etrie: Any, qstart: int):
        annex: _SampledAnnex = self.backend.annexes[etrie.tid]
        index = self.index
        trie = etrie.trie
        h = annex.head_len
        qlen = self.P.length - qstart
        if h > 0:
            hpos, hend = walk_blocks(
                annex.heads_trie, annex.heads_comps, self.P, qstart, ROOT_POS, qstart + h, self.stats
            )
            hmatched = hend - qstart
            if hmatched < h:
                sid = annex.heads_witness[hpos.node]
                back = trie.wla_position(etrie.leaf_of_sid[sid], hmatched, self.stats)
                return back, hmatched
            if h == qlen:
                sid = annex.heads_witness[hpos.node]
                back = trie.wla_position(etrie.leaf_of_sid[sid], h, self.stats)
                return back, h
            heads_leaf = hpos.node
        else:
            heads_leaf = 0
        lprime = index.snap_up(qstart)
        ans = yield SufRequest(lprime)
        ranks, sids = annex.leaf_arrays[heads_leaf]
        r_p, r_s = index.rank_bounds(self.P, lprime, ans)
        pred_i = bisect_right(ranks, r_p) - 1 if r_p is not None else -1
        succ_i = bisect_left(ranks, r_s) if r_s is not None else len(ranks)
        if succ_i >= len(ranks):
            succ_i = -1
        leaves = [etrie.leaf_of_sid[s] for s in sids]
        return self._locate(etrie, h, ranks, leaves, pred_i, succ_i, ans)

    def _locate(
        self,
        etrie: Any,
        base: int,
        ranks: list[int],
        leaves: list[int],
        pred_i: int,
        succ_i: int,
        ans: SufAnswer,
    ) -> tuple[Position, int]:
        """Turn neighbour candidates into the final position in the trie.

        ``base`` letters are already known to match above the neighbour
        comparison (the heads part in sampled mode).
        """
        index = self.index
        trie = etrie.trie
        lp = index.lcp_with_rank(ranks[pred_i], ans) if pred_i >= 0 else -1
        ls = index.lcp_with_rank(ranks[succ_i], ans) if succ_i >= 0 else -1
        if pred_i >= 0 and pred_i == succ_i:
            leaf = leaves[pred_i]
            return trie.wla_position(leaf, base + lp, self.stats), base + lp
        if lp == ls:
            if lp < 0:
                raise KerrataError("prefix search over an empty structure")
            u = trie.lca(leaves[pred_i], leaves[succ_i])
            assert trie.depth[u] == base + lp
            return Position(u, 0), base + lp
        if lp > ls:
            return trie.wla_position(leaves[pred_i], base + lp, self.stats), base + lp
        return trie.wla_position(leaves[succ_i], base + ls, self.stats), base + ls

    # -- unrooted -----------------------------------------------------
    def unrooted(self, etrie: Any, pos: Position, qstart: int):
        index = self.index
        trie = etrie.trie
        P = self.P
        m = P.length
        qlen = m - qstart
        d_u = trie.pos_depth(pos)
        term = trie.path_members[trie.node_path[pos.node]][-1]
        cs = trie.payload[term][0]
        assert cs.start + d_u == qstart
        store = index.dictionary.strings
        tail_len = min(trie.depth[term] - d_u, qlen)

        if index.mode == "full":
            ans = yield SufRequest(qstart)
            tail_node = index.node_of[(cs.sid, qstart)]
            ell = min(index.lcp_with_node(tail_node, ans), tail_len)
        else:
            lprime = index.snap_up(qstart)
            gap = min(lprime, m) - qstart
            if gap > 0:
                ell0 = lcp(P, qstart, store[cs.sid], qstart, max_len=min(gap, tail_len), stats=self.stats)
                if ell0 < min(gap, tail_len):
                    ell = ell0
                elif tail_len <= gap:
                    ell = tail_len
                else:
                    ans = yield SufRequest(lprime)
                    tail_node = index.node_of[(cs.sid, lprime)]
                    ell = gap + min(index.lcp_with_node(tail_node, ans), tail_len - gap)
            else:
                ans = yield SufRequest(qstart)
                tail_node = index.node_of[(cs.sid, qstart)]
                ell = min(index.lcp_with_node(tail_node, ans), tail_len)

        if ell == qlen:
            return trie.wla_position(term, d_u + ell, self.stats), ell
        x_pos = trie.wla_position(term, d_u + ell, self.stats)
        matched = ell
        final = x_pos
        if x_pos.off == 0:
            x = x_pos.node
            c2 = trie.child_by_letter(x, P.letter_at(qstart + ell))
            if c2 is not None:
                hz = etrie.horizontal.get(x)
                leaf_idx = hz.child_leaf_index.get(c2) if hz is not None else None
                if leaf_idx is not None:
                    child = hz.wbt.leaves[leaf_idx].tree
                    q2start = qstart + ell + 1
                    if q2start >= m:
                        cmatched = 0
                        witness_sid = _witness_sid(child)
                    else:
                        cpos, cmatched = yield from self.rooted(child, q2start)
                        witness_sid = _witness_sid_below(child, cpos)
                    tau_leaf = etrie.leaf_of_sid[witness_sid]
                    target = trie.depth[x] + 1 + cmatched
                    final = trie.wla_position(tau_leaf, target, self.stats)
                    matched = ell + 1 + cmatched
        # extension walk: keeps exact prefix-search semantics even where the
        # child structure dropped credit-exhausted strings
        final, matched = _extend_by_letters(trie, final, P, qstart, matched, qlen)
        return final, matched


class SufRequest(NamedTuple):
    start: int


def _witness_sid(etrie: Any) -> int:
    t = etrie.trie
    return t.payload[t.leaves[0]][0].sid


def _witness_sid_below(etrie: Any, pos: Position) -> int:
    t = etrie.trie
    return t.payload[t.leaves[t.leaf_lo[pos.node]]][0].sid


def _extend_by_letters(
    trie: CompactTrie, pos: Position, P: PackedString, qstart: int, matched: int, qlen: int
) -> tuple[Position, int]:
    node, off = pos
    while matched < qlen:
        if off == 0:
            c = trie.child_by_letter(node, P.letter_at(qstart + matched))
            if c is None:
                break
            node, off = c, 0
            t = 0
        else:
            t = off
        elen = trie.edge_len(node)
        while t < elen and matched < qlen and trie.edge_letter(node, t) == P.letter_at(qstart + matched):
            t += 1
            matched += 1
        if t < elen:
            off = t
            break
        off = 0
    return (Position(node, off) if off else Position(node, 0)), matched
