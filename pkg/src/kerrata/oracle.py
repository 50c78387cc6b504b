"""Brute-force reference implementations.

Everything here works on plain letter lists with per-letter loops and no
shared code with the word-level fast paths, so the fast modules can be
checked against these in property tests and in the CLI verify mode.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Dictionary, LengthMismatch, PackedString, unpack


@dataclass(frozen=True)
class OracleResult:
    ids: tuple[int, ...]
    distances: dict[int, int]


def brute_lookup(dictionary: Dictionary, query: list[int], k: int) -> OracleResult:
    """All ids within Hamming distance ``k`` of ``query``, by per-letter scan."""
    if len(query) != dictionary.m:
        raise LengthMismatch(f"query length {len(query)} != m == {dictionary.m}")
    ids = []
    dists = {}
    for sid, s in enumerate(dictionary.strings):
        letters = unpack(s)
        dist = 0
        for x, y in zip(letters, query):
            if x != y:
                dist += 1
        if dist <= k:
            ids.append(sid)
            dists[sid] = dist
    return OracleResult(tuple(ids), dists)


def brute_prefix_search(strings: list[list[int]], q: list[int], start: int = 0) -> int:
    """Longest prefix of ``q`` that matches some ``s[start:]``, in letters."""
    best = 0
    for s in strings:
        tail = s[start:]
        i = 0
        while i < len(tail) and i < len(q) and tail[i] == q[i]:
            i += 1
        best = max(best, i)
    return best


def brute_wbt(weights: list[int]):
    """Weight-balanced ternary structure as nested tuples.

    Leaves are ``('leaf', index)``; internal nodes are
    ``('node', left_or_None, middle_index, right_or_None)``.
    """

    def rec(lo: int, hi: int):
        n = hi - lo
        if n == 1:
            return ("leaf", lo)
        total = sum(weights[lo:hi])
        acc = 0
        mu = hi - 1
        for i in range(lo, hi):
            acc += weights[i]
            if 2 * acc > total:
                mu = i
                break
        left = rec(lo, mu) if mu > lo else None
        right = rec(mu + 1, hi) if mu + 1 < hi else None
        return ("node", left, mu, right)

    if not weights:
        raise ValueError("empty weight list")
    return rec(0, len(weights))


def brute_lca(parent: list[int], u: int, v: int) -> int:
    """Ancestor-set intersection LCA; parent[root] == -1."""
    anc = set()
    x = u
    while x != -1:
        anc.add(x)
        x = parent[x]
    x = v
    while x not in anc:
        x = parent[x]
    return x


def brute_wla(parent: list[int], depth: list[int], u: int, ell: int) -> int:
    """Deepest ancestor of ``u`` whose label length is at most ``ell``."""
    x = u
    while depth[x] > ell:
        x = parent[x]
    return x


def brute_hamming(a: PackedString, b: PackedString) -> int:
    xs, ys = unpack(a), unpack(b)
    if len(xs) != len(ys):
        raise LengthMismatch("length mismatch")
    return sum(1 for x, y in zip(xs, ys) if x != y)
