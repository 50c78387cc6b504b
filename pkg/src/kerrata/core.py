"""Packed string representation, word-level comparison primitives, and the
dictionary container.

Letters are integer codes ``1..sigma``; code ``0`` is reserved for padding so
that padded slots can never alias a real letter.  Each machine word stores a
group of consecutive letters as a base-``2**bits_per_letter`` number with the
first letter in the most significant digit, which makes integer comparison of
equal-length groups coincide with lexicographic comparison of the letters.
A trailing partial group is stored low-aligned (no padding shift), so a string
shorter than one group is exactly the integer spelled by its letters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

WORD_BITS = 64


class KerrataError(Exception):
    """Base class for all errors raised by this package."""


class InvalidLetter(KerrataError, ValueError):
    """A letter code lies outside ``1..sigma``."""


class OutOfBounds(KerrataError, IndexError):
    """A position or window exceeds the string bounds."""


class LengthMismatch(KerrataError, ValueError):
    """Two strings that must have equal length do not."""


class DictionaryParseError(KerrataError, ValueError):
    """Malformed dictionary text input."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Alphabet:
    """Integer alphabet ``{1..sigma}`` with the derived packing geometry.

    ``bits_per_letter`` is the width needed to store any code in ``0..sigma``
    (0 being the reserved padding code), i.e. ``ceil(log2(sigma + 1))``.
    """

    __slots__ = ("sigma", "bits_per_letter", "letters_per_word", "letter_mask")

    def __init__(self, sigma: int):
        if not 2 <= sigma <= 256:
            raise InvalidLetter(f"alphabet size {sigma} outside supported range 2..256")
        self.sigma = sigma
        self.bits_per_letter = sigma.bit_length()
        self.letters_per_word = WORD_BITS // self.bits_per_letter
        self.letter_mask = (1 << self.bits_per_letter) - 1

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and other.sigma == self.sigma

    def __hash__(self) -> int:
        return hash(("Alphabet", self.sigma))

    def __repr__(self) -> str:
        return f"Alphabet(sigma={self.sigma})"


class PackedString:
    """Immutable packed string over an :class:`Alphabet`.

    ``words[g]`` holds letters ``g*L .. min((g+1)*L, length)-1`` where ``L`` is
    ``alphabet.letters_per_word``.
    """

    __slots__ = ("alphabet", "length", "words")

    def __init__(self, alphabet: Alphabet, length: int, words: tuple[int, ...]):
        self.alphabet = alphabet
        self.length = length
        self.words = words

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PackedString)
            and other.alphabet == self.alphabet
            and other.length == self.length
            and other.words == self.words
        )

    def __hash__(self) -> int:
        return hash((self.alphabet.sigma, self.length, self.words))

    def __repr__(self) -> str:
        shown = unpack(self)
        if len(shown) > 16:
            return f"PackedString({shown[:16]}... len={self.length})"
        return f"PackedString({shown})"

    def letter_at(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise OutOfBounds(f"letter index {i} out of range 0..{self.length - 1}")
        L = self.alphabet.letters_per_word
        b = self.alphabet.bits_per_letter
        g, a = divmod(i, L)
        n_g = min(L, self.length - g * L)
        return (self.words[g] >> ((n_g - a - 1) * b)) & self.alphabet.letter_mask


def pack(letters: Sequence[int], alphabet: Alphabet) -> PackedString:
    """Pack a sequence of letter codes into machine words."""
    sigma = alphabet.sigma
    b = alphabet.bits_per_letter
    L = alphabet.letters_per_word
    words = []
    n = len(letters)
    for g in range(0, n, L):
        v = 0
        for code in letters[g : g + L]:
            if not 1 <= code <= sigma:
                raise InvalidLetter(f"letter code {code} outside 1..{sigma}")
            v = (v << b) | code
        words.append(v)
    return PackedString(alphabet, n, tuple(words))


def unpack(s: PackedString) -> list[int]:
    """Inverse of :func:`pack`."""
    b = s.alphabet.bits_per_letter
    L = s.alphabet.letters_per_word
    mask = s.alphabet.letter_mask
    out = []
    for g, w in enumerate(s.words):
        n_g = min(L, s.length - g * L)
        for a in range(n_g):
            out.append((w >> ((n_g - a - 1) * b)) & mask)
    return out


def extract_window(s: PackedString, start: int, count: int) -> int:
    """Return ``count`` letters starting at ``start`` packed low-aligned.

    Touches at most two stored words; cost independent of ``s.length``.
    """
    L = s.alphabet.letters_per_word
    b = s.alphabet.bits_per_letter
    if count < 0 or start < 0 or start + count > s.length:
        raise OutOfBounds(f"window [{start}, {start + count}) outside string of length {s.length}")
    if count > L:
        raise OutOfBounds(f"window of {count} letters exceeds word capacity {L}")
    if count == 0:
        return 0
    g0, a0 = divmod(start, L)
    n_g0 = min(L, s.length - g0 * L)
    c1 = min(n_g0 - a0, count)
    part = (s.words[g0] >> ((n_g0 - a0 - c1) * b)) & ((1 << (c1 * b)) - 1)
    if c1 == count:
        return part
    c2 = count - c1
    n_g1 = min(L, s.length - (g0 + 1) * L)
    part2 = (s.words[g0 + 1] >> ((n_g1 - c2) * b)) & ((1 << (c2 * b)) - 1)
    return (part << (c2 * b)) | part2


def first_mismatch_in_words(alphabet: Alphabet, a: int, b: int, count: int | None = None) -> int | None:
    """First differing letter offset between two packed windows, or ``None``.

    Both windows must hold the same number of letters (``count``, defaulting
    to a full word).  Found by XOR plus a leading-set-bit scan.
    """
    if count is None:
        count = alphabet.letters_per_word
    x = a ^ b
    if x == 0:
        return None
    bits = alphabet.bits_per_letter
    return count - 1 - (x.bit_length() - 1) // bits


def lcp(
    a: PackedString,
    a_from: int,
    b: PackedString,
    b_from: int,
    max_len: int | None = None,
    stats: "QueryStats | None" = None,
) -> int:
    """Longest common prefix of ``a[a_from:]`` and ``b[b_from:]`` in letters.

    Compares one word-sized window at a time, so the work is proportional to
    ``lcp / letters_per_word + 1`` window reads.
    """
    if not 0 <= a_from <= a.length:
        raise OutOfBounds(f"start {a_from} outside string of length {a.length}")
    if not 0 <= b_from <= b.length:
        raise OutOfBounds(f"start {b_from} outside string of length {b.length}")
    n = min(a.length - a_from, b.length - b_from)
    if max_len is not None:
        n = min(n, max_len)
    L = a.alphabet.letters_per_word
    bits = a.alphabet.bits_per_letter
    total = 0
    while total < n:
        c = min(L, n - total)
        wa = extract_window(a, a_from + total, c)
        wb = extract_window(b, b_from + total, c)
        if stats is not None:
            stats.word_blocks_read += 1
        x = wa ^ wb
        if x:
            return total + (c - 1 - (x.bit_length() - 1) // bits)
        total += c
    return n


def hamming(a: PackedString, b: PackedString, cap: int, stats: "QueryStats | None" = None) -> int | None:
    """Exact Hamming distance if it is at most ``cap``, else ``None``.

    Implemented by repeated first-mismatch jumps: O(m/w + distance) windows.
    """
    if a.length != b.length:
        raise LengthMismatch(f"lengths differ: {a.length} vs {b.length}")
    pos = 0
    dist = 0
    m = a.length
    while pos < m:
        pos += lcp(a, pos, b, pos, stats=stats)
        if pos >= m:
            break
        dist += 1
        if dist > cap:
            return None
        pos += 1
    return dist


def reverse(s: PackedString) -> PackedString:
    """Letter-order reversal of a packed string."""
    letters = unpack(s)
    letters.reverse()
    return pack(letters, s.alphabet)


@dataclass
class QueryStats:
    """Per-query instrumentation counters. All monotone during one query."""

    prefix_search_ops: int = 0
    word_blocks_read: int = 0
    wla_queries: int = 0
    candidates_verified: int = 0
    reported: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "prefix_search_ops": self.prefix_search_ops,
            "word_blocks_read": self.word_blocks_read,
            "wla_queries": self.wla_queries,
            "candidates_verified": self.candidates_verified,
            "reported": self.reported,
        }


class Dictionary:
    """A set of ``d`` equal-length packed strings; ids are list indices.

    Duplicate strings are allowed.  ``byte_table`` is present when the
    dictionary was parsed from text: ``byte_table[code - 1]`` is the raw byte
    rendered by letter ``code``.
    """

    __slots__ = ("alphabet", "strings", "m", "d", "byte_table")

    def __init__(self, strings: Sequence[PackedString], alphabet: Alphabet, byte_table: tuple[int, ...] | None = None):
        if not strings:
            raise LengthMismatch("dictionary must contain at least one string")
        m = strings[0].length
        if m < 1:
            raise LengthMismatch("dictionary strings must have length >= 1")
        for i, s in enumerate(strings):
            if s.length != m:
                raise LengthMismatch(f"string {i} has length {s.length}, expected {m}")
            if s.alphabet != alphabet:
                raise InvalidLetter(f"string {i} uses a different alphabet")
        self.strings = tuple(strings)
        self.alphabet = alphabet
        self.m = m
        self.d = len(self.strings)
        self.byte_table = byte_table

    @classmethod
    def from_letters(cls, rows: Sequence[Sequence[int]], sigma: int) -> "Dictionary":
        alph = Alphabet(sigma)
        return cls([pack(row, alph) for row in rows], alph)

    @classmethod
    def from_text(cls, data: bytes) -> "Dictionary":
        """Parse the line-per-string text format.

        All lines must have equal byte length; a single trailing newline is
        optional; interior empty lines are rejected.  The alphabet is the set
        of distinct bytes mapped to codes ``1..sigma`` in byte order.
        """
        if not data:
            raise DictionaryParseError("empty input", 1)
        lines = data.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        if not lines:
            raise DictionaryParseError("no strings", 1)
        m = len(lines[0])
        for i, ln in enumerate(lines):
            if len(ln) == 0:
                raise DictionaryParseError("empty line", i + 1)
            if len(ln) != m:
                raise DictionaryParseError(f"length {len(ln)} differs from first line length {m}", i + 1)
        seen = sorted(set(b for ln in lines for b in ln))
        byte_table = tuple(seen)
        sigma = max(2, len(seen))
        code_of = {byte: c + 1 for c, byte in enumerate(seen)}
        alph = Alphabet(sigma)
        strings = [pack([code_of[b] for b in ln], alph) for ln in lines]
        return cls(strings, alph, byte_table=byte_table)

    def encode_bytes(self, raw: bytes) -> list[int]:
        """Map raw query bytes to letter codes using the parsed byte table."""
        if self.byte_table is None:
            raise InvalidLetter("dictionary was not built from text; no byte table")
        code_of = {byte: c + 1 for c, byte in enumerate(self.byte_table)}
        out = []
        for b in raw:
            if b not in code_of:
                raise InvalidLetter(f"byte {b!r} not in dictionary alphabet")
            out.append(code_of[b])
        return out

    def suffix(self, sid: int, start: int) -> PackedString:
        """Materialize the suffix of string ``sid`` starting at offset ``start``."""
        s = self.strings[sid]
        return pack(unpack(s)[start:], self.alphabet)
