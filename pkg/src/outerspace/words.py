"""Free group words over a rank-N basis.

Letters are small integers: generator ``x_i`` (0-based ``i``) is ``2*i`` and
its inverse is ``2*i + 1``, so inversion is ``code ^ 1`` and the natural
integer order is a < A < b < B < c < ...  Words print as strings over
``[a-zA-Z]`` with uppercase for inverses.
"""

from __future__ import annotations

import string
from typing import Iterable, Iterator, Sequence

LOWER = string.ascii_lowercase
MAX_RANK = len(LOWER)


class WordSyntaxError(ValueError):
    pass


def letter(index: int, sign: int = 1) -> int:
    """Letter code for generator ``index`` (1-based) with exponent ``sign``."""
    if index < 1 or index > MAX_RANK:
        raise ValueError(f"generator index {index} out of range")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return 2 * (index - 1) + (0 if sign == 1 else 1)


def letter_index(code: int) -> int:
    return code // 2 + 1


def letter_sign(code: int) -> int:
    return -1 if code & 1 else 1


def letter_char(code: int) -> str:
    ch = LOWER[code >> 1]
    return ch.upper() if code & 1 else ch


def parse_letters(text: str, rank: int | None = None) -> list[int]:
    codes = []
    for pos, ch in enumerate(text):
        if ch.isspace() or ch in "·*.":
            continue
        low = ch.lower()
        if low not in LOWER or not ch.isalpha() or not ch.isascii():
            raise WordSyntaxError(f"invalid letter {ch!r} at position {pos}")
        idx = LOWER.index(low)
        if rank is not None and idx >= rank:
            raise WordSyntaxError(f"letter {ch!r} exceeds rank {rank}")
        codes.append(2 * idx + (1 if ch.isupper() else 0))
    return codes


def _free_reduce(codes: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for c in codes:
        if stack and stack[-1] == c ^ 1:
            stack.pop()
        else:
            stack.append(c)
    return tuple(stack)


class Word(tuple):
    """A freely reduced word; immutable and hashable.

    ``Word("abA")`` parses a string, ``Word([0, 2, 1])`` takes letter codes.
    Construction always reduces.  ``*`` is the group product and ``**`` the
    power, so this is not tuple repetition.
    """

    def __new__(cls, letters: str | Iterable[int] = (), rank: int | None = None):
        if isinstance(letters, str):
            letters = parse_letters(letters, rank)
        elif rank is not None:
            letters = list(letters)
            for c in letters:
                if c >> 1 >= rank:
                    raise WordSyntaxError(f"letter {letter_char(c)!r} exceeds rank {rank}")
        return super().__new__(cls, _free_reduce(letters))

    @classmethod
    def _raw(cls, codes: Sequence[int]) -> "Word":
        # caller guarantees reducedness
        return tuple.__new__(cls, codes)

    def __str__(self) -> str:
        return "".join(letter_char(c) for c in self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({str(self)!r})"

    def __mul__(self, other):
        if not isinstance(other, tuple):
            return NotImplemented
        return Word(tuple(self) + tuple(other))

    def __rmul__(self, other):
        if not isinstance(other, tuple):
            return NotImplemented
        return Word(tuple(other) + tuple(self))

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return self.inverse() ** (-k)
        return Word(tuple(self) * k)

    def inverse(self) -> "Word":
        return Word._raw(tuple(c ^ 1 for c in reversed(self)))

    def is_trivial(self) -> bool:
        return len(self) == 0

    def rank_needed(self) -> int:
        return max((c >> 1) + 1 for c in self) if self else 0

    def letters_used(self) -> frozenset[int]:
        """Generator indices (1-based) appearing in the word."""
        return frozenset((c >> 1) + 1 for c in self)

    def exponent_sums(self, rank: int) -> list[int]:
        sums = [0] * rank
        for c in self:
            sums[c >> 1] += -1 if c & 1 else 1
        return sums

    def shortlex_key(self):
        return (len(self), tuple(self))


def _least_rotation(codes: tuple[int, ...]) -> int:
    """Start index of the lexicographically least rotation (Booth)."""
    n = len(codes)
    if n == 0:
        return 0
    s = codes + codes
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def _strip_conjugation(codes: tuple[int, ...]) -> tuple[int, int]:
    i, j = 0, len(codes) - 1
    while i < j and codes[i] == codes[j] ^ 1:
        i += 1
        j -= 1
    return i, j + 1


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    n = len(w)
    if any(w[i] == w[i + 1] ^ 1 for i in range(n - 1)):
        return False
    return n < 2 or w[0] != w[-1] ^ 1


class CyclicWord(Word):
    """Conjugacy-class representative: cyclically reduced, least rotation.

    Inversion is not identified; ``CyclicWord("ab")`` and
    ``CyclicWord("BA")`` are different classes.
    """

    def __new__(cls, letters: str | Iterable[int] = (), rank: int | None = None):
        w = tuple(Word(letters, rank))
        i, j = _strip_conjugation(w)
        core = w[i:j]
        r = _least_rotation(core)
        return tuple.__new__(cls, core[r:] + core[:r])

    def rotations(self) -> Iterator[tuple[int, ...]]:
        for r in range(len(self)):
            yield tuple(self[r:]) + tuple(self[:r])

    def inverse(self) -> "CyclicWord":
        return CyclicWord(tuple(c ^ 1 for c in reversed(self)))


def reduce(raw: str | Iterable[int]) -> Word:
    return Word(raw)


def cyclic_reduce(w: Word | str) -> tuple[CyclicWord, Word]:
    """Split ``w`` as ``conjugator * cyclic * conjugator**-1``.

    ``cyclic`` is the canonical (least) rotation of the cyclically reduced
    core, so the conjugator absorbs both the stripped prefix and the rotation.
    """
    w = tuple(Word(w))
    i, j = _strip_conjugation(w)
    core = w[i:j]
    r = _least_rotation(core)
    cyc = CyclicWord._raw(core[r:] + core[:r])
    conj = Word(w[:i] + core[:r])
    return cyc, conj


def is_proper_power(w: Word | str) -> tuple[Word, int] | None:
    """Maximal-exponent decomposition ``w = root**k`` with ``k >= 2``."""
    w = Word(w)
    if not w:
        raise ValueError("trivial word has no root")
    t = tuple(w)
    i, j = _strip_conjugation(t)
    core = t[i:j]
    n = len(core)
    for d in range(1, n // 2 + 1):
        if n % d == 0 and core[:d] * (n // d) == core:
            u = Word(t[:i])
            return u * Word._raw(core[:d]) * u.inverse(), n // d
    return None


def apply_substitution(w: Word | str, images: Sequence[Word | str]) -> Word:
    """Image of ``w`` under the endomorphism ``x_i -> images[i-1]``."""
    imgs = [tuple(Word(im)) for im in images]
    inv = [tuple(c ^ 1 for c in reversed(im)) for im in imgs]
    out: list[int] = []
    for c in Word(w):
        k = c >> 1
        if k >= len(imgs):
            raise ValueError(f"no image given for generator {letter_char(c & ~1)!r}")
        out.extend(inv[k] if c & 1 else imgs[k])
    return Word(out)


def enumerate_cyclic_words(rank: int, max_len: int, min_len: int = 1) -> Iterator[CyclicWord]:
    """All conjugacy classes of length in ``[min_len, max_len]``, shortlex.

    Necklace generation (Fredricksen-Kessler-Maiorana) with branches pruned
    as soon as an adjacent letter/inverse pair appears; every prefix of a
    reduced necklace is a reduced prenecklace, so nothing is lost.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    k = 2 * rank
    for n in range(max(min_len, 1), max_len + 1):
        a = [0] * (n + 1)
        yield from _necklaces(a, n, k, 1, 1)


def _necklaces(a: list[int], n: int, k: int, t: int, p: int) -> Iterator[CyclicWord]:
    if t > n:
        if n % p == 0 and a[n] != a[1] ^ 1:
            yield CyclicWord._raw(tuple(a[1:]))
        return
    j = a[t - p]
    if t == 1 or j != a[t - 1] ^ 1:
        a[t] = j
        yield from _necklaces(a, n, k, t + 1, p)
    for j in range(a[t - p] + 1, k):
        if t > 1 and j == a[t - 1] ^ 1:
            continue
        a[t] = j
        yield from _necklaces(a, n, k, t + 1, t)
