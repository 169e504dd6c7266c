"""Marked groups, normal forms, conjugacy classes and enumeration.

Two families are supported: free groups, and free products whose factors
are free or free abelian.  Letters are signed integers: generator ``i``
(counted from 1 across all factors) is ``i`` and its inverse is ``-i``.
Letters are ordered a < a^-1 < b < b^-1 < ..., which fixes every
enumeration order and every canonical representative.
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import GroupInputError, ResourceBudgetError
from .tree import FreeTreeIndex, ball_size

DEFAULT_BUDGET = 5_000_000

_SUPERSCRIPTS = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹⁻", "0123456789-")
_TOKEN = re.compile(r"\s*([A-Za-z])\s*(?:\^\s*\(?\s*(-?\d+)\s*\)?|([⁻]?[⁰¹²³⁴⁵⁶⁷⁸⁹]+))?")


def letter_key(x):
    """Sort key of a letter: a < a^-1 < b < b^-1 < ..."""
    return 2 * (abs(x) - 1) + (1 if x < 0 else 0)


def word_key(word):
    return tuple(2 * (abs(x) - 1) + (1 if x < 0 else 0) for x in word)


class Factor(NamedTuple):
    kind: str  # "free" or "abelian"
    rank: int


class MarkedGroup:
    """A group together with its marked generating alphabet."""

    __slots__ = ("kind", "factors", "names", "_factor_of", "_gens_of", "is_free", "_id")

    def __init__(self, kind, factors, names=None):
        if kind not in ("free", "free_product"):
            raise GroupInputError(f"unknown group kind {kind!r}")
        factors = tuple(Factor(*f) for f in factors)
        if not factors:
            raise GroupInputError("a group needs at least one factor")
        for f in factors:
            if f.kind not in ("free", "abelian"):
                raise GroupInputError(f"unknown factor kind {f.kind!r}")
            if int(f.rank) < 1:
                raise GroupInputError("every factor needs rank >= 1")
        if kind == "free" and (len(factors) != 1 or factors[0].kind != "free"):
            raise GroupInputError("a free group has a single free factor")
        total = sum(f.rank for f in factors)
        if names is None:
            if total > 26:
                raise GroupInputError("give explicit names for more than 26 generators")
            names = tuple("abcdefghijklmnopqrstuvwxyz"[:total])
        names = tuple(names)
        if len(names) != total or len(set(names)) != total:
            raise GroupInputError("need one distinct name per generator")
        for s in names:
            if len(s) != 1 or not s.islower():
                raise GroupInputError(f"generator names are single lowercase letters, got {s!r}")
        self.kind = kind
        self.factors = factors
        self.names = names
        factor_of = [None]
        gens_of = []
        g = 1
        for i, f in enumerate(factors):
            gens_of.append(tuple(range(g, g + f.rank)))
            for _ in range(f.rank):
                factor_of.append(i)
                g += 1
        self._factor_of = tuple(factor_of)
        self._gens_of = tuple(gens_of)
        self.is_free = all(f.kind == "free" for f in factors)
        self._id = (kind, factors, names)

    @classmethod
    def free(cls, rank, names=None):
        return cls("free", [("free", rank)], names)

    @classmethod
    def free_product(cls, factors, names=None):
        return cls("free_product", factors, names)

    def __eq__(self, other):
        return isinstance(other, MarkedGroup) and self._id == other._id

    def __hash__(self):
        return hash(self._id)

    def __repr__(self):
        if self.kind == "free":
            return f"MarkedGroup.free({self.rank})"
        return f"MarkedGroup.free_product({[tuple(f) for f in self.factors]})"

    @property
    def rank(self):
        return len(self.names)

    @property
    def alphabet(self):
        """All letters in canonical order."""
        out = []
        for g in range(1, self.rank + 1):
            out += [g, -g]
        return tuple(out)

    def factor_of(self, x):
        return self._factor_of[abs(x)]

    def factor_generators(self, i):
        return self._gens_of[i]

    @property
    def identity(self):
        return GroupElement(self, ())

    def generators(self):
        return [GroupElement(self, (g,)) for g in range(1, self.rank + 1)]

    def element(self, word):
        """Normal form of a raw letter sequence or a text word."""
        if isinstance(word, str):
            return self.parse(word)
        return reduce(self, word)

    def parse(self, text):
        """Parse text such as ``"ab"``, ``"a b A"``, ``"a^-1 b^2"`` or ``"a⁻¹"``.

        Uppercase letters are inverses; ``"1"`` and ``""`` give the identity.
        """
        text = text.strip()
        if text in ("", "1"):
            return self.identity
        raw = []
        pos = 0
        text = text.replace("*", " ").replace("·", " ")
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise GroupInputError(f"cannot parse word {text!r} at position {pos}")
            ch, exp, sup = m.group(1), m.group(2), m.group(3)
            if ch.lower() not in self.names:
                raise GroupInputError(f"unknown symbol {ch!r} in {text!r}")
            g = self.names.index(ch.lower()) + 1
            x = g if ch.islower() else -g
            e = 1
            if exp is not None:
                e = int(exp)
            elif sup is not None:
                e = int(sup.translate(_SUPERSCRIPTS))
            if e < 0:
                x, e = -x, -e
            raw += [x] * e
            pos = m.end()
        return reduce(self, raw)

    def letter_name(self, x):
        s = self.names[abs(x) - 1]
        return s if x > 0 else s.upper()

    def factor_group(self, i):
        """The i-th factor as a marked group of its own (names preserved)."""
        f = self.factors[i]
        names = tuple(self.names[g - 1] for g in self._gens_of[i])
        if f.kind == "free":
            return MarkedGroup.free(f.rank, names)
        return MarkedGroup.free_product([f], names)


class GroupElement:
    """Immutable group element stored by its normal form."""

    __slots__ = ("group", "word")

    def __init__(self, group, word):
        self.group = group
        self.word = tuple(word)

    def __eq__(self, other):
        return (isinstance(other, GroupElement) and self.word == other.word
                and (self.group is other.group or self.group == other.group))

    def __hash__(self):
        return hash(self.word)

    def __len__(self):
        return len(self.word)

    @property
    def length(self):
        return len(self.word)

    def is_identity(self):
        return not self.word

    def __mul__(self, other):
        return multiply(self, other)

    def inverse(self):
        return inverse(self)

    def __pow__(self, n):
        return power(self, n)

    def sort_key(self):
        return (len(self.word), word_key(self.word))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        if not self.word:
            return "1"
        return "".join(self.group.letter_name(x) for x in self.word)

    def __repr__(self):
        return f"<{self}>"


def _check_letters(group, raw):
    n = group.rank
    for x in raw:
        if not isinstance(x, int) or x == 0 or abs(x) > n:
            raise GroupInputError(f"unknown symbol {x!r}")


def _push(group, out, x):
    """Append one letter to a normal form in place."""
    f = group._factor_of[abs(x)]
    if group.factors[f].kind == "free":
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
        return
    j = len(out)
    while j > 0 and group._factor_of[abs(out[j - 1])] == f:
        j -= 1
    exps = {}
    for y in out[j:]:
        exps[abs(y)] = exps.get(abs(y), 0) + (1 if y > 0 else -1)
    exps[abs(x)] = exps.get(abs(x), 0) + (1 if x > 0 else -1)
    del out[j:]
    out.extend(_abelian_word(group._gens_of[f], exps))


def _abelian_word(gens, exps):
    out = []
    for g in gens:
        e = exps.get(g, 0)
        out += [g] * e if e > 0 else [-g] * (-e)
    return out


def _free_reduce(raw):
    out = []
    for x in raw:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def reduce(group, raw):
    """Normal form of a raw letter sequence."""
    raw = list(raw)
    _check_letters(group, raw)
    if group.is_free:
        return GroupElement(group, _free_reduce(raw))
    out = []
    for x in raw:
        _push(group, out, x)
    return GroupElement(group, out)


def _same_group(g, h):
    if not (g.group is h.group or g.group == h.group):
        raise GroupInputError("elements belong to different groups")


def multiply(g, h):
    _same_group(g, h)
    a, b = g.word, h.word
    if g.group.is_free:
        k = 0
        m = min(len(a), len(b))
        while k < m and a[-1 - k] == -b[k]:
            k += 1
        return GroupElement(g.group, a[:len(a) - k] + b[k:])
    out = list(a)
    for x in b:
        _push(g.group, out, x)
    return GroupElement(g.group, out)


def inverse(g):
    if g.group.is_free:
        return GroupElement(g.group, tuple(-x for x in reversed(g.word)))
    return reduce(g.group, [-x for x in reversed(g.word)])


def power(g, n):
    if n < 0:
        g, n = inverse(g), -n
    out = g.group.identity
    base = g
    while n:
        if n & 1:
            out = multiply(out, base)
        n >>= 1
        if n:
            base = multiply(base, base)
    return out


def syllables(g):
    """Maximal runs of letters from a single factor."""
    out = []
    fo = g.group._factor_of
    for x in g.word:
        if out and fo[abs(out[-1][-1])] == fo[abs(x)]:
            out[-1].append(x)
        else:
            out.append([x])
    return [tuple(s) for s in out]


def _letter_cyclic_reduce(word):
    i = 0
    n = len(word)
    while 2 * i + 1 < n and word[i] == -word[n - 1 - i]:
        i += 1
    return word[i:n - i], word[:i]


def cyclic_reduce(g):
    """Return ``(core, conjugator)`` with ``g = conjugator * core * conjugator^-1``."""
    G = g.group
    if G.kind == "free":
        core, c = _letter_cyclic_reduce(g.word)
        return GroupElement(G, core), GroupElement(G, c)
    core, conj = g, G.identity
    while True:
        syl = syllables(core)
        if len(syl) < 2 or G.factor_of(syl[0][0]) != G.factor_of(syl[-1][0]):
            break
        s = GroupElement(G, syl[0])
        core = multiply(multiply(inverse(s), core), s)
        conj = multiply(conj, s)
    syl = syllables(core)
    if len(syl) == 1 and G.factors[G.factor_of(syl[0][0])].kind == "free":
        w, c = _letter_cyclic_reduce(core.word)
        core = GroupElement(G, w)
        conj = multiply(conj, GroupElement(G, c))
    return core, conj


@dataclass(frozen=True, eq=False)
class ConjugacyKey:
    """Canonical representative of a conjugacy class.

    ``conjugator^-1 * original * conjugator == canonical``.  Keys compare
    and hash by the canonical representative only.
    """

    canonical: GroupElement
    conjugator: GroupElement

    def __eq__(self, other):
        return isinstance(other, ConjugacyKey) and self.canonical == other.canonical

    def __hash__(self):
        return hash(self.canonical)

    def __str__(self):
        return str(self.canonical)


def _least_rotation(keys):
    """Start index of the least rotation (Booth's algorithm)."""
    s = keys + keys
    n = len(keys)
    f = [-1] * (2 * n)
    k = 0
    for j in range(1, 2 * n):
        i = f[j - k - 1]
        while i != -1 and s[j] != s[k + i + 1]:
            if s[j] < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if i == -1 and s[j] != s[k + i + 1]:
            if s[j] < s[k + i + 1]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def conjugacy_key(g):
    G = g.group
    core, conj = cyclic_reduce(g)
    w = core.word
    if not w:
        return ConjugacyKey(core, conj)
    if G.is_free:
        j = _least_rotation(word_key(w))
        u = GroupElement(G, w[:j])
        return ConjugacyKey(GroupElement(G, w[j:] + w[:j]), multiply(conj, u))
    syl = syllables(core)
    if len(syl) == 1:
        return ConjugacyKey(core, conj)
    best = None
    for k in range(len(syl)):
        rot = sum(syl[k:], ()) + sum(syl[:k], ())
        cand = word_key(rot)
        if best is None or cand < best[0]:
            best = (cand, rot, sum(syl[:k], ()))
    _, rot, u = best
    return ConjugacyKey(GroupElement(G, rot), multiply(conj, GroupElement(G, u)))


def is_conjugate(g, h):
    return conjugacy_key(g) == conjugacy_key(h)


def sphere_size(group, n):
    """Size of the sphere of radius n for free groups (None otherwise)."""
    if not group.is_free:
        return None
    if n == 0:
        return 1
    k2 = 2 * group.rank
    return k2 * (k2 - 1) ** (n - 1)


@lru_cache(maxsize=8)
def _tree(rank, radius):
    return FreeTreeIndex(rank, radius, budget=10 ** 12)


def tree_index(group, radius, budget=DEFAULT_BUDGET * 4):
    """Shared array index of the marked ball (free groups only)."""
    if not group.is_free:
        raise GroupInputError("tree index needs a free group")
    size = ball_size(group.rank, radius)
    if size > budget:
        raise ResourceBudgetError(f"ball of radius {radius} has {size} elements (budget {budget})")
    return _tree(group.rank, radius)


def _codes_to_letters(matrix):
    m = np.asarray(matrix)
    return (m // 2 + 1) * np.where(m & 1, -1, 1)


def enumerate_sphere(group, n, budget=DEFAULT_BUDGET):
    """All elements of marked length n in deterministic (lexicographic) order."""
    if n < 0:
        raise GroupInputError("radius must be nonnegative")
    if n == 0:
        return [group.identity]
    if group.is_free:
        size = sphere_size(group, n)
        if size > budget:
            raise ResourceBudgetError(f"sphere of radius {n} has {size} elements (budget {budget})")
        idx = tree_index(group, n, budget=max(budget * 2, 10))
        rows = _codes_to_letters(idx.sphere_codes(n)).tolist()
        return [GroupElement(group, r) for r in rows]
    prev = enumerate_sphere(group, n - 1, budget)
    seen = set()
    for x in prev:
        for s in group.alphabet:
            out = list(x.word)
            _push(group, out, s)
            if len(out) == n:
                seen.add(tuple(out))
        if len(seen) > budget:
            raise ResourceBudgetError(f"sphere of radius {n} exceeds budget {budget}")
    return [GroupElement(group, w) for w in sorted(seen, key=word_key)]


def enumerate_ball(group, R, budget=DEFAULT_BUDGET):
    out = []
    for n in range(R + 1):
        out += enumerate_sphere(group, n, budget)
        if len(out) > budget:
            raise ResourceBudgetError(f"ball of radius {R} exceeds budget {budget}")
    return out


def _necklace_rows(group, n):
    """Letter rows of all canonical cyclically reduced words of length n."""
    idx = tree_index(group, n, budget=10 ** 9)
    codes = idx.sphere_codes(n)
    keep = codes[:, 0] != (codes[:, -1] ^ 1) if n > 1 else np.ones(len(codes), bool)
    codes = codes[keep]
    base = 2 * group.rank
    weights = base ** np.arange(n - 1, -1, -1, dtype=object if base ** n >= 2 ** 62 else np.int64)
    value = codes @ weights
    best = value.copy()
    for r in range(1, n):
        rot = np.roll(codes, -r, axis=1) @ weights
        best = np.minimum(best, rot)
    return _codes_to_letters(codes[value == best]).tolist()


def enumerate_conjugacy_reps(group, L, budget=DEFAULT_BUDGET):
    """One key per conjugacy class of cyclically reduced length <= L.

    Order: by length, then lexicographically by canonical word.
    """
    if not group.is_free:
        raise GroupInputError("conjugacy enumeration is implemented for free groups")
    if L < 0:
        raise GroupInputError("L must be nonnegative")
    if ball_size(group.rank, L) > budget * 16:
        raise ResourceBudgetError(f"conjugacy enumeration to length {L} exceeds budget")
    out = [ConjugacyKey(group.identity, group.identity)]
    for n in range(1, L + 1):
        for row in _necklace_rows(group, n):
            out.append(ConjugacyKey(GroupElement(group, row), group.identity))
        if len(out) > budget:
            raise ResourceBudgetError(f"conjugacy enumeration to length {L} exceeds budget")
    return out


def in_cyclic_subgroup(g, h):
    """True when g is a power of h (free groups and free products)."""
    if g.is_identity():
        return True
    if h.is_identity():
        return False
    core, conj = cyclic_reduce(h)
    x = multiply(multiply(inverse(conj), g), conj)
    n = len(x.word)
    for k in range(1, n + 1):
        c = power(core, k)
        if len(c.word) > n:
            break
        if c == x or inverse(c) == x:
            return True
    return False


def exponent_sum(g, generator):
    """Signed number of occurrences of a generator (an int or a name)."""
    if isinstance(generator, str):
        generator = g.group.names.index(generator) + 1
    return sum(1 if x == generator else -1 if x == -generator else 0 for x in g.word)
