"""The group ``<a, b, c | a^2 = b^2 = c^2 = (abc)^2 = 1>`` through its
``Z^2 x| Z_2`` model.

An element is ``(m, n, eps)`` standing for the affine map
``z -> eps z + 2 (m + n i)``; letters are the point reflections
``a: z -> -z``, ``b: z -> 2 - z``, ``c: z -> 2i - z``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic_curve import Periods

__all__ = [
    "NormalForm",
    "IDENTITY",
    "LETTERS",
    "RELATORS",
    "reduce",
    "parity",
    "inverse_word",
    "kernel_commutator",
    "realize",
    "affine_oracle",
    "insert_relator",
    "InvarianceReport",
    "relation_invariance_exhaustive",
    "relation_invariance_random",
    "kernel_commutators_random",
    "random_word",
]


@dataclass(frozen=True)
class NormalForm:
    m: int
    n: int
    eps: int = 1

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        e = self.eps
        return NormalForm(self.m + e * other.m, self.n + e * other.n, e * other.eps)

    def inverse(self) -> "NormalForm":
        e = self.eps
        return NormalForm(-e * self.m, -e * self.n, e)

    @property
    def parity(self) -> int:
        return 0 if self.eps == 1 else 1

    @property
    def is_identity(self) -> bool:
        return self == IDENTITY


IDENTITY = NormalForm(0, 0, 1)
LETTERS = {"a": NormalForm(0, 0, -1), "b": NormalForm(1, 0, -1), "c": NormalForm(0, 1, -1)}
RELATORS = ("aa", "bb", "cc", "abcabc")


def _check(word: str) -> None:
    bad = set(word) - set(LETTERS)
    if bad:
        raise ValueError(f"letters outside {{a, b, c}}: {sorted(bad)}")


def reduce(word: str) -> NormalForm:
    _check(word)
    out = IDENTITY
    for ch in word:
        out = out * LETTERS[ch]
    return out


def parity(word: str) -> int:
    _check(word)
    return len(word) % 2


def inverse_word(word: str) -> str:
    """Every letter is an involution, so the inverse is the reversal."""
    return word[::-1]


def kernel_commutator(u: str, v: str) -> NormalForm:
    if parity(u) or parity(v):
        raise ValueError("kernel commutator needs even words")
    return reduce(u + v + inverse_word(u) + inverse_word(v))


def insert_relator(word: str, relator: str, position: int) -> str:
    return word[:position] + relator + word[position:]


def realize(nf: NormalForm, periods: Periods) -> np.ndarray:
    """Matrix image with ``a, b, c -> T0, T1, Tc`` under right multiplication.

    ``(m, n, eps) -> [[eps, 0], [-eps (m Pi1 + n Pi2), 1]]``; the sign makes
    the map a homomorphism for the product of the normal forms.
    """
    x = nf.m * periods.pi1 + nf.n * periods.pi2
    return np.array([[nf.eps, 0], [-nf.eps * x, 1]], dtype=complex)


def affine_oracle(word: str) -> NormalForm:
    """Compose the affine reflections directly; word ``w1 ... wk`` is ``f_w1 o ... o f_wk``."""
    _check(word)
    maps = {"a": (-1, 0j), "b": (-1, 2 + 0j), "c": (-1, 2j)}
    eps, shift = 1, 0j
    for ch in word:
        e2, s2 = maps[ch]
        # (eps, shift) o (e2, s2): z -> eps (e2 z + s2) + shift
        eps, shift = eps * e2, eps * s2 + shift
    m, n = shift.real / 2, shift.imag / 2
    return NormalForm(int(round(m)), int(round(n)), eps)


# --------------------------------------------------------------------------
# bulk checks
# --------------------------------------------------------------------------

_LETTER_ARR = np.array([[0, 0, -1], [1, 0, -1], [0, 1, -1]], dtype=np.int64)


def _apply(state: np.ndarray, letters: np.ndarray) -> np.ndarray:
    """Right-multiply each row ``(m, n, eps)`` of ``state`` by the letter codes."""
    g = _LETTER_ARR[letters]
    e = state[:, 2]
    return np.stack([state[:, 0] + e * g[:, 0], state[:, 1] + e * g[:, 1], e * g[:, 2]], axis=1)


@dataclass(frozen=True)
class InvarianceReport:
    words: int
    insertions: int
    failures: int
    witness: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


def relation_invariance_exhaustive(max_len: int = 10) -> InvarianceReport:
    """Every word of length ``<= max_len``, every relator, every insertion point."""
    codes = {ch: i for i, ch in enumerate("abc")}
    words = insertions = failures = 0
    witness = None
    for n in range(max_len + 1):
        grid = np.indices((3,) * n).reshape(n, -1).T if n else np.zeros((1, 0), dtype=np.int64)
        count = grid.shape[0]
        words += count
        # prefix states and the plain reduction
        prefix = [np.tile([0, 0, 1], (count, 1)).astype(np.int64)]
        for i in range(n):
            prefix.append(_apply(prefix[-1], grid[:, i]))
        plain = prefix[-1]
        for rel in RELATORS:
            rel_codes = [codes[ch] for ch in rel]
            for pos in range(n + 1):
                st = prefix[pos]
                for code in rel_codes:
                    st = _apply(st, np.full(count, code))
                for i in range(pos, n):
                    st = _apply(st, grid[:, i])
                bad = np.any(st != plain, axis=1)
                insertions += count
                if bad.any():
                    failures += int(bad.sum())
                    if witness is None:
                        w = "".join("abc"[k] for k in grid[int(np.argmax(bad))])
                        witness = (w, rel, pos)
    return InvarianceReport(words, insertions, failures, witness)


def random_word(rng: np.random.Generator, max_len: int, parity: int | None = None) -> str:
    n = int(rng.integers(0, max_len + 1))
    if parity is not None and n % 2 != parity:
        n = n + 1 if n < max_len else n - 1
    return "".join("abc"[k] for k in rng.integers(0, 3, n))


def relation_invariance_random(count: int = 10_000, max_len: int = 30, seed: int = 0) -> InvarianceReport:
    rng = np.random.default_rng(seed)
    failures, witness = 0, None
    for _ in range(count):
        w = random_word(rng, max_len)
        rel = RELATORS[int(rng.integers(0, len(RELATORS)))]
        pos = int(rng.integers(0, len(w) + 1))
        if reduce(insert_relator(w, rel, pos)) != reduce(w):
            failures += 1
            witness = witness or (w, rel, pos)
    return InvarianceReport(count, count, failures, witness)


def kernel_commutators_random(count: int = 1000, max_len: int = 24, seed: int = 0) -> InvarianceReport:
    rng = np.random.default_rng(seed)
    failures, witness = 0, None
    for _ in range(count):
        u, v = random_word(rng, max_len, 0), random_word(rng, max_len, 0)
        if not kernel_commutator(u, v).is_identity:
            failures += 1
            witness = witness or (u, v)
    return InvarianceReport(count, count, failures, witness)
