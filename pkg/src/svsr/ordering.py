"""Symbolic bosonic monomials, normal ordering and the monomial-list grammar.

A :class:`Monomial` stores per-mode exponent pairs ``(p, q)`` standing for
``a_m^dagger^p a_m^q``.  Two products are offered:

* ``colon_mul`` -- the product inside ``: :``, where creation operators are
  moved to the left *without* commutator terms (exponents simply add);
* :func:`normal_order` -- the true operator product of a word of ladder
  operators, rewritten with ``a^q a^dagger^p = sum_k C(q,k) C(p,k) k! a^dagger^(p-k) a^(q-k)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from math import comb, factorial
from typing import Iterable, Mapping

Pair = tuple[int, int]


@dataclass(frozen=True)
class Monomial:
    """Normally ordered monomial ``prod_m a_m^dagger^p_m a_m^q_m``."""

    exps: tuple[Pair, ...]

    def __post_init__(self):
        exps = tuple((int(p), int(q)) for p, q in self.exps)
        if any(p < 0 or q < 0 for p, q in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exps", exps)

    @classmethod
    def identity(cls, n_modes: int) -> "Monomial":
        return cls(((0, 0),) * n_modes)

    @classmethod
    def single(cls, n_modes: int, mode: int, p: int = 0, q: int = 0) -> "Monomial":
        exps = [(0, 0)] * n_modes
        exps[mode] = (p, q)
        return cls(tuple(exps))

    @property
    def n_modes(self) -> int:
        return len(self.exps)

    @property
    def degree(self) -> int:
        return sum(p + q for p, q in self.exps)

    def adjoint(self) -> "Monomial":
        return Monomial(tuple((q, p) for p, q in self.exps))

    def colon_mul(self, other: "Monomial") -> "Monomial":
        _check_modes(self, other)
        return Monomial(tuple((p1 + p2, q1 + q2) for (p1, q1), (p2, q2) in zip(self.exps, other.exps)))

    def __str__(self) -> str:
        parts = []
        for m, (p, q) in enumerate(self.exps, start=1):
            parts += [f"a{m}+"] * p + [f"a{m}"] * q
        return "".join(parts) or "1"


def _check_modes(a: Monomial, b: Monomial) -> None:
    if a.n_modes != b.n_modes:
        raise ValueError("monomials act on different numbers of modes")


class Poly(dict):
    """Linear combination of :class:`Monomial` with complex coefficients."""

    @classmethod
    def of(cls, mono: Monomial, coeff: complex = 1.0) -> "Poly":
        return cls({mono: complex(coeff)})

    @classmethod
    def constant(cls, n_modes: int, value: complex) -> "Poly":
        return cls.of(Monomial.identity(n_modes), value)

    def __add__(self, other: Mapping) -> "Poly":
        out = Poly(self)
        for m, c in other.items():
            out[m] = out.get(m, 0.0) + c
        return out._prune()

    def __sub__(self, other: Mapping) -> "Poly":
        return self + Poly({m: -c for m, c in other.items()})

    def scale(self, factor: complex) -> "Poly":
        return Poly({m: c * factor for m, c in self.items()})

    def colon_mul(self, other: "Poly") -> "Poly":
        out = Poly()
        for m1, c1 in self.items():
            for m2, c2 in other.items():
                key = m1.colon_mul(m2)
                out[key] = out.get(key, 0.0) + c1 * c2
        return out._prune()

    def adjoint(self) -> "Poly":
        return Poly({m.adjoint(): complex(c).conjugate() for m, c in self.items()})

    def _prune(self) -> "Poly":
        return Poly({m: c for m, c in self.items() if c != 0})


# Operator words: sequence of (mode, dagger) factors in the written order.
Word = tuple[tuple[int, bool], ...]


def _mode_word_normal_order(factors: Iterable[bool]) -> dict[Pair, int]:
    """Normal-order a single-mode word; returns {(p, q): integer coefficient}."""
    terms: dict[Pair, int] = {(0, 0): 1}
    for dagger in factors:
        nxt: dict[Pair, int] = {}
        for (p, q), c in terms.items():
            if not dagger:
                key = (p, q + 1)
                nxt[key] = nxt.get(key, 0) + c
            else:
                # (a+^p a^q) a+ = a+^(p+1) a^q + q a+^p a^(q-1)
                key = (p + 1, q)
                nxt[key] = nxt.get(key, 0) + c
                if q:
                    key = (p, q - 1)
                    nxt[key] = nxt.get(key, 0) + c * q
        terms = nxt
    return terms


def normal_order(word: Word, n_modes: int) -> Poly:
    """Rewrite an operator word as a sum of normally ordered monomials."""
    per_mode = []
    for m in range(n_modes):
        per_mode.append(_mode_word_normal_order(d for mode, d in word if mode == m))
    out = Poly.constant(n_modes, 1.0)
    for m, terms in enumerate(per_mode):
        factor = Poly({Monomial.single(n_modes, m, p, q): float(c) for (p, q), c in terms.items()})
        out = out.colon_mul(factor)  # distinct modes commute
    return out


def reorder_antinormal(q: int, p: int) -> dict[Pair, int]:
    """``a^q a+^p`` as {(p-k, q-k): C(q,k) C(p,k) k!}; closed form of the rewriting rule."""
    return {(p - k, q - k): comb(q, k) * comb(p, k) * factorial(k) for k in range(min(p, q) + 1)}


def word_adjoint(word: Word) -> Word:
    return tuple((m, not d) for m, d in reversed(word))


def word_colon(word: Word, n_modes: int) -> Monomial:
    """``:word:`` -- count creation/annihilation factors per mode."""
    exps = [[0, 0] for _ in range(n_modes)]
    for m, d in word:
        exps[m][0 if d else 1] += 1
    return Monomial(tuple(tuple(e) for e in exps))


_TOKEN = re.compile(r"a(\d+)(\+?)")


def parse_word(token: str) -> Word:
    """Parse one token such as ``"a1+a2"`` or ``"1"``; modes are 1-based in text."""
    token = token.strip()
    if token == "1":
        return ()
    pos, factors = 0, []
    while pos < len(token):
        m = _TOKEN.match(token, pos)
        if not m:
            raise ValueError(f"cannot parse monomial token {token!r} at position {pos}")
        mode = int(m.group(1))
        if mode < 1:
            raise ValueError(f"mode indices start at 1 in {token!r}")
        factors.append((mode - 1, bool(m.group(2))))
        pos = m.end()
    if not factors:
        raise ValueError(f"empty monomial token {token!r}")
    return tuple(factors)


def parse_word_list(text: str) -> list[Word]:
    """Parse ``"a1,a2+"`` into ``[(a_1), (a_2^dagger)]``."""
    words = [parse_word(t) for t in text.split(",") if t.strip()]
    if not words:
        raise ValueError("empty monomial list")
    if len(set(words)) != len(words):
        raise ValueError(f"monomial list {text!r} has repeated entries")
    return words


def format_word(word: Word) -> str:
    return "".join(f"a{m + 1}{'+' if d else ''}" for m, d in word) or "1"
