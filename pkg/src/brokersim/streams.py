"""Agent arrival sequences: concrete streams, the pattern language, balance
and prefix-domination predicates.

Patterns follow the grammar ``pattern := term+`` with
``term := atom | atom '^' uint | '(' pattern ')' '^' uint`` and
``atom := 'S' | 'B'`` (whitespace ignored), e.g. ``"(S^2 B)^3"``.
Expansion is capped at 10^8 roles; larger inputs are rejected at parse time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import SpecParseError

__all__ = [
    "SELLER",
    "BUYER",
    "AgentStream",
    "StreamPattern",
    "parse_pattern",
    "expand",
    "is_alpha_balanced",
    "prefix_dominates",
    "random_alpha_balanced",
    "enumerate_alpha_balanced",
]

SELLER = 0
BUYER = 1
_CHAR_FOR_ROLE = "SB"
_ROLE_FOR_CHAR = {"S": SELLER, "B": BUYER}

MAX_EXPANSION = 10**8


@dataclass(frozen=True)
class _Atom:
    role: int

    def length(self) -> int:
        return 1

    def iter_roles(self) -> Iterator[int]:
        yield self.role

    def materialize(self) -> np.ndarray:
        return np.array([self.role], dtype=np.uint8)

    def render(self) -> str:
        return _CHAR_FOR_ROLE[self.role]


@dataclass(frozen=True)
class _Repeat:
    child: object
    count: int

    def length(self) -> int:
        return self.child.length() * self.count

    def iter_roles(self) -> Iterator[int]:
        for _ in range(self.count):
            yield from self.child.iter_roles()

    def materialize(self) -> np.ndarray:
        return np.tile(self.child.materialize(), self.count)

    def render(self) -> str:
        inner = self.child.render()
        if isinstance(self.child, _Atom):
            return f"{inner}^{self.count}"
        return f"({inner})^{self.count}"


@dataclass(frozen=True)
class _Seq:
    parts: tuple

    def length(self) -> int:
        return sum(p.length() for p in self.parts)

    def iter_roles(self) -> Iterator[int]:
        for p in self.parts:
            yield from p.iter_roles()

    def materialize(self) -> np.ndarray:
        if not self.parts:
            return np.zeros(0, dtype=np.uint8)
        return np.concatenate([p.materialize() for p in self.parts])

    def render(self) -> str:
        return " ".join(p.render() for p in self.parts)


@dataclass(frozen=True)
class StreamPattern:
    """Parsed pattern AST; expandable eagerly or role-by-role."""

    root: _Seq

    def length(self) -> int:
        return self.root.length()

    def iter_roles(self) -> Iterator[int]:
        """Lazy left-to-right role generation, no materialization."""
        return self.root.iter_roles()

    def render(self) -> str:
        return self.root.render()


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i].isspace():
        i += 1
    return i


def _parse_uint(text: str, i: int) -> tuple[int, int]:
    j = i
    while j < len(text) and text[j].isdigit():
        j += 1
    if j == i:
        raise SpecParseError(f"expected repetition count at position {i} in {text!r}")
    return int(text[i:j]), j


def _parse_seq(text: str, i: int, depth: int) -> tuple[list, int]:
    parts = []
    i = _skip_ws(text, i)
    while i < len(text):
        c = text[i]
        if c == ")":
            if depth == 0:
                raise SpecParseError(f"unbalanced ')' at position {i} in {text!r}")
            break
        if c in _ROLE_FOR_CHAR:
            node = _Atom(_ROLE_FOR_CHAR[c])
            i = _skip_ws(text, i + 1)
            if i < len(text) and text[i] == "^":
                count, i = _parse_uint(text, _skip_ws(text, i + 1))
                node = _Repeat(node, count)
        elif c == "(":
            inner, i = _parse_seq(text, i + 1, depth + 1)
            if i >= len(text) or text[i] != ")":
                raise SpecParseError(f"missing ')' for group opened in {text!r}")
            i = _skip_ws(text, i + 1)
            if i >= len(text) or text[i] != "^":
                raise SpecParseError(f"group must be followed by '^<count>' at position {i} in {text!r}")
            count, i = _parse_uint(text, _skip_ws(text, i + 1))
            node = _Repeat(_Seq(tuple(inner)), count)
        else:
            raise SpecParseError(f"unexpected character {c!r} at position {i} in {text!r}")
        parts.append(node)
        i = _skip_ws(text, i)
    return parts, i


def parse_pattern(text: str) -> StreamPattern:
    """Parse a stream pattern; rejects syntax errors (with position) and
    expansions beyond ``MAX_EXPANSION`` roles."""
    if not text or not text.strip():
        raise SpecParseError("empty stream pattern")
    parts, i = _parse_seq(text, 0, depth=0)
    if i != len(text):
        raise SpecParseError(f"trailing input at position {i} in {text!r}")
    pattern = StreamPattern(_Seq(tuple(parts)))
    total = pattern.length()
    if total > MAX_EXPANSION:
        raise SpecParseError(f"pattern expands to {total} roles, above the {MAX_EXPANSION} cap")
    return pattern


class AgentStream:
    """Immutable sequence of SELLER/BUYER roles with cached counts."""

    __slots__ = ("roles", "n_S", "n_B", "_prefix")

    def __init__(self, roles: np.ndarray):
        roles = np.ascontiguousarray(roles, dtype=np.uint8)
        if roles.size and not np.all((roles == SELLER) | (roles == BUYER)):
            raise ValueError("roles must be SELLER (0) or BUYER (1)")
        roles.setflags(write=False)
        self.roles = roles
        self.n_S = int(np.count_nonzero(roles == SELLER))
        self.n_B = roles.size - self.n_S
        self._prefix = None

    @classmethod
    def from_text(cls, text: str) -> "AgentStream":
        chars = [c for c in text if not c.isspace()]
        bad = next((c for c in chars if c not in _ROLE_FOR_CHAR), None)
        if bad is not None:
            raise SpecParseError(f"invalid role character {bad!r} in {text!r}")
        return cls(np.array([_ROLE_FOR_CHAR[c] for c in chars], dtype=np.uint8))

    @classmethod
    def from_pattern(cls, text: str) -> "AgentStream":
        return expand(parse_pattern(text))

    @property
    def n(self) -> int:
        return self.roles.size

    @property
    def text(self) -> str:
        return "".join(_CHAR_FOR_ROLE[r] for r in self.roles)

    def seller_prefix_counts(self) -> np.ndarray:
        """Cumulative seller count; entry t is the count in roles[:t+1]."""
        if self._prefix is None:
            self._prefix = np.cumsum(self.roles == SELLER)
        return self._prefix

    def prefix_sellers(self, t: int) -> int:
        if t <= 0:
            return 0
        return int(self.seller_prefix_counts()[min(t, self.n) - 1])

    def __len__(self):
        return self.roles.size

    def __eq__(self, other):
        return isinstance(other, AgentStream) and np.array_equal(self.roles, other.roles)

    def __hash__(self):
        return hash(self.roles.tobytes())

    def __repr__(self):
        if self.n <= 32:
            return f"AgentStream({self.text!r})"
        return f"AgentStream(n={self.n}, n_S={self.n_S}, n_B={self.n_B})"


def expand(pattern: StreamPattern) -> AgentStream:
    total = pattern.length()
    if total > MAX_EXPANSION:
        raise SpecParseError(f"pattern expands to {total} roles, above the {MAX_EXPANSION} cap")
    return AgentStream(pattern.root.materialize())


def is_alpha_balanced(stream: AgentStream, alpha: int) -> bool:
    """True iff n_S = alpha * n_B and the i-th buyer has >= alpha*i sellers before it."""
    if not (isinstance(alpha, (int, np.integer)) and alpha >= 1):
        raise ValueError(f"alpha must be a positive integer, got {alpha!r}")
    if stream.n_S != alpha * stream.n_B:
        return False
    if stream.n_B == 0:
        return True
    cum = stream.seller_prefix_counts()
    buyer_pos = np.nonzero(stream.roles == BUYER)[0]
    need = alpha * np.arange(1, stream.n_B + 1)
    return bool(np.all(cum[buyer_pos] >= need))


def prefix_dominates(s1: AgentStream, s2: AgentStream) -> bool:
    """Weak domination: every prefix of s1 has at least as many sellers as s2's."""
    if len(s1) != len(s2):
        raise ValueError(f"streams must have equal length, got {len(s1)} and {len(s2)}")
    return bool(np.all(s1.seller_prefix_counts() >= s2.seller_prefix_counts()))


def random_alpha_balanced(alpha: int, m: int, rng: np.random.Generator) -> AgentStream:
    """Uniform random alpha-balanced stream with m buyers, by rejection sampling."""
    if m == 0:
        return AgentStream(np.zeros(0, dtype=np.uint8))
    roles = np.array([SELLER] * (alpha * m) + [BUYER] * m, dtype=np.uint8)
    while True:
        rng.shuffle(roles)
        candidate = AgentStream(roles.copy())
        if is_alpha_balanced(candidate, alpha):
            return candidate


def enumerate_alpha_balanced(alpha: int, m: int) -> Iterator[AgentStream]:
    """All alpha-balanced streams with m buyers, lexicographic order; oracle-scale."""
    n_s, n_b = alpha * m, m
    buf = np.zeros(n_s + n_b, dtype=np.uint8)

    def rec(i, s_used, b_used):
        if i == buf.size:
            yield AgentStream(buf.copy())
            return
        if s_used < n_s:
            buf[i] = SELLER
            yield from rec(i + 1, s_used + 1, b_used)
        if b_used < n_b and s_used >= alpha * (b_used + 1):
            buf[i] = BUYER
            yield from rec(i + 1, s_used, b_used + 1)

    yield from rec(0, 0, 0)
