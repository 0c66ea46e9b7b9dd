"""Temporal seller-buyer matchings under a stock limit.

A matching pairs sellers with strictly later buyers.  With capacity K, no
"temporal cut" may exceed K: for every position t, at most K pairs may have
their seller at or before t and their buyer after t (those items would all
be in stock simultaneously).  ``capacity=None`` means unbounded.

``fifo_match`` is the online single-pass algorithm; ``brute_force_max_matching``
is the independent exhaustive oracle used to certify that FIFO is maximal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .streams import AgentStream, BUYER, SELLER

__all__ = ["TemporalMatching", "fifo_match", "brute_force_max_matching", "max_matchable"]

_BRUTE_FORCE_LIMIT = 20


def _check_capacity(capacity):
    if capacity is not None and not capacity >= 1:
        raise ValueError(f"capacity must be a positive integer or None, got {capacity!r}")


@dataclass(frozen=True)
class TemporalMatching:
    pairs: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.pairs)

    def validate(self, stream: AgentStream, capacity: int | None = None) -> None:
        """Raise ValueError if any structural invariant is broken."""
        _check_capacity(capacity)
        seen = set()
        cuts = [0] * (len(stream) + 1)
        for i, j in self.pairs:
            if not (0 <= i < j < len(stream)):
                raise ValueError(f"pair ({i}, {j}) is not seller-before-buyer in range")
            if int(stream.roles[i]) != SELLER or int(stream.roles[j]) != BUYER:
                raise ValueError(f"pair ({i}, {j}) does not join a seller to a buyer")
            if i in seen or j in seen:
                raise ValueError(f"index reused by pair ({i}, {j})")
            seen.update((i, j))
            cuts[i] += 1
            cuts[j] -= 1
        if capacity is not None:
            open_pairs = 0
            for t, delta in enumerate(cuts):
                open_pairs += delta
                if open_pairs > capacity:
                    raise ValueError(f"temporal cut {open_pairs} exceeds capacity {capacity} at position {t}")


def fifo_match(stream: AgentStream, capacity: int | None = None) -> TemporalMatching:
    """Single pass: sellers enter a FIFO queue while it holds fewer than
    ``capacity`` items; each buyer pops the front if the queue is nonempty."""
    _check_capacity(capacity)
    queue: deque[int] = deque()
    pairs = []
    for t, role in enumerate(stream.roles.tolist()):
        if role == SELLER:
            if capacity is None or len(queue) < capacity:
                queue.append(t)
        elif queue:
            pairs.append((queue.popleft(), t))
    return TemporalMatching(tuple(pairs))


def brute_force_max_matching(stream: AgentStream, capacity: int | None = None) -> int:
    """Maximum matching size by exhaustive backtracking over assignments.

    At each seller the search branches on reserving it for a later buyer or
    not; at each buyer on consuming a reserved seller or not.  Identical
    (position, reserved-count) subproblems are memoized.  Refuses streams
    longer than 20: this is an oracle, not a production path.
    """
    n = len(stream)
    if n > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute-force oracle is limited to length <= {_BRUTE_FORCE_LIMIT}, got {n}")
    _check_capacity(capacity)
    roles = stream.roles.tolist()
    cap = n if capacity is None else capacity
    memo: dict[tuple[int, int], int] = {}

    def go(t: int, reserved: int) -> int:
        if t == n:
            return 0
        key = (t, reserved)
        hit = memo.get(key)
        if hit is not None:
            return hit
        best = go(t + 1, reserved)
        if roles[t] == SELLER:
            if reserved < cap:
                best = max(best, go(t + 1, reserved + 1))
        elif reserved > 0:
            best = max(best, 1 + go(t + 1, reserved - 1))
        memo[key] = best
        return best

    return go(0, 0)


def max_matchable(stream: AgentStream, capacity: int | None = None) -> int:
    """Size of the largest temporal matching (kappa); computed by FIFO."""
    return fifo_match(stream, capacity).size
