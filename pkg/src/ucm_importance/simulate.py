"""Monte Carlo walks over a flat chain.

Walks follow the same token semantics as scenario resolution but draw every
choice at random, weighted by transition probability. They produce
statistical-usage test sequences and an independent check of the analytic
importances.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

from .errors import LoopBoundExceeded
from .usage import CHOICE_KINDS, COUNTED_KINDS, DEFAULT_LOOP_BOUND, FlatChain

GENERATOR = "MT19937 via Python random.Random, string-seeded per walk as '<seed>:<index>'"

Signature = tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class WalkResult:
    sequence: tuple[str, ...]
    visits: Mapping[str, int]
    signature: Signature


@dataclass(frozen=True)
class Estimate:
    frequencies: Mapping[Signature, float]
    mean_visits: Mapping[str, float]
    walks: int
    seed: int
    generator: str = GENERATOR


def _sample(rng: random.Random, weights: list[float]) -> int:
    u = rng.random() * sum(weights)
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def _walk(chain: FlatChain, rng: random.Random, loop_bound: int) -> WalkResult:
    starts = chain.starts
    if not starts:
        raise ValueError("chain has no start state")
    start = starts[0][0] if len(starts) == 1 else starts[_sample(rng, [w for _, w in starts])][0]

    stack = [start]
    sequence: list[str] = []
    visits: Counter[str] = Counter()
    entries: Counter[str] = Counter()
    joins: Counter[str] = Counter()
    signature: list[tuple[str, str]] = []
    while stack:
        sid = stack.pop()
        entries[sid] += 1
        if entries[sid] > loop_bound:
            raise LoopBoundExceeded(sid, loop_bound)
        sequence.append(sid)
        state = chain.state(sid)
        if state.kind in COUNTED_KINDS:
            visits[state.source] += 1
        out = chain.outgoing(sid)
        if not out:
            continue
        if state.kind == "and_fork":
            stack.extend(t.target for t in reversed(out))
            continue
        if state.kind == "and_join":
            joins[sid] += 1
            if joins[sid] < chain.in_degree(sid):
                continue
            joins[sid] = 0
        if state.kind in CHOICE_KINDS:
            nxt = out[_sample(rng, [t.probability for t in out])].target
            signature.append((sid, nxt))
        else:
            nxt = out[0].target
        stack.append(nxt)
    return WalkResult(tuple(sequence), dict(visits), tuple(signature))


def random_walk(chain: FlatChain, seed: int, loop_bound: int = DEFAULT_LOOP_BOUND) -> WalkResult:
    return _walk(chain, random.Random(str(seed)), loop_bound)


def walk_seed(seed: int, index: int) -> str:
    return f"{seed}:{index}"


def estimate(chain: FlatChain, n: int, seed: int, loop_bound: int = DEFAULT_LOOP_BOUND) -> Estimate:
    """Run ``n`` independent walks and average them.

    Walk ``i`` is seeded from ``(seed, i)`` alone, so results do not depend on
    the order in which walks run.
    """
    if n < 1:
        raise ValueError("number of walks must be at least 1")
    counts: Counter[Signature] = Counter()
    totals: Counter[str] = Counter()
    for i in range(n):
        w = _walk(chain, random.Random(walk_seed(seed, i)), loop_bound)
        counts[w.signature] += 1
        totals.update(w.visits)
    return Estimate(
        frequencies={sig: c / n for sig, c in sorted(counts.items())},
        mean_visits={obj: c / n for obj, c in sorted(totals.items())},
        walks=n,
        seed=seed,
    )
