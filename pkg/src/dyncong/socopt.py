"""Social optimum: cheapest joint routing of all players to the target.

Runs Dijkstra over the Parikh abstraction, whose path costs coincide with
concrete social costs, generating successors on the fly.  An optimal abstract
path needs at most ``n * |V|`` transitions, so exceeding that depth on the
returned optimum is an internal error, never a truncation.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .arena import Game
from .graphs import (
    BudgetExceeded,
    OutcomePath,
    distributions,
    lift_abstract_path,
    node_budget,
    parikh,
    initial_config,
    target_config,
)


@dataclass(frozen=True)
class SocialOptimum:
    cost: int
    abstract_path: tuple[tuple[int, ...], ...]
    witness: OutcomePath


def _search(game: Game, bound=None) -> SocialOptimum | None:
    """Min-cost abstract path from the initial to the target abstraction.

    ``bound`` restricts the search to paths of total weight <= bound and
    makes the result None when no such path exists.  Ties between equal-cost
    paths are broken toward fewer transitions, keeping the depth guarantee
    checkable.
    """
    arena = game.arena
    start = parikh(game, initial_config(game))
    goal = parikh(game, target_config(game))
    depth_cap = game.n * len(arena.states)
    budget = node_budget()

    heap = [(0, 0, start)]
    best: dict[tuple[int, ...], tuple[int, int]] = {start: (0, 0)}
    parents: dict[tuple[int, ...], tuple[tuple[int, ...], dict]] = {}
    popped = 0
    while heap:
        cost, depth, node = heapq.heappop(heap)
        if best.get(node, (None, None)) != (cost, depth):
            continue
        popped += 1
        if popped > budget:
            raise BudgetExceeded(f"social-optimum search exceeded {budget} nodes")
        if node == goal:
            assert depth <= depth_cap, (
                "internal error: optimal witness longer than the n*|V| bound"
            )
            dists = []
            cur = node
            while cur != start:
                prev, dist = parents[cur]
                dists.append(dist)
                cur = prev
            dists.reverse()
            witness = lift_abstract_path(game, dists)
            abstract = [start]
            for d in dists:
                abstract.append(_apply(abstract[-1], d, len(arena.states)))
            lifted = sum(sum(w) for _, w, _ in witness.steps)
            assert lifted == cost, (
                "lifted witness does not reproduce the abstract cost"
            )
            return SocialOptimum(cost, tuple(abstract), witness)
        remaining = None if bound is None else bound - cost
        dedup: dict[tuple[int, ...], tuple[int, dict]] = {}
        for dist, weight, nxt in distributions(arena, node, budget=remaining):
            if nxt == node and weight == 0:
                continue  # zero self-loop (everyone at tgt) makes no progress
            cur = dedup.get(nxt)
            if cur is None or weight < cur[0]:
                dedup[nxt] = (weight, dist)
        for nxt, (weight, dist) in dedup.items():
            cand = (cost + weight, depth + 1)
            if bound is not None and cand[0] > bound:
                continue
            if nxt not in best or cand < best[nxt]:
                best[nxt] = cand
                parents[nxt] = (node, dist)
                heapq.heappush(heap, (cand[0], cand[1], nxt))
    return None


def _apply(abstract, dist, num_states):
    nxt = [0] * num_states
    for (u, v), count in dist.items():
        nxt[v] += count
    counted = sum(dist.values())
    assert counted == sum(abstract)
    return tuple(nxt)


def social_optimum(game: Game) -> SocialOptimum:
    """Exact social optimum with an abstract path and a concrete witness.

    The witness is the outcome of the blind profile where every player
    follows their lifted path; feeding its move vectors to ``eval_path``
    reproduces the cost exactly.
    """
    result = _search(game)
    assert result is not None, "target is reachable, so an optimum must exist"
    return result


def constrained_social_optimum(game: Game, bound: int):
    """Whether some strategy profile has social cost <= bound.

    The paper-level problem statement wavers between strict and non-strict
    comparison; this library consistently uses <=.
    """
    result = _search(game, bound=bound)
    if result is None:
        return False, None
    return True, result
