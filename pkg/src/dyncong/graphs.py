"""Configuration-level semantics shared by every solver.

A configuration assigns each player a state; a move vector gives each player
an outgoing edge of their state; taking a joint step charges each player the
cost of their edge at its simultaneous load.  The Parikh view forgets player
identities and keeps only per-state head counts, which is sound for social
costs because all players are interchangeable.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

from .arena import Arena, Game

INF = float("inf")
NEG_INF = float("-inf")

Config = tuple[int, ...]  # player index -> state index
Edge = tuple[int, int]
MoveVector = tuple[Edge, ...]


class SemanticsError(ValueError):
    """Raised for moves or paths that are invalid in the given game."""


class BudgetExceeded(RuntimeError):
    """A search expanded more nodes than its budget allows."""


def node_budget() -> int:
    """Search node budget; override with DYNCONG_NODE_BUDGET."""
    raw = os.environ.get("DYNCONG_NODE_BUDGET")
    return int(raw) if raw else 10_000_000


def initial_config(game: Game) -> Config:
    return (game.arena.src,) * game.n


def target_config(game: Game) -> Config:
    return (game.arena.tgt,) * game.n


def moves_for(arena: Arena, config: Config):
    """All move vectors from ``config``, in canonical edge order per player.

    Lazy: the product of per-player out-degrees can be huge for many
    players, and callers guard their enumeration against the node budget.
    """
    per_player = [
        [(state, succ) for succ, _ in arena.out[state]] for state in config
    ]
    return (tuple(combo) for combo in itertools.product(*per_player))


def step(game: Game, config: Config, moves: MoveVector):
    """Applies a move vector; returns the weight vector and next configuration.

    The load of an edge is the number of players taking that same edge in
    ``moves``; player i pays their edge's cost at that load.
    """
    arena = game.arena
    if len(moves) != len(config):
        raise SemanticsError("move vector length differs from player count")
    loads: dict[Edge, int] = {}
    for edge in moves:
        loads[edge] = loads.get(edge, 0) + 1
    weights = []
    nxt = []
    for player, edge in enumerate(moves):
        if edge not in arena.edges:
            raise SemanticsError(f"no edge {edge} in the arena")
        if edge[0] != config[player]:
            raise SemanticsError(
                f"player {player + 1} is at {arena.states[config[player]]} "
                f"but moves along {arena.states[edge[0]]} -> {arena.states[edge[1]]}"
            )
        weights.append(arena.edges[edge](loads[edge]))
        nxt.append(edge[1])
    return tuple(weights), tuple(nxt)


def moves_between(arena: Arena, config: Config, nxt: Config) -> MoveVector:
    """The unique move vector realizing ``config => nxt``.

    Well defined because there is at most one edge per ordered state pair.
    """
    moves = []
    for u, v in zip(config, nxt):
        if (u, v) not in arena.edges:
            raise SemanticsError(
                f"no edge {arena.states[u]} -> {arena.states[v]} in the arena"
            )
        moves.append((u, v))
    return tuple(moves)


def step_weights(game: Game, config: Config, nxt: Config) -> tuple[int, ...]:
    weights, result = step(game, config, moves_between(game.arena, config, nxt))
    assert result == nxt
    return weights


@dataclass(frozen=True)
class OutcomePath:
    """A finite play: a start configuration and chained weighted joint steps."""

    start: Config
    steps: tuple[tuple[MoveVector, tuple[int, ...], Config], ...]

    def configs(self) -> list[Config]:
        return [self.start] + [nxt for _, _, nxt in self.steps]

    def n(self) -> int:
        return len(self.start)

    def cost(self, player: int) -> int:
        """Sum of the weights charged to ``player`` (0-based) along the path."""
        return sum(w[player] for _, w, _ in self.steps)

    def key(self):
        return (self.start, self.steps)

    def to_json(self, arena: Arena) -> dict:
        return {
            "steps": [
                {
                    "moves": [[arena.states[u], arena.states[v]] for u, v in moves],
                    "weights": list(weights),
                    "config": [arena.states[s] for s in nxt],
                }
                for moves, weights, nxt in self.steps
            ]
        }


def path_from_json(arena: Arena, data: dict) -> OutcomePath:
    steps = data["steps"]
    if not steps:
        raise SemanticsError("outcome path needs at least one step")
    first_moves = steps[0]["moves"]
    start = tuple(arena.index(frm) for frm, _ in first_moves)
    built = []
    config = start
    for entry in steps:
        moves = tuple(
            (arena.index(frm), arena.index(to)) for frm, to in entry["moves"]
        )
        nxt = tuple(arena.index(s) for s in entry["config"])
        if tuple(m[0] for m in moves) != config:
            raise SemanticsError("steps do not chain")
        if tuple(m[1] for m in moves) != nxt:
            raise SemanticsError("step config does not match move heads")
        built.append((moves, tuple(entry["weights"]), nxt))
        config = nxt
    return OutcomePath(start=start, steps=tuple(built))


def path_from_configs(game: Game, configs: list[Config]) -> OutcomePath:
    """Builds an outcome path through the given configurations, recomputing
    move vectors and weights."""
    steps = []
    for cur, nxt in zip(configs, configs[1:]):
        moves = moves_between(game.arena, cur, nxt)
        weights, _ = step(game, cur, moves)
        steps.append((moves, weights, nxt))
    return OutcomePath(start=configs[0], steps=tuple(steps))


def eval_path(game: Game, moves_list) -> tuple[tuple, object, OutcomePath]:
    """Plays a move-vector sequence from the initial configuration.

    Returns per-player costs (``+inf`` for players that never reach the
    target), the social cost, and the reconstructed :class:`OutcomePath`.
    Weights supplied by callers are ignored; everything is recomputed from
    loads.
    """
    config = initial_config(game)
    steps = []
    for moves in moves_list:
        weights, nxt = step(game, config, tuple(moves))
        steps.append((tuple(moves), weights, nxt))
        config = nxt
    path = OutcomePath(start=initial_config(game), steps=tuple(steps))
    tgt = game.arena.tgt
    costs = []
    for i in range(game.n):
        reached = path.start[i] == tgt or any(nxt[i] == tgt for _, _, nxt in steps)
        costs.append(path.cost(i) if reached else INF)
    social = sum(costs)
    return tuple(costs), social, path


def parikh(game: Game, config: Config) -> tuple[int, ...]:
    """Per-state player counts of a configuration."""
    counts = [0] * len(game.arena.states)
    for state in config:
        counts[state] += 1
    return tuple(counts)


def compositions(total: int, parts: int):
    """All ways to write ``total`` as an ordered sum of ``parts`` naturals."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


def distributions(arena: Arena, abstract: tuple[int, ...], budget=None):
    """Edge distributions compatible with an abstract configuration.

    Yields ``(dist, weight, nxt)`` where ``dist`` maps edges to counts with,
    for every state v, the counts on v's out-edges summing to abstract[v];
    ``weight`` is the total cost paid on this joint step and ``nxt`` the
    successor abstract configuration.  Enumeration order is the product of
    per-state compositions in canonical state and edge order.  With a
    ``budget``, partial products whose weight already exceeds it are pruned,
    which keeps threshold-cost arenas tractable.
    """
    occupied = [v for v, cnt in enumerate(abstract) if cnt > 0]
    per_state = []
    for v in occupied:
        outs = arena.out[v]
        if not outs:
            return  # dead end: no distribution exists
        options = []
        for combo in compositions(abstract[v], len(outs)):
            weight = 0
            for count, (succ, fn) in zip(combo, outs):
                if count:
                    weight += count * fn(count)
            options.append((combo, weight))
        per_state.append((v, outs, options))

    def rec(idx, dist, weight):
        if idx == len(per_state):
            nxt = [0] * len(abstract)
            for (u, v), count in dist.items():
                nxt[v] += count
            yield dict(dist), weight, tuple(nxt)
            return
        v, outs, options = per_state[idx]
        for combo, wgt in options:
            if budget is not None and weight + wgt > budget:
                continue
            added = {}
            for count, (succ, _) in zip(combo, outs):
                if count:
                    added[(v, succ)] = count
            dist.update(added)
            yield from rec(idx + 1, dist, weight + wgt)
            for key in added:
                del dist[key]

    yield from rec(0, {}, 0)


def abstract_successors(game: Game, abstract: tuple[int, ...]):
    """Raw ``(weight, successor)`` pairs of an abstract configuration.

    Duplicates are kept; shortest-path users deduplicate to the minimum
    weight per successor.
    """
    return [
        (weight, nxt) for _, weight, nxt in distributions(game.arena, abstract)
    ]


def dev_set(game: Game, config: Config, nxt: Config, player: int):
    """Unilateral deviations of ``player`` from the joint step config => nxt.

    Returns ``(dev_config, dev_cost)`` pairs, one per edge out of the
    player's state (the prescribed move included); the deviation cost charges
    the chosen edge at one plus the number of *other* players taking that
    same edge under the prescribed step.
    """
    arena = game.arena
    moves = moves_between(arena, config, nxt)
    other_loads: dict[Edge, int] = {}
    for j, edge in enumerate(moves):
        if j != player:
            other_loads[edge] = other_loads.get(edge, 0) + 1
    result = []
    for succ, fn in arena.out[config[player]]:
        edge = (config[player], succ)
        cost = fn(1 + other_loads.get(edge, 0))
        dev = list(nxt)
        dev[player] = succ
        result.append((tuple(dev), cost))
    return result


@dataclass
class ReachableGraph:
    """Configurations reachable from the initial one, with their transitions."""

    configs: list[Config]
    transitions: dict[Config, list[tuple[Config, tuple[int, ...]]]]

    def successors(self, config: Config):
        return self.transitions[config]


def reachable_graph(game: Game) -> ReachableGraph:
    budget = node_budget()
    start = initial_config(game)
    seen = {start}
    order = [start]
    transitions: dict[Config, list[tuple[Config, tuple[int, ...]]]] = {}
    frontier = [start]
    work = 0
    while frontier:
        config = frontier.pop()
        succs = []
        for moves in moves_for(game.arena, config):
            work += 1
            if work > budget:
                raise BudgetExceeded("configuration graph above node budget")
            weights, nxt = step(game, config, moves)
            succs.append((nxt, weights))
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                frontier.append(nxt)
        transitions[config] = succs
    return ReachableGraph(configs=order, transitions=transitions)


def shortest_path(start, nodes, edges, weight_of, targets):
    """Min-weight path in an explicit graph given as ``(u, payload, v)`` edges.

    ``weight_of(payload)`` may be negative, in which case Bellman-Ford runs
    for at most ``|nodes|`` rounds; in the graphs built here every cycle has
    weight zero, so a round that still improves raises.  Returns
    ``(distance, [(u, payload, v), ...])`` to the cheapest target, or None
    when no target is reachable.
    """
    import heapq as _heapq

    adjacency: dict = {}
    for u, payload, v in edges:
        adjacency.setdefault(u, []).append((weight_of(payload), v, payload))
    negative = any(weight_of(p) < 0 for _, p, _ in edges)
    dist = {start: 0}
    parent: dict = {}
    if not negative:
        heap = [(0, 0, start)]
        counter = 1
        while heap:
            d, _, u = _heapq.heappop(heap)
            if dist.get(u, INF) < d:
                continue
            for z, v, payload in adjacency.get(u, []):
                if d + z < dist.get(v, INF):
                    dist[v] = d + z
                    parent[v] = (u, payload)
                    _heapq.heappush(heap, (d + z, counter, v))
                    counter += 1
    else:
        order = list(nodes)
        for _ in range(len(order) + 1):
            changed = False
            for u in order:
                if u not in dist:
                    continue
                for z, v, payload in adjacency.get(u, []):
                    if dist[u] + z < dist.get(v, INF):
                        dist[v] = dist[u] + z
                        parent[v] = (u, payload)
                        changed = True
            if not changed:
                break
        else:
            raise AssertionError(
                "relaxation kept improving: negative cycle, which the "
                "residual-bound dynamics rule out"
            )
    reached = [t for t in targets if t in dist]
    if not reached:
        return None
    best = min(reached, key=lambda t: dist[t])
    path = []
    cur = best
    while cur != start:
        prev, payload = parent[cur]
        path.append((prev, payload, cur))
        cur = prev
    path.reverse()
    return dist[best], path


def lift_abstract_path(game: Game, dists: list[dict]) -> OutcomePath:
    """Realizes an abstract path as a concrete outcome.

    ``dists`` holds one edge-count map per step.  Players standing on a state
    are assigned to its out-edges in ascending player index and canonical
    edge order; by symmetry every assignment has the same social cost.
    """
    arena = game.arena
    config = initial_config(game)
    steps = []
    for dist in dists:
        remaining = dict(dist)
        moves = []
        for state in config:
            chosen = None
            for succ, _ in arena.out[state]:
                edge = (state, succ)
                if remaining.get(edge, 0) > 0:
                    chosen = edge
                    remaining[edge] -= 1
                    break
            if chosen is None:
                raise SemanticsError("abstract step does not cover a player")
            moves.append(chosen)
        weights, nxt = step(game, config, tuple(moves))
        steps.append((tuple(moves), weights, nxt))
        config = nxt
    return OutcomePath(start=initial_config(game), steps=tuple(steps))
