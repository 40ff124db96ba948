"""General Nash equilibria.

The outcome of a Nash equilibrium is characterized step by step: deviating at
any point can be punished by the coalition of all other players, and the most
they can force on player i from configuration c is the zero-sum value of c
for i.  Since the game is symmetric, that value only depends on the player's
own state and the multiset of coalition positions; it is computed once by
value iteration and shared across players.  Optimal (best or worst) Nash
equilibria come from a shortest-path search over the configuration graph
augmented with per-player residual bounds that encode "no pending deviation
is profitable".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .arena import Game
from .costfn import kappa
from .graphs import (
    INF,
    BudgetExceeded,
    Config,
    OutcomePath,
    SemanticsError,
    dev_set,
    distributions,
    eval_path,
    initial_config,
    node_budget,
    path_from_configs,
    reachable_graph,
    shortest_path,
    step,
    target_config,
)

ValueState = tuple[int, tuple[int, ...]]  # (own state, coalition counts)


@dataclass(frozen=True)
class ValueTable:
    """Fixpoint values of the punish-one-player zero-sum game.

    ``values[s]`` is the worst total cost the coalition can force on the
    distinguished player from value state ``s``; ``punish[s]`` is a coalition
    edge distribution achieving it (the first maximizer in canonical order).
    """

    values: dict[ValueState, int]
    punish: dict[ValueState, dict]
    ceiling: int

    def at_config(self, config: Config, player: int, num_states: int) -> int:
        counts = [0] * num_states
        for j, state in enumerate(config):
            if j != player:
                counts[state] += 1
        return self.values[(config[player], tuple(counts))]


def _coalition_states(game: Game):
    num_states = len(game.arena.states)
    for combo in itertools.combinations_with_replacement(
        range(num_states), game.n - 1
    ):
        counts = [0] * num_states
        for state in combo:
            counts[state] += 1
        yield tuple(counts)


def compute_values(game: Game) -> ValueTable:
    """Value iteration for the sup-inf deviation values.

    One step resolves as: the coalition commits to an edge distribution, then
    the player, who can read the coalition strategy, picks their own edge;
    the player pays their edge's cost at one plus the coalition load on that
    same edge.  Iteration starts from +inf off the target and decreases to
    the least guarantee; the fixpoint must be finite (the player alone
    controls their position, so the target is never barred) and at most
    ``|V| * kappa``.
    """
    arena = game.arena
    ceiling = len(arena.states) * kappa(game)
    budget = node_budget()

    coalition_moves: dict[tuple[int, ...], list] = {}
    states: list[ValueState] = []
    for counts in _coalition_states(game):
        moves = [
            (dist, nxt) for dist, _, nxt in distributions(arena, counts)
        ]
        coalition_moves[counts] = moves
        for own in range(len(arena.states)):
            states.append((own, counts))
            if len(states) > budget:
                raise BudgetExceeded("value-table state space above node budget")

    values: dict[ValueState, float] = {
        s: 0 if s[0] == arena.tgt else INF for s in states
    }
    cap = len(arena.states) + len(states) * ceiling
    for _ in range(cap):
        updated = {}
        changed = False
        for s in states:
            own, counts = s
            if own == arena.tgt:
                updated[s] = 0
                continue
            worst = 0
            for dist, nxt in coalition_moves[counts]:
                response = min(
                    fn(1 + dist.get((own, succ), 0)) + values[(succ, nxt)]
                    for succ, fn in arena.out[own]
                )
                if response > worst:
                    worst = response
            updated[s] = worst
            if worst != values[s]:
                changed = True
        values = updated
        if not changed:
            break
    else:
        raise AssertionError("value iteration missed its convergence cap")

    punish: dict[ValueState, dict] = {}
    for s in states:
        own, counts = s
        if own == arena.tgt:
            assert values[s] == 0
        assert values[s] != INF, (
            "infinite fixpoint value: the player alone controls reachability"
        )
        assert values[s] <= ceiling, "fixpoint value above the |V|*kappa ceiling"
        best = None
        for dist, nxt in coalition_moves[counts]:
            response = min(
                fn(1 + dist.get((own, succ), 0)) + values[(succ, nxt)]
                for succ, fn in arena.out[own]
            )
            if response == values[s]:
                best = dist
                break
        assert best is not None
        punish[s] = best
    return ValueTable(values={s: int(v) for s, v in values.items()},
                      punish=punish, ceiling=ceiling)


def _check_path_shape(game: Game, path: OutcomePath):
    if path.start != initial_config(game):
        raise SemanticsError("path must start at the initial configuration")
    if path.configs()[-1] != target_config(game):
        raise SemanticsError("path must end with every player at the target")
    config = path.start
    for moves, weights, nxt in path.steps:
        recomputed, result = step(game, config, moves)
        if result != nxt or recomputed != tuple(weights):
            raise SemanticsError("path weights or configurations are inconsistent")
        config = nxt


def check_ne_outcome(game: Game, path: OutcomePath, values: ValueTable | None = None) -> bool:
    """Whether the path is the outcome of some Nash equilibrium.

    Checks, for every player, step, and unilateral deviation, that the suffix
    cost is covered by the deviation's step cost plus the coalition value at
    the deviated configuration.
    """
    _check_path_shape(game, path)
    if values is None:
        values = compute_values(game)
    num_states = len(game.arena.states)
    configs = path.configs()
    n = game.n
    suffix = [0] * n
    suffixes = [tuple(suffix)]
    for _, weights, _ in reversed(path.steps):
        suffix = [s + w for s, w in zip(suffix, weights)]
        suffixes.append(tuple(suffix))
    suffixes.reverse()  # suffixes[l] = cost of the path from configuration l on

    for l in range(len(path.steps)):
        for i in range(n):
            for dev, dev_cost in dev_set(game, configs[l], configs[l + 1], i):
                bound = dev_cost + values.at_config(dev, i, num_states)
                if suffixes[l][i] > bound:
                    return False
    return True


def deviation_floor(game: Game, values: ValueTable, config: Config,
                    nxt: Config, player: int) -> int:
    """Least cost ``player`` can secure by deviating from config => nxt."""
    num_states = len(game.arena.states)
    return min(
        cost + values.at_config(dev, player, num_states)
        for dev, cost in dev_set(game, config, nxt, player)
    )


def _explore_ne_graph(game: Game, values: ValueTable):
    """Forward reachable part of the bound-augmented configuration graph.

    Nodes are ``(configuration, bounds)`` with bounds in [0, Y] or +inf; an
    edge exists when every updated bound stays nonnegative.  Bounds above the
    ceiling Y are clamped to Y, which is sound because no equilibrium suffix
    costs more than Y.
    """
    arena = game.arena
    n = game.n
    ceiling = values.ceiling
    budget = node_budget()
    graph = reachable_graph(game)
    floors: dict[tuple[Config, Config, int], int] = {}

    def successors(node):
        config, bounds = node
        result = []
        for nxt, weights in graph.successors(config):
            updated = []
            ok = True
            for i in range(n):
                if config[i] == arena.tgt:
                    updated.append(0)
                    continue
                key = (config, nxt, i)
                if key not in floors:
                    floors[key] = deviation_floor(game, values, config, nxt, i)
                b = min(bounds[i], floors[key]) - weights[i]
                if b < 0:
                    ok = False
                    break
                updated.append(min(b, ceiling))
            if ok:
                result.append(((nxt, tuple(updated)), weights))
        return result

    start = (initial_config(game), (INF,) * n)
    nodes = {start}
    frontier = [start]
    edges = []
    while frontier:
        node = frontier.pop()
        for nxt, weights in successors(node):
            edges.append((node, weights, nxt))
            if nxt not in nodes:
                nodes.add(nxt)
                if len(nodes) > budget:
                    raise BudgetExceeded("equilibrium graph above node budget")
                frontier.append(nxt)
    return start, nodes, edges


def gamma_min_ne(game: Game, gamma, values: ValueTable | None = None):
    """Cost and witness outcome of a gamma-minimal Nash equilibrium.

    ``gamma`` weights each player's cost in the objective; all-ones yields a
    best (socially cheapest) equilibrium, all-minus-ones a worst one, whose
    social cost is the negated result.
    """
    gamma = tuple(gamma)
    if len(gamma) != game.n:
        raise SemanticsError("gamma must have one weight per player")
    if values is None:
        values = compute_values(game)
    start, nodes, edges = _explore_ne_graph(game, values)
    tgt_cfg = target_config(game)
    targets = [node for node in nodes if node[0] == tgt_cfg]
    result = shortest_path(
        start, nodes, edges,
        lambda w: sum(g * x for g, x in zip(gamma, w)),
        targets,
    )
    assert result is not None, (
        "equilibria always exist, so the target must be reachable"
    )
    cost, path = result
    configs = [start[0]] + [v[0] for _, _, v in path]
    witness = path_from_configs(game, configs)
    assert check_ne_outcome(game, witness, values), (
        "witness from the equilibrium graph must itself pass the outcome check"
    )
    return cost, witness


def constrained_ne(game: Game, gamma, bound: int, values: ValueTable | None = None):
    """Whether some Nash equilibrium has gamma-weighted cost <= bound."""
    cost, witness = gamma_min_ne(game, gamma, values)
    if cost <= bound:
        return True, cost, witness
    return False, cost, None


@dataclass(frozen=True)
class NEProfile:
    """Finite Nash-equilibrium strategy profile: a main path plus punishments.

    Players follow the main path; when a unilateral deviation by player j is
    observed, everyone else switches forever to the memoryless coalition
    strategy that forces j's value (on simultaneous deviations the least
    player index is punished).
    """

    game: Game
    main: OutcomePath
    values: ValueTable

    def play(self, deviations=None, max_steps: int | None = None):
        """Simulates the profile; ``deviations`` maps player index to a blind
        strategy (edge tuple) that the player follows instead.

        Returns per-player realized costs and the realized path.  Punishment
        can keep punishers away from the target; the simulation stops after
        ``max_steps`` (default: main length plus |V| * (n + 1)) and reports
        +inf for players still travelling.
        """
        game = self.game
        arena = game.arena
        scripts = {p: tuple(s) for p, s in (deviations or {}).items()}
        if max_steps is None:
            max_steps = len(self.main.steps) + len(arena.states) * (game.n + 1)
        loop = (arena.tgt, arena.tgt)
        config = initial_config(game)
        punished = None
        moves_list = []
        for step_no in range(max_steps):
            if config == target_config(game):
                break
            moves = []
            for p in range(game.n):
                if p in scripts:
                    script = scripts[p]
                    move = script[step_no] if step_no < len(script) else loop
                elif punished is None:
                    main_moves = (
                        self.main.steps[step_no][0]
                        if step_no < len(self.main.steps)
                        else (loop,) * game.n
                    )
                    move = main_moves[p]
                else:
                    move = None  # coalition move, filled in below
                moves.append(move)
            if punished is not None:
                moves = self._fill_punishment(config, punished, moves)
            moves = tuple(moves)
            weights, nxt = step(game, config, moves)
            moves_list.append(moves)
            if punished is None:
                expected = (
                    self.main.steps[step_no][2]
                    if step_no < len(self.main.steps)
                    else target_config(game)
                )
                if nxt != expected:
                    deviators = [
                        p for p in range(game.n) if nxt[p] != expected[p]
                    ]
                    punished = min(deviators)
            config = nxt
        costs, social, path = eval_path(game, moves_list)
        return costs, path

    def _fill_punishment(self, config, punished, moves):
        """Assigns coalition players to the stored worst-case distribution."""
        arena = self.game.arena
        num_states = len(arena.states)
        counts = [0] * num_states
        for p, state in enumerate(config):
            if p != punished:
                counts[state] += 1
        dist = dict(self.values.punish[(config[punished], tuple(counts))])
        filled = list(moves)
        for p in range(self.game.n):
            if filled[p] is not None:
                if p != punished:
                    # scripted coalition member: their move stands and
                    # consumes from the distribution when compatible
                    edge = filled[p]
                    if dist.get(edge, 0) > 0:
                        dist[edge] -= 1
                continue
            state = config[p]
            chosen = None
            for succ, _ in arena.out[state]:
                edge = (state, succ)
                if dist.get(edge, 0) > 0:
                    chosen = edge
                    dist[edge] -= 1
                    break
            if chosen is None:
                # distribution exhausted for this state (scripted players
                # consumed it); fall back to the first available edge
                succ, _ = arena.out[state][0]
                chosen = (state, succ)
            filled[p] = chosen
        return filled

    def to_json(self):
        arena = self.game.arena
        punish = []
        for (own, counts), dist in sorted(self.values.punish.items()):
            if own == arena.tgt and all(c == 0 for c in counts):
                continue
            punish.append(
                {
                    "player_state": arena.states[own],
                    "coalition": {
                        arena.states[v]: c for v, c in enumerate(counts) if c
                    },
                    "moves": [
                        [arena.states[u], arena.states[v], c]
                        for (u, v), c in sorted(dist.items())
                    ],
                }
            )
        return {"main": self.main.to_json(arena), "punishments": punish}


def synthesize_ne_profile(game: Game, path: OutcomePath,
                          values: ValueTable | None = None) -> NEProfile:
    """Builds the punishment-backed profile whose outcome is ``path``.

    Requires the path to pass :func:`check_ne_outcome`.
    """
    if values is None:
        values = compute_values(game)
    if not check_ne_outcome(game, path, values):
        raise SemanticsError("path is not a Nash-equilibrium outcome")
    return NEProfile(game=game, main=path, values=values)
