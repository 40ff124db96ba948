"""Subgame-perfect equilibria via per-edge labels and counter graphs.

The set of SPE outcomes is exactly the set of paths that are *consistent*
with a family of edge labels: along the path, every player's suffix cost must
stay below the label of the edge being taken.  The labels are computed by a
nested fixpoint.  Configurations are stratified by how many players already
sit on the target (that number never decreases); within one stratum, labels
start at "no constraint" and shrink monotonically: the new label of an edge is
the cheapest cost the deviating player could secure against the *worst*
continuation that is still consistent with the previous labels.  Worst
consistent continuations are evaluated on a counter graph, where each player
carries a residual budget that tightens with every label passed.

A label of -inf marks an edge whose source has a successor with no consistent
continuation at all; such an edge can never be used.  All finite labels at the
fixpoint are bounded by ``|V| * kappa``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arena import Game
from .costfn import kappa
from .graphs import (
    INF,
    NEG_INF,
    BudgetExceeded,
    Config,
    OutcomePath,
    ReachableGraph,
    SemanticsError,
    dev_set,
    initial_config,
    node_budget,
    path_from_configs,
    reachable_graph,
    shortest_path,
    step,
    target_config,
)

EdgeKey = tuple[Config, Config]
LabelTable = dict[EdgeKey, tuple]  # per-edge tuple of per-player labels


@dataclass(frozen=True)
class CounterState:
    config: Config
    counters: tuple


def region(game: Game, config: Config) -> int:
    """Number of players already on the target; never decreases along play."""
    tgt = game.arena.tgt
    return sum(1 for s in config if s == tgt)


def initial_counters(game: Game, config: Config) -> tuple:
    tgt = game.arena.tgt
    return tuple(0 if s == tgt else INF for s in config)


def counter_step(game: Game, state: CounterState, edge, labels: LabelTable):
    """One counter-graph move; None when a counter would turn negative.

    The source player's counter is zeroed once they sit on the target;
    otherwise it becomes the minimum of the propagated budget and the edge's
    label, both reduced by the weight just paid.  A -inf label poisons the
    edge.
    """
    frm, nxt = edge
    if state.config != frm:
        raise SemanticsError("counter state and edge source differ")
    weights, result = step(game, frm, tuple(zip(frm, nxt)))
    assert result == nxt
    label = labels[(frm, nxt)]
    tgt = game.arena.tgt
    counters = []
    for i in range(game.n):
        if frm[i] == tgt:
            counters.append(0)
            continue
        value = min(state.counters[i], label[i]) - weights[i]
        if value < 0:
            return None
        counters.append(value)
    return CounterState(config=nxt, counters=tuple(counters))


class CounterExploration:
    """Reachable part of a counter graph from a set of start configurations.

    Shares one forward exploration, one backward (coaccessibility) pass and
    one SCC decomposition across all queries against the same label snapshot;
    per player it then answers "is there a valid path" and "what is the worst
    consistent cost" questions.
    """

    def __init__(self, game: Game, graph: ReachableGraph, labels: LabelTable,
                 starts, counter_bound=None):
        self.game = game
        self.graph = graph
        self.labels = labels
        tgt_cfg = target_config(game)
        budget = node_budget()
        self.start_nodes = {
            c: (c, initial_counters(game, c)) for c in starts
        }
        adjacency: dict = {}
        seen = set(self.start_nodes.values())
        frontier = list(seen)
        tgt = game.arena.tgt
        while frontier:
            node = frontier.pop()
            config, counters = node
            succs = []
            for nxt, weights in graph.successors(config):
                label = labels[(config, nxt)]
                updated = []
                ok = True
                for i in range(game.n):
                    if config[i] == tgt:
                        updated.append(0)
                        continue
                    value = min(counters[i], label[i]) - weights[i]
                    if value < 0:
                        ok = False
                        break
                    if counter_bound is not None and value != INF:
                        assert value <= counter_bound, (
                            "counter exceeded its stabilisation bound"
                        )
                    updated.append(value)
                if not ok:
                    continue
                succs.append((weights, (nxt, tuple(updated))))
            adjacency[node] = succs
            for _, nxt_node in succs:
                if nxt_node not in seen:
                    seen.add(nxt_node)
                    if len(seen) > budget:
                        raise BudgetExceeded("counter graph above node budget")
                    frontier.append(nxt_node)
        self.nodes = seen
        self.adjacency = adjacency

        # Coaccessibility: nodes from which some (c_tgt, b) is reachable.
        incoming: dict = {node: [] for node in seen}
        for node, succs in adjacency.items():
            for _, nxt_node in succs:
                incoming[nxt_node].append(node)
        targets = {node for node in seen if node[0] == tgt_cfg}
        coaccessible = set(targets)
        stack = list(targets)
        while stack:
            node = stack.pop()
            for prev in incoming[node]:
                if prev not in coaccessible:
                    coaccessible.add(prev)
                    stack.append(prev)
        self.coaccessible = coaccessible
        self.targets = targets
        self._sup_cache: dict[int, dict] = {}
        self._components = None

    def valid_exists(self, config: Config) -> bool:
        """Whether the counter graph has a valid path from this start."""
        node = self.start_nodes[config]
        return node in self.coaccessible

    def witness(self, config: Config):
        """Configurations of a cheapest (by social cost) valid path from the
        given start; None when no valid path exists."""
        start = self.start_nodes[config]
        if start not in self.coaccessible:
            return None
        if start in self.targets:
            return [config]
        edges = [
            (node, weights, succ)
            for node, succs in self.adjacency.items()
            for weights, succ in succs
            if node in self.coaccessible and succ in self.coaccessible
        ]
        found = shortest_path(
            start, self.coaccessible, edges, sum, self.targets
        )
        assert found is not None, "coaccessible start must reach a target"
        _, chain = found
        return [start[0]] + [succ[0] for _, _, succ in chain]

    def _condense(self):
        """Tarjan SCCs (iterative) over the coaccessible subgraph, returned in
        reverse topological order of the condensation."""
        if self._components is not None:
            return self._components
        index: dict = {}
        low: dict = {}
        on_stack: set = set()
        stack: list = []
        comp_of: dict = {}
        components: list[list] = []
        counter = [0]

        for root in self.coaccessible:
            if root in index:
                continue
            work = [(root, iter(self._co_succs(root)))]
            index[root] = low[root] = counter[0]
            counter[0] += 1
            stack.append(root)
            on_stack.add(root)
            while work:
                node, it = work[-1]
                advanced = False
                for succ in it:
                    if succ not in index:
                        index[succ] = low[succ] = counter[0]
                        counter[0] += 1
                        stack.append(succ)
                        on_stack.add(succ)
                        work.append((succ, iter(self._co_succs(succ))))
                        advanced = True
                        break
                    if succ in on_stack:
                        low[node] = min(low[node], index[succ])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        member = stack.pop()
                        on_stack.discard(member)
                        comp_of[member] = len(components)
                        comp.append(member)
                        if member == node:
                            break
                    components.append(comp)
        self._components = (components, comp_of)
        return self._components

    def _co_succs(self, node):
        return [
            succ for _, succ in self.adjacency[node] if succ in self.coaccessible
        ]

    def sup(self, config: Config, player: int):
        """Worst cost of ``player`` over consistent continuations from config.

        None when no valid path exists; +inf when a reachable cycle keeps the
        player's counter at +inf while charging them a positive amount (such
        a cycle can be pumped arbitrarily often and still completed); the
        exact maximum otherwise, by longest path over the condensation, where
        in-component edges are free for the player (a positive-weight
        in-component edge would itself be pumpable).
        """
        start = self.start_nodes[config]
        if start not in self.coaccessible:
            return None
        cache = self._sup_cache.get(player)
        if cache is None:
            cache = self._player_sup(player)
            self._sup_cache[player] = cache
        return cache[start]

    def _player_sup(self, player: int):
        components, comp_of = self._condense()
        comp_sup = []
        for comp in components:  # reverse topological order: succs first
            members = set(comp)
            value = 0 if any(node in self.targets for node in comp) else NEG_INF
            pump = False
            for node in comp:
                for weights, succ in self.adjacency[node]:
                    if succ not in self.coaccessible:
                        continue
                    w = weights[player]
                    if succ in members:
                        if w > 0:
                            pump = True
                    else:
                        candidate = w + comp_sup[comp_of[succ]]
                        if candidate > value:
                            value = candidate
            comp_sup.append(INF if pump else value)
        result = {}
        for node in self.coaccessible:
            value = comp_sup[comp_of[node]]
            assert value >= 0, "coaccessible node must reach a target"
            result[node] = value
        return result


def lambda_consistent_exists(game: Game, labels: LabelTable, config: Config,
                             graph: ReachableGraph | None = None):
    """Whether a label-consistent path from ``config`` to all-target exists;
    returns the projected witness path as well."""
    if graph is None:
        graph = reachable_graph(game)
    exploration = CounterExploration(game, graph, labels, [config])
    if not exploration.valid_exists(config):
        return False, None
    configs = exploration.witness(config)
    return True, path_from_configs(game, configs)


def sup_cost(game: Game, labels: LabelTable, config: Config, player: int,
             graph: ReachableGraph | None = None):
    """Supremum of the player's cost over label-consistent paths from
    ``config``; None when no such path exists."""
    if graph is None:
        graph = reachable_graph(game)
    exploration = CounterExploration(game, graph, labels, [config])
    return exploration.sup(config, player)


@dataclass
class LambdaResult:
    """Fixpoint labels plus the per-region iteration counts, for the
    stabilisation-bound checks."""

    labels: LabelTable
    graph: ReachableGraph
    region_iterations: dict[int, int] = field(default_factory=dict)
    ceiling: int = 0


def _mu_bound(game: Game, k: int, kap: int) -> int:
    """Growth bound for finite label values after k refinement steps."""
    states = len(game.arena.states)
    big_c = states ** game.n
    n = game.n
    return (n * big_c + 2 * states) * sum(
        (n * big_c) ** (l - 1) * kap ** l for l in range(1, k + 1)
    )


def compute_lambda(game: Game) -> LambdaResult:
    """Computes the SPE edge labels by the stratified fixpoint.

    Strata are processed from all-players-done downward.  Within a stratum,
    every refinement recomputes all of its edges from the previous snapshot
    (Jacobi style), so the result matches the definitional fixpoint; labels
    of higher strata stay fixed.  Refinement must shrink labels pointwise and
    stabilise within ``|V| (1 + n kappa |E|^n)`` rounds, and the final finite
    labels must not exceed ``|V| * kappa``; violations raise.
    """
    arena = game.arena
    graph = reachable_graph(game)
    kap = kappa(game)
    ceiling = len(arena.states) * kap
    tgt = arena.tgt
    n = game.n

    by_region: dict[int, list[EdgeKey]] = {}
    for config in graph.configs:
        j = region(game, config)
        for nxt, _ in graph.successors(config):
            by_region.setdefault(j, []).append((config, nxt))

    labels: LabelTable = {}
    result = LambdaResult(labels=labels, graph=graph, ceiling=ceiling)

    tgt_cfg = target_config(game)
    if region(game, tgt_cfg) == n:  # always true; keeps the base case visible
        labels[(tgt_cfg, tgt_cfg)] = (0,) * n

    iteration_cap = len(arena.states) * (
        1 + n * kap * len(arena.edges) ** n
    )

    for j in range(n - 1, -1, -1):
        edges = by_region.get(j, [])
        if not edges:
            result.region_iterations[j] = 0
            continue
        for (config, nxt) in edges:
            labels[(config, nxt)] = tuple(
                0 if config[i] == tgt else INF for i in range(n)
            )
        iterations = 0
        while True:
            iterations += 1
            assert iterations <= iteration_cap, (
                "label refinement missed its stabilisation bound"
            )
            snapshot = dict(labels)
            starts = set()
            for (config, _) in edges:
                for succ, _ in graph.successors(config):
                    starts.add(succ)
            bound = max(ceiling, _mu_bound(game, iterations, kap))
            exploration = CounterExploration(
                game, graph, snapshot, starts, counter_bound=bound
            )
            changed = False
            for (config, nxt) in edges:
                dead = any(
                    not exploration.valid_exists(succ)
                    for succ, _ in graph.successors(config)
                )
                values = []
                for i in range(n):
                    if config[i] == tgt:
                        values.append(0)
                        continue
                    if dead:
                        values.append(NEG_INF)
                        continue
                    best = INF
                    for dev, dev_cost in dev_set(game, config, nxt, i):
                        worst = exploration.sup(dev, i)
                        assert worst is not None, (
                            "live source implies consistent continuations "
                            "from every deviation"
                        )
                        candidate = dev_cost + worst
                        if candidate < best:
                            best = candidate
                    values.append(best)
                new = tuple(values)
                old = snapshot[(config, nxt)]
                for a, b in zip(new, old):
                    assert a <= b, "labels must shrink monotonically"
                if new != old:
                    changed = True
                for v in new:
                    if v not in (INF, NEG_INF):
                        assert v <= bound, "label exceeded its growth bound"
                labels[(config, nxt)] = new
            if not changed:
                break
        result.region_iterations[j] = iterations
        for (config, nxt) in edges:
            for v in labels[(config, nxt)]:
                assert v != INF, "stabilised labels are finite or -inf"
                if v != NEG_INF:
                    assert v <= ceiling, "stabilised label above |V| * kappa"
    return result


def check_spe_outcome(game: Game, path: OutcomePath,
                      lam: LambdaResult | None = None) -> bool:
    """Whether the path is the outcome of a subgame-perfect equilibrium:
    every suffix cost must respect the fixpoint label of the edge taken."""
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
    if lam is None:
        lam = compute_lambda(game)
    configs = path.configs()
    suffix = [0] * game.n
    suffixes = [tuple(suffix)]
    for _, weights, _ in reversed(path.steps):
        suffix = [s + w for s, w in zip(suffix, weights)]
        suffixes.append(tuple(suffix))
    suffixes.reverse()
    for l in range(len(path.steps)):
        label = lam.labels[(configs[l], configs[l + 1])]
        for i in range(game.n):
            if suffixes[l][i] > label[i]:
                return False
    return True


def spe_exists(game: Game, lam: LambdaResult | None = None):
    """Whether the game admits any subgame-perfect equilibrium; with a
    witness outcome when it does."""
    if lam is None:
        lam = compute_lambda(game)
    ok, witness = lambda_consistent_exists(
        game, lam.labels, initial_config(game), lam.graph
    )
    if not ok:
        return False, None
    assert check_spe_outcome(game, witness, lam)
    return True, witness


def gamma_min_spe(game: Game, gamma, lam: LambdaResult | None = None):
    """Cost and witness of a gamma-minimal SPE outcome, or None when no SPE
    exists.  The search runs over the fixpoint counter graph with each step
    weighed by gamma dot w."""
    gamma = tuple(gamma)
    if len(gamma) != game.n:
        raise SemanticsError("gamma must have one weight per player")
    if lam is None:
        lam = compute_lambda(game)
    start_cfg = initial_config(game)
    exploration = CounterExploration(game, lam.graph, lam.labels, [start_cfg])
    start = exploration.start_nodes[start_cfg]
    if start not in exploration.coaccessible:
        return None
    edges = [
        (node, weights, succ)
        for node, succs in exploration.adjacency.items()
        for weights, succ in succs
        if node in exploration.coaccessible and succ in exploration.coaccessible
    ]
    found = shortest_path(
        start,
        exploration.coaccessible,
        edges,
        lambda w: sum(g * x for g, x in zip(gamma, w)),
        exploration.targets,
    )
    assert found is not None, "coaccessible start must reach a target"
    cost, chain = found
    configs = [start[0]] + [succ[0] for _, _, succ in chain]
    witness = path_from_configs(game, configs)
    assert check_spe_outcome(game, witness, lam), (
        "gamma-optimal witness must itself be label-consistent"
    )
    return cost, witness


def constrained_spe(game: Game, gamma, bound: int,
                    lam: LambdaResult | None = None):
    """Whether some SPE has gamma-weighted cost <= bound."""
    found = gamma_min_spe(game, gamma, lam)
    if found is None:
        return False, None, None
    cost, witness = found
    return cost <= bound, cost, witness
