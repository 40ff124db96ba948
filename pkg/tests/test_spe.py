import pytest

from dyncong.arena import Game
from dyncong.dynamics import BlindProfile, play_profile
from dyncong.graphs import (
    INF,
    NEG_INF,
    dev_set,
    initial_config,
    path_from_configs,
    step,
    target_config,
)
from dyncong.ne import check_ne_outcome, compute_values
from dyncong.oracle import _all_moves
from dyncong.spe import (
    CounterState,
    check_spe_outcome,
    compute_lambda,
    constrained_spe,
    counter_step,
    gamma_min_spe,
    initial_counters,
    lambda_consistent_exists,
    reachable_graph,
    spe_exists,
    sup_cost,
)

from corpus import (
    chain_arena,
    diamond_arena,
    free_wait_arena,
    paid_wait_arena,
    shortcut_arena,
    threshold_arena,
    trivial_arena,
)


def cfg(arena, *names):
    return tuple(arena.index(s) for s in names)


def _mu0_labels(game):
    """Labels with no constraints: 0 for players already done, +inf else."""
    graph = reachable_graph(game)
    tgt = game.arena.tgt
    labels = {}
    for config in graph.configs:
        for nxt, _ in graph.successors(config):
            labels[(config, nxt)] = tuple(
                0 if config[i] == tgt else INF for i in range(game.n)
            )
    return labels, graph


# ---------------------------------------------------------------- counter ops


def test_counter_step_all_done(trivial):
    game = Game(trivial, 2)
    labels, _ = _mu0_labels(game)
    done = target_config(game)
    state = CounterState(done, (0, 0))
    nxt = counter_step(game, state, (done, done), labels)
    assert nxt == CounterState(done, (0, 0))


def test_counter_step_propagates_infinity(trivial):
    game = Game(trivial, 2)
    labels, _ = _mu0_labels(game)
    start = initial_config(game)
    state = CounterState(start, (INF, INF))
    nxt = counter_step(game, state, (start, target_config(game)), labels)
    assert nxt.counters == (INF, INF)


def test_counter_step_rejects_negative(trivial):
    game = Game(trivial, 2)
    start = initial_config(game)
    goal = target_config(game)
    labels = {(start, goal): (10, 10), (goal, goal): (0, 0)}
    # weights on the shared edge are (2, 2); a budget of 1 is not enough
    state = CounterState(start, (1, INF))
    assert counter_step(game, state, (start, goal), labels) is None


def test_counter_step_wrong_source(trivial):
    game = Game(trivial, 2)
    labels, _ = _mu0_labels(game)
    goal = target_config(game)
    state = CounterState(goal, (0, 0))
    with pytest.raises(Exception):
        counter_step(game, state, (initial_config(game), goal), labels)


# ------------------------------------------------------------- consistency


def test_consistent_exists_at_target(fig1_g2):
    labels, graph = _mu0_labels(fig1_g2)
    ok, witness = lambda_consistent_exists(
        fig1_g2, labels, target_config(fig1_g2), graph
    )
    assert ok and witness.steps == ()


def test_consistent_exists_unconstrained(fig1_g2):
    labels, graph = _mu0_labels(fig1_g2)
    ok, witness = lambda_consistent_exists(
        fig1_g2, labels, initial_config(fig1_g2), graph
    )
    assert ok
    assert witness.configs()[-1] == target_config(fig1_g2)


def test_consistent_exists_with_fixpoint_labels(fig1_g2):
    lam = compute_lambda(fig1_g2)
    ok, witness = lambda_consistent_exists(
        fig1_g2, lam.labels, initial_config(fig1_g2), lam.graph
    )
    assert ok
    assert sum(sum(w) for _, w, _ in witness.steps) <= 22


# ------------------------------------------------------------------ sup cost


def brute_sup(game, labels, start, player, max_len):
    """Max player cost over label-consistent bounded paths; None if none."""
    goal = target_config(game)
    best = [None]

    def consistent(configs):
        weights = []
        for cur, nxt in zip(configs, configs[1:]):
            w, _ = step(game, cur, tuple(zip(cur, nxt)))
            weights.append(w)
        suffix = [0] * game.n
        suffixes = [tuple(suffix)]
        for w in reversed(weights):
            suffix = [a + b for a, b in zip(suffix, w)]
            suffixes.append(tuple(suffix))
        suffixes.reverse()
        for k, (cur, nxt) in enumerate(zip(configs, configs[1:])):
            label = labels[(cur, nxt)]
            for i in range(game.n):
                if suffixes[k][i] > label[i]:
                    return None
        return sum(w[player] for w in weights)

    def walk(configs):
        if configs[-1] == goal:
            cost = consistent(configs)
            if cost is not None and (best[0] is None or cost > best[0]):
                best[0] = cost
            return
        if len(configs) - 1 == max_len:
            return
        for moves in _all_moves(game, configs[-1]):
            _, nxt = step(game, configs[-1], moves)
            walk(configs + [nxt])

    walk([start])
    return best[0]


def test_sup_zero_when_player_done(fig1, fig1_g2):
    labels, graph = _mu0_labels(fig1_g2)
    start = cfg(fig1, "tgt", "v3")
    assert sup_cost(fig1_g2, labels, start, 0, graph) == 0


def test_sup_infinite_on_paid_cycle():
    game = Game(paid_wait_arena(), 2)
    labels, graph = _mu0_labels(game)
    assert sup_cost(game, labels, initial_config(game), 0, graph) == INF


def test_sup_finite_with_free_cycle():
    # waiting is free, so the worst consistent outcome is the joint crossing
    game = Game(free_wait_arena(), 2)
    labels, graph = _mu0_labels(game)
    assert sup_cost(game, labels, initial_config(game), 0, graph) == 6


def test_sup_matches_enumeration_unconstrained(fig1, fig1_g2):
    labels, graph = _mu0_labels(fig1_g2)
    for start in graph.configs:
        for player in range(fig1_g2.n):
            got = sup_cost(fig1_g2, labels, start, player, graph)
            want = brute_sup(fig1_g2, labels, start, player, 6)
            assert got == want, (start, player)


def test_sup_matches_enumeration_fixpoint_labels(fig1, fig1_g2):
    lam = compute_lambda(fig1_g2)
    for start in lam.graph.configs:
        for player in range(fig1_g2.n):
            got = sup_cost(fig1_g2, lam.labels, start, player, lam.graph)
            want = brute_sup(fig1_g2, lam.labels, start, player, 6)
            assert got == want, (start, player)


# ------------------------------------------------------------ label fixpoint


def test_lambda_base_case(fig1_g2):
    lam = compute_lambda(fig1_g2)
    goal = target_config(fig1_g2)
    assert lam.labels[(goal, goal)] == (0, 0)


def test_lambda_two_state_single_player(trivial):
    game = Game(trivial, 1)
    lam = compute_lambda(game)
    start = initial_config(game)
    goal = target_config(game)
    assert lam.labels[(start, goal)] == (1,)  # the edge cost at load one


def test_lambda_values_bounded(corpus):
    for name, game in corpus:
        lam = compute_lambda(game)
        for values in lam.labels.values():
            for v in values:
                assert v == NEG_INF or (0 <= v <= lam.ceiling), name


# -------------------------------------------------------------- spe queries


def test_spe_exists_fig1(fig1_g2):
    ok, witness = spe_exists(fig1_g2)
    assert ok
    assert sum(sum(w) for _, w, _ in witness.steps) == 22


def test_spe_exists_trivial():
    game = Game(trivial_arena(), 3)
    ok, witness = spe_exists(game)
    assert ok


def test_spe_exists_fig5(fig5_g3):
    # The machinery decides the 36-cost equilibrium outcome is not
    # subgame-perfect: the cheapest SPE outcome costs 37.
    lam = compute_lambda(fig5_g3)
    ok, _ = spe_exists(fig5_g3, lam)
    assert ok
    cost, witness = gamma_min_spe(fig5_g3, (1, 1, 1), lam)
    assert cost == 37


def test_check_spe_fig1_examples(fig1_g2, fig1_paths):
    lam = compute_lambda(fig1_g2)
    _, _, good = play_profile(
        fig1_g2, BlindProfile((fig1_paths["pi1"], fig1_paths["pi2"]))
    )
    assert check_spe_outcome(fig1_g2, good, lam)
    _, _, bad = play_profile(
        fig1_g2, BlindProfile((fig1_paths["pi1"], fig1_paths["pi1"]))
    )
    assert not check_spe_outcome(fig1_g2, bad, lam)


def test_check_spe_trivial_crossing():
    game = Game(trivial_arena(), 2)
    path = path_from_configs(
        game, [initial_config(game), target_config(game)]
    )
    assert check_spe_outcome(game, path)


def test_gamma_min_spe_fig1(fig1_g2):
    lam = compute_lambda(fig1_g2)
    cost, witness = gamma_min_spe(fig1_g2, (1, 1), lam)
    assert cost <= 22
    assert check_spe_outcome(fig1_g2, witness, lam)
    cost, _ = gamma_min_spe(fig1_g2, (0, 0), lam)
    assert cost == 0
    worst, _ = gamma_min_spe(fig1_g2, (-1, -1), lam)
    assert worst >= -32
    ok, cost, _ = constrained_spe(fig1_g2, (1, 1), 22, lam)
    assert ok


def _bounded_outcomes(game, max_steps):
    goal = target_config(game)
    found = []

    def walk(configs):
        if configs[-1] == goal:
            found.append(tuple(configs))
            return
        if len(configs) - 1 == max_steps:
            return
        for moves in _all_moves(game, configs[-1]):
            _, nxt = step(game, configs[-1], moves)
            walk(configs + [nxt])

    walk([initial_config(game)])
    return found


def test_counter_monotonicity_and_zero_counters(corpus):
    from dyncong.spe import CounterExploration

    for name, game in corpus:
        lam = compute_lambda(game)
        exploration = CounterExploration(
            game, lam.graph, lam.labels, [initial_config(game)]
        )
        tgt = game.arena.tgt
        for node, succs in exploration.adjacency.items():
            config, counters = node
            for weights, (nxt, updated) in succs:
                for i in range(game.n):
                    if counters[i] != INF:
                        assert updated[i] <= counters[i], name
                    if counters[i] == 0 and config[i] != tgt:
                        # exhausted budget: no further payments possible
                        assert weights[i] == 0, name


def test_reachable_counter_states_within_bound(corpus):
    from dyncong.costfn import kappa
    from dyncong.spe import CounterExploration

    for name, game in corpus:
        lam = compute_lambda(game)
        exploration = CounterExploration(
            game, lam.graph, lam.labels, [initial_config(game)]
        )
        states = len(game.arena.states)
        cap = (states ** game.n) * (
            game.n * states ** game.n * max(kappa(game), 1)
        ) ** states
        assert len(exploration.nodes) <= cap, name


def test_gamma_min_spe_is_deterministic(fig1_g2):
    lam = compute_lambda(fig1_g2)
    first = gamma_min_spe(fig1_g2, (1, 1), lam)
    second = gamma_min_spe(fig1_g2, (1, 1), lam)
    assert first == second


def test_consistency_check_equals_counter_lifting(corpus):
    # A path satisfies the per-suffix label check exactly when the greedy
    # counter propagation stays nonnegative all the way to the target.
    for name, game in corpus:
        lam = compute_lambda(game)
        for configs in _bounded_outcomes(game, 5):
            path = path_from_configs(game, list(configs))
            state = CounterState(configs[0], initial_counters(game, configs[0]))
            liftable = True
            for cur, nxt in zip(configs, configs[1:]):
                state = counter_step(game, state, (cur, nxt), lam.labels)
                if state is None:
                    liftable = False
                    break
            assert liftable == check_spe_outcome(game, path, lam), (name, configs)


def test_spe_outcomes_are_ne_outcomes(corpus):
    for name, game in corpus:
        lam = compute_lambda(game)
        values = compute_values(game)
        for configs in _bounded_outcomes(game, 5):
            path = path_from_configs(game, list(configs))
            if check_spe_outcome(game, path, lam):
                assert check_ne_outcome(game, path, values), (name, configs)


# -------------------------------------------------- one-shot deviation oracle


def oneshot_stable_sets(game, horizon):
    """Greatest fixpoint of the one-shot-deviation stability operator over
    bounded path sets, per configuration.  Independent of the label
    machinery: pure enumeration.
    """
    graph = reachable_graph(game)
    goal = target_config(game)

    def paths_from(start):
        out = []

        def walk(configs):
            if configs[-1] == goal:
                out.append(tuple(configs))
                return
            if len(configs) - 1 == horizon:
                return
            for nxt, _ in graph.successors(configs[-1]):
                walk(configs + [nxt])

        walk([start])
        return set(out)

    sets = {c: paths_from(c) for c in graph.configs}

    def player_cost(configs, player):
        total = 0
        for cur, nxt in zip(configs, configs[1:]):
            w, _ = step(game, cur, tuple(zip(cur, nxt)))
            total += w[player]
        return total

    changed = True
    while changed:
        changed = False
        for c in graph.configs:
            keep = set()
            for configs in sets[c]:
                ok = True
                for l in range(len(configs) - 1):
                    cur = configs[l]
                    if any(
                        not sets[succ] for succ, _ in graph.successors(cur)
                    ):
                        ok = False
                        break
                    for i in range(game.n):
                        suffix = player_cost(configs[l:], i)
                        for dev, dev_cost in dev_set(
                            game, cur, configs[l + 1], i
                        ):
                            worst = max(
                                player_cost(rho, i) for rho in sets[dev]
                            )
                            if suffix > dev_cost + worst:
                                ok = False
                                break
                        if not ok:
                            break
                    if not ok:
                        break
                if ok:
                    keep.add(configs)
            if keep != sets[c]:
                sets[c] = keep
                changed = True
    return sets


@pytest.mark.parametrize(
    "arena_maker",
    [trivial_arena, diamond_arena, shortcut_arena, threshold_arena, chain_arena],
)
def test_label_machinery_matches_oneshot_oracle(arena_maker):
    game = Game(arena_maker(), 2)
    horizon = 6
    stable = oneshot_stable_sets(game, horizon)[initial_config(game)]
    lam = compute_lambda(game)
    accepted = set()
    for configs in _bounded_outcomes(game, horizon):
        path = path_from_configs(game, list(configs))
        if check_spe_outcome(game, path, lam):
            accepted.add(configs)
    assert accepted == stable


@pytest.mark.parametrize(
    "arena_maker",
    [trivial_arena, diamond_arena, shortcut_arena, threshold_arena, chain_arena],
)
def test_gamma_spe_matches_oneshot_extremes(arena_maker):
    game = Game(arena_maker(), 2)
    stable = oneshot_stable_sets(game, 6)[initial_config(game)]
    assert stable
    socials = []
    for configs in stable:
        total = 0
        for cur, nxt in zip(configs, configs[1:]):
            w, _ = step(game, cur, tuple(zip(cur, nxt)))
            total += sum(w)
        socials.append(total)
    lam = compute_lambda(game)
    best, _ = gamma_min_spe(game, (1, 1), lam)
    worst = -gamma_min_spe(game, (-1, -1), lam)[0]
    assert best == min(socials)
    assert worst == max(socials)


def _is_dag(arena):
    visiting, done = set(), set()

    def visit(state):
        if state in done:
            return True
        if state in visiting:
            return False
        visiting.add(state)
        for succ, _ in arena.out[state]:
            if (state, succ) == (arena.tgt, arena.tgt):
                continue
            if not visit(succ):
                return False
        visiting.discard(state)
        done.add(state)
        return True

    return all(visit(s) for s in range(len(arena.states)))


def test_spe_machinery_on_random_arenas():
    import random

    from corpus import random_arena
    from dyncong.ne import check_ne_outcome as ne_check

    rng = random.Random(31)
    checked = 0
    while checked < 12:
        arena = random_arena(rng)
        game = Game(arena, 2)
        lam = compute_lambda(game)  # shrinkage and bounds asserted inline
        ok, witness = spe_exists(game, lam)
        if ok:
            assert check_spe_outcome(game, witness, lam)
            assert ne_check(game, witness)
        if _is_dag(arena):
            horizon = len(arena.states)
            stable = oneshot_stable_sets(game, horizon)[initial_config(game)]
            accepted = set()
            for configs in _bounded_outcomes(game, horizon):
                path = path_from_configs(game, list(configs))
                if check_spe_outcome(game, path, lam):
                    accepted.add(configs)
            assert accepted == stable
            assert ok == bool(stable)
        checked += 1


def test_sup_cost_on_random_dag_arenas():
    import random

    from corpus import random_arena

    rng = random.Random(57)
    checked = 0
    while checked < 8:
        arena = random_arena(rng)
        if not _is_dag(arena):
            continue
        game = Game(arena, 2)
        labels, graph = _mu0_labels(game)
        for start in graph.configs:
            for player in range(game.n):
                got = sup_cost(game, labels, start, player, graph)
                want = brute_sup(game, labels, start, player, len(arena.states))
                assert got == want, (start, player)
        checked += 1
