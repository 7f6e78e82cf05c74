import itertools

import numpy as np
import pytest

from nsgsolver.br_policy import BrConfig
from nsgsolver.evaluation import (EvalReport, PolicyHandle,
                                  exact_best_response_goofspiel,
                                  exact_best_response_nsg, evaluate,
                                  greedy_handle, greedy_policy,
                                  train_br_attacker, uniform_handle,
                                  uniform_policy)
from nsgsolver.goofspiel import (GoofConfig, Mode, goof_step,
                                 initial_goof_state, infostate_key,
                                 legal_single_actions, legal_team_actions)
from nsgsolver.graph import Graph, bfs_distances
from nsgsolver.nsg_env import (NsgConfig, NsgState, initial_state,
                               legal_defender_actions)


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


TRIANGLE = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


class TestBaselines:
    def test_uniform(self):
        assert np.allclose(uniform_policy(None, [1, 2, 3, 4]), 0.25)
        assert np.allclose(uniform_policy(None, [7]), 1.0)
        with pytest.raises(ValueError):
            uniform_policy(None, [])

    def test_greedy_path(self):
        g = path_graph(4)
        st = NsgState((3,), (0,), 0)
        p = greedy_policy(st, g)
        # resource at 0 has the single neighbor 1
        assert np.allclose(p, [1.0])

    def test_greedy_adjacent_moves_onto_attacker(self):
        g = path_graph(3)
        st = NsgState((2,), (1,), 0)
        p = greedy_policy(st, g)  # neighbors of 1 are [0, 2]; 2 is the attacker
        assert np.allclose(p, [0.0, 1.0])

    def test_greedy_cycle_tie(self):
        g = cycle_graph(4)
        st = NsgState((2,), (0,), 0)
        p = greedy_policy(st, g)  # neighbors [1, 3] both at distance 1 from 2
        assert np.allclose(p, [0.5, 0.5])

    def test_greedy_never_increases_distance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(5, 12))
            edges = [(i, i + 1) for i in range(n - 1)]
            for _ in range(n):
                a, b = rng.integers(n, size=2)
                if a != b:
                    edges.append((min(a, b), max(a, b)))
            g = Graph.from_edges(n, edges)
            att = int(rng.integers(n))
            loc = int(rng.integers(n))
            if loc == att:  # co-location is terminal; greedy is undefined there
                continue
            st = NsgState((att,), (loc,), 0)
            p = greedy_policy(st, g)
            dist = bfs_distances(g, att)
            for nbr, prob in zip(g.adjacency[loc], p):
                if prob > 0:
                    assert dist[nbr] <= dist[loc]

    def test_greedy_joint_is_product(self):
        g = cycle_graph(4)
        st = NsgState((2,), (0, 0), 0)
        p = greedy_policy(st, g)
        assert np.allclose(p, [0.25, 0.25, 0.25, 0.25])


class TestEvaluate:
    def test_forced_timeout_mean_one(self):
        # scripted attacker dawdles at the far end of a path: every episode
        # times out, so the mean is exactly 1 with a zero interval
        g = path_graph(5)
        cfg = NsgConfig(graph=g, horizon=4, num_resources=1, sources=(4,),
                        targets=(0,), defender_init=(1,))
        def att_fn(st, legal):
            want = 3 if st.attacker_node == 4 else 4
            p = np.zeros(len(legal))
            p[legal.index(want)] = 1.0
            return p
        attacker = PolicyHandle("Scripted", att_fn)
        def def_fn(st, legal):
            want = (0,) if st.defender_locations[0] == 1 else (1,)
            p = np.zeros(len(legal))
            p[legal.index(want)] = 1.0
            return p
        defender = PolicyHandle("Scripted", def_fn)
        rep = evaluate(defender, attacker, cfg, 50, seed=1)
        assert rep.mean == 1.0
        assert rep.ci95 == 0.0
        assert rep.outcome_counts == {"timeout": 50}

    def test_counts_sum_to_n(self):
        cfg = NsgConfig(graph=TRIANGLE, horizon=2, num_resources=1,
                        sources=(0,), targets=(2,), defender_init=(1,))
        rep = evaluate(uniform_handle(), uniform_handle(), cfg, 200, seed=2)
        assert sum(rep.outcome_counts.values()) == 200

    def test_uniform_vs_uniform_matches_enumeration(self):
        # triangle, source 0, target 2, horizon 2, defender at 1:
        # exact defender utility enumerates to 0.5625
        cfg = NsgConfig(graph=TRIANGLE, horizon=2, num_resources=1,
                        sources=(0,), targets=(2,), defender_init=(1,))
        rep = evaluate(uniform_handle(), uniform_handle(), cfg, 4000, seed=3)
        assert abs(rep.mean - 0.5625) < 3 * rep.ci95
        assert abs(rep.ci95 - 1.96 * np.sqrt(rep.mean * (1 - rep.mean) / 4000)) < 1e-12


class TestTrainBrAttacker:
    def test_forced_outcome_reports_one(self):
        # defender starts on the attacker's source: immediate capture every
        # episode, utility 1 regardless of training
        g = path_graph(5)
        cfg = NsgConfig(graph=g, horizon=4, num_resources=1, sources=(4,),
                        targets=(0,), defender_init=(4,))
        emb = np.random.default_rng(0).normal(size=(5, 4)).astype(np.float32)
        _, rep, _ = train_br_attacker(
            uniform_handle(), cfg, emb, seed=0, budget=50,
            br_config=BrConfig(replay_capacity=500, batch_size=8),
            eval_every=25, eval_episodes=10, final_episodes=40)
        assert rep.mean == 1.0
        assert rep.outcome_counts == {"caught": 40}


def brute_force_single_br(config, team_fn):
    """Oracle: enumerate the single player's pure strategies and evaluate each
    exactly against the fixed stochastic team policy."""
    infosets = {}

    def collect(state):
        if state.terminal:
            return
        key = infostate_key(state, "single")
        infosets.setdefault(key, legal_single_actions(state))
        for t in legal_team_actions(state, config):
            for a in legal_single_actions(state):
                nxt, util = goof_step(state, t, a, config)
                if util is None:
                    collect(nxt)

    def value(table, state, p):
        if state.terminal:
            return 0.0
        a = table[infostate_key(state, "single")]
        legal_t = legal_team_actions(state, config)
        probs = team_fn(state, legal_t)
        total = 0.0
        for t, q in zip(legal_t, probs):
            if q == 0:
                continue
            nxt, util = goof_step(state, t, a, config)
            if util is not None:
                total += p * q * util[1]
            else:
                total += value(table, nxt, p * q)
        return total

    init = initial_goof_state(config)
    collect(init)
    keys = list(infosets)
    best = -2.0
    for combo in itertools.product(*[infosets[k] for k in keys]):
        best = max(best, value(dict(zip(keys, combo)), init, 1.0))
    return best


class TestExactBrGoofspiel:
    @pytest.mark.parametrize("k", [2, 3])
    @pytest.mark.parametrize("mode", [Mode.MAX, Mode.AVERAGE])
    def test_matches_pure_strategy_enumeration(self, k, mode):
        cfg = GoofConfig(k=k, n=1, mode=mode)
        v, _ = exact_best_response_goofspiel(uniform_policy, cfg, "single")
        assert abs(v - brute_force_single_br(cfg, uniform_policy)) < 1e-12

    def test_dominated_opponent_fully_exploited(self):
        # a single player that always bids its lowest remaining card ties
        # every round against a mirroring team: the team BR wins outright
        cfg = GoofConfig(k=2, n=1, mode=Mode.MAX)

        def lowest(state, legal):
            p = np.zeros(len(legal))
            p[int(np.argmin(legal))] = 1.0
            return p

        v, _ = exact_best_response_goofspiel(lowest, cfg, "team")
        assert v == 1.0

    def test_br_beats_sampled_policies(self):
        cfg = GoofConfig(k=3, n=1, mode=Mode.MAX)
        v, _ = exact_best_response_goofspiel(uniform_policy, cfg, "single")
        rng = np.random.default_rng(4)
        for _ in range(100):
            # random stationary single policy: value must not exceed the BR's
            weights = {}

            def rand_policy_value(state, p):
                if state.terminal:
                    return 0.0
                legal_s = legal_single_actions(state)
                key = infostate_key(state, "single")
                if key not in weights:
                    w = rng.random(len(legal_s)) + 1e-9
                    weights[key] = w / w.sum()
                total = 0.0
                legal_t = legal_team_actions(state, cfg)
                for a, pa in zip(legal_s, weights[key]):
                    for t in legal_t:
                        nxt, util = goof_step(state, t, a, cfg)
                        w = p * pa / len(legal_t)
                        if util is not None:
                            total += w * util[1]
                        else:
                            total += rand_policy_value(nxt, w)
                return total

            val = rand_policy_value(initial_goof_state(cfg), 1.0)
            assert val <= v + 1e-9

    def test_weak_duality_k2(self):
        # BR of the team against the single player's BR-vs-uniform policy is
        # at least -(that BR's value).  At k=2 the single player's info view
        # (remaining, outcomes) determines its full history, so the returned
        # policy can be replayed as a queryable opponent.
        cfg = GoofConfig(k=2, n=1, mode=Mode.MAX)
        v1, pol = exact_best_response_goofspiel(uniform_policy, cfg, "single")
        by_view = {}
        for (own_rem, outcomes, _belief), act in pol.items():
            by_view[(own_rem, outcomes)] = act

        def single_br_policy(state, legal):
            act = by_view[(state.single_remaining, state.outcomes)]
            p = np.zeros(len(legal))
            p[legal.index(act)] = 1.0
            return p

        v2, _ = exact_best_response_goofspiel(single_br_policy, cfg, "team")
        assert v2 >= -v1 - 1e-12


class TestExactBrNsg:
    def test_always_winnable(self):
        # uniform defender far away on a long path: attacker walks straight in
        g = path_graph(6)
        cfg = NsgConfig(graph=g, horizon=5, num_resources=1, sources=(1,),
                        targets=(0,), defender_init=(5,))
        v, _ = exact_best_response_nsg(uniform_handle(), cfg)
        assert v == 1.0

    def test_hopeless_attacker(self):
        # defender placed on the source: caught at placement, BR value 0
        g = path_graph(5)
        cfg = NsgConfig(graph=g, horizon=4, num_resources=1, sources=(4,),
                        targets=(0,), defender_init=(4,))
        v, _ = exact_best_response_nsg(uniform_handle(), cfg)
        assert v == 0.0

    def test_matches_walk_enumeration_on_cycle(self):
        # 4-cycle, T=2: the attacker gains no usable information before the
        # end, so the BR value equals the best committed walk's value,
        # enumerated here independently
        g = cycle_graph(4)
        cfg = NsgConfig(graph=g, horizon=2, num_resources=1, sources=(0,),
                        targets=(2,), defender_init=(1,))
        v, _ = exact_best_response_nsg(uniform_handle(), cfg)

        best = -1.0
        for w1 in g.adjacency[0]:
            for w2 in g.adjacency[w1]:
                total = 0.0
                for d1 in g.adjacency[1]:
                    for d2 in g.adjacency[d1]:
                        u_att = 0.0
                        if w1 == d1:
                            u_att = 0.0
                        elif w1 == 2:
                            u_att = 1.0
                        elif w2 == d2:
                            u_att = 0.0
                        elif w2 == 2:
                            u_att = 1.0
                        total += u_att / 4.0
                best = max(best, total)
        assert abs(v - best) < 1e-12

    def test_br_dominates_sampled_walks(self):
        g = cycle_graph(5)
        cfg = NsgConfig(graph=g, horizon=3, num_resources=1, sources=(0,),
                        targets=(2,), defender_init=(3,))
        v, _ = exact_best_response_nsg(greedy_handle(cfg), cfg)
        rng = np.random.default_rng(5)
        for _ in range(100):
            def att_fn(st, legal, _r=rng):
                w = _r.random(len(legal))
                return w / w.sum()
            rep = evaluate(greedy_handle(cfg), PolicyHandle("Rand", att_fn),
                           cfg, 200, seed=int(rng.integers(2**31)))
            assert (1.0 - rep.mean) <= v + 0.1  # Monte-Carlo slack

    def test_cap_error(self):
        from nsgsolver.evaluation import BestResponseCapError
        g = cycle_graph(6)
        cfg = NsgConfig(graph=g, horizon=5, num_resources=1, sources=(0,),
                        targets=(3,), defender_init=(2,))
        with pytest.raises(BestResponseCapError):
            exact_best_response_nsg(uniform_handle(), cfg, cap=3)
