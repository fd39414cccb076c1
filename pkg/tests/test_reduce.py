import random

import pytest

from oracles import (K4STAR, PATH3, brute_steiner_cost, exact_special_distance, k4star_plus_leaf,
                     random_instance)
from stpvnd.exact import exact_steiner
from stpvnd.graph import Graph, InfeasibleError, Instance
from stpvnd.reduce import (SpecialDistanceContext, apply_events, build_tmst, reduce_degree, reduce_fixpoint,
                           reduce_reachability, reduce_special_distance, reduce_triangle, reduce_voronoi,
                           special_distance, voronoi_partition)


def removed_nodes(events):
    return {e.subject[0] for e in events if e.kind == "node"}


def removed_edges(events):
    return {e.subject for e in events if e.kind == "edge"}


class TestDegree:
    def test_steiner_leaf(self):
        events = reduce_degree(k4star_plus_leaf())
        assert removed_nodes(events) == {5}
        assert apply_events(k4star_plus_leaf(), events).graph == K4STAR.graph

    def test_cascade(self):
        g = Graph([1, 2, 3, 4, 5], [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1)])
        inst = Instance(g, {1, 2})
        assert removed_nodes(reduce_degree(inst)) == {3, 4, 5}

    def test_nothing_removable(self):
        assert reduce_degree(K4STAR) == []

    def test_isolated_steiner_node(self):
        g = Graph([1, 2, 3], [(1, 2, 1)])
        assert removed_nodes(reduce_degree(Instance(g, {1, 2}))) == {3}


class TestTmst:
    def test_k4star(self):
        t = build_tmst(K4STAR)
        assert {t.dists[a].dist[b] for a in (1, 2, 3) for b in (1, 2, 3) if a != b} == {2}
        assert t.cost == 4 and t.max_cost == 2
        for (u, v), path in t.paths.items():
            assert path[0] == u and path[-1] == v

    def test_path3(self):
        t = build_tmst(PATH3)
        assert t.edges == [(1, 3, 2)] and t.max_cost == 2 and t.paths[(1, 3)] == [1, 2, 3]

    def test_single_terminal(self):
        t = build_tmst(Instance(K4STAR.graph, {1}))
        assert t.edges == [] and t.max_cost is None

    def test_disconnected_terminals(self):
        g = Graph([1, 2, 3, 4], [(1, 2, 1), (3, 4, 1)])
        with pytest.raises(InfeasibleError):
            build_tmst(Instance(g, {1, 4}))

    def test_bottlenecks(self):
        # terminals on a line 1 -(2)- 2 -(5)- 3 -(1)- 4
        g = Graph([1, 2, 3, 4], [(1, 2, 2), (2, 3, 5), (3, 4, 1)])
        bt = build_tmst(Instance(g, {1, 2, 3, 4})).bottlenecks()
        assert bt[1][4] == 5 and bt[3][4] == 1 and bt[2][2] == 0


class TestTriangle:
    def test_k4star(self):
        events = reduce_triangle(K4STAR, 2)
        assert removed_edges(events) == {(1, 2), (1, 3), (2, 3)}
        assert brute_steiner_cost(apply_events(K4STAR, events)) == 3 == brute_steiner_cost(K4STAR)

    def test_all_cheap(self):
        assert reduce_triangle(K4STAR, 3) == []

    def test_path3(self):
        assert reduce_triangle(PATH3, 2) == []


class TestSpecialDistance:
    def test_k4star(self):
        assert exact_special_distance(K4STAR, 1, 2) == 2
        assert special_distance(K4STAR, 1, 2, k=3) == 2

    def test_path3(self):
        assert special_distance(PATH3, 1, 3) == 2

    def test_adjacent_terminals_bounded_by_edge(self):
        for u, v, c in K4STAR.graph.edges():
            if {u, v} <= K4STAR.terminals:
                assert special_distance(K4STAR, u, v) <= c

    def test_reduce_k4star(self):
        assert removed_edges(reduce_special_distance(K4STAR)) == {(1, 2), (1, 3), (2, 3)}

    def test_equality_kept(self):
        # c(1,2) = 2 equals both the detour 1-3-2 and the special distance
        g = Graph([1, 2, 3], [(1, 2, 2), (1, 3, 1), (3, 2, 1)])
        inst = Instance(g, {1, 2})
        assert special_distance(inst, 1, 2) == 2
        assert reduce_special_distance(inst) == []

    def test_star_edges_kept(self):
        for v in (1, 2, 3):
            assert special_distance(K4STAR, v, 4) >= 1
        assert not removed_edges(reduce_special_distance(K4STAR)) & {(1, 4), (2, 4), (3, 4)}

    @pytest.mark.parametrize("seed", range(30))
    def test_never_below_exact_and_monotone_in_cap(self, seed):
        inst = random_instance(random.Random(500 + seed), max_nodes=9, max_terminals=4)
        ctxs = {k: SpecialDistanceContext.build(inst, k) for k in (1, 2, 3, 10)}
        for u, v, _ in inst.graph.edges():
            exact = exact_special_distance(inst, u, v)
            vals = [special_distance(inst, u, v, k, ctxs[k]) for k in (1, 2, 3, 10)]
            assert all(x >= exact for x in vals)
            assert vals == sorted(vals, reverse=True)


class TestReachability:
    def test_far_leaf(self):
        inst = k4star_plus_leaf()
        assert removed_nodes(reduce_reachability(inst, 3)) == {5}

    def test_vacuous_bound(self):
        inst = k4star_plus_leaf()
        assert reduce_reachability(inst, inst.graph.total_cost()) == []

    def test_hub_kept(self):
        assert reduce_reachability(K4STAR, 3) == []


class TestVoronoi:
    def test_k4star_partition(self):
        vp = voronoi_partition(K4STAR)
        assert vp.region(1) == {1, 4} and vp.region(2) == {2} and vp.region(3) == {3}
        assert vp.radius == {1: 2, 2: 1, 3: 1}
        assert vp.lower_bound(4) == 1 + 1 + 1

    def test_path3_tie(self):
        assert voronoi_partition(PATH3).base[2] == 1

    def test_single_terminal(self):
        vp = voronoi_partition(Instance(K4STAR.graph, {2}))
        assert vp.region(2) == K4STAR.graph.nodes and vp.radius[2] is None and vp.radii == []

    def test_far_leaf_removed(self):
        inst = k4star_plus_leaf()
        vp = voronoi_partition(inst)
        assert vp.base_dist[5] == 11 and vp.second_dist[5] == 11
        assert removed_nodes(reduce_voronoi(inst, 3)) == {5}

    def test_bound_equal_kept(self):
        assert reduce_voronoi(K4STAR, 3) == []
        assert removed_nodes(reduce_voronoi(K4STAR, 2)) == {4}

    def test_unreachable_node_removed(self):
        g = Graph([1, 2, 3, 4, 5], [(1, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1)])
        assert removed_nodes(reduce_voronoi(Instance(g, {1, 2}), 10)) == {3, 4, 5}

    @pytest.mark.parametrize("seed", range(40))
    def test_is_a_lower_bound(self, seed):
        inst = random_instance(random.Random(700 + seed), max_nodes=12)
        opt, tree = exact_steiner(inst)
        vp = voronoi_partition(inst)
        for v in tree.nodes - inst.terminals:
            assert vp.lower_bound(v) <= opt


class TestFixpoint:
    def test_k4star(self):
        reduced, log = reduce_fixpoint(K4STAR)
        assert reduced.graph.nodes == {1, 2, 3, 4}
        assert {(u, v) for u, v, _ in reduced.graph.edges()} == {(1, 4), (2, 4), (3, 4)}
        assert len(log) == 3

    def test_already_reduced(self):
        reduced, _ = reduce_fixpoint(K4STAR)
        again, log = reduce_fixpoint(reduced, bound=3)
        assert log == [] and again.graph == reduced.graph

    def test_toggles(self):
        _, log = reduce_fixpoint(k4star_plus_leaf(), bound=3, tests=["reachability"])
        assert {e.test for e in log} == {"reachability"}
        _, log = reduce_fixpoint(k4star_plus_leaf(), tests=[])
        assert log == []

    def test_log_csv(self):
        _, log = reduce_fixpoint(k4star_plus_leaf(), bound=3)
        text = log.to_csv()
        assert text.splitlines()[0] == "kind,subject,test,bound"
        assert "node,5,degree," in text
        assert "edge,1-2,triangle," in text

    def test_bound_tests_ignored_without_bound(self):
        _, log = reduce_fixpoint(k4star_plus_leaf(), tests=["reachability", "voronoi"])
        assert log == []

    @pytest.mark.parametrize("seed", range(60))
    def test_safe_and_monotone(self, seed):
        inst = random_instance(random.Random(900 + seed))
        opt, tree = exact_steiner(inst)
        for bound in (None, opt, tree.cost):
            reduced, log = reduce_fixpoint(inst, bound)
            assert exact_steiner(reduced)[0] == opt
            assert reduced.graph.nodes <= inst.graph.nodes
            assert not removed_nodes(log) & inst.terminals
            # replaying the log one event at a time never grows the graph
            cur = inst
            for ev in log:
                nxt = apply_events(cur, [ev])
                assert nxt.graph.num_nodes <= cur.graph.num_nodes
                assert nxt.graph.num_edges <= cur.graph.num_edges
                cur = nxt
            assert cur.graph == reduced.graph

    @pytest.mark.parametrize("seed", range(40))
    def test_bound_tests_spare_the_incumbent(self, seed):
        from stpvnd.construct import initial_solution
        inst = random_instance(random.Random(1300 + seed))
        inc = initial_solution(inst)
        for events in (reduce_reachability(inst, inc.cost), reduce_voronoi(inst, inc.cost)):
            assert not removed_nodes(events) & inc.nodes
