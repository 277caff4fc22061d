import random
from fractions import Fraction as F

import pytest

from dctopo.bases import circulant, complete, complete_bipartite, diamond, gen_kautz, uni_ring
from dctopo.chunks import FULL, ChunkSet
from dctopo.graph import diameter, find_skew_symmetry, inverse_map, transpose
from dctopo.schedule import (
    AG,
    RS,
    CostModel,
    Schedule,
    ScheduleError,
    Transfer,
    bandwidth_T_B,
    check_bandwidth_optimal,
    check_moore_optimal,
    cost_vector,
    dualize,
    is_shortest_path_schedule,
    latency_T_L,
    map_schedule,
    remap_arcs,
    reverse_schedule,
    validate,
)
from dctopo.spsched import lp_schedule

from oracles import brute_validate, brute_y

CM = CostModel(alpha=10e-6, bandwidth_B=1e11, model_M=8 * 100 * 2**20, degree_d=2)


def _schedules():
    out = [("K5", *complete(5)), ("K22", *complete_bipartite(2)), ("UR14", *uni_ring(1, 4)),
           ("UR23", *uni_ring(2, 3))]
    for name, g in [("C42", circulant(4, 2)), ("GK212", gen_kautz(2, 12)), ("Diamond", diamond())]:
        out.append((name, g, lp_schedule(g)[0]))
    return out


SCHEDULES = _schedules()
IDS = [s[0] for s in SCHEDULES]


class TestCosts:
    def test_latency(self):
        g, s = complete_bipartite(2)
        assert latency_T_L(s, CostModel(1, 1, 1, 2)) == 2
        assert latency_T_L(Schedule(RS, []), CM) == 0
        t2 = Schedule(RS, [Transfer(0, FULL, 0, 2)])
        assert latency_T_L(t2, CM) == pytest.approx(20e-6)

    def test_ring_bandwidth(self):
        for n in (3, 4, 8):
            g, s = uni_ring(1, n)
            assert cost_vector(s, g).y == F(n - 1, n)

    def test_bipartite(self):
        g, s = complete_bipartite(2)
        c = cost_vector(s, g)
        assert (c.x, c.y) == (2, F(3, 4))
        total, per_step = bandwidth_T_B(s, g, CM)
        assert total == pytest.approx(CM.m_over_b * 0.75)
        assert len(per_step) == 2

    def test_single_transfer(self):
        g = circulant(4, 2)
        s = Schedule(RS, [Transfer(1, FULL, 0, 1)])
        assert cost_vector(s, g).y == F(2, 4)

    @pytest.mark.parametrize("name,g,s", SCHEDULES, ids=IDS)
    def test_y_matches_direct_sum(self, name, g, s):
        assert cost_vector(s, g).y == brute_y(s, g)


class TestValidate:
    @pytest.mark.parametrize("name,g,s", SCHEDULES, ids=IDS)
    def test_agrees_with_brute_force(self, name, g, s):
        assert validate(s, g).ok
        assert brute_validate(s, g)

    @pytest.mark.parametrize("name,g,s", SCHEDULES, ids=IDS)
    def test_dropping_transfers(self, name, g, s):
        rng = random.Random(name)
        for _ in range(5):
            k = rng.randrange(len(s.transfers))
            cut = Schedule(s.kind, s.transfers[:k] + s.transfers[k + 1:])
            assert validate(cut, g).ok == brute_validate(cut, g)

    def test_missing_pair_reported(self):
        g, s = complete(4)
        cut = Schedule(RS, s.transfers[1:])
        rep = validate(cut, g)
        assert not rep.ok
        u, v = g.arcs[s.transfers[0].arc]
        assert rep.missing == [(v, u, FULL)]

    def test_ring_three_steps(self):
        g, s = uni_ring(1, 4)
        assert s.t_max == 3 and validate(s, g).ok

    def test_same_step_cannot_chain(self):
        g, _ = uni_ring(1, 3)
        # arc 0: 0->1, arc 1: 1->2; both at step 1 would relay in one step
        s = Schedule(RS, [Transfer(2, FULL, 0, 1), Transfer(2, FULL, 1, 1), Transfer(2, FULL, 1, 2)])
        assert not validate(s, g).ok
        s2 = Schedule(RS, [Transfer(2, FULL, 0, 1), Transfer(2, FULL, 1, 2)])
        assert not validate(s2, g).ok      # node 0's data for root 2 fine, but root 0/1 absent
        assert all(r == 2 for r, _, _ in validate(s2, g).missing) is False

    @pytest.mark.parametrize("name,g,s", SCHEDULES, ids=IDS)
    def test_order_insensitive(self, name, g, s):
        items = list(s.transfers)
        random.Random(7).shuffle(items)
        assert validate(Schedule(s.kind, items), g).missing == validate(s, g).missing

    @pytest.mark.parametrize("name,g,s", SCHEDULES, ids=IDS)
    def test_latency_at_least_diameter(self, name, g, s):
        assert s.t_max >= diameter(g)

    def test_bad_arc(self):
        g, _ = uni_ring(1, 3)
        with pytest.raises(ScheduleError):
            validate(Schedule(RS, [Transfer(0, FULL, 9, 1)]), g)

    def test_empty_chunk_rejected(self):
        with pytest.raises(ScheduleError):
            Schedule(RS, [Transfer(0, ChunkSet(), 0, 1)])


class TestTransforms:
    @pytest.mark.parametrize("name,g,s", SCHEDULES, ids=IDS)
    def test_reverse(self, name, g, s):
        r = reverse_schedule(s)
        assert r.kind is AG
        assert validate(r, transpose(g)).ok
        assert cost_vector(r, transpose(g)) == cost_vector(s, g)
        assert reverse_schedule(r).canonical() == s.canonical()

    def test_identity_map(self):
        g, s = uni_ring(1, 5)
        assert map_schedule(s, range(5), g, g).canonical() == s.canonical()

    def test_ring_reversal_relabel(self):
        g, s = uni_ring(1, 5)
        f = [(5 - i) % 5 for i in range(5)]
        gt = transpose(g)
        moved = map_schedule(s, f, gt, g)
        assert validate(moved, gt).ok

    @pytest.mark.parametrize("name,g,s", [x for x in SCHEDULES if x[0] != "Diamond"],
                             ids=[i for i in IDS if i != "Diamond"])
    def test_dualize(self, name, g, s):
        f = find_skew_symmetry(g)
        ag = dualize(s, g, f)
        assert ag.kind is AG and validate(ag, g).ok
        assert cost_vector(ag, g) == cost_vector(s, g)
        back = dualize(ag, g, f)
        assert back.kind is RS and validate(back, g).ok
        assert cost_vector(back, g) == cost_vector(s, g)

    def test_dualize_bad_witness(self):
        g, s = uni_ring(1, 5)
        with pytest.raises(ScheduleError):
            dualize(s, g, list(range(5)))

    def test_remap_arcs(self):
        g, s = complete(4)
        h = type(g)(g.n, list(reversed(g.arcs)))
        moved = remap_arcs(s, g, h)
        assert validate(moved, h).ok and cost_vector(moved, h) == cost_vector(s, g)


class TestOptimality:
    def test_ring_and_bipartite_optimal(self):
        for g, s in (uni_ring(1, 6), complete_bipartite(2), complete(5)):
            assert check_bandwidth_optimal(s, g)

    def test_tree_broadcast_not_optimal(self):
        # every root's shard is pushed along a spanning tree in both directions of K_4
        g, _ = complete(4)
        s, _ = lp_schedule(g)
        doubled = Schedule(RS, list(s.transfers) + [t._replace(step=2) for t in s.transfers])
        assert validate(doubled, g).ok
        rep = check_bandwidth_optimal(doubled, g)
        assert not rep and not rep.exact_cover

    @pytest.mark.parametrize("name,g,s", SCHEDULES, ids=IDS)
    def test_optimal_iff_y(self, name, g, s):
        assert bool(check_bandwidth_optimal(s, g)) == (cost_vector(s, g).y == F(g.n - 1, g.n))

    def test_moore(self):
        from dctopo.expansions import line_graph, line_expand_schedule
        g, s = complete(3)
        lg = line_graph(g)
        assert check_moore_optimal(line_expand_schedule(g, s), lg)
        # degree 1: 8 nodes need 7 steps, so the ring meets the bound
        r, rs = uni_ring(1, 8)
        assert check_moore_optimal(rs, r)
        # two parallel rings spend 7 steps where 3 would do
        r2, rs2 = uni_ring(2, 8)
        assert not check_moore_optimal(rs2, r2)

    def test_shortest_path(self):
        g, s = complete(5)
        assert is_shortest_path_schedule(s, g)
        from dctopo.bases import de_bruijn
        d = de_bruijn(2, 3)
        assert is_shortest_path_schedule(lp_schedule(d)[0], d)
