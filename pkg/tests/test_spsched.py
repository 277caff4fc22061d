from fractions import Fraction as F

import numpy as np
import pytest
from scipy.optimize import linprog as scipy_linprog

from dctopo.bases import (
    bi_ring,
    circulant,
    complete,
    de_bruijn,
    diamond,
    gen_kautz,
    hamming,
    uni_ring,
)
from dctopo.expansions import line_graph
from dctopo.graph import diameter
from dctopo.schedule import check_bandwidth_optimal, cost_vector, is_shortest_path_schedule, validate
from dctopo.spsched import (
    SpLpInstance,
    check_sp_bandwidth_optimal,
    integer_gap_bound,
    integer_schedule,
    lp_cost,
    lp_instances,
    lp_schedule,
    round_largest_remainder,
    solve_lp,
)

GRAPHS = {
    "UR15": uni_ring(1, 5)[0], "C42": circulant(4, 2), "C73": circulant(7, 3), "BR25": bi_ring(2, 5),
    "BR26": bi_ring(2, 6), "DBJ23": de_bruijn(2, 3), "GK212": gen_kautz(2, 12), "GK320": gen_kautz(3, 20),
    "Diamond": diamond(), "H23": hamming(2, 3)[0], "LK5": line_graph(complete(5)[0]),
}


def _scipy_objective(inst: SpLpInstance) -> float:
    """The per-(u, t) program in its original form: one variable per (destination, arc)."""
    pairs = [(v, e) for v, es in inst.destinations for e in es]
    arcs = sorted({e for _, e in pairs})
    nv = len(pairs) + 1                                  # last variable is U
    c = np.zeros(nv)
    c[-1] = 1
    A_eq, b_eq = [], []
    for v, es in inst.destinations:
        row = np.zeros(nv)
        for i, (w, e) in enumerate(pairs):
            if w == v:
                row[i] = 1
        A_eq.append(row)
        b_eq.append(1)
    A_ub, b_ub = [], []
    for e in arcs:
        row = np.zeros(nv)
        for i, (_, f) in enumerate(pairs):
            if f == e:
                row[i] = 1
        row[-1] = -1
        A_ub.append(row)
        b_ub.append(0)
    res = scipy_linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


class TestSolveLp:
    def test_two_equal_arcs(self):
        sol = solve_lp(SpLpInstance(0, 1, 1, ((5, (0, 1)),)))
        assert sol.objective == F(1, 2)
        assert sol.assignment == {(5, 0): F(1, 2), (5, 1): F(1, 2)}

    def test_single_arc(self):
        sol = solve_lp(SpLpInstance(0, 1, 1, ((5, (3,)),)))
        assert sol.objective == 1 and sol.assignment == {(5, 3): 1}

    def test_circulant_half_split(self):
        g = circulant(4, 2)
        inst = next(i for i in lp_instances(g) if i.u == 0 and i.t == 1)
        assert inst.distance == 2
        assert solve_lp(inst).objective == F(1, 2)

    @pytest.mark.parametrize("name", sorted(GRAPHS))
    def test_objectives_match_scipy(self, name):
        g = GRAPHS[name]
        for inst in lp_instances(g):
            ours = solve_lp(inst)
            assert float(ours.objective) == pytest.approx(_scipy_objective(inst), abs=1e-8)
            # the assignment is feasible and attains the objective exactly
            load = {}
            for v, es in inst.destinations:
                assert sum(ours.assignment.get((v, e), 0) for e in es) == 1
                for e in es:
                    load[e] = load.get(e, 0) + ours.assignment.get((v, e), 0)
            assert max(load.values()) == ours.objective


class TestLpSchedule:
    @pytest.mark.parametrize("name", sorted(GRAPHS))
    def test_valid_shortest_path(self, name):
        g = GRAPHS[name]
        s, cost = lp_schedule(g)
        assert validate(s, g).ok
        assert is_shortest_path_schedule(s, g)
        assert cost_vector(s, g) == cost
        assert lp_cost(g) == cost
        assert cost.x == diameter(g)

    def test_ring(self):
        s, c = lp_schedule(GRAPHS["UR15"])
        assert c.y == F(4, 5) and check_bandwidth_optimal(s, GRAPHS["UR15"])

    def test_de_bruijn_unique_paths(self):
        g = GRAPHS["DBJ23"]
        s, c = lp_schedule(g)
        assert c.x == 3
        assert all(tr.chunk.measure() == 1 for tr in s.transfers)
        # unique shortest paths: y equals the brute-force heaviest-arc count
        loads = {}
        for tr in s.transfers:
            loads.setdefault(tr.step, {}).setdefault(tr.arc, 0)
            loads[tr.step][tr.arc] += 1
        assert c.y == F(2, 8) * sum(max(v.values()) for v in loads.values())

    def test_genkautz_within_twice_optimal(self):
        g = GRAPHS["GK212"]
        _, c = lp_schedule(g)
        assert c.y <= 2 * F(11, 12)

    def test_line_of_complete_adds_one_over_n(self):
        k5 = complete(5)[0]
        assert lp_cost(line_graph(k5)).y == lp_cost(k5).y + F(1, 5)

    def test_circulant_matches_hand_schedule(self):
        c = lp_cost(GRAPHS["C42"])
        assert (c.x, c.y) == (2, F(3, 4))

    def test_biring_odd_even(self):
        assert lp_cost(GRAPHS["BR25"]).y == F(4, 5)
        assert lp_cost(GRAPHS["BR26"]).y == F(5, 6)


class TestInteger:
    def test_rounding(self):
        assert round_largest_remainder({0: F(1, 3), 1: F(1, 3), 2: F(1, 3)}, 4) == {0: 2, 1: 1, 2: 1}
        assert round_largest_remainder({3: F(1, 2), 1: F(1, 2)}, 1) == {1: 1, 3: 0}

    def test_p1_on_de_bruijn(self):
        g = GRAPHS["DBJ23"]
        s1, c1 = integer_schedule(g, 1)
        s0, c0 = lp_schedule(g)
        assert c1 == c0 and s1.canonical() == s0.canonical()

    def test_ring_zero_gap(self):
        g = uni_ring(1, 4)[0]
        assert integer_schedule(g, 4)[1] == lp_cost(g)

    @pytest.mark.parametrize("name,P", [("GK212", 4), ("GK212", 8), ("GK320", 16), ("Diamond", 3)])
    def test_gap_bound(self, name, P):
        g = GRAPHS[name]
        s, c = integer_schedule(g, P)
        assert validate(s, g).ok and is_shortest_path_schedule(s, g)
        assert all((tr.chunk.measure() * P).denominator == 1 for tr in s.transfers)
        gap = c.y - lp_cost(g).y
        assert 0 <= gap <= integer_gap_bound(g, P)

    def test_bad_granularity(self):
        with pytest.raises(ValueError):
            integer_schedule(GRAPHS["UR15"], 0)


class TestSpOptimal:
    def test_ring(self):
        g = GRAPHS["UR15"]
        assert check_sp_bandwidth_optimal(g, lp_schedule(g)[0])

    def test_hamming(self):
        g = GRAPHS["H23"]
        assert check_sp_bandwidth_optimal(g, lp_schedule(g)[0])

    def test_de_bruijn_not(self):
        g = GRAPHS["DBJ23"]
        assert not check_sp_bandwidth_optimal(g, lp_schedule(g)[0])
