"""Urn schemes, the coupled vertex/urn construction, and product criteria."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from edgeproc import analytic
from edgeproc.measure import explicit, factorial_max, power_law_product
from edgeproc.process import replica_rng, run_continuous
from edgeproc.urns import (
    CouplingEngine,
    CouplingState,
    UrnScheme,
    coupling_lambda,
    coupling_rate_audit,
    essential_completeness_product,
    prob_double_new_vertices,
    prob_urn_without_vertex,
    respect_factor,
    run_coupling,
    run_urn,
    urns_in_order,
)

from conftest import random_explicit_spec


def k_n_spec(n):
    """Complete graph on {1..n}, equal masses, normalized."""
    edges = list(itertools.combinations(range(1, n + 1), 2))
    return explicit([(e, 1.0 / len(edges)) for e in edges], normalize=True)


def random_reachable_state(engine, rng, max_steps=30):
    state = engine.new_state()
    for _ in range(int(rng.integers(0, max_steps))):
        engine.step(state, rng)
    return state


class TestUrnScheme:
    def test_discrete_probabilities_must_sum_to_one(self):
        with pytest.raises(ValueError):
            UrnScheme((0.5, 0.6), "discrete")

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            UrnScheme((-1.0,), "continuous")

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            UrnScheme((1.0,), "poisson")


class TestRunUrn:
    def test_single_urn_occupancy_time(self):
        n = 20_000
        times = np.empty(n)
        for k in range(n):
            traj = run_urn(UrnScheme((1.0,), "continuous"), 1e9,
                           replica_rng(50, k))
            assert traj.occupied_count(1e9) == 1
            times[k] = traj.fill_times[0]
        assert abs(times.mean() - 1.0) < 3.0 / np.sqrt(n)

    def test_discrete_two_urns_both_occupied(self):
        n = 20_000
        hits = 0
        scheme = UrnScheme((0.5, 0.5), "discrete")
        for k in range(n):
            traj = run_urn(scheme, 2, replica_rng(51, k))
            hits += traj.occupied_count(2) == 2
        assert abs(hits / n - 0.5) < 3 * np.sqrt(0.25 / n)

    def test_marginal_rates_match_expected_vertices(self):
        spec = random_explicit_spec(np.random.default_rng(52))
        M = spec.marginals.M[1:]
        scheme = UrnScheme(tuple(M[M > 0]), "continuous")
        t = 1.5
        n = 20_000
        occ = np.empty(n)
        for k in range(n):
            occ[k] = run_urn(scheme, t, replica_rng(53, k)).occupied_count(t)
        target = analytic.expected_vertices(spec, t)
        se = np.sqrt(analytic.urn_variance(spec, t) / n)
        assert abs(occ.mean() - target) < 4 * se

    def test_first_k_in_order(self):
        import edgeproc.urns as urns
        traj = urns.UrnTrajectory(np.array([0.1, 0.2, 0.5, 0.3]),
                                  "continuous", 1.0)
        assert traj.first_k_in_order(2)
        assert not traj.first_k_in_order(3)


class TestCouplingLambda:
    def test_empty_state_half_marginal(self):
        spec = k_n_spec(5)
        eng = CouplingEngine(spec)
        lam = eng.lambda_vector(eng.new_state())
        M = spec.marginals.M
        for i in range(1, 6):
            assert lam[i] == pytest.approx(M[i] / 2, rel=1e-12)
        assert lam.sum() == pytest.approx(1.0, rel=1e-12)

    def test_single_edge_urned_neighbor(self):
        spec = explicit([((1, 2), 1.0)], normalize=True)
        state = CouplingState.empty(2)
        state.in_v[[1, 2]] = True
        state.in_u[1] = True
        assert coupling_lambda(state, spec, 2) == 0.0

    def test_precondition_i_not_in_urn_set(self):
        spec = explicit([((1, 2), 1.0)], normalize=True)
        state = CouplingState.empty(2)
        state.in_u[1] = True
        with pytest.raises(ValueError):
            coupling_lambda(state, spec, 1)

    def test_in_v_vertex_gets_full_unseen_mass(self):
        # i in V: lambda = half the V∩not-U neighbor mass plus all
        # not-V,not-U neighbor mass
        spec = k_n_spec(4)
        eng = CouplingEngine(spec)
        state = eng.new_state()
        state.in_v[[1, 2]] = True
        mu = spec.mass((1, 2))
        lam1 = 0.5 * mu + spec.mass((1, 3)) + spec.mass((1, 4))
        assert eng.lambda_vector(state)[1] == pytest.approx(lam1, rel=1e-12)


class TestCouplingStep:
    def test_single_edge_epoch_probabilities(self):
        # empty state: P(chi = the edge) = mu/3 = 1/3; on that branch U gains
        # one coin-chosen endpoint and V gains both
        spec = explicit([((1, 2), 1.0)], normalize=True)
        eng = CouplingEngine(spec)
        n = 30_000
        edge_hits = 0
        for k in range(n):
            rng = replica_rng(54, k)
            state = eng.step(eng.new_state(), rng, record=True)
            step, clock, kind, value, color, v, u, eq = state.log[0]
            if kind == "edge":
                edge_hits += 1
                assert v == 2 and u == 1
                assert color == "brown"
            elif kind == "urn":
                assert v == 0 and u == 1
            else:
                assert v == 0 and u == 0
        assert abs(edge_hits / n - 1 / 3) < 3 * np.sqrt((1 / 3) * (2 / 3) / n)

    def test_null_outcome_only_advances_clock(self):
        spec = k_n_spec(4)
        eng = CouplingEngine(spec)
        found = 0
        for k in range(200):
            state = eng.new_state()
            eng.step(state, replica_rng(55, k), record=True)
            if state.log[0][2] == "null":
                found += 1
                assert state.in_v.sum() == 0 and state.in_u.sum() == 0
                assert state.clock > 0
        assert found > 0

    def test_sets_monotone(self):
        spec = power_law_product(3.0, 10, normalize=True)
        eng = CouplingEngine(spec)
        rng = replica_rng(56, 0)
        state = eng.new_state()
        for _ in range(100):
            v_before = state.in_v.copy()
            u_before = state.in_u.copy()
            eng.step(state, rng)
            assert np.all(state.in_v >= v_before)
            assert np.all(state.in_u >= u_before)

    def test_vertices_enter_v_only_via_edges(self):
        spec = k_n_spec(5)
        eng = CouplingEngine(spec)
        rng = replica_rng(57, 1)
        state = eng.new_state()
        for _ in range(150):
            v_before = int(state.in_v.sum())
            eng.step(state, rng, record=True)
            kind = state.log[-1][2]
            if int(state.in_v.sum()) > v_before:
                assert kind == "edge"


class TestRateAudit:
    def test_empty_state(self):
        rng = np.random.default_rng(58)
        for _ in range(10):
            spec = random_explicit_spec(rng).normalize()
            eng = CouplingEngine(spec)
            state = eng.new_state()
            for i in range(1, spec.n_max + 1):
                assert abs(coupling_rate_audit(state, spec, i, engine=eng)
                           - spec.marginals[i]) < 1e-12

    def test_all_v_no_u(self):
        spec = k_n_spec(5)
        eng = CouplingEngine(spec)
        state = eng.new_state()
        state.in_v[1:] = True
        for i in range(1, 6):
            assert abs(coupling_rate_audit(state, spec, i, engine=eng)
                       - spec.marginals[i]) < 1e-12

    def test_single_edge_green_branch(self):
        spec = explicit([((1, 2), 1.0)], normalize=True)
        state = CouplingState.empty(2)
        state.in_v[[1, 2]] = True
        state.in_u[2] = True
        assert abs(coupling_rate_audit(state, spec, 1) - 1.0) < 1e-12

    def test_randomized_reachable_states(self):
        for spec in (power_law_product(3.0, 12, normalize=True),
                     k_n_spec(6)):
            eng = CouplingEngine(spec)
            for k in range(300):
                rng = replica_rng(59, k)
                state = random_reachable_state(eng, rng)
                free = [i for i in range(1, spec.n_max + 1)
                        if not state.in_u[i] and spec.marginals[i] > 0]
                if not free:
                    continue
                i = int(rng.choice(free))
                assert abs(coupling_rate_audit(state, spec, i, engine=eng)
                           - spec.marginals[i]) < 1e-12


class TestDomination:
    def test_blue_without_vertex_below_double_new(self):
        # P(urn outcome for i outside V) <= P(edge outcome adding two
        # vertices), state by state
        for spec in (power_law_product(3.0, 10, normalize=True), k_n_spec(5)):
            eng = CouplingEngine(spec)
            for k in range(200):
                state = random_reachable_state(eng, replica_rng(60, k))
                p_blue = prob_urn_without_vertex(state, spec, engine=eng)
                p_double = prob_double_new_vertices(state, spec, engine=eng)
                assert p_blue <= p_double + 1e-12


class TestCouplingMarginals:
    def test_vertex_count_law(self):
        spec = k_n_spec(5)
        eng = CouplingEngine(spec)
        t = 4.0
        n = 8_000
        coupled = np.empty(n)
        direct = np.empty(n)
        for k in range(n):
            coupled[k] = eng.run(t, replica_rng(61, k)).in_v.sum()
        for k in range(n):
            traj = run_continuous(spec, t, replica_rng(62, k))
            direct[k] = len({v for ev in traj.events for v in ev.edge})
        assert ks_2samp(coupled, direct).statistic < 0.05

    def test_urn_count_law(self):
        spec = k_n_spec(5)
        eng = CouplingEngine(spec)
        t = 4.0
        n = 8_000
        coupled = np.empty(n)
        direct = np.empty(n)
        M = spec.marginals.M[1:]
        for k in range(n):
            coupled[k] = eng.run(t, replica_rng(63, k)).in_u.sum()
        for k in range(n):
            direct[k] = np.sum(replica_rng(64, k).exponential(1 / M) <= t)
        assert ks_2samp(coupled, direct).statistic < 0.05

    def test_eventual_equality_increases(self):
        spec = k_n_spec(5)
        eng = CouplingEngine(spec)
        n = 500
        freqs = []
        for t in (2.0, 10.0, 40.0):
            eq = sum(eng.run(t, replica_rng(65, k)).sets_equal()
                     for k in range(n))
            freqs.append(eq / n)
        assert freqs[0] <= freqs[1] <= freqs[2] + 0.02
        assert freqs[-1] > 0.95


class TestRespectFactor:
    def test_single_rate_closed_form_exact(self):
        for lam, tail in ((1.0, 2.0), (0.3, 0.7), (5.0, 0.1)):
            assert respect_factor([lam], tail) == lam / (tail + lam)

    def test_two_rate_expansion(self):
        a, b, L = 1.0, 1.0, 1.0
        want = 1 - L / (L + a) - L / (L + b) + L / (L + a + b)
        got = respect_factor([a, b], L, method="subset-expansion")
        assert got == pytest.approx(want, rel=1e-14)
        assert got == pytest.approx(1 / 3, rel=1e-14)

    def test_empty_block_is_one(self):
        assert respect_factor([], 1.0) == 1.0

    def test_zero_rate_kills_factor(self):
        assert respect_factor([1.0, 0.0], 1.0) == 0.0

    def test_expansion_vs_quadrature(self):
        rng = np.random.default_rng(66)
        for _ in range(50):
            size = int(rng.integers(1, 9))
            lam = rng.uniform(0.05, 3.0, size)
            tail = float(rng.uniform(0.05, 3.0))
            ex = respect_factor(lam, tail, method="subset-expansion")
            qd = respect_factor(lam, tail, method="quadrature")
            assert abs(ex - qd) < 1e-10

    @given(st.lists(st.floats(0.01, 5.0), min_size=1, max_size=8),
           st.floats(0.01, 5.0))
    @settings(max_examples=100, deadline=None)
    def test_expansion_vs_quadrature_property(self, lam, tail):
        ex = respect_factor(lam, tail, method="subset-expansion")
        qd = respect_factor(lam, tail, method="quadrature")
        assert abs(ex - qd) < 1e-8
        assert 0.0 <= ex <= 1.0

    def test_tail_mass_must_be_positive(self):
        with pytest.raises(ValueError):
            respect_factor([1.0], 0.0)


class TestUrnsInOrder:
    def test_single_urn(self):
        rep = urns_in_order([1.0])
        assert rep.partial_product == 1.0
        assert rep.verdict == "positive-analytic"

    def test_geometric_rates_exact(self):
        lam = 2.0 ** -np.arange(1, 11)
        rep = urns_in_order(lam, tail_sum=float(lam[-1]))  # tail = 2^-10
        assert rep.partial_product == 2.0 ** -10
        assert all(f == 0.5 for f in rep.factors)
        assert rep.verdict == "zero-analytic"

    def test_triple_exponential_rates_stabilize_positive(self):
        lam = np.exp(-(3.0 ** np.arange(1, 6)))
        tail = float(lam[-1]) * 1e-8  # vanishing beyond the window
        rep = urns_in_order(lam, tail_sum=tail)
        assert rep.verdict == "positive-analytic"
        assert rep.partial_product > 0.99
        # stabilization: the last factors are essentially 1
        assert rep.factors[-1] > 1 - 1e-6

    def test_partial_product_non_increasing(self):
        lam = np.exp(-0.5 * np.arange(1, 12))
        prods = [urns_in_order(lam, blocks_used=k, tail_sum=0.1).partial_product
                 for k in range(1, 12)]
        assert all(a >= b for a, b in zip(prods, prods[1:]))

    def test_inconclusive_without_tail_argument(self):
        rep = urns_in_order([3.0, 1.0, 2.0], tail_sum=5.0)
        assert rep.verdict == "inconclusive"

    def test_prefix_must_be_positive(self):
        with pytest.raises(ValueError):
            urns_in_order([1.0, 0.0, 2.0])

    def test_in_order_monte_carlo(self):
        lam = 2.0 ** -np.arange(1, 13)
        rep = urns_in_order(lam)
        n = 20_000
        tau = replica_rng(67, 0).exponential(1 / lam, size=(n, len(lam)))
        order = np.argsort(tau, axis=1)
        for k in (1, 3, 5):
            prod = float(np.prod(rep.factors[:k]))
            freq = float(np.mean(np.all(order[:, :k] == np.arange(k), axis=1)))
            se = np.sqrt(prod * (1 - prod) / n)
            assert abs(freq - prod) < 3 * se


class TestEssentialCompletenessProduct:
    def test_factorial_max_positive_stabilizing(self):
        spec = factorial_max(8)
        rep = essential_completeness_product(spec, 7)
        assert rep.verdict == "positive-analytic"
        assert rep.partial_product > 0.9
        # stabilization: factors climb toward 1, so the per-block product
        # decrements shrink
        factors = np.asarray(rep.factors)
        assert np.all(np.diff(factors) > 0)
        assert factors[-1] > 0.98

    def test_power_law_decays_to_zero(self):
        spec = power_law_product(2.5, 25)
        prods = [essential_completeness_product(spec, b).partial_product
                 for b in (2, 4, 8, 16)]
        assert all(a > b or a == b == 0.0 for a, b in zip(prods, prods[1:]))
        assert prods[-1] < 1e-12
        assert essential_completeness_product(spec, 4).verdict \
            == "zero-analytic"

    def test_zero_block_gives_zero_product(self):
        # no mass on {1,3}: vertex 3 can never complete the prefix in order
        spec = explicit([((1, 2), 0.5), ((2, 3), 0.5)])
        rep = essential_completeness_product(spec, 2)
        assert rep.partial_product == 0.0
        assert rep.verdict == "zero-analytic"

    def test_chebyshev_ordering_monte_carlo(self):
        # frequency of "first arrivals are exactly the edges with max
        # endpoint <= 3, in block order" must beat the product bound
        spec = factorial_max(5)
        rep = essential_completeness_product(spec, 2)  # blocks n = 2, 3
        n = 4_000
        hits = 0
        k_edges = {(1, 2), (1, 3), (2, 3)}
        i12 = spec.edges.index((1, 2))
        i13 = spec.edges.index((1, 3))
        i23 = spec.edges.index((2, 3))
        for k in range(n):
            tau = replica_rng(68, k).exponential(1.0 / spec.w)
            first = np.argsort(tau)[:3]
            got = {(int(spec.ei[m]), int(spec.ej[m])) for m in first}
            ordered = tau[i12] < min(tau[i13], tau[i23])  # block C_2 first
            hits += got == k_edges and ordered
        bound = rep.partial_product
        se = np.sqrt(bound * (1 - bound) / n)
        assert hits / n >= bound - 3 * se


class TestCouplingTrace:
    def test_csv_export(self, tmp_path):
        spec = k_n_spec(4)
        state = run_coupling(spec, 5.0, replica_rng(69, 0), record=True)
        out = tmp_path / "trace.csv"
        from edgeproc.urns import coupling_trace_to_csv
        coupling_trace_to_csv(state, out, header_lines=["seed: 69"])
        lines = out.read_text().splitlines()
        assert lines[0] == "# seed: 69"
        assert lines[1].startswith("step,clock,chi_kind")
        assert len(lines) == 2 + len(state.log)
