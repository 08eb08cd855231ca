"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test reports a ``[PASS]``/``[FAIL]`` line that is printed in the
"acceptance criteria" section of the pytest summary.
"""

import itertools
import math
import time

import networkx as nx
import numpy as np
import pytest

from corpus import corpus, to_nx
from netfail import cascade, frontal, markov, protection, spectral
from netfail.cli import main
from netfail.graph_core import adjacency_matrix, complete_graph, wheel_graph
from netfail.random_graph import gnp, threshold_experiment

pytestmark = pytest.mark.acceptance


def test_01_reachability_pattern(criterion):
    start = time.perf_counter()
    mismatches = 0
    for s in range(100):
        g = gnp(50, 0.1, [101, s])
        dist = dict(nx.all_pairs_shortest_path_length(to_nx(g)))
        d = np.full((50, 50), np.inf)
        for i, row in dist.items():
            for j, v in row.items():
                d[i, j] = v
        steps = {rm.t: rm.reach for rm in cascade.iter_cumulative(g)}
        last = max(steps)
        for t in range(51):
            pattern = steps[min(t, last)]
            mismatches += int(np.count_nonzero(pattern != (d <= t)))
    elapsed = time.perf_counter() - start
    criterion("01 reachability pattern", mismatches == 0 and elapsed < 30,
              f"mismatches={mismatches}, {elapsed:.1f}s")


def test_02_spectral_identity(criterion):
    rng = np.random.default_rng(202)
    worst_power, worst_rec = 0.0, 0.0
    for s in range(20):
        n = int(rng.integers(2, 31))
        g = gnp(n, float(rng.uniform(0.1, 0.6)), [202, s])
        c = adjacency_matrix(g, dtype=float)
        dec = spectral.eig_symmetric(c)
        worst_rec = max(worst_rec, float(np.max(np.abs(dec.reconstruct() - c))))
        for t in range(11):
            exact = cascade.walk_count_matrix(g, t).astype(float)
            approx = dec.basis @ np.diag(dec.eigenvalues ** t) @ dec.basis.T
            denom = max(np.linalg.norm(exact), 1.0)
            worst_power = max(worst_power, float(np.linalg.norm(approx - exact) / denom))
    criterion("02 spectral identity", worst_power <= 1e-6 and worst_rec <= 1e-8,
              f"max relative power error={worst_power:.2e}, max reconstruction error={worst_rec:.2e}")


def test_03_complete_graph_one_step(criterion):
    bad = [(n, v) for n in range(2, 51) for v in range(n) if cascade.damage_time(complete_graph(n), v) != 1]
    criterion("03 complete graph one step", not bad, f"49 graphs, failures={bad[:5]}")


def test_04_extremes_are_radius_diameter(criterion):
    bad = []
    graphs = corpus()
    for name, g in graphs:
        h = to_nx(g)
        if cascade.min_damage_time(g)[0] != nx.radius(h) or cascade.max_damage_time(g)[0] != nx.diameter(h):
            bad.append(name)
    criterion("04 min/max damage = radius/diameter", not bad, f"{len(graphs)} graphs, failures={bad}")


def _brute_force(g):
    h_full = to_nx(g)
    best, count = -1, 0
    for edges in itertools.combinations(sorted(h_full.edges()), g.n - 1):
        t = nx.Graph(edges)
        t.add_nodes_from(range(g.n))
        if nx.is_tree(t):
            count += 1
            best = max(best, nx.radius(t))
    return best, count


def test_05_protection_brute_force(criterion):
    start = time.perf_counter()
    bad = []
    graphs = [(name, g) for name, g in corpus() if g.n <= 7]
    for name, g in graphs:
        plan = protection.select_protection_tree(g, "exact")
        best, count = _brute_force(g)
        kirchhoff = protection.count_spanning_trees(g)
        if plan.t_tilde != best or plan.trees_examined != kirchhoff or count != kirchhoff:
            bad.append((name, plan.t_tilde, best, plan.trees_examined, kirchhoff))
    elapsed = time.perf_counter() - start
    criterion("05 protection tree brute force", not bad and elapsed < 60,
              f"{len(graphs)} graphs, failures={bad}, {elapsed:.1f}s")


def test_06_matrix_exponential(criterion):
    a = markov.RateMatrix(np.array([[-1.0, 1.0], [0.0, 0.0]]))
    pi0 = markov.StateVector(np.array([1.0, 0.0]))
    closed = max(
        float(np.max(np.abs(markov.evolve_continuous(pi0, a, t).probabilities - [math.exp(-t), -math.expm1(-t)])))
        for t in np.linspace(0, 10, 41)
    )
    rng = np.random.default_rng(606)
    semigroup, mass = 0.0, 0.0
    for _ in range(20):
        n = int(rng.integers(2, 9))
        q = rng.uniform(0, 2, (n, n)) * (rng.random((n, n)) < 0.6)
        np.fill_diagonal(q, 0)
        np.fill_diagonal(q, -q.sum(axis=1))
        s, t = rng.uniform(0, 2, 2)
        lhs = spectral.matrix_exponential(q, s + t)
        rhs = spectral.matrix_exponential(q, s) @ spectral.matrix_exponential(q, t)
        semigroup = max(semigroup, float(np.max(np.abs(lhs - rhs))))
        p0 = rng.dirichlet(np.ones(n))
        out = markov.evolve_continuous(markov.StateVector(p0), markov.RateMatrix(q), float(s + t))
        mass = max(mass, abs(float(out.probabilities.sum()) - 1.0))
    ok = closed <= 1e-8 and semigroup <= 1e-8 and mass <= 1e-9
    criterion("06 matrix exponential", ok,
              f"closed form={closed:.1e}, semigroup={semigroup:.1e}, mass drift={mass:.1e}")


def test_07_epidemic_cross_validation(criterion):
    start = time.perf_counter()
    times, trials = [0.5, 1.0, 2.0], 10_000
    graphs = [(name, g) for name, g in corpus() if g.n <= 8]
    comparisons, outside = 0, []
    for gi, (name, g) in enumerate(graphs):
        exact = markov.exact_vertex_probabilities(g, 1.0, [0], times)
        mc = markov.simulate_epidemic(g, 1.0, [0], 2.0, times, trials, [7, gi]).vertex_probabilities
        se = np.sqrt(exact * (1 - exact) / trials)
        for ti in range(len(times)):
            for v in range(g.n):
                comparisons += 1
                p, q, s = exact[ti, v], mc[ti, v], se[ti, v]
                ok = q == p if s == 0 else abs(q - p) <= 3 * s
                if not ok:
                    outside.append((name, times[ti], v, round(float(p), 4), round(float(q), 4)))
    elapsed = time.perf_counter() - start
    criterion("07 epidemic vs exact chain", not outside and elapsed < 300,
              f"{len(graphs)} graphs, {comparisons} comparisons, outside 3 SE={outside}, {elapsed:.1f}s")


def test_08_er_threshold(criterion):
    start = time.perf_counter()
    above = threshold_experiment(1000, 4, 300, 0)
    control = threshold_experiment(1000, 0.5, 300, 0)
    elapsed = time.perf_counter() - start
    ok = above.passed and control.empirical_probability < 0.5 and elapsed < 120
    criterion("08 connectivity threshold", ok,
              f"c=4: {above.empirical_probability:.4f} (bound {above.bound} - {above.slack:.4f}), "
              f"c=0.5: {control.empirical_probability:.4f}, {elapsed:.1f}s")


def test_09_frontal_statistics(criterion):
    start = time.perf_counter()
    n, r, k, trials = 10_000, 5, 20, 2000
    p = frontal.default_p(n, r)
    st = frontal.monte_carlo_stats(n, r, k, p, trials, 0)
    se = math.sqrt(st.variance / trials)
    lo, hi = frontal.variance_interval(st.variance, trials, 0.99)
    elapsed = time.perf_counter() - start
    ok = abs(st.empirical_mean - st.expected_active) <= 3 * se and lo <= st.empirical_variance <= hi and elapsed < 60
    criterion("09 frontal layer mean/variance", ok,
              f"mean={st.empirical_mean:.3f} vs N p_c={st.expected_active:.4f} (3 SE={3 * se:.3f}), "
              f"var={st.empirical_variance:.3f} in [{lo:.3f}, {hi:.3f}], {elapsed:.1f}s")


def test_10_regeneration_after_active_set_damage(criterion):
    # Damage exactly the active set, redraw those rows, count the new active set.
    n, r, k, trials = 10_000, 5, 20, 2000
    p = frontal.default_p(n, r)
    counts = frontal.active_set_regeneration(n, r, k, p, trials, 0)
    st = frontal.activation_stats(n, p, r, k)
    recovered = float(counts[:, 1].mean())
    sigma = math.sqrt(st.variance / trials)
    criterion("10 regeneration recovers N p_c", abs(recovered - st.expected_active) <= 3 * sigma,
              f"recovered mean={recovered:.4f}, damaged mean={counts[:, 0].mean():.3f}, "
              f"N p_c={st.expected_active:.4f}, 3 sigma={3 * sigma:.4f}")


def test_11_wheel_hub_removal(criterion):
    impact = protection.protection_impact(wheel_graph(10), 0)
    criterion("11 wheel hub removal", (impact.t_max_before, impact.t_max_after) == (2, 5),
              f"diameter {impact.t_max_before} -> {impact.t_max_after}")


def _graph_file(tmp_path):
    g = gnp(9, 0.45, 12)
    path = tmp_path / "g.txt"
    path.write_text(f"n {g.n}\n" + "".join(f"{u} {v}\n" for u, v in g.edges))
    return str(path)


def test_12_cli_determinism(criterion, tmp_path):
    graph = _graph_file(tmp_path)
    commands = {
        "cascade": ["cascade", graph, "--seeds", "0,4"],
        "protect": ["protect", graph, "--mode", "sampled", "--budget", "200"],
        "markov": ["markov", "--graph", graph, "--model", "montecarlo", "--trials", "2000", "--times", "0.5,1,2"],
        "er": ["er", "--n", "120", "--c", "2", "--trials", "60", "--sweep", "1,2,4"],
        "frontal": ["frontal", "--N", "2000", "--r", "3", "--k", "6", "--default-p", "--trials", "50",
                    "--damage-fraction", "0.3"],
        "line-graph": ["line-graph", graph],
    }
    differing = []
    for name, argv in commands.items():
        payloads = set()
        for threads in (1, 4, 8):
            prefix = tmp_path / f"{name}-{threads}"
            code = main([*argv, "--seed", "5", "--threads", str(threads), "--format", "both", "--output", str(prefix)])
            assert code == 0, name
            payloads.add((prefix.with_suffix(".json").read_bytes(), prefix.with_suffix(".csv").read_bytes()))
        if len(payloads) != 1:
            differing.append(name)
    criterion("12 CLI determinism across threads", not differing,
              f"{len(commands)} commands x threads 1/4/8, differing={differing}")
