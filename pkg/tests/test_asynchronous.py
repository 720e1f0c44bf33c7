"""Tests for pairing and the asynchronous engine."""

from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.learning import LearningConfig, LogisticRegression, partition_iid, synth_blobs
from src.privacy import PrivacyBudget, reduction_factor
from src.protocol import AsynchronousEngine, Mode, build_agents, pair_round, run_asynchronous
from src.topology import Graph, generate_named, generate_random
from src.utils.exceptions import ValidationError


def _setup(g, iterations, *, mode=Mode.TOPDP, seed=0):
    data = synth_blobs(5 * g.n, 2, 2, 0.5, seed=1)
    testset = synth_blobs(20, 2, 2, 0.5, seed=2)
    shards = partition_iid(data, g.n, seed=3)
    model = LogisticRegression(2, 2)
    x0 = model.init_params(np.random.default_rng(4))
    agents = build_agents(
        g, shards, x0, PrivacyBudget(1.0, 1e-5), iterations,
        gamma=0.9, period=1000, master_seed=seed, mode=mode,
    )
    return model, agents, testset


def _run(g, iterations, dropout, *, mode=Mode.TOPDP, seed=0, **kwargs):
    model, agents, testset = _setup(g, iterations, mode=mode, seed=seed)
    trace = run_asynchronous(
        g, agents, model, LearningConfig(lr_fade=iterations), iterations, dropout, mode, testset,
        master_seed=seed, **kwargs,
    )
    return trace, agents


def _partners(pairs):
    out = {}
    for i, j in pairs:
        out[i], out[j] = j, i
    return out


class TestPairRound:
    """Tests for the random matching."""

    def test_nobody_available(self):
        g = generate_named("ring", 4)
        assert pair_round([], g, {}, np.random.default_rng(0)) == []

    def test_two_agents(self):
        g = Graph.from_edges(2, [(0, 1)])
        assert pair_round([0, 1], g, {}, np.random.default_rng(0)) == [(0, 1)]

    def test_previous_partner_excluded(self):
        g = Graph.from_edges(2, [(0, 1)])
        assert pair_round([0, 1], g, {0: 1, 1: 0}, np.random.default_rng(0)) == []

    def test_one_sided_history_blocks(self):
        g = Graph.from_edges(2, [(0, 1)])
        assert pair_round([0, 1], g, {0: None, 1: 0}, np.random.default_rng(0)) == []

    def test_unavailable_neighbor_skipped(self):
        g = generate_named("star", 4, hubs=1)
        assert pair_round([1, 2, 3], g, {}, np.random.default_rng(0)) == []

    def test_triangle_pairs_uniformly(self):
        """Test one pair plus one idle agent, each pair about equally likely."""
        g = generate_named("complete", 3)
        counts: Counter = Counter()
        for seed in range(10_000):
            pairs = pair_round([0, 1, 2], g, {}, np.random.default_rng(seed))
            assert len(pairs) == 1
            counts[pairs[0]] += 1
        assert set(counts) == {(0, 1), (0, 2), (1, 2)}
        for count in counts.values():
            assert count / 10_000 == pytest.approx(1 / 3, abs=0.03)

    @settings(max_examples=60, deadline=None)
    @given(
        graph_seed=st.integers(0, 10_000),
        draw_seed=st.integers(0, 10_000),
        availability=st.lists(st.booleans(), min_size=14, max_size=14),
    )
    def test_matching_properties(self, graph_seed, draw_seed, availability):
        g = generate_random(14, 0.3, graph_seed)
        rng = np.random.default_rng(draw_seed)
        available = [i for i, up in enumerate(availability) if up]
        last_pairs = _partners(pair_round(range(14), g, {}, rng))
        pairs = pair_round(available, g, last_pairs, rng)

        seen = set()
        for i, j in pairs:
            assert i < j
            assert g.has_edge(i, j)
            assert i in available and j in available
            assert last_pairs.get(i) != j and last_pairs.get(j) != i
            assert not {i, j} & seen
            seen |= {i, j}


class TestAsynchronousEngine:
    """Tests for asynchronous rounds."""

    def test_two_agents_alternate(self):
        """Test that the no-repeat rule interleaves pair rounds with local rounds."""
        g = Graph.from_edges(2, [(0, 1)])
        trace, _ = _run(g, 4, 0.0)
        assert trace.pairings == [[(0, 1)], [], [(0, 1)], []]
        assert trace.participation == [2, 2, 2, 2]

    def test_full_dropout_is_local_dp_sgd(self):
        g = generate_named("ring", 5)
        trace, agents = _run(g, 6, 1.0, record_messages=True)
        assert trace.messages == []
        assert trace.participation == [0] * 6
        assert all(p == [] for p in trace.pairings)
        for agent in agents:
            assert agent.accountant.releases == 6
            assert agent.last_pair is None

    def test_no_repeat_and_participation(self):
        g = generate_named("ring", 10)
        iterations = 300
        trace, _ = _run(g, iterations, 0.1, eval_every=100)

        previous: dict[int, int] = {}
        for pairs in trace.pairings:
            current = _partners(pairs)
            for agent, partner in current.items():
                assert previous.get(agent) != partner
            previous = current

        expected = 0.9 * g.n
        tolerance = 3 * math.sqrt(g.n * 0.9 * 0.1 / iterations)
        assert np.mean(trace.participation) == pytest.approx(expected, abs=tolerance)

    def test_exchange_messages_follow_pairs(self):
        g = generate_random(10, 0.4, seed=6)
        trace, _ = _run(g, 5, 0.1, record_messages=True)
        for t, pairs in enumerate(trace.pairings):
            sent = sorted(
                (m.sender, m.recipient) for m in trace.messages if m.iteration == t
            )
            expected = sorted([(i, j) for i, j in pairs] + [(j, i) for i, j in pairs])
            assert sent == expected

    def test_reduced_pair_noise(self):
        g = generate_named("ring", 4)
        model, agents, testset = _setup(g, 5)
        engine = AsynchronousEngine(
            g, agents, model, LearningConfig(alpha=0.5), Mode.TOPDP, testset
        )
        sigma = agents[0].sigma0
        assert engine._pair_sigma(agents[0], 1, 0) == pytest.approx(sigma * reduction_factor(0.5))

    def test_full_noise_pair_sigma(self):
        g = generate_named("ring", 4)
        model, agents, testset = _setup(g, 5, mode=Mode.FULL_NOISE)
        engine = AsynchronousEngine(g, agents, model, LearningConfig(), Mode.FULL_NOISE, testset)
        assert engine._pair_sigma(agents[0], 1, 0) == agents[0].sigma0

    def test_every_agent_charged_each_round(self):
        g = generate_named("star", 6, hubs=2)
        trace, agents = _run(g, 8, 0.3)
        assert all(a.accountant.releases == 8 for a in agents)
        assert all(a.spent_epsilon <= 1.0 + 1e-9 for a in agents)

    def test_deterministic(self):
        g = generate_random(8, 0.4, seed=1)
        a, _ = _run(g, 10, 0.2, eval_every=5, seed=3)
        b, _ = _run(g, 10, 0.2, eval_every=5, seed=3)
        assert a.records == b.records
        assert a.pairings == b.pairings

    def test_worker_count_does_not_change_trace(self):
        g = generate_random(8, 0.4, seed=1)
        serial, _ = _run(g, 10, 0.2, eval_every=5, workers=1)
        threaded, _ = _run(g, 10, 0.2, eval_every=5, workers=3)
        assert serial.records == threaded.records

    @pytest.mark.parametrize("dropout", [-0.1, 1.5])
    def test_invalid_dropout(self, dropout):
        g = generate_named("ring", 4)
        model, agents, testset = _setup(g, 5)
        with pytest.raises(ValidationError):
            AsynchronousEngine(
                g, agents, model, LearningConfig(), Mode.TOPDP, testset, dropout=dropout
            )
