import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

import oracles
from rlgst.channels import unit_noise_draw
from rlgst.circuits import (
    NULL_ID,
    Circuit,
    ProbabilityTable,
    length_budget_check,
    outcome_bitstrings,
    random_circuits,
    random_circuits_mixed,
    sample_counts,
    simulate,
    simulate_table,
    stream,
)
from rlgst.exceptions import ValidationError
from rlgst.gateset import gateset_from_unitaries, gateset_with_params, offset_spam, standard_gateset

XYZ = standard_gateset("pauli_xyz")
IXY = standard_gateset("i_x90_y90")


class TestGeneration:
    def test_standard_recipe(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cs = random_circuits(IXY, [8, 16, 32, 64, 128], 150, rng_seed=1)
        assert 740 <= len(cs) <= 751
        assert cs[-1].id == NULL_ID and len(cs[-1]) == 0
        assert len({c.gates for c in cs}) == len(cs)

    def test_deterministic(self):
        a = random_circuits(IXY, [8, 16], 20, rng_seed=5)
        b = random_circuits(IXY, [8, 16], 20, rng_seed=5)
        assert a == b
        assert a != random_circuits(IXY, [8, 16], 20, rng_seed=6)

    def test_only_null(self):
        cs = random_circuits(IXY, [0], 1, rng_seed=0)
        assert cs == [Circuit(NULL_ID, ())]

    def test_duplicates_dropped_with_warning(self):
        with pytest.warns(UserWarning, match="duplicate"):
            cs = random_circuits(XYZ, [1], 30, rng_seed=0, include_null=False)
        assert sorted(c.gates for c in cs) == [("X",), ("Y",), ("Z",)]

    def test_gates_uniform(self):
        cs = random_circuits(IXY, [128], 100, rng_seed=3, include_null=False)
        labels = np.concatenate([c.gates for c in cs])
        freq = np.array([np.mean(labels == g) for g in IXY.labels])
        assert np.all(np.abs(freq - 1 / 3) < 0.02)

    def test_mixed_lengths(self):
        cs = random_circuits_mixed(IXY, [10, 50], 200, rng_seed=1)
        assert {len(c) for c in cs} == {10, 50}
        assert all(c.id != NULL_ID for c in cs)

    def test_bad_count(self):
        with pytest.raises(ValidationError):
            random_circuits(IXY, [8], 0, rng_seed=0)

    def test_streams_independent_of_other_names(self):
        a = stream(7, "shots:c00001").random(3)
        b = stream(7, "shots:c00001").random(3)
        c = stream(7, "shots:c00002").random(3)
        assert np.array_equal(a, b) and not np.array_equal(a, c)


class TestSimulate:
    def test_null(self):
        assert np.allclose(simulate(IXY, Circuit("n", ())), [1, 0])

    def test_x(self):
        assert np.allclose(simulate(XYZ, Circuit("c", ("X",))), [0, 1], atol=1e-15)

    def test_gx(self):
        assert np.allclose(simulate(IXY, Circuit("c", ("Gx",))), [0.5, 0.5], atol=1e-15)

    def test_unknown_label(self):
        with pytest.raises(ValidationError, match="unknown"):
            simulate(IXY, Circuit("c", ("Q",)))

    def test_noisy_needs_noise(self):
        with pytest.raises(ValidationError):
            simulate(IXY, Circuit("c", ("Gx",)), use_noisy=True)

    @pytest.mark.parametrize("name", ["pauli_xyz", "i_x90_y90", "i_h_t"])
    def test_born_rule_oracle(self, name):
        gs = standard_gateset(name)
        rng = np.random.default_rng(0)
        rho = np.diag([1.0, 0.0]).astype(complex)
        for _ in range(10):
            gates = tuple(rng.choice(gs.labels, 40))
            ref = oracles.born_probabilities(gates, oracles.UNITARIES_1Q[name], rho, oracles.computational_effects(1))
            assert np.allclose(simulate(gs, Circuit("c", gates)), ref, atol=1e-10)

    def test_born_rule_two_qubit_random_unitaries(self):
        us = {f"U{k}": unitary_group.rvs(4, random_state=k) for k in range(3)}
        gs = gateset_from_unitaries(us)
        rho = np.zeros((4, 4), dtype=complex)
        rho[0, 0] = 1
        gates = ("U0", "U2", "U1", "U1", "U0")
        ref = oracles.born_probabilities(gates, us, rho, oracles.computational_effects(2))
        assert np.allclose(simulate(gs, Circuit("c", gates)), ref, atol=1e-10)

    def test_noisy_born_rule(self):
        rng = np.random.default_rng(4)
        params = {lab: unit_noise_draw(1, rng) * 0.05 for lab in IXY.labels}
        noisy = gateset_with_params(IXY, params, offset_spam(1, 0.01))
        gates = tuple(rng.choice(IXY.labels, 30))
        noise = {lab: oracles.noise_1q_map(p) for lab, p in params.items()}
        rho = oracles.offset_rho(0.01)
        effects = [rho, np.eye(2) - rho]
        ref = oracles.born_probabilities(gates, oracles.UNITARIES_1Q["i_x90_y90"], rho, effects, noise)
        got = simulate(noisy, Circuit("c", gates), use_noisy=True)
        assert np.allclose(got, ref, atol=1e-12)
        assert got.sum() == pytest.approx(1, abs=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.sampled_from(["I", "Gx", "Gy"]), max_size=20), st.integers(0, 20))
    def test_identity_insertion(self, gates, pos):
        pos = min(pos, len(gates))
        base = simulate(IXY, Circuit("a", tuple(gates)))
        padded = simulate(IXY, Circuit("b", tuple(gates[:pos] + ["I"] + gates[pos:])))
        assert np.allclose(base, padded, atol=1e-12)


class TestSampling:
    def test_deterministic_outcome(self):
        assert list(sample_counts(np.array([1.0, 0.0]), 100, 3)) == [100, 0]

    def test_binomial_bound(self):
        n = sample_counts(np.array([0.5, 0.5]), 8192, 11)
        assert n.sum() == 8192
        assert abs(n[0] - 4096) <= 5 * np.sqrt(2048)

    def test_same_seed(self):
        p = np.array([0.2, 0.3, 0.1, 0.4])
        assert np.array_equal(sample_counts(p, 1000, 5), sample_counts(p, 1000, 5))

    def test_invalid_probabilities(self):
        with pytest.raises(ValidationError):
            sample_counts(np.array([0.7, 0.7]), 10, 0)
        with pytest.raises(ValidationError):
            sample_counts(np.array([0.5, 0.5]), 0, 0)

    def test_convergence(self):
        p = np.array([0.1, 0.2, 0.3, 0.4])
        shots = 8192
        ok = 0
        for seed in range(100):
            f = sample_counts(p, shots, seed) / shots
            ok += np.abs(f - p).sum() <= 5 * np.sqrt(4 / shots)
        assert ok >= 99


class TestTable:
    def test_exact_mode(self):
        cs = random_circuits(IXY, [4], 5, rng_seed=0)
        noisy = gateset_with_params(IXY, {g: [0.01] * 4 + [0.0] * 3 for g in IXY.labels})
        t = simulate_table(noisy, cs, 0, seed=1)
        assert t.shots == 0 and t.counts is None
        assert np.allclose(t.probs[cs[0].id], simulate(noisy, cs[0], True))

    def test_sampled_mode_reproducible(self):
        cs = random_circuits(IXY, [4], 5, rng_seed=0)
        noisy = gateset_with_params(IXY, {g: [0.01] * 4 + [0.0] * 3 for g in IXY.labels})
        a = simulate_table(noisy, cs, 1000, seed=2)
        b = simulate_table(noisy, cs[::-1], 1000, seed=2)
        for c in cs:
            assert np.array_equal(a.counts[c.id], b.counts[c.id])
            assert a.counts[c.id].sum() == 1000

    def test_null_circuit_ideal_spam_all_zero_outcome(self):
        noisy = gateset_with_params(IXY, {g: [0.01] * 4 + [0.0] * 3 for g in IXY.labels})
        t = simulate_table(noisy, [Circuit(NULL_ID, ())], 8192, seed=3)
        assert list(t.counts[NULL_ID]) == [8192, 0]

    def test_table_validation(self):
        with pytest.raises(ValidationError):
            ProbabilityTable({"a": np.array([0.6, 0.6])})
        with pytest.raises(ValidationError):
            ProbabilityTable.from_counts({"a": np.array([3, 1]), "b": np.array([1, 1])})

    def test_bitstrings(self):
        assert outcome_bitstrings(2) == ["00", "01", "10", "11"]


class TestLengthBudget:
    def test_no_warning(self):
        assert length_budget_check([Circuit("a", ("I",) * 128)], 1e-4) == []

    def test_warning(self):
        w = length_budget_check([Circuit("a", ("I",) * 1000)], 1e-3)
        assert len(w) == 1 and "a" in w[0]

    def test_null_never(self):
        assert length_budget_check([Circuit(NULL_ID, ())], 10.0) == []

    def test_threshold_configurable(self):
        assert len(length_budget_check([Circuit("a", ("I",) * 128)], 1e-4, threshold=0.01)) == 1

    def test_bad_epsilon(self):
        with pytest.raises(ValidationError):
            length_budget_check([], 0.0)
