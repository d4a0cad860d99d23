import numpy as np
import pytest

from conftest import random_extended_game, random_povm
from enlg import linalg as la
from enlg.bounds import build_hierarchy_sdp, qc_upper_bound, strategy_moment_matrix, word_set
from enlg.errors import InputError, SizeCapError
from enlg.games import (
    QuantumStrategy,
    bb84_extended,
    bb84_monogamy,
    chsh_extended,
    monogamy_to_extended,
    mub_monogamy,
    quantum_value_of_strategy,
)
from enlg.sdpsolver import check_certificate

COS2 = np.cos(np.pi / 8) ** 2


class TestValues:
    def test_bb84_level_one(self):
        res = qc_upper_bound(bb84_extended(), 1)
        assert res.value == pytest.approx(COS2, abs=1e-4)

    def test_chsh_level_one(self):
        assert qc_upper_bound(chsh_extended(), 1).value == pytest.approx(0.75783, abs=1e-4)

    def test_chsh_level_one_plus_ab(self):
        # the extra products already pin the value to the non-signaling optimum
        assert qc_upper_bound(chsh_extended(), "1+AB").value == pytest.approx(0.75, abs=1e-4)

    def test_bb84_from_monogamy_game(self):
        assert qc_upper_bound(monogamy_to_extended(bb84_monogamy())).value == pytest.approx(COS2, abs=1e-4)

    @pytest.mark.slow
    def test_mub_level_one(self):
        assert qc_upper_bound(monogamy_to_extended(mub_monogamy(3, 4))).value == pytest.approx(2 / 3, abs=1e-3)

    def test_monotone_in_level(self):
        g = chsh_extended()
        v1 = qc_upper_bound(g, 1).value
        v2 = qc_upper_bound(g, "1+AB").value
        v3 = qc_upper_bound(g, 2).value
        assert v1 >= v2 - 1e-6 >= v3 - 2e-6

    def test_certificate(self):
        res = qc_upper_bound(chsh_extended(), 1)
        rep = check_certificate(res.problem, res.solution)
        assert rep.ok, rep.violations
        assert rep.gap <= 1e-7


class TestMomentMatrix:
    def test_unit_epsilon_trace(self):
        res = qc_upper_bound(bb84_extended(), 1)
        eps = res.words.index(word_set(bb84_extended(), 1)[0])
        assert sum(res.block(i, i)[eps, eps].real for i in range(2)) == pytest.approx(1.0, abs=1e-8)

    def test_entries_bounded(self):
        res = qc_upper_bound(chsh_extended(), "1+AB")
        assert np.max(np.abs(res.moment)) <= 1 + 1e-6

    def test_psd(self):
        res = qc_upper_bound(bb84_extended(), 1)
        assert np.linalg.eigvalsh(res.moment)[0] >= -1e-7


class TestStrategyMoments:
    def _strategy(self, rng, game, du=2, dv=2):
        m = game.ref_dim
        A = random_povm(rng, game.num_answers_a, game.num_questions_a, du)
        B = random_povm(rng, game.num_answers_b, game.num_questions_b, dv)
        return QuantumStrategy(la.random_density(du * m * dv, rng), A, B)

    @pytest.mark.parametrize("level", [1, "1+AB", 2])
    def test_satisfies_constraints(self, rng, level):
        g = chsh_extended()
        prob, st = build_hierarchy_sdp(g, level)
        M = strategy_moment_matrix(self._strategy(rng, g), st.words)
        np.testing.assert_allclose(prob.apply([M]), prob.rhs, atol=1e-8)

    def test_objective_is_strategy_value(self, rng):
        g = random_extended_game(rng, m=2)
        prob, st = build_hierarchy_sdp(g, 1)
        s = self._strategy(rng, g)
        M = strategy_moment_matrix(s, st.words)
        assert prob.objective_value([M]) == pytest.approx(quantum_value_of_strategy(g, s), abs=1e-10)

    def test_rejects_non_projective(self, rng):
        g = chsh_extended()
        A = np.zeros((2, 2, 2, 2))
        A[0] = A[1] = np.eye(2) / 2
        s = QuantumStrategy(la.random_density(8, rng), A, A)
        with pytest.raises(InputError):
            strategy_moment_matrix(s, word_set(g, 1))


def test_size_cap():
    with pytest.raises(SizeCapError):
        qc_upper_bound(bb84_extended(), 2, size_cap=10)
