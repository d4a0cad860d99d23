import numpy as np
import pytest

from conftest import random_extended_game, random_povm
from enlg import linalg as la
from enlg.bounds import nonsignaling_value, unentangled_value
from enlg.errors import InputError, InvariantError, SizeCapError
from enlg.games import (
    Assemblage,
    ExtendedGame,
    MonogamyGame,
    QuantumStrategy,
    assemblage_value,
    bb84_extended,
    bb84_monogamy,
    chsh_extended,
    monogamy_to_extended,
    mub_monogamy,
    parallel_repeat,
    quantum_value_of_strategy,
    strategy_assemblage,
)

E00 = np.diag([1.0, 0.0])
E11 = np.diag([0.0, 1.0])


def product_state(*parts):
    return la.kron_all(parts)


class TestValidation:
    def test_distribution_must_sum_to_one(self):
        with pytest.raises(InvariantError, match="sums to"):
            ExtendedGame(np.full((1, 1), 0.9), np.zeros((1, 1, 1, 1, 2, 2)))

    def test_operator_above_identity(self):
        V = np.zeros((1, 1, 1, 1, 2, 2))
        V[0, 0, 0, 0] = 2 * E00
        with pytest.raises(InvariantError, match="0 <= V <= I"):
            ExtendedGame(np.ones((1, 1)), V)

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            ExtendedGame(np.ones((1, 1)), np.zeros((1, 1, 2, 1, 2, 2)))

    def test_monogamy_completeness(self):
        R = np.zeros((2, 1, 2, 2))
        R[0, 0] = E00
        with pytest.raises(InvariantError, match=r"R\(\.\|0\)"):
            MonogamyGame(np.ones(1), R)

    def test_strategy_state_trace(self):
        A = np.eye(1).reshape(1, 1, 1, 1)
        with pytest.raises(InvariantError):
            QuantumStrategy(2 * np.eye(2) / 2, A, A)

    def test_assemblage_trace(self):
        K = np.zeros((1, 1, 1, 1, 2, 2))
        K[0, 0, 0, 0] = E00 / 2
        with pytest.raises(InvariantError):
            Assemblage(K)

    def test_arrays_are_read_only(self):
        g = bb84_monogamy()
        with pytest.raises(ValueError):
            g.R[0, 0, 0, 0] = 3


class TestConversion:
    def test_bb84_operators(self):
        g = bb84_extended()
        assert g.V.shape == (2, 2, 2, 2, 2, 2)
        nonzero = [idx for idx in np.ndindex(2, 2, 2, 2) if g.V[idx].any()]
        assert nonzero == [(0, 0, 0, 0), (0, 0, 1, 1), (1, 1, 0, 0), (1, 1, 1, 1)]
        np.testing.assert_allclose(g.V[0, 0, 0, 0], E00)
        np.testing.assert_allclose(g.V[1, 1, 0, 0], E11)
        np.testing.assert_allclose(g.V[0, 0, 1, 1], np.full((2, 2), 0.5), atol=1e-15)
        np.testing.assert_allclose(g.pi, np.diag([0.5, 0.5]))

    def test_single_question_single_answer(self):
        g = monogamy_to_extended(MonogamyGame(np.ones(1), np.eye(2).reshape(1, 1, 2, 2)))
        assert g.V.shape[:4] == (1, 1, 1, 1)
        np.testing.assert_allclose(g.V[0, 0, 0, 0], np.eye(2))

    def test_row_sums_recover_distribution(self):
        g = mub_monogamy(3, 4)
        np.testing.assert_allclose(monogamy_to_extended(g).pi.sum(axis=1), g.pi)


class TestStrategyValue:
    def test_zero_game(self, rng):
        g = ExtendedGame(np.full((2, 2), 0.25), np.zeros((2, 2, 2, 2, 2, 2)))
        A = random_povm(rng, 2, 2, 2)
        s = QuantumStrategy(la.random_density(8, rng), A, A)
        assert quantum_value_of_strategy(g, s) == 0.0

    def test_bb84_optimal_strategy(self):
        # Alice and Bob both measure the Breidbart basis of a product state;
        # the referee holds the eigenvector of the weighted operator.
        theta = np.pi / 8
        b0 = np.array([np.cos(theta), np.sin(theta)])
        b1 = np.array([-np.sin(theta), np.cos(theta)])
        A = np.zeros((2, 2, 1, 1))
        A[0, :, 0, 0] = 1.0  # both always answer 0
        s = QuantumStrategy(la.projector(b0), A, A)
        assert quantum_value_of_strategy(bb84_extended(), s) == pytest.approx(np.cos(theta) ** 2, abs=1e-12)
        s = QuantumStrategy(la.projector(b1), A, A)
        assert quantum_value_of_strategy(bb84_extended(), s) == pytest.approx(np.sin(theta) ** 2, abs=1e-12)

    def test_product_strategy_matches_unentangled_evaluation(self, rng):
        g = random_extended_game(rng, m=2, nq=2, na=2)
        f, h = (1, 0), (0, 1)
        A = np.zeros((2, 2, 2, 2))
        B = np.zeros((2, 2, 3, 3))
        for x in range(2):
            A[f[x], x] = np.eye(2)
            B[h[x], x] = np.eye(3)
        rho_r = la.random_density(2, rng)
        s = QuantumStrategy(product_state(la.random_density(2, rng), rho_r, la.random_density(3, rng)), A, B)
        op = sum(g.pi[x, y] * g.V[f[x], h[y], x, y] for x in range(2) for y in range(2))
        assert quantum_value_of_strategy(g, s) == pytest.approx(np.real(np.trace(op @ rho_r)), abs=1e-12)

    def test_dimension_mismatch(self, rng):
        A = random_povm(rng, 2, 2, 2)
        s = QuantumStrategy(la.random_density(12, rng), A, A)  # referee dimension 3
        with pytest.raises(InputError):
            quantum_value_of_strategy(bb84_extended(), s)

    @pytest.mark.parametrize("case", range(100))
    def test_matches_assemblage_value(self, case):
        rng = np.random.default_rng(500 + case)
        m, nq, na = (int(v) for v in rng.integers(1, 4, size=3))
        g = random_extended_game(rng, m=m, nq=nq, na=na)
        du, dv = (int(v) for v in rng.integers(1, 4, size=2))
        s = QuantumStrategy(
            la.random_density(du * m * dv, rng), random_povm(rng, na, nq, du), random_povm(rng, na, nq, dv)
        )
        K = strategy_assemblage(g, s)
        direct = quantum_value_of_strategy(g, s)
        assert direct == pytest.approx(assemblage_value(g, Assemblage(K)), abs=1e-10)
        assert -1e-9 <= direct <= 1 + 1e-9


class TestAssemblageValue:
    def test_zero_game(self):
        K = np.zeros((1, 1, 1, 1, 2, 2))
        K[0, 0, 0, 0] = np.eye(2) / 2
        g = ExtendedGame(np.ones((1, 1)), np.zeros((1, 1, 1, 1, 2, 2)))
        assert assemblage_value(g, Assemblage(K)) == 0.0

    def test_nonsignaling_optimum_of_chsh(self):
        res = nonsignaling_value(chsh_extended())
        assert assemblage_value(chsh_extended(), res.assemblage) == pytest.approx(0.75, abs=1e-4)


class TestParallelRepeat:
    def test_single_round_is_identity(self):
        g = mub_monogamy(3, 4)
        r = parallel_repeat(g, 1)
        np.testing.assert_array_equal(r.R, g.R)
        np.testing.assert_array_equal(r.pi, g.pi)

    def test_bb84_squared_shape(self):
        r = parallel_repeat(bb84_monogamy(), 2)
        assert (r.num_questions, r.num_answers, r.ref_dim) == (4, 4, 4)
        assert r.R.shape[:2] == (4, 4)  # 16 operators

    def test_round_order(self):
        g = bb84_monogamy()
        r = parallel_repeat(g, 2)
        # answers (1, 0) on questions (0, 1)
        np.testing.assert_allclose(r.R[1 * 2 + 0, 0 * 2 + 1], np.kron(g.R[1, 0], g.R[0, 1]))
        np.testing.assert_allclose(r.pi, np.full(4, 0.25))

    @pytest.mark.parametrize("r", [2, 3])
    def test_completeness(self, r):
        g = parallel_repeat(mub_monogamy(2, 3), r)
        for x in range(g.num_questions):
            np.testing.assert_allclose(g.R[:, x].sum(axis=0), np.eye(2**r), atol=1e-12)

    def test_size_cap(self):
        with pytest.raises(SizeCapError):
            parallel_repeat(bb84_monogamy(), 3, size_cap=16)

    def test_nonsignaling_value_of_square(self):
        g = monogamy_to_extended(parallel_repeat(bb84_monogamy(), 2))
        assert nonsignaling_value(g).value == pytest.approx(0.7383, abs=1e-3)


def test_conversion_preserves_unentangled_value():
    from enlg.bounds import monogamy_unentangled_value

    for g in (bb84_monogamy(), mub_monogamy(3, 4), mub_monogamy(2, 3)):
        assert unentangled_value(monogamy_to_extended(g)).value == pytest.approx(
            monogamy_unentangled_value(g).value, abs=1e-9
        )
