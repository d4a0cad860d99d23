import io

import numpy as np
import pytest

from conftest import cvxpy_value, random_sdp
from enlg import linalg as la
from enlg.bounds import build_nonsignaling_sdp
from enlg.errors import InputError, InvariantError
from enlg.games import chsh_extended
from enlg.sdpsolver import (
    SdpBuilder,
    SdpProblem,
    Status,
    check_certificate,
    embed_real,
    solve,
)


def trace_one(objective):
    n = objective.shape[0]
    return SdpProblem.from_dense([objective], [[np.eye(n)]], [1.0])


class TestSmallProblems:
    def test_projector_objective(self):
        sol = solve(trace_one(np.diag([1.0, 0.0])))
        assert sol.status is Status.OPTIMAL
        assert sol.value == pytest.approx(1.0, abs=1e-7)
        np.testing.assert_allclose(sol.X[0], np.diag([1, 0]), atol=1e-6)

    def test_diagonal_objective(self):
        sol = solve(trace_one(np.diag([1.0, 2.0])))
        assert sol.status is Status.OPTIMAL
        assert sol.value == pytest.approx(2.0, abs=1e-7)

    def test_largest_eigenvalue(self, rng):
        g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        h = g + g.conj().T
        sol = solve(trace_one(h))
        assert sol.value == pytest.approx(np.linalg.eigvalsh(h)[-1], abs=1e-7)

    def test_dual_slack_is_psd_and_consistent(self, rng):
        p = random_sdp(rng, 3, 3, True)
        sol = solve(p)
        rep = check_certificate(p, sol)
        assert rep.ok, rep.violations
        assert rep.max_dual_residual < 1e-7
        assert rep.min_dual_eigenvalue > -1e-7

    def test_nonsignaling_chsh(self):
        p, _ = build_nonsignaling_sdp(chsh_extended())
        sol = solve(p)
        assert sol.status is Status.OPTIMAL
        assert sol.value == pytest.approx(0.75, abs=1e-4)


class TestEmbedding:
    def test_real_problem_unchanged(self, rng):
        p = random_sdp(rng, 3, 2, False)
        q = embed_real(p)
        assert q.block_dims == p.block_dims
        np.testing.assert_allclose(q.objective[0], p.objective[0])
        for j in range(p.num_constraints):
            np.testing.assert_allclose(q.constraint_matrix(j, 0), p.constraint_matrix(j, 0))

    def test_inner_products_preserved(self, rng):
        p = random_sdp(rng, 3, 3, True)
        q = embed_real(p)
        x = la.random_density(3, rng)
        xe = la.real_embedding(x)
        assert q.block_dims == (6,)
        assert q.objective_value([xe]) == pytest.approx(p.objective_value([x]), abs=1e-12)
        np.testing.assert_allclose(q.apply([xe]), p.apply([x]), atol=1e-12)

    def test_same_optimum(self, rng):
        p = random_sdp(rng, 3, 3, True)
        assert solve(embed_real(p)).value == pytest.approx(solve(p).value, abs=1e-7)


class TestCertificate:
    def test_trivial_problem(self):
        p = trace_one(np.diag([1.0, 2.0]))
        rep = check_certificate(p, solve(p))
        assert rep.ok
        assert rep.max_constraint_residual < 1e-10

    def test_perturbed_primal_is_flagged(self):
        p = trace_one(np.diag([1.0, 2.0]))
        sol = solve(p)
        x = sol.X[0].copy()
        x[0, 0] += 1e-3
        bad = type(sol)(**{**sol.__dict__, "X": (x,)})
        rep = check_certificate(p, bad)
        assert not rep.ok
        assert rep.max_constraint_residual == pytest.approx(1e-3, rel=1e-3)
        assert any("constraint 0" in v for v in rep.violations)

    def test_nonsignaling_chsh_gap(self):
        p, _ = build_nonsignaling_sdp(chsh_extended())
        rep = check_certificate(p, solve(p))
        assert rep.gap <= 1e-6


class TestStatus:
    def test_infeasible(self):
        # tr X = -1 has no PSD solution
        p = SdpProblem.from_dense([np.eye(2)], [[np.eye(2)]], [-1.0])
        assert solve(p).status is Status.INFEASIBLE

    def test_max_iter(self, rng):
        sol = solve(random_sdp(rng, 3, 3, True), max_iter=2)
        assert sol.status is Status.MAX_ITER
        assert not sol.optimal

    def test_duplicate_rows_get_zero_multipliers(self):
        p = SdpProblem.from_dense([np.diag([1.0, 2.0])], [[np.eye(2)], [np.eye(2)]], [1.0, 1.0])
        sol = solve(p)
        assert sol.status is Status.OPTIMAL
        assert sol.y[1] == 0.0
        assert sol.value == pytest.approx(2.0, abs=1e-7)

    def test_zero_row_with_nonzero_rhs(self):
        p = SdpProblem.from_dense([np.eye(2)], [[np.eye(2)], [None]], [1.0, 0.5])
        with pytest.raises(InvariantError):
            solve(p)

    def test_rejects_non_hermitian_objective(self):
        with pytest.raises((InputError, InvariantError)):
            SdpProblem.from_dense([np.array([[0.0, 1.0], [0.0, 0.0]])], [[np.eye(2)]], [1.0])

    def test_deterministic(self, rng):
        p = random_sdp(rng, 3, 4, True)
        a, b = solve(p), solve(p)
        assert a.iterations == b.iterations
        assert a.value == b.value


class TestBuilder:
    def test_real_and_imaginary_functionals(self):
        bld = SdpBuilder()
        k = bld.add_block(2)
        bld.add_linear([(k, 0, 0, 1.0, 0.0), (k, 1, 1, 1.0, 0.0)], 1.0)
        bld.add_linear([(k, 0, 1, 0.0, 1.0)], 0.25)  # Im X[0,1] = 1/4
        bld.add_objective(k, np.array([[0, 1], [1, 0]]))
        sol = solve(bld.build())
        x = sol.X[0]
        assert x[0, 1].imag == pytest.approx(0.25, abs=1e-7)
        # maximize 2 Re X01 with |X01|^2 <= X00 X11 <= 1/4
        assert sol.value == pytest.approx(2 * np.sqrt(0.25 - 0.0625), abs=1e-6)

    def test_matrix_equality(self, rng):
        bld = SdpBuilder()
        a = bld.add_block(2)
        b = bld.add_block(2)
        target = la.random_density(2, rng)
        bld.add_matrix_equality([(a, 1.0), (b, 1.0)], target)
        bld.add_objective(a, np.diag([1.0, 0.0]))
        sol = solve(bld.build())
        np.testing.assert_allclose(sol.X[0] + sol.X[1], target, atol=1e-7)
        assert sol.value == pytest.approx(target[0, 0].real, abs=1e-7)


def test_weak_duality_along_iterates(rng):
    p = random_sdp(rng, 3, 3, True)
    buf = io.StringIO()
    solve(p, log=buf)
    rows = [line.split() for line in buf.getvalue().splitlines() if line.strip()[:1].isdigit()]
    checked = 0
    for row in rows:
        pobj, dobj, pres, dres = float(row[1]), float(row[2]), float(row[4]), float(row[5])
        if pres <= 1e-8 and dres <= 1e-8:
            assert pobj <= dobj + 1e-7
            checked += 1
    assert checked >= 1


@pytest.mark.parametrize("case", range(50))
def test_random_sdp_matches_cvxpy(case):
    rng = np.random.default_rng(1000 + case)
    n = int(rng.integers(2, 4))
    k = int(rng.integers(2, 5))
    p = random_sdp(rng, n, k, complex_=bool(case % 2))
    sol = solve(p)
    assert sol.status is Status.OPTIMAL
    assert sol.gap <= 1e-7 * max(1.0, abs(sol.primal_value))
    assert sol.value == pytest.approx(cvxpy_value(p), abs=1e-4)
