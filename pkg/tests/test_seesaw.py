import itertools

import numpy as np
import pytest

from conftest import random_extended_game
from enlg import linalg as la
from enlg.bounds import extract_alice_povm, qc_upper_bound, seesaw_lower_bound, unentangled_value
from enlg.errors import InputError
from enlg.games import ExtendedGame, bb84_extended, monogamy_to_extended, mub_monogamy

THETA = np.pi / 8


def breidbart(theta):
    return [
        la.projector(np.array([np.cos(theta), np.sin(theta)])),
        la.projector(np.array([-np.sin(theta), np.cos(theta)])),
    ]


def breidbart_distance(A):
    """Operator-norm distance to the nearest Breidbart basis, relabeling answers per question.

    Conjugating by Z fixes the computational basis and swaps |+> with |->,
    so both orientations +-pi/8 are optimal.
    """
    def per_question(x, basis):
        return min(
            max(np.linalg.norm(A[p[a], x] - basis[a], 2) for a in range(2))
            for p in itertools.permutations(range(2))
        )

    return min(max(per_question(x, basis) for x in range(2)) for basis in (breidbart(THETA), breidbart(-THETA)))


@pytest.fixture(scope="module")
def bb84():
    return seesaw_lower_bound(bb84_extended(), restarts=4, seed=0)


def test_bb84_value(bb84):
    assert bb84.value == pytest.approx(np.cos(THETA) ** 2, abs=1e-4)
    assert abs(bb84.value - bb84.objective) <= 1e-6


def test_bb84_alice_measures_breidbart_basis(bb84):
    A = bb84.alice_povm
    assert breidbart_distance(A) <= 1e-2
    # the same projector answers 0 on question 0 and 1 on question 1
    np.testing.assert_allclose(A[0, 0], A[1, 1], atol=1e-2)


def test_extracted_operators_form_povms(bb84):
    for povm in (bb84.alice_povm, bb84.bob_povm):
        d = povm.shape[-1]
        for x in range(povm.shape[1]):
            np.testing.assert_allclose(povm[:, x].sum(axis=0), np.eye(d), atol=1e-6)
            for a in range(povm.shape[0]):
                assert np.linalg.eigvalsh(povm[a, x])[0] >= -1e-6


def test_history(bb84):
    assert len(bb84.history) == 4
    assert bb84.restarts_used == 4
    assert bb84.history[bb84.best_restart].value == pytest.approx(bb84.objective)


def test_deterministic():
    a = seesaw_lower_bound(bb84_extended(), restarts=2, seed=7)
    b = seesaw_lower_bound(bb84_extended(), restarts=2, seed=7)
    assert a.value == b.value


def test_trivial_game_is_won():
    V = np.zeros((2, 2, 2, 2, 2, 2))
    V[:, :, :, :] = np.eye(2)
    res = seesaw_lower_bound(ExtendedGame(np.full((2, 2), 0.25), V), restarts=1)
    assert res.value == pytest.approx(1.0, abs=1e-6)


def test_extraction_recovers_product_measurement(rng):
    # rho_a^x = (A_a^x (x) I)^(1/2) tau (A_a^x (x) I)^(1/2) with tau a product state
    tau_r = la.random_density(2, rng)
    tau = np.kron(tau_r, np.eye(2) / 2)
    u = la.random_unitary(2, rng)
    A = np.array([[la.projector(u[:, 0])], [la.projector(u[:, 1])]])
    root = la.psd_sqrt(tau_r)
    rho = np.array([[np.kron(root @ A[a, 0] @ root, np.eye(2) / 2)] for a in range(2)])
    out = extract_alice_povm(rho, tau, 2, 2)
    np.testing.assert_allclose(out, A, atol=1e-8)


def test_bob_start_reaches_unentangled_value(rng):
    g = random_extended_game(rng, m=2)
    ue = unentangled_value(g)
    res = seesaw_lower_bound(g, restarts=1, bob_dim=2, bob_start=ue.g_fn)
    assert res.value >= ue.value - 1e-6
    assert res.value <= qc_upper_bound(g).value + 1e-6


def test_rejects_bad_arguments():
    with pytest.raises(InputError):
        seesaw_lower_bound(bb84_extended(), restarts=0)
    with pytest.raises(InputError):
        seesaw_lower_bound(bb84_extended(), restarts=1, bob_start=(0, 5))


@pytest.mark.slow
def test_mub_lower_bound():
    res = seesaw_lower_bound(monogamy_to_extended(mub_monogamy(3, 4)), restarts=8, seed=0)
    assert res.value >= 0.66
    assert res.value <= 2 / 3 + 1e-3
