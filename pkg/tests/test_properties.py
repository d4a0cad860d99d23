import pytest

import suites


@pytest.fixture(scope="module")
def chain_rows():
    return suites.value_chain(100)


@pytest.mark.parametrize("index", range(4))
def test_value_chain(chain_rows, index):
    rep = suites.chain_reports(chain_rows)[index]
    assert rep.cases >= 100
    assert rep.ok, rep.line()


@pytest.mark.parametrize(
    "suite",
    [suites.projector_norm, suites.honest_moments, suites.teleport, suites.sdp_gap],
    ids=lambda f: f.__name__,
)
def test_suite(suite):
    rep = suite()
    assert rep.ok, rep.line()
