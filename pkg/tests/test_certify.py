import numpy as np
import pytest

from qnet4 import certify
from qnet4 import tolerances as tol
from qnet4.layout import INCIDENCE
from qnet4.netbuild import NetworkState, SourceSpec, bell_source, build_network, random_network

# Rank tables written out by hand, keyed by the kept node subset. A bare
# source name is the rank of the whole source; "x^Y" is the rank of source x
# reduced to the nodes Y.
RANK_TABLES = {
    "iqn": {
        "A": "alpha^A beta^A",
        "B": "beta^B gamma^B",
        "C": "gamma^C delta^C",
        "D": "alpha^D delta^D",
        "AB": "alpha^A beta gamma^B",
        "BD": "alpha^D beta^B gamma^B delta^D",
        "AD": "alpha beta^A delta^D",
        "BC": "beta^B gamma delta^C",
        "AC": "alpha^A beta^A gamma^C delta^C",
        "CD": "alpha^D gamma^C delta",
        "BCD": "alpha^D beta^B gamma delta",
        "ACD": "alpha beta^A gamma^C delta",
        "ABD": "alpha beta gamma^B delta^D",
        "ABC": "alpha^A beta gamma delta^C",
        "ABCD": "alpha beta gamma delta",
    },
    "itcn1": {
        "A": "alpha^A gamma^A delta^A",
        "B": "alpha^B beta^B tau^B",
        "C": "delta^C theta^C tau^C",
        "D": "beta^D gamma^D theta^D",
        "AB": "alpha beta^B gamma^A delta^A tau^B",
        "BD": "alpha^B beta gamma^D theta^D tau^B",
        "AD": "alpha^A beta^D gamma delta^A theta^D",
        "BC": "alpha^B beta^B delta^C theta^C tau",
        "AC": "alpha^A gamma^A delta theta^C tau^C",
        "CD": "beta^D gamma^D delta^C theta tau^C",
        "BCD": "alpha^B beta gamma^D delta^C theta tau",
        "ACD": "alpha^A beta^D gamma delta theta tau^C",
        "ABD": "alpha beta gamma delta^A theta^D tau^B",
        "ABC": "alpha beta^B gamma^A delta theta^C tau",
        "ABCD": "alpha beta gamma delta theta tau",
    },
    "itcn2": {
        "A": "alpha^A beta^A gamma^A",
        "B": "alpha^B beta^B delta^B",
        "C": "beta^C gamma^C delta^C",
        "D": "alpha^D gamma^D delta^D",
        "AB": "alpha^AB beta^AB gamma^A delta^B",
        "BD": "alpha^BD beta^B gamma^D delta^BD",
        "AD": "alpha^AD beta^A gamma^AD delta^D",
        "BC": "alpha^B beta^BC gamma^C delta^BC",
        "AC": "alpha^A beta^AC gamma^AC delta^C",
        "CD": "alpha^D beta^C gamma^CD delta^CD",
        "BCD": "alpha^BD beta^BC gamma^CD delta",
        "ACD": "alpha^AD beta^AC gamma delta^CD",
        "ABD": "alpha beta^AB gamma^AD delta^BD",
        "ABC": "alpha^AB beta gamma^AC delta^BC",
        "ABCD": "alpha beta gamma delta",
    },
}


def _factor_set(topology, text):
    nodes_of = dict(INCIDENCE[topology])
    out = set()
    for item in text.split():
        label, _, kept = item.partition("^")
        out.add((label, kept or nodes_of[label]))
    return out


@pytest.mark.parametrize("topology", ["iqn", "itcn1", "itcn2"])
def test_expected_rank_factors_match_hand_tables(topology):
    arities = [len(n) for _, n in INCIDENCE[topology]]
    table = certify.expected_rank_table(topology, [SourceSpec(a) for a in arities])
    for subset, text in RANK_TABLES[topology].items():
        got = set(table.factors[subset])
        if subset == "ABCD":
            # the four-node marginal of a purified network is the global state
            got = set(table.factors["global"])
        assert got == _factor_set(topology, text), subset


def test_expected_rank_values(rng):
    specs = [
        SourceSpec(2, 2, "mixed", 3, (2, 2)),
        SourceSpec(2, 2, "pure", 1, (1, 1)),
        SourceSpec(2, 2, "mixed", 2, (1, 2)),
        SourceSpec(2, 2),
    ]
    t = certify.expected_rank_table("iqn", specs)
    # alpha (AD) rank 3, beta product, gamma (BC) rank 2 with B-rank 1, delta pure
    assert t.expected["global"] == 3 * 1 * 2 * 1
    assert t.expected["A"] == 2 * 1
    assert t.expected["AB"] == 2 * 1 * 1
    assert t.expected["ABD"] == 3 * 1 * 1 * 2
    assert t.expected["BD"] == 2 * 1 * 1 * 2


@pytest.mark.parametrize("topology", ["iqn", "itcn1", "itcn2"])
def test_rank_table_check(topology):
    rep = certify.check_rank_table(topology, 3, seed=7)
    assert rep.passed, rep.failures


def test_rank_mismatch_reported():
    t = certify.RankTable({"A": 2, "global": 1}, {}, {}, observed={"A": 4, "global": 1})
    assert t.mismatches() == {"A": (2, 4)}


def test_log_negativity_oracles():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert certify.log_negativity(np.outer(bell, bell), (2, 2), [0]) == pytest.approx(1.0)
    assert certify.log_negativity_pure(bell, (2, 2), [0]) == pytest.approx(1.0)
    assert certify.log_negativity(np.diag([0.5, 0, 0, 0.5]), (2, 2), [0]) == pytest.approx(0.0, abs=1e-12)
    assert certify.log_negativity(np.eye(4) / 4, (2, 2), [1]) == pytest.approx(0.0, abs=1e-12)


def test_pure_and_dense_log_negativity_agree(rng):
    state = random_network("iqn", rng)
    dense = NetworkState.from_density(state.density(), state.layout)
    for node in "ABCD":
        assert certify.node_log_negativity(state, "ABCD", node) == pytest.approx(
            certify.node_log_negativity(dense, "ABCD", node), abs=1e-10
        )


def test_bell_network_log_negativity_is_additive():
    state = build_network("iqn", [bell_source()] * 4)
    whole, parts = certify.additivity_gap(state, "iqn", "A")
    assert whole == pytest.approx(2.0) and parts == pytest.approx(2.0)


def test_additivity_terms():
    assert certify.additivity_terms("iqn", "A") == [("AB", "A"), ("AD", "A")]
    assert len(certify.additivity_terms("itcn1", "C")) == 3
    assert certify.additivity_terms("itcn2", "D") == [("ABD", "D"), ("ACD", "D"), ("BCD", "D")]


def test_generic_itcn2_additivity_gap_is_logged_not_asserted():
    rep = certify.check_additivity("itcn2", 2, seed=1, generic_itcn2_trials=2)
    assert rep.passed
    assert len(rep.notes) == 2 and all(not n["asserted"] for n in rep.notes)
    assert any(abs(g) > 1e-3 for n in rep.notes for g in n["gap_by_node"].values())


def test_ghz4_and_w4_are_gme_product_is_not():
    assert certify.gme_check(certify.ghz4())
    w = np.zeros(16)
    w[[1, 2, 4, 8]] = 0.5
    assert certify.gme_check(w)
    biseparable = np.kron(np.array([1, 0, 0, 1]) / np.sqrt(2), np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert not certify.gme_check(biseparable)
    with pytest.raises(ValueError):
        certify.gme_check(np.ones(16))
    with pytest.raises(ValueError):
        certify.gme_check(np.ones(8) / np.sqrt(8))


@pytest.mark.parametrize("topology", ["iqn", "itcn1", "itcn2"])
def test_gme_witness_unsat(topology):
    rep = certify.gme_witness(topology)
    assert rep.passed
    assert rep.records[0]["value"] == "UNSAT"
    assert rep.metadata["assignments_checked"] == 2 ** len(INCIDENCE[topology])
    assert certify.witness_verdict(certify.ghz4(), topology) == "INCOMPATIBLE"


def test_witness_is_inconclusive_for_non_gme():
    psi = np.zeros(16)
    psi[0] = 1
    assert certify.witness_verdict(psi, "iqn") == "INCONCLUSIVE"


@pytest.mark.parametrize("topology", ["iqn", "itcn1", "itcn2"])
def test_i4_zero_check(topology):
    rep = certify.check_i4_zero(topology, 4, seed=3)
    assert rep.passed
    assert rep.records[1]["value"] == pytest.approx(2.0)


def test_i4_zero_check_detects_violations():
    # tightening the tolerance below round-off makes the same check fail
    with tol.overridden(I4_ZERO=0.0):
        rep = certify.check_i4_zero("itcn1", 3, seed=3)
    assert not rep.passed and rep.failures


def test_channel_and_bounds_checks():
    assert certify.check_channel_signs(1, seed=2).passed
    rep = certify.check_three_channel_bounds(5, seed=2)
    assert rep.passed
    labels = {r["label"] for r in rep.records}
    assert "max i3[BC:A:D]" in labels and "min(upper - i4)" in labels


def test_bounds_with_identity_channels_are_tight():
    rep = certify.check_three_channel_bounds(3, seed=4, identity=True)
    assert rep.passed
    assert rep.records[-1]["label"] == "identity_max_abs"
    assert rep.records[-1]["value"] < 1e-9


def test_three_channel_quantities_on_bell_network():
    q = certify.three_channel_quantities(build_network("iqn", [bell_source()] * 4))
    assert all(abs(v) < 1e-9 for v in q.values())


def test_selftests():
    assert certify.ssa_selftest(10, seed=0).passed
    assert certify.check_identities(10, seed=0).passed
    assert certify.check_structural("iqn", 3, seed=0).passed


def test_trial_rng_is_counter_based():
    a = certify.trial_rng(42, "ranks", 3).random(4)
    b = certify.trial_rng(42, "ranks", 3).random(4)
    c = certify.trial_rng(42, "ranks", 4).random(4)
    d = certify.trial_rng(42, "bounds", 3).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


def test_report_roundtrips_to_dict():
    rep = certify.check_gme("iqn")
    d = rep.to_dict()
    assert d["passed"] is True and d["name"] == "gme"


@pytest.mark.parametrize("topology", ["iqn", "itcn1", "itcn2"])
def test_ghz_control_has_two_bits_of_i4(topology):
    state = certify.ghz_control(topology)
    assert certify.mutual_information(state, "ABCD").value == pytest.approx(2.0)
