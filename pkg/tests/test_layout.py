import pytest

from qnet4.layout import (
    INCIDENCE,
    NODES,
    Particle,
    SystemLayout,
    UnknownTopologyError,
    adjacent,
    adhoc,
    bipartitions,
    canonical,
    incidence,
    node_subsets,
    nonempty_subsets,
    particles_of,
)


@pytest.mark.parametrize(
    "topology, n_particles, per_node",
    [("iqn", 8, 2), ("itcn1", 12, 3), ("itcn2", 12, 3)],
)
def test_incidence_counts(topology, n_particles, per_node):
    layout = incidence(topology)
    assert layout.n_network == n_particles
    for node in NODES:
        assert len(layout.node_particles(node)) == per_node


def test_iqn_edges_form_a_cycle():
    edges = {frozenset(nodes) for _, nodes in INCIDENCE["iqn"]}
    assert edges == {frozenset("AD"), frozenset("AB"), frozenset("BC"), frozenset("CD")}
    assert not adjacent("iqn", "A", "C") and not adjacent("iqn", "B", "D")
    assert adjacent("iqn", "A", "B")


def test_itcn_graphs_are_complete():
    for a in NODES:
        for b in NODES:
            if a != b:
                assert adjacent("itcn1", a, b)
                assert adjacent("itcn2", a, b)
    faces = {frozenset(nodes) for _, nodes in INCIDENCE["itcn2"]}
    assert faces == {frozenset(n for n in NODES if n != x) for x in NODES}


def test_node_a_sources_in_itcn2():
    # A is fed by three distinct faces
    feeding = [s for s, nodes in INCIDENCE["itcn2"] if "A" in nodes]
    assert feeding == ["alpha", "beta", "gamma"]


def test_particles_are_source_major():
    layout = incidence("itcn1")
    assert [p.source for p in layout.particles[:4]] == ["alpha", "alpha", "beta", "beta"]
    assert layout.sources == ("alpha", "beta", "gamma", "delta", "theta", "tau")


def test_subsets_and_bipartitions():
    subsets = node_subsets()
    assert len(subsets) == 15 and subsets[0] == "A" and subsets[-1] == "ABCD"
    assert len(nonempty_subsets(3)) == 7
    cuts = bipartitions()
    assert len(cuts) == 7
    assert all("A" in x and set(x) | set(y) == set(NODES) for x, y in cuts)


def test_canonical():
    assert canonical("DCA") == "ACD"
    with pytest.raises(ValueError):
        canonical("")
    with pytest.raises(ValueError):
        canonical("AE")


def test_env_particles_must_come_last():
    layout = incidence("iqn").with_env([3])
    assert layout.particles[-1].is_env and layout.n_network == 8
    assert layout.without_env().dims == (2,) * 8
    bad = (Particle(0, 2, "env", "env"), Particle(1, 2, "s", "A"))
    with pytest.raises(ValueError):
        SystemLayout(bad)


def test_particle_validation():
    with pytest.raises(ValueError):
        Particle(0, 1, "s", "A")
    with pytest.raises(ValueError):
        Particle(0, 2, "env", "A")


def test_unknown_topology():
    with pytest.raises(UnknownTopologyError):
        incidence("triangle")


def test_adhoc_layout():
    layout = adhoc({"A": [2], "B": [2, 3], "D": [2]})
    assert layout.nodes == ("A", "B", "D")
    assert particles_of(layout, "BD") == (1, 2, 3)
    assert layout.node_dim("B") == 6
