"""Synthetic generator determinism, degenerate cases and archetype configs."""

import pytest

from placenet.features import (
    avg_clustering,
    avg_path_length_lcc,
    k_core_components,
)
from placenet.generators import (
    ArchetypeSpec,
    gen_core_periphery,
    gen_dyad_triad_scatter,
    gen_er,
    gen_multi_core_community,
)
from placenet.graph import connected_components


def test_er_p0_is_edgeless_with_all_nodes():
    g = gen_er(7, 0.0, seed=1)
    assert g.node_count() == 7
    assert g.edge_count() == 0


def test_er_p1_is_complete():
    g = gen_er(6, 1.0, seed=1)
    assert g.edge_count() == 15


def test_er_same_seed_identical():
    assert gen_er(30, 0.2, seed=5) == gen_er(30, 0.2, seed=5)
    assert gen_er(30, 0.2, seed=5) != gen_er(30, 0.2, seed=6)


def test_er_graph_invariants():
    g = gen_er(25, 0.3, seed=2)
    for u in g.nodes():
        assert u not in g.neighbors(u)
        for v in g.neighbors(u):
            assert u in g.neighbors(v)


def test_core_periphery_degenerate_complete_core():
    g = gen_core_periphery(5, 4, 1.0, 0.0, 0.0, seed=3)
    core = [u for u in g.nodes() if u.startswith("c")]
    peri = [u for u in g.nodes() if u.startswith("p")]
    assert len(core) == 5 and len(peri) == 4
    assert g.edge_count() == 10  # K5 plus isolated periphery
    assert all(g.degree(u) == 0 for u in peri)


def test_core_periphery_no_core_is_er():
    g = gen_core_periphery(0, 12, 1.0, 0.5, 0.1, seed=4)
    assert g.node_count() == 12
    assert all(u.startswith("p") for u in g.nodes())


def test_core_periphery_two_core_forms_single_component():
    hits = 0
    for seed in range(40):
        g = gen_core_periphery(8, 16, 1.0, 0.5, 0.0, seed=seed)
        if k_core_components(g, 2) == 1:
            hits += 1
    assert hits >= 38


def test_dyad_scatter_all_dyads():
    g = gen_dyad_triad_scatter(5, 1.0, seed=5)
    assert g.edge_count() == 5
    assert len(connected_components(g)) == 5


def test_triad_scatter_all_triangles():
    g = gen_dyad_triad_scatter(4, 0.0, seed=6)
    assert g.edge_count() == 12
    assert avg_clustering(g) == 1.0


def test_scatter_path_length_always_one():
    for seed in range(5):
        g = gen_dyad_triad_scatter(8, 0.5, seed=seed)
        assert avg_path_length_lcc(g) == 1.0


def test_multi_core_disjoint_cliques():
    g = gen_multi_core_community(3, 6, 1.0, 0.0, seed=7)
    assert k_core_components(g, 4) == 3
    assert len(connected_components(g)) == 3


def test_parameter_validation():
    with pytest.raises(ValueError):
        gen_er(5, 1.5)
    with pytest.raises(ValueError):
        gen_er(-1, 0.5)
    with pytest.raises(ValueError):
        gen_core_periphery(3, 3, 0.5, -0.1, 0.0)


def test_archetype_round_trip_and_build():
    spec = ArchetypeSpec.from_items(
        {"kind": "core_periphery", "n_core": "4", "n_periphery": "6",
         "p_cc": "1.0", "p_cp": "0.0", "p_pp": "0.0"},
        seed=11,
    )
    g = spec.build()
    assert g == gen_core_periphery(4, 6, 1.0, 0.0, 0.0, seed=11)
    items = spec.to_items()
    assert items["kind"] == "core_periphery"
    rebuilt = ArchetypeSpec.from_items(items, seed=11)
    assert rebuilt.build() == g


def test_archetype_validation_errors():
    with pytest.raises(ValueError, match="kind"):
        ArchetypeSpec.from_items({"n": "5"}, seed=0)
    with pytest.raises(ValueError, match="unknown archetype"):
        ArchetypeSpec.from_items({"kind": "mystery"}, seed=0)
    with pytest.raises(ValueError, match="missing parameter"):
        ArchetypeSpec.from_items({"kind": "erdos_renyi", "n": "5"}, seed=0)
    with pytest.raises(ValueError, match="unknown parameters"):
        ArchetypeSpec.from_items(
            {"kind": "erdos_renyi", "n": "5", "p": "0.1", "zzz": "1"}, seed=0
        )
