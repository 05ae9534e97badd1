from pathlib import Path

import pytest

import langsim

DATA = Path(__file__).resolve().parents[2] / "data"


def test_tree_round_trip():
    tree = langsim.parse_newick("((A:1,B:1):1,C:2);")
    assert tree.leaf_count == 3
    assert tree.height == pytest.approx(2.0)
    assert sorted(tree.leaf_labels) == ["A", "B", "C"]
    assert langsim.parse_newick(tree.newick()).height == pytest.approx(2.0)


def test_bad_newick_raises():
    with pytest.raises(ValueError):
        langsim.parse_newick("(A:1,B)")


def test_quartet_and_height():
    a = langsim.generate_yule(12, 1.0, seed=3)
    b = langsim.generate_yule(12, 1.0, seed=4)
    assert langsim.quartet_distance(a, a) == 0.0
    assert 0.0 <= langsim.quartet_distance(a, b) <= 1.0
    assert langsim.height_difference(7000.0, 5600.0) == pytest.approx(0.2)


def test_two_language_stationary():
    q = langsim.borrowing_generator(2, 0.5, 0.5)
    for method in ("both", "large_time", "null_space"):
        pi = langsim.stationary_distribution(q, method)
        assert pi == pytest.approx([2 / 9, 2 / 9, 2 / 9, 1 / 3], abs=1e-10)


def test_generate_appendix_config():
    xml = (DATA / "appendix_config.xml").read_text()
    out = langsim.generate(xml, replicate=0, seed=5, meaning_classes=4)
    assert out["data_id"] == "SD"
    assert len(out["taxa"]) == 6
    assert len({len(r) for r in out["rows"]}) == 1
    again = langsim.generate(xml, replicate=0, seed=5, meaning_classes=4)
    assert again["xml"] == out["xml"]
    parsed = langsim.read_alignment(out["xml"])
    assert parsed["rows"] == out["rows"]
    assert parsed["timestamp"] is None


def test_config_error():
    with pytest.raises(langsim.ConfigError):
        langsim.generate("<beast><run/></beast>")


def test_small_suite():
    report = langsim.run_suite("fig2", replicates=2000, seed=1)
    assert report["suite"] == "fig2"
    assert {c["name"] for c in report["checks"]}
    assert all(sum(h) == 2000 for h in report["histograms"].values())


def test_calibration():
    assert langsim.borrowing_rate_for_percentage(0.5) == pytest.approx(0.000693147, rel=1e-6)
    lam, mu = langsim.derive_sd_rates(0.1, 2449)
    assert lam / mu == pytest.approx(2449.0)
