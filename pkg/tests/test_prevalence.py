"""Fractional counting, rates, deciles, bin medians and log correlation."""

import math
from fractions import Fraction

import pytest

import brute
from placenet.prevalence import (
    PlaceRecord,
    RegionInfo,
    bin_medians,
    decile_assign,
    fractional_counts,
    load_places_csv,
    load_regions_csv,
    log_pearson,
    per_capita,
)
from placenet.seeding import derive_rng


def region(population=1000, rucc=1, income=50000.0, education=0.3, foreign=0.1):
    return RegionInfo(population, rucc, income, education, foreign)


# ---------------------------------------------------------------------------
# fractional counts


def test_two_categories_split_half_each():
    counts = fractional_counts([PlaceRecord("p", "r", ("bar", "cafe"))])
    assert counts[("r", "bar")] == Fraction(1, 2)
    assert counts[("r", "cafe")] == Fraction(1, 2)
    assert float(counts[("r", "bar")]) == 0.5


def test_single_category_full_weight():
    counts = fractional_counts([PlaceRecord("p", "r", ("park",))])
    assert counts[("r", "park")] == 1


def test_mass_conservation_exact():
    rng = derive_rng(71)
    cats = ["a", "b", "c", "d", "e"]
    records = []
    for i in range(3000):
        k = int(rng.integers(1, 4))
        picks = sorted(rng.choice(len(cats), size=k, replace=False))
        records.append(
            PlaceRecord(f"p{i}", f"r{int(rng.integers(0, 7))}",
                        tuple(cats[j] for j in picks))
        )
    counts = fractional_counts(records)
    assert sum(counts.values()) == Fraction(len(records))


def test_empty_category_set_rejected_with_id():
    with pytest.raises(ValueError, match="p99"):
        fractional_counts([PlaceRecord("p99", "r", ())])


# ---------------------------------------------------------------------------
# per-capita table


def test_per_capita_arithmetic():
    counts = fractional_counts(
        [PlaceRecord(f"p{i}", "r1", ("bar",)) for i in range(5)]
    )
    regions = {"r1": region(population=10_000)}
    table = per_capita(counts, regions)
    assert table[("r1", "bar")].per_1000 == 0.5


def test_per_capita_includes_zero_regions():
    counts = fractional_counts([PlaceRecord("p", "r1", ("bar",))])
    regions = {"r1": region(), "r2": region(population=500)}
    table = per_capita(counts, regions)
    assert table[("r2", "bar")].weighted_count == 0.0
    assert table[("r2", "bar")].per_1000 == 0.0


def test_per_capita_one_page_per_thousand():
    counts = fractional_counts([PlaceRecord("p", "r", ("bar",))])
    table = per_capita(counts, {"r": region(population=1000)})
    assert table[("r", "bar")].per_1000 == 1.0


def test_per_capita_missing_region_error_names_it():
    counts = fractional_counts([PlaceRecord("p", "ghost", ("bar",))])
    with pytest.raises(KeyError, match="ghost"):
        per_capita(counts, {"r": region()})


# ---------------------------------------------------------------------------
# deciles


def test_deciles_ten_distinct_regions():
    values = {f"r{i}": float(i) for i in range(10)}
    deciles = decile_assign(values)
    assert [deciles[f"r{i}"] for i in range(10)] == list(range(1, 11))


def test_decile_single_region_is_ten():
    assert decile_assign({"only": 3.0}) == {"only": 10}


def test_decile_ties_resolved_by_region_id():
    values = {"b": 1.0, "a": 1.0, "c": 1.0}
    deciles = decile_assign(values)
    assert deciles["a"] < deciles["b"] < deciles["c"]


def test_decile_monotone_transform_invariance():
    rng = derive_rng(72)
    values = {f"r{i}": float(v) for i, v in enumerate(rng.uniform(0, 10, size=37))}
    base = decile_assign(values)
    warped = decile_assign({r: math.exp(0.5 * v) - 3 for r, v in values.items()})
    assert base == warped


# ---------------------------------------------------------------------------
# bin medians


def make_table(rates_by_region, cat="bar"):
    records = []
    pid = 0
    # build records so that weighted counts produce the requested rates
    counts = {}
    for r, rate in rates_by_region.items():
        counts[(r, cat)] = Fraction(rate).limit_denominator(10**6)
    regions = {r: region(population=1000, rucc=(i % 9) + 1)
               for i, r in enumerate(sorted(rates_by_region))}
    return per_capita(counts, regions), regions


def test_bin_median_single_region_bins():
    regions = {
        "r1": region(rucc=1),
        "r2": region(rucc=2),
    }
    counts = fractional_counts([
        PlaceRecord("p1", "r1", ("bar",)),
        PlaceRecord("p2", "r2", ("bar",)),
        PlaceRecord("p3", "r2", ("bar",)),
    ])
    table = per_capita(counts, regions)
    med = bin_medians(table, regions, "rucc")
    assert med[1]["bar"] == 1.0
    assert med[2]["bar"] == 2.0


def test_bin_median_odd_and_even_conventions():
    regions = {f"r{i}": region(rucc=1) for i in range(4)}
    counts = {}
    for i, v in enumerate([1, 2, 3, 4]):
        counts[(f"r{i}", "x")] = Fraction(v)
    table = per_capita(counts, regions)
    med = bin_medians(table, regions, "rucc")
    assert med[1]["x"] == 2.0  # lower of the two middles

    regions3 = {f"s{i}": region(rucc=2) for i in range(3)}
    counts3 = {(f"s{i}", "x"): Fraction(v) for i, v in enumerate([1, 2, 3])}
    med3 = bin_medians(per_capita(counts3, regions3), regions3, "rucc")
    assert med3[2]["x"] == 2.0


def test_bin_medians_demographic_deciles():
    regions = {f"r{i}": region(income=1000.0 * (i + 1)) for i in range(10)}
    counts = {(f"r{i}", "y"): Fraction(i + 1) for i in range(10)}
    table = per_capita(counts, regions)
    med = bin_medians(table, regions, "income_decile")
    assert set(med) == set(range(1, 11))
    assert med[1]["y"] == 1.0
    assert med[10]["y"] == 10.0


def test_bin_medians_permutation_invariance():
    rng = derive_rng(73)
    names = [f"r{i}" for i in range(12)]
    regions = {r: region(rucc=int(rng.integers(1, 10))) for r in names}
    counts = {(r, "z"): Fraction(int(rng.integers(0, 50)), 7) for r in names}
    table = per_capita(counts, regions)
    base = bin_medians(table, regions, "rucc")
    shuffled = dict(reversed(list(regions.items())))
    again = bin_medians(table, shuffled, "rucc")
    assert base == again


def test_bin_key_validation():
    with pytest.raises(ValueError):
        bin_medians({}, {}, "nonsense")


# ---------------------------------------------------------------------------
# log correlation


def test_log_pearson_exact_scaling():
    x = {f"r{i}": float(i + 1) for i in range(20)}
    y = {r: 3.0 * v for r, v in x.items()}
    result = log_pearson(x, y)
    assert result.r == pytest.approx(1.0, abs=1e-12)
    assert result.n_pairs == 20
    assert result.n_dropped == 0


def test_log_pearson_drops_nonpositive_and_reports():
    x = {"a": 1.0, "b": 2.0, "c": 0.0, "d": 4.0}
    y = {"a": 2.0, "b": 4.0, "c": 5.0, "d": -1.0}
    result = log_pearson(x, y)
    assert result.n_pairs == 2
    assert result.n_dropped == 2


def test_log_pearson_synthetic_noise():
    rng = derive_rng(74)
    x = {f"r{i}": float(v) for i, v in enumerate(rng.uniform(1, 500, size=60))}
    y = {r: v * math.exp(float(rng.normal(0, 0.1))) for r, v in x.items()}
    result = log_pearson(x, y)
    assert result.r >= 0.95
    oracle = brute.pearson(
        [math.log(x[r]) for r in sorted(x)], [math.log(y[r]) for r in sorted(y)]
    )
    assert result.r == pytest.approx(oracle, abs=1e-12)


def test_log_pearson_errors():
    with pytest.raises(ValueError):
        log_pearson({"a": 1.0}, {"a": 2.0})
    with pytest.raises(ValueError):
        log_pearson({"a": 2.0, "b": 2.0}, {"a": 3.0, "b": 5.0})


# ---------------------------------------------------------------------------
# validation and loaders


def test_region_info_validation():
    with pytest.raises(ValueError):
        RegionInfo(0, 1, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        RegionInfo(10, 12, 1.0, 1.0, 1.0)


def test_places_csv_loader(tmp_path):
    path = tmp_path / "places.csv"
    path.write_text(
        "page_id,region_id,categories\n"
        "p1,r1,bar;cafe\n"
        "p2,r2,park\n"
    )
    records = load_places_csv(str(path))
    assert records[0].categories == ("bar", "cafe")
    assert records[1].region_id == "r2"

    bad = tmp_path / "bad.csv"
    bad.write_text("page_id,region_id,categories\npX,r1,;\n")
    with pytest.raises(ValueError, match="pX"):
        load_places_csv(str(bad))


def test_regions_csv_loader(tmp_path):
    path = tmp_path / "regions.csv"
    path.write_text(
        "region_id,population,rucc,income,education,foreign_born_share\n"
        "r1,1000,3,50000,0.25,0.08\n"
    )
    regions = load_regions_csv(str(path))
    assert regions["r1"].rucc == 3

    bad = tmp_path / "bad.csv"
    bad.write_text(
        "region_id,population,rucc,income,education,foreign_born_share\n"
        "r1,1000,99,50000,0.25,0.08\n"
    )
    with pytest.raises(ValueError, match="line 2"):
        load_regions_csv(str(bad))
