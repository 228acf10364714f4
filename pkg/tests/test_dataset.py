import random

import pytest
from hypothesis import given, strategies as st

from espm.dataset import BinningSpec, Dataset, ItemCatalog, bin_numeric, label_counts, load_csv
from espm.errors import BinningError, EmptyInputError, ParseError, SchemaError


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_d0(self, d0_csv):
        ds = load_csv(d0_csv, "class")
        assert len(ds) == 6
        assert ds.label_names == ("+", "-")
        assert label_counts(ds) == [4, 2]
        assert ds.catalog.entries == (("a", "1"), ("b", "1"), ("c", "1"))
        assert ds.transactions == ((0, 1, 2), (0, 1), (0, 2), (1, 2), (1,), (0, 2))

    def test_class_column_only(self, tmp_path):
        ds = load_csv(write(tmp_path, "class\nx\ny\nx\n"), "class")
        assert ds.transactions == ((), (), ())
        assert len(ds.catalog) == 0
        assert label_counts(ds) == [2, 1]

    def test_adult_shape_with_binning(self, tmp_path):
        rng = random.Random(1)
        reals = [f"r{i}" for i in range(6)]
        nominals = [f"n{i}" for i in range(8)]
        lines = [",".join(reals + nominals + ["income"])]
        for _ in range(50):
            cells = [f"{rng.uniform(0, 100):.3f}" for _ in reals]
            cells += [rng.choice(["x", "y", "z"]) for _ in nominals]
            lines.append(",".join(cells + [rng.choice([">50K", "<=50K"])]))
        ds = load_csv(write(tmp_path, "\n".join(lines) + "\n"), "income", binning=BinningSpec("equal-width", 4))
        assert len(ds.attributes) == 14
        assert all(len(t) == 14 for t in ds.transactions)
        for attr in reals:
            values = {v for a, v in ds.catalog.entries if a == attr}
            assert 1 < len(values) <= 4
            assert all(v[0] in "[(" for v in values)

    def test_numeric_kept_nominal_without_binning(self, tmp_path):
        ds = load_csv(write(tmp_path, "x,c\n1.5,a\n2,b\n"), "c")
        assert ds.catalog.entries == (("x", "1.5"), ("x", "2"))

    def test_missing_cells_produce_no_item(self, tmp_path):
        ds = load_csv(write(tmp_path, "x,y,c\n?,1,a\n,2,b\n3,,a\n"), "c")
        assert [len(t) for t in ds.transactions] == [1, 1, 1]

    def test_same_value_under_different_columns(self, tmp_path):
        ds = load_csv(write(tmp_path, "x,y,c\nv,v,a\n"), "c")
        assert len(ds.catalog) == 2

    def test_group_column(self, tmp_path):
        ds = load_csv(write(tmp_path, "x,g,c\n1,g1,a\n1,g1,a\n1,g2,b\n"), "c", group_column="g")
        assert ds.groups == ("g1", "g1", "g2")
        assert ds.attributes == ("x",)
        assert label_counts(ds) == [1, 1]

    def test_tsv_by_extension(self, tmp_path):
        ds = load_csv(write(tmp_path, "x\tc\n1\ta\n", "d.tsv"), "c")
        assert ds.catalog.entries == (("x", "1"),)

    def test_missing_class_column(self, d0_csv):
        with pytest.raises(SchemaError):
            load_csv(d0_csv, "label")

    def test_ragged_row_reports_row_number(self, tmp_path):
        with pytest.raises(ParseError) as err:
            load_csv(write(tmp_path, "x,c\n1,a\n1,2,b\n"), "c")
        assert err.value.row == 3

    def test_missing_label_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write(tmp_path, "x,c\n1,\n"), "c")

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyInputError):
            load_csv(write(tmp_path, "x,c\n"), "c")

    def test_deterministic(self, tmp_path):
        rng = random.Random(2)
        lines = ["p,q,r,c"] + [
            ",".join(str(rng.randint(0, 9)) for _ in range(3)) + f",{rng.choice('ab')}" for _ in range(80)
        ]
        path = write(tmp_path, "\n".join(lines) + "\n")
        spec = BinningSpec("equal-frequency", 3)
        assert load_csv(path, "c", binning=spec) == load_csv(path, "c", binning=spec)


class TestBinning:
    def test_equal_width_two_bins(self):
        out = bin_numeric(list(range(1, 11)), BinningSpec("equal-width", 2))
        assert out == ["[1,5.5)"] * 5 + ["[5.5,10]"] * 5

    def test_constant_column(self):
        for spec in (BinningSpec("equal-width", 3), BinningSpec("equal-frequency", 4)):
            assert bin_numeric([7, 7, 7], spec) == ["[7,7]"] * 3

    def test_equal_frequency_thirds(self):
        out = bin_numeric(list(range(1, 10)), BinningSpec("equal-frequency", 3))
        assert out == ["[1,3]"] * 3 + ["(3,6]"] * 3 + ["(6,9]"] * 3

    def test_tie_goes_to_lower_bin(self):
        out = bin_numeric([1, 2, 2, 2, 3, 4], BinningSpec("equal-frequency", 2))
        assert out[:4] == ["[1,2]"] * 4
        assert out[4:] == ["(2,4]"] * 2

    def test_missing_preserved(self):
        assert bin_numeric([None, 1.0, 3.0], BinningSpec("equal-width", 2))[0] is None

    def test_all_missing(self):
        with pytest.raises(BinningError):
            bin_numeric([None, None], BinningSpec())

    def test_bin_count_at_least_two(self):
        with pytest.raises(BinningError):
            BinningSpec("equal-width", 1)

    def test_parse(self):
        assert BinningSpec.parse("equal-frequency:4") == BinningSpec("equal-frequency", 4)
        assert BinningSpec.parse("width:3").strategy == "equal-width"

    @given(
        st.lists(st.one_of(st.none(), st.integers(-50, 50)), min_size=1).filter(lambda v: any(x is not None for x in v)),
        st.sampled_from(["equal-width", "equal-frequency"]),
        st.integers(2, 6),
    )
    def test_partition(self, values, strategy, k):
        out = bin_numeric(values, BinningSpec(strategy, k))
        assert [o is None for o in out] == [v is None for v in values]
        bins = {}
        for v, label in zip(values, out):
            if v is not None:
                bins.setdefault(label, []).append(v)
        # bins do not overlap: ordering bins by their minima orders their maxima too
        spans = sorted((min(vs), max(vs)) for vs in bins.values())
        for (lo1, hi1), (lo2, hi2) in zip(spans, spans[1:]):
            assert hi1 < lo2
        # edges encoded in the labels are non-decreasing
        for label in bins:
            lo, hi = (float(x) for x in label[1:-1].split(","))
            assert lo <= hi


class TestCatalogAndCounts:
    def test_round_trip(self):
        cat = ItemCatalog([("a", "1"), ("b", "x"), ("a", "2")])
        for i in range(len(cat)):
            assert cat.id_of(*cat.decode(i)) == i
        assert cat.intern("b", "x") == 1

    def test_single_label(self):
        ds = Dataset.from_records([["a"]] * 5, ["x"] * 5)
        assert label_counts(ds) == [5]

    def test_grouped_counts_not_above_plain(self, d0):
        grouped = Dataset.from_records(
            [list(t) for t in (["a", "b", "c"], ["a", "b"], ["a", "c"], ["b", "c"], ["b"], ["a", "c"])],
            ["+", "+", "+", "-", "-", "+"],
            groups=["g1", "g1", "g2", "g2", "g3", "g3"],
        )
        assert label_counts(grouped) == [3, 2]
        assert all(g <= p for g, p in zip(label_counts(grouped), label_counts(d0)))
