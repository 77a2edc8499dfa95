import pytest
from hypothesis import given
from hypothesis import strategies as st

from onomastat.corpus import Occurrence, QualifierKind, ReferenceDistribution, TestCorpus
from onomastat.qualifiers import (
    LOW,
    MID,
    TOP,
    TierBounds,
    qualifier_row,
    qualifier_table,
    tier_of,
    write_qualifier_csv,
)

D = QualifierKind.DISAMBIGUATING
T = QualifierKind.TITLE
RANK = {LOW: 0, MID: 1, TOP: 2}


def occ(name, kind=None):
    return Occurrence(name, attested=True, qualifier=kind)


class TestTierOf:
    def test_simon_is_top(self, ilan_like):
        assert tier_of("Simon", ilan_like) == TOP

    def test_hananiah_is_mid(self, ilan_like):
        assert tier_of("Hananiah", ilan_like) == MID

    def test_singleton_is_low(self, ilan_like):
        assert tier_of("rare_001", ilan_like) == LOW

    def test_absent_name_is_low(self, ilan_like):
        assert tier_of("Nobody", ilan_like) == LOW

    @pytest.mark.parametrize("count,tier", [(101, MID), (102, TOP), (5, LOW), (6, MID)])
    def test_boundaries(self, count, tier):
        ref = ReferenceDistribution("r", {"X": count})
        assert tier_of("X", ref) == tier

    def test_empty_exclusion_changes_nothing(self, ilan_like):
        empty = TestCorpus("empty", ())
        for name in ("Simon", "Hananiah", "rare_001", "name_010"):
            assert tier_of(name, ilan_like, empty) == tier_of(name, ilan_like)

    def test_exclusion_can_drop_a_tier(self):
        ref = ReferenceDistribution("r", {"X": 103})
        text = TestCorpus.from_names("t", ["X", "X"])
        assert tier_of("X", ref) == TOP
        assert tier_of("X", ref, text) == MID

    def test_exclusion_floors_at_zero(self):
        ref = ReferenceDistribution("r", {"X": 1})
        text = TestCorpus.from_names("t", ["X"] * 4)
        assert tier_of("X", ref, text) == LOW

    @given(st.integers(0, 400), st.integers(0, 400))
    def test_monotone_in_count(self, a, b):
        lo, hi = sorted((a, b))
        ref = ReferenceDistribution("r", {k: v for k, v in {"L": lo, "H": hi}.items() if v > 0})
        assert RANK[tier_of("L", ref)] <= RANK[tier_of("H", ref)]

    def test_bad_bounds(self):
        with pytest.raises(ValueError):
            TierBounds(top_min=5, mid_min=6)


class TestTable:
    def test_no_qualifiers_gives_zeros(self, ilan_like):
        row = qualifier_row(TestCorpus.from_names("plain", ["Simon", "John"]), ilan_like)
        assert (row.total, row.tier_top, row.tier_mid, row.tier_low) == (0, 0, 0, 0)

    def test_titles_are_not_counted(self, ilan_like):
        c = TestCorpus("c", (occ("Simon", T), occ("Simon", D), occ("Hananiah", D), occ("rare_002", D), occ("John")))
        row = qualifier_row(c, ilan_like)
        assert (row.tier_top, row.tier_mid, row.tier_low) == (1, 1, 1)
        assert row.total == 3

    @given(st.lists(st.sampled_from(["Simon", "Hananiah", "rare_001", "name_020", "Zed"]), max_size=40))
    def test_tiers_sum_to_total(self, names):
        ref = ReferenceDistribution("r", {"Simon": 184, "Hananiah": 75, "rare_001": 1, "name_020": 17})
        c = TestCorpus("c", tuple(occ(n, D) for n in names))
        row = qualifier_row(c, ref, exclude_self=True)
        assert row.total == row.tier_top + row.tier_mid + row.tier_low == len(names)

    def test_table_keeps_order(self, ilan_like):
        a = TestCorpus("a", (occ("Simon", D),))
        b = TestCorpus("b", ())
        assert [r.corpus for r in qualifier_table([a, b], ilan_like)] == ["a", "b"]

    def test_csv(self, tmp_path, ilan_like):
        rows = qualifier_table([TestCorpus("a", (occ("Simon", D), occ("rare_003", D)))], ilan_like)
        path = tmp_path / "q.csv"
        write_qualifier_csv(rows, path)
        assert path.read_text().splitlines() == ["corpus,total,tier_top,tier_mid,tier_low", "a,2,1,0,1"]
