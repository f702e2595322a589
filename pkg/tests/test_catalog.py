"""Catalog structure tests."""

import pytest

from opcrisis.catalog import (
    FINAL_CATALOG,
    INITIAL_CATALOG,
    MONITOR_SUBSETS,
    RATING_NAME_TO_CODE,
    RATING_ORDER,
    resolve_catalog,
)
from opcrisis.errors import CatalogMismatch


def test_sizes():
    assert len(FINAL_CATALOG) == 18
    assert len(INITIAL_CATALOG) == 22


def test_final_is_subset_of_initial():
    assert set(FINAL_CATALOG.codes()) <= set(INITIAL_CATALOG.codes())


def test_codes_unique_and_grouped():
    for cat in (INITIAL_CATALOG, FINAL_CATALOG):
        codes = cat.codes()
        assert len(set(codes)) == len(codes)
        for ind in cat.indicators:
            assert ind.code.startswith("C")
            assert ind.group == "B" + ind.code[1:3]


def test_group_membership():
    groups = FINAL_CATALOG.groups()
    assert sorted(groups) == ["B11", "B12", "B21", "B22", "B31"]
    assert tuple(i.code for i in groups["B11"]) == ("C111", "C112", "C113", "C114")
    assert tuple(i.code for i in groups["B31"]) == ("C311", "C312", "C313")
    initial_groups = INITIAL_CATALOG.groups()
    assert tuple(i.code for i in initial_groups["B11"]) == (
        "C111", "C112", "C113", "C114", "C115",
    )
    assert tuple(i.code for i in initial_groups["B31"]) == ("C311", "C312", "C313", "C314")


def test_subset_preserves_order():
    sub = INITIAL_CATALOG.subset(["C212", "C124", "C211"])
    assert sub.codes() == ("C124", "C211", "C212")


def test_subset_unknown_code():
    with pytest.raises(CatalogMismatch):
        INITIAL_CATALOG.subset(["C124", "C999"])


def test_rating_order_bridges_to_final_codes():
    assert len(RATING_ORDER) == 13
    codes = [code for _, code in RATING_ORDER]
    assert len(set(codes)) == 13
    for code in codes:
        assert code in FINAL_CATALOG
    assert RATING_NAME_TO_CODE["posts"] == "C124"
    assert RATING_NAME_TO_CODE["reads"] == "C211"
    assert RATING_NAME_TO_CODE["discussions"] == "C212"


def test_monitor_subsets():
    for size, codes in MONITOR_SUBSETS.items():
        assert len(codes) == size
        for code in codes:
            assert code in FINAL_CATALOG


def test_resolve_catalog():
    assert resolve_catalog("initial") is INITIAL_CATALOG
    assert resolve_catalog("final") is FINAL_CATALOG
    sub = resolve_catalog("codes", ("C124", "C211", "C212"))
    assert sub.codes() == ("C124", "C211", "C212")
    with pytest.raises(CatalogMismatch):
        resolve_catalog("codes", ())
    with pytest.raises(CatalogMismatch):
        resolve_catalog("bogus")
