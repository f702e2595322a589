"""Indicator catalogs.

Every measurable quantity gets a stable leaf code Cxyz: tier x (A-level),
group y (B-level), leaf z. Two catalogs ship: the full initial catalog and
the pruned final catalog; selection runs turn the former into something
shaped like the latter. Catalog order is the canonical column order for
matrices, CSV files, and benchmark alignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CatalogMismatch

TIERS = {
    "A1": "Information Person",
    "A2": "Information Environment",
    "A3": "Information",
}

GROUPS = {
    "B11": ("A1", "Internet User Importance"),
    "B12": ("A1", "Internet User Participation"),
    "B21": ("A2", "Topic Attention"),
    "B22": ("A2", "Topic Activity"),
    "B31": ("A3", "Topic Sentiment Tendency"),
}


@dataclass(frozen=True)
class IndicatorId:
    code: str
    name: str
    group: str
    tier: str


def _ind(code: str, name: str) -> IndicatorId:
    group = "B" + code[1:3]
    tier, _ = GROUPS[group]
    return IndicatorId(code=code, name=name, group=group, tier=tier)


@dataclass(frozen=True)
class IndicatorCatalog:
    name: str
    indicators: tuple[IndicatorId, ...]
    _by_code: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_code = {ind.code: ind for ind in self.indicators}
        if len(by_code) != len(self.indicators):
            raise CatalogMismatch(f"catalog {self.name!r} has duplicate codes")
        object.__setattr__(self, "_by_code", by_code)

    def codes(self) -> tuple[str, ...]:
        return tuple(ind.code for ind in self.indicators)

    def __contains__(self, code: str) -> bool:
        return code in self._by_code

    def __len__(self) -> int:
        return len(self.indicators)

    def get(self, code: str) -> IndicatorId:
        try:
            return self._by_code[code]
        except KeyError:
            raise CatalogMismatch(f"code {code!r} not in catalog {self.name!r}") from None

    def groups(self) -> dict[str, tuple[IndicatorId, ...]]:
        """Group id -> member indicators, in catalog order."""
        out: dict[str, list[IndicatorId]] = {}
        for ind in self.indicators:
            out.setdefault(ind.group, []).append(ind)
        return {g: tuple(members) for g, members in out.items()}

    def subset(self, codes, name: str = "subset") -> "IndicatorCatalog":
        """New catalog keeping only `codes`, in this catalog's order."""
        wanted = set(codes)
        unknown = wanted - set(self.codes())
        if unknown:
            raise CatalogMismatch(
                f"codes not in catalog {self.name!r}: {', '.join(sorted(unknown))}"
            )
        kept = tuple(ind for ind in self.indicators if ind.code in wanted)
        return IndicatorCatalog(name=name, indicators=kept)

    def position(self, code: str) -> int:
        for i, ind in enumerate(self.indicators):
            if ind.code == code:
                return i
        raise CatalogMismatch(f"code {code!r} not in catalog {self.name!r}")


_FINAL = (
    _ind("C111", "average followers of original bloggers"),
    _ind("C112", "average attentions of original bloggers"),
    _ind("C113", "verified original blogger count"),
    _ind("C114", "average historical blog volume of original bloggers"),
    _ind("C121", "total likes"),
    _ind("C122", "total comments"),
    _ind("C123", "total forwards"),
    _ind("C124", "total blog volume"),
    _ind("C125", "government blog count"),
    _ind("C211", "total reads"),
    _ind("C212", "total discussions"),
    _ind("C221", "blog volume change rate"),
    _ind("C222", "forward change rate"),
    _ind("C223", "comment change rate"),
    _ind("C224", "like change rate"),
    _ind("C311", "positive blog and comment volume"),
    _ind("C312", "negative blog and comment volume"),
    _ind("C313", "neutral blog and comment volume"),
)

# Extra leaves that only the full catalog carries; codes extend each group's
# numbering past the final catalog's last leaf.
_PRUNED = {
    "C115": _ind("C115", "average grade of original bloggers"),
    "C126": _ind("C126", "total comment responses"),
    "C225": _ind("C225", "response change rate"),
    "C314": _ind("C314", "negative volume change rate"),
}

FINAL_CATALOG = IndicatorCatalog(name="final", indicators=_FINAL)

INITIAL_CATALOG = IndicatorCatalog(
    name="initial",
    indicators=tuple(
        sorted(list(_FINAL) + list(_PRUNED.values()), key=lambda ind: ind.code)
    ),
)

# Indicator order of the default benchmark matrix: thirteen named columns,
# each bridged to a final-catalog code. The printed name order does not match
# intuitive magnitudes (e.g. "reads" vs "discussions"); values and positions
# are kept exactly as published by the benchmark's authors.
RATING_ORDER: tuple[tuple[str, str], ...] = (
    ("likes", "C121"),
    ("comments", "C122"),
    ("reposts", "C123"),
    ("posts", "C124"),
    ("discussions", "C212"),
    ("reads", "C211"),
    ("microblogs", "C223"),
    ("post change rate", "C221"),
    ("repost change rate", "C222"),
    ("likes change rate", "C224"),
    ("positive quantity", "C311"),
    ("negative quantity", "C312"),
    ("neutral quantity", "C313"),
)

RATING_NAME_TO_CODE = {name: code for name, code in RATING_ORDER}
RATING_CODE_TO_NAME = {code: name for name, code in RATING_ORDER}

# The index subsets used for comparative monitoring runs, by size.
MONITOR_SUBSETS: dict[int, tuple[str, ...]] = {
    3: ("C124", "C211", "C212"),
    7: ("C121", "C122", "C123", "C124", "C125", "C211", "C212"),
    11: (
        "C121", "C122", "C123", "C124", "C125", "C211", "C212",
        "C221", "C222", "C223", "C224",
    ),
    14: (
        "C121", "C122", "C123", "C124", "C125", "C211", "C212",
        "C221", "C222", "C223", "C224", "C311", "C312", "C313",
    ),
    18: FINAL_CATALOG.codes(),
}


def resolve_catalog(choice: str, codes: tuple[str, ...] | None = None) -> IndicatorCatalog:
    """Map a config catalog choice to a concrete catalog.

    `choice` is "initial", "final", or "codes" (explicit code list resolved
    against the initial catalog, which is a superset of the final one).
    """
    if choice == "initial":
        return INITIAL_CATALOG
    if choice == "final":
        return FINAL_CATALOG
    if choice == "codes":
        if not codes:
            raise CatalogMismatch("catalog choice 'codes' requires a non-empty code list")
        return INITIAL_CATALOG.subset(codes, name="codes")
    raise CatalogMismatch(f"unknown catalog choice {choice!r}")
