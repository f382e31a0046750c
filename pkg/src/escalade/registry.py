"""Static registries: candidate-dimension bridge table and harm categories.

Both registries are data, not code. The dimension registry is fixed (27
entries recording which candidate dimensions became standalone gates, which
were absorbed into a gate's internal logic, and which were excluded, with
rationale). The harm-category registry is a configurable placeholder: the
default ten categories ship as JSON and deployments may swap in an external
taxonomy without touching the engine.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import Any, Iterable, Mapping

from .model import SCHEMA_VERSION, ConfigurationError, ParseError, _as_list, _as_obj, _as_str

_SLUG = re.compile(r"[^a-z0-9]+")


class DimensionStatus:
    STANDALONE = "standalone_criterion"
    ABSORBED = "absorbed"
    EXCLUDED = "excluded"

    ALL = (STANDALONE, ABSORBED, EXCLUDED)


class UnknownDimensionError(KeyError):
    """Raised when a dimension name has no registry entry."""


@dataclass(frozen=True, slots=True)
class DimensionRegistryEntry:
    name: str
    status: str
    target: str | None
    rationale: str

    def __post_init__(self) -> None:
        if self.status not in DimensionStatus.ALL:
            raise ConfigurationError(f"invalid dimension status {self.status!r}")
        if self.status != DimensionStatus.EXCLUDED and not self.target:
            raise ConfigurationError(f"dimension {self.name!r} with status {self.status} needs a target")

    @property
    def slug(self) -> str:
        return slugify(self.name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "target": self.target,
            "rationale": self.rationale,
        }


def slugify(name: str) -> str:
    """Stable machine identifier for a dimension name."""
    return _SLUG.sub("_", name.casefold()).strip("_")


class DimensionRegistry:
    """Lookup table over the candidate-dimension entries."""

    def __init__(self, entries: Iterable[DimensionRegistryEntry]):
        self._entries = tuple(entries)
        self._by_name = {entry.name: entry for entry in self._entries}
        self._by_slug = {entry.slug: entry for entry in self._entries}

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def lookup(self, name: str) -> DimensionRegistryEntry:
        """Find an entry by exact name or by slug.

        Raises:
            UnknownDimensionError: if no entry matches.
        """
        entry = self._by_name.get(name) or self._by_slug.get(slugify(name))
        if entry is None:
            raise UnknownDimensionError(name)
        return entry

    def with_status(self, status: str) -> tuple[DimensionRegistryEntry, ...]:
        return tuple(entry for entry in self._entries if entry.status == status)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "dimensions": [entry.to_dict() for entry in self._entries],
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "dimension_registry") -> "DimensionRegistry":
        obj = _as_obj(data, path)
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise ParseError(f"{path}.schema_version: unsupported version")
        entries = []
        for i, raw in enumerate(_as_list(obj.get("dimensions"), f"{path}.dimensions")):
            entry_obj = _as_obj(raw, f"{path}.dimensions[{i}]")
            target = entry_obj.get("target")
            entries.append(
                DimensionRegistryEntry(
                    name=_as_str(entry_obj.get("name"), f"{path}.dimensions[{i}].name"),
                    status=_as_str(entry_obj.get("status"), f"{path}.dimensions[{i}].status"),
                    target=None if target is None else _as_str(target, f"{path}.dimensions[{i}].target"),
                    rationale=_as_str(entry_obj.get("rationale"), f"{path}.dimensions[{i}].rationale"),
                )
            )
        return cls(entries)


def _read_data(name: str) -> Any:
    with resources.files("escalade").joinpath("data", name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


_dimension_registry: DimensionRegistry | None = None


def dimension_registry() -> DimensionRegistry:
    """The bundled dimension registry (loaded once)."""
    global _dimension_registry
    if _dimension_registry is None:
        _dimension_registry = DimensionRegistry.from_dict(_read_data("dimension_registry.json"))
    return _dimension_registry


def lookup_dimension(name: str) -> DimensionRegistryEntry:
    """Look up a candidate dimension in the bundled registry by name."""
    return dimension_registry().lookup(name)


# ---------------------------------------------------------------------------
# Harm categories
# ---------------------------------------------------------------------------


class HarmCategoryRegistry:
    """The set of harm categories gates will accept.

    The default set is a placeholder pending adoption of an external harm
    taxonomy; deployments may load their own list.
    """

    def __init__(self, categories: Iterable[str]):
        ordered = list(dict.fromkeys(categories))
        if not ordered:
            raise ConfigurationError("harm category registry must not be empty")
        self._categories = tuple(ordered)
        self._index = frozenset(ordered)

    def __contains__(self, category: str) -> bool:
        return category in self._index

    def __iter__(self):
        return iter(self._categories)

    def __len__(self) -> int:
        return len(self._categories)

    @property
    def categories(self) -> tuple[str, ...]:
        return self._categories

    def to_dict(self) -> dict[str, Any]:
        return {"schema_version": SCHEMA_VERSION, "categories": list(self._categories)}

    @classmethod
    def from_dict(cls, data: Any, path: str = "harm_categories") -> "HarmCategoryRegistry":
        obj = _as_obj(data, path)
        if obj.get("schema_version") != SCHEMA_VERSION:
            raise ParseError(f"{path}.schema_version: unsupported version")
        return cls(
            _as_str(raw, f"{path}.categories[{i}]")
            for i, raw in enumerate(_as_list(obj.get("categories"), f"{path}.categories"))
        )


_harm_categories: HarmCategoryRegistry | None = None


def default_harm_categories() -> HarmCategoryRegistry:
    """The bundled default harm-category registry (loaded once)."""
    global _harm_categories
    if _harm_categories is None:
        _harm_categories = HarmCategoryRegistry.from_dict(_read_data("harm_categories.json"))
    return _harm_categories


def load_harm_categories(source: Mapping[str, Any] | None = None) -> HarmCategoryRegistry:
    if source is None:
        return default_harm_categories()
    return HarmCategoryRegistry.from_dict(source)
