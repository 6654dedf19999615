"""Column schema: declares each column's kind, missing tokens and role flags.

A schema is the contract every dataset, metric and attack in this package is
evaluated against.  Schemas are plain frozen dataclasses and can be built in
code or loaded from a TOML file with one ``[[column]]`` table per column.
"""
from __future__ import annotations

from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigInvalid

KINDS = ("categorical", "numeric", "event_time")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    missing_tokens: frozenset = frozenset()
    quasi_identifier: bool = False
    sensitive: bool = False
    event_indicator_column: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigInvalid(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "event_time" and not self.event_indicator_column:
            raise ConfigInvalid(
                f"event_time column {self.name!r} must name its 0/1 indicator column"
            )
        object.__setattr__(self, "missing_tokens", frozenset(self.missing_tokens))

    @property
    def is_numeric(self) -> bool:
        """event_time cells are parsed and compared as numbers."""
        return self.kind in ("numeric", "event_time")


@dataclass(frozen=True)
class Schema:
    columns: tuple = ()
    weights: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ConfigInvalid(f"duplicate column names in schema: {dupes}")
        by_name = {c.name: c for c in self.columns}
        for c in self.columns:
            if c.kind == "event_time":
                ind = c.event_indicator_column
                if ind not in by_name:
                    raise ConfigInvalid(
                        f"event_time column {c.name!r} references missing indicator {ind!r}"
                    )
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != len(self.columns):
                raise ConfigInvalid("weights must cover exactly the schema columns")
            if any(x < 0 for x in w):
                raise ConfigInvalid("weights must be non-negative")
            if not any(x > 0 for x in w):
                raise ConfigInvalid("at least one weight must be positive")
            object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.columns)

    @property
    def names(self) -> tuple:
        return tuple(c.name for c in self.columns)

    def column(self, name: str) -> ColumnSpec:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def numeric_names(self) -> tuple:
        return tuple(c.name for c in self.columns if c.is_numeric)

    def categorical_names(self) -> tuple:
        return tuple(c.name for c in self.columns if c.kind == "categorical")

    def quasi_identifiers(self) -> tuple:
        return tuple(c.name for c in self.columns if c.quasi_identifier)

    def sensitive_columns(self) -> tuple:
        return tuple(c.name for c in self.columns if c.sensitive)

    def weight_vector(self):
        """Per-column weights, defaulting to all ones."""
        if self.weights is None:
            return tuple(1.0 for _ in self.columns)
        return self.weights

    def compatible_with(self, other: "Schema") -> bool:
        """Same column names and kinds, in the same order."""
        return [(c.name, c.kind) for c in self.columns] == [
            (c.name, c.kind) for c in other.columns
        ]


def load_schema(path) -> Schema:
    """Load a schema from a TOML file of ``[[column]]`` tables.

    Recognized per-column keys: name, kind, missing_tokens (list of strings),
    quasi_identifier, sensitive, event_indicator, weight.
    """
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigInvalid(f"{path}: {e}") from e
    raw_cols = doc.get("column")
    if not raw_cols:
        raise ConfigInvalid(f"{path}: no [[column]] tables")
    cols = []
    weights = []
    any_weight = False
    for entry in raw_cols:
        if "name" not in entry or "kind" not in entry:
            raise ConfigInvalid(f"{path}: every column needs 'name' and 'kind'")
        cols.append(
            ColumnSpec(
                name=str(entry["name"]),
                kind=str(entry["kind"]),
                missing_tokens=frozenset(str(t) for t in entry.get("missing_tokens", ())),
                quasi_identifier=bool(entry.get("quasi_identifier", False)),
                sensitive=bool(entry.get("sensitive", False)),
                event_indicator_column=entry.get("event_indicator"),
            )
        )
        w = entry.get("weight")
        any_weight = any_weight or w is not None
        weights.append(1.0 if w is None else float(w))
    return Schema(columns=tuple(cols), weights=tuple(weights) if any_weight else None)
