"""SQL dialect descriptors: capability flags, identifier quoting, literals and type names"""

from __future__ import annotations

import logging
from typing import Any, ClassVar

from warebench.errors import UnsupportedDialectError

LOGGER = logging.getLogger(__name__)


class DialectDescriptor:
    """
    Base of all dialects; every concrete subclass registers itself under its `name`.

    A dialect without native CUBE/ROLLUP is rendered through grouping-set expansion.
    """

    name: ClassVar[str]
    url_schemes: ClassVar[tuple[str, ...]] = ()
    supports_cube: ClassVar[bool] = True
    supports_rollup: ClassVar[bool] = True
    supports_having_alias: ClassVar[bool] = False
    supports_union_all: ClassVar[bool] = True
    # Maximum number of SELECTs in one compound statement, `None` when unlimited
    max_compound_select: ClassVar[int | None] = None
    quote_char: ClassVar[str] = '"'
    type_names: ClassVar[dict[str, str]] = {"integer": "INTEGER", "real": "REAL", "char": "CHAR({length})"}

    _registry: ClassVar[dict[str, type[DialectDescriptor]]] = {}

    def __init_subclass__(cls, *, name: str = None, abstract: bool = False, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        if abstract:
            return
        if name is None:
            raise TypeError(f"Dialect {cls.__name__} must be registered with a name")
        if name in DialectDescriptor._registry:
            raise KeyError(f"{name} is already registered! (Most likely dialect name clash)")
        cls.name = name
        DialectDescriptor._registry[name] = cls

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DialectDescriptor) and other.name == self.name

    def __hash__(self) -> int:
        return hash(self.name)

    @classmethod
    def registered_names(cls) -> list[str]:
        return sorted(cls._registry)

    # Identifiers

    def should_quote(self, name: str) -> bool:
        """
        >>> ansi = get_dialect("ansi")
        >>> ansi.should_quote("DIM1_1"), ansi.should_quote("1ST"), ansi.should_quote("A B")
        (False, True, True)
        """
        if not name or name[0].isdigit():
            return True
        return not name.replace("_", "").isalnum()

    def quote_ident(self, name: str) -> str:
        escaped = name.replace(self.quote_char, self.quote_char * 2)
        return f"{self.quote_char}{escaped}{self.quote_char}"

    def render_identifier(self, name: str) -> str:
        if self.should_quote(name):
            return self.quote_ident(name)
        return name

    def qualified(self, table: str, attribute: str) -> str:
        return f"{self.render_identifier(table)}.{self.render_identifier(attribute)}"

    # Literals and types

    def literal(self, value: Any) -> str:
        """
        >>> ansi = get_dialect("ansi")
        >>> ansi.literal(None), ansi.literal(3), ansi.literal(2.5), ansi.literal("O'Hara")
        ('NULL', '3', '2.5', "'O''Hara'")
        """
        if value is None:
            return "NULL"
        if isinstance(value, bool):
            return "TRUE" if value else "FALSE"
        if isinstance(value, int | float):
            return repr(value)
        escaped = str(value).replace("'", "''")
        return f"'{escaped}'"

    def type_name(self, kind: str, length: int = None) -> str:
        template = self.type_names.get(kind)
        if template is None:
            raise UnsupportedDialectError(f"Dialect {self.name!r} has no type mapping for {kind!r}")
        return template.format(length=length)


class SqliteDialect(DialectDescriptor, name="sqlite"):
    url_schemes = ("sqlite",)
    supports_cube = False
    supports_rollup = False
    supports_having_alias = True
    max_compound_select = 500


class MysqlDialect(DialectDescriptor, name="mysql"):
    url_schemes = ("mysql", "mariadb")
    supports_cube = False
    supports_rollup = False
    supports_having_alias = True
    quote_char = "`"
    type_names = {"integer": "INT", "real": "FLOAT", "char": "CHAR({length})"}


class PostgresqlDialect(DialectDescriptor, name="postgresql"):
    url_schemes = ("postgresql", "postgres")


class DuckdbDialect(DialectDescriptor, name="duckdb"):
    url_schemes = ("duckdb",)
    supports_having_alias = True
    type_names = {"integer": "INTEGER", "real": "FLOAT", "char": "VARCHAR({length})"}


class AnsiDialect(DialectDescriptor, name="ansi"):
    """SQL-99 with native grouping operators"""


def get_dialect(name: str) -> DialectDescriptor:
    try:
        return DialectDescriptor._registry[name.lower()]()  # noqa: SLF001
    except KeyError:
        raise UnsupportedDialectError(
            f"Unknown dialect {name!r}, expected one of: {', '.join(DialectDescriptor.registered_names())}",
        ) from None


def dialect_for_url(url: str) -> DialectDescriptor:
    """
    Dialect matching the scheme of a connection URL; plain paths are embedded SQLite files.

    >>> dialect_for_url("postgresql+psycopg://user@host/db").name, dialect_for_url("bench.db").name
    ('postgresql', 'sqlite')
    """
    scheme, sep, _ = url.partition("://")
    if not sep:
        return get_dialect("sqlite")
    backend_name = scheme.split("+", 1)[0].lower()
    for dialect_cls in DialectDescriptor._registry.values():  # noqa: SLF001
        if backend_name in dialect_cls.url_schemes:
            return dialect_cls()
    raise UnsupportedDialectError(f"No dialect for URL scheme {scheme!r}")
