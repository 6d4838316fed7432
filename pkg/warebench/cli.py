"""
Command-line interface.

Subcommands are built from annotated functions: parameters without default become positional arguments,
the others `--options`, and the reST docstring supplies the help texts.
"""

from __future__ import annotations

import argparse
import collections.abc
import dataclasses
import inspect
import logging
import sys
import typing
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, ClassVar, NamedTuple, Union

import docstring_parser

from warebench.backend import BackendConfig, connect
from warebench.config import dump_low_level, load_config, load_low_level
from warebench.datagen import export_csv
from warebench.dialect import dialect_for_url, get_dialect
from warebench.errors import PreconditionError, UsageError, WarebenchError
from warebench.harness import format_summary, run_load_test, run_performance_test, summarize, write_csv
from warebench.logging import parse_level, setup_logging
from warebench.params import BenchmarkConfig, FailPolicy, LowLevelParams, derive_low_level
from warebench.randomizer import SeededRng
from warebench.schema import build_schema, emit_ddl, write_ddl
from warebench.sizing import estimate_size
from warebench.utils import to_megabytes
from warebench.workload import generate_workload, load_workload, save_workload

if TYPE_CHECKING:
    from warebench.model import WarehouseSchema

LOGGER = logging.getLogger(__name__)

NoneType = type(None)
DEFAULT_DB = "warehouse.db"
DEFAULT_WORKLOAD = Path("workload.sql")
DEFAULT_CSV = Path("results.csv")

COMMON_ANNOTATIONS_NS: dict[str, Any] = {
    key: getattr(module, key)
    for module in (typing, collections.abc)
    for key in module.__all__
    if not key.startswith("_")
}


def _resolve_type_annotation(type_annotation: Any, annotations_ns: dict[str, Any] = None) -> Any:
    if type_annotation is inspect.Signature.empty:
        return None
    if isinstance(type_annotation, str):
        try:
            type_annotation = eval(type_annotation, COMMON_ANNOTATIONS_NS | (annotations_ns or {}))  # noqa: S307
        except Exception:  # noqa: BLE001
            return None
    type_args: tuple[Any, ...] = getattr(type_annotation, "__args__", None) or ()
    # `Optional[X]` and `X | None`
    if len(type_args) == 2 and NoneType in type_args:
        return next(item for item in type_args if item is not NoneType)
    if getattr(type_annotation, "__origin__", None) is Union:
        return None
    return type_annotation


class ParamInfo(NamedTuple):
    name: str
    required: bool = True
    default: Any = None
    value_type: Any = None
    doc: str | None = None

    @classmethod
    def from_arg_param(
        cls,
        arg_param: inspect.Parameter,
        annotations_ns: dict[str, Any] = None,
        doc: str = None,
    ) -> ParamInfo:
        if arg_param.kind in (inspect.Parameter.VAR_POSITIONAL, inspect.Parameter.VAR_KEYWORD):
            raise TypeError(f"Not currently supported: `*{arg_param.name}` in command function")
        required = arg_param.default is inspect.Signature.empty
        default = None if required else arg_param.default
        value_type = _resolve_type_annotation(arg_param.annotation, annotations_ns=annotations_ns)
        if value_type is None and default is not None:
            value_type = type(default)
        return cls(arg_param.name, required, default, value_type, doc)

    @property
    def is_flag(self) -> bool:
        return self.value_type is bool and self.default is False

    @property
    def arg_name(self) -> str:
        name = self.name.rstrip("_")
        return name if self.required else "--" + name.replace("_", "-")


class _UsageErrorParser(argparse.ArgumentParser):
    """Reports bad arguments as `UsageError` instead of exiting"""

    def error(self, message: str) -> typing.NoReturn:
        raise UsageError(f"{self.prog}: {message}")


class _TunedHelpFormatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    _default_width: ClassVar[int | None] = 120

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        kwargs.setdefault("width", self._default_width)
        super().__init__(*args, **kwargs)


def _indent(value: str, indentation: str = "  ") -> str:
    return indentation + value.replace("\n", "\n" + indentation).replace(indentation + "\n", "\n")


def describe_function(func: Callable[..., Any]) -> tuple[str, str, dict[str, str]]:
    """Short description, full description and per-parameter docs from a reST docstring"""
    docs = docstring_parser.parse(func.__doc__ or "")
    description = "\n\n".join(item for item in (docs.short_description, docs.long_description) if item)
    params_docs = {param.arg_name: param.description for param in docs.params if param.description}
    return docs.short_description or "", description, params_docs


def function_params(
    func: Callable[..., Any],
    *,
    skip: tuple[str, ...] = (),
    annotations_ns: dict[str, Any] = None,
) -> list[ParamInfo]:
    _, _, params_docs = describe_function(func)
    annotations_ns = annotations_ns if annotations_ns is not None else getattr(func, "__globals__", {})
    return [
        ParamInfo.from_arg_param(arg_param, annotations_ns=annotations_ns, doc=params_docs.get(name))
        for name, arg_param in inspect.signature(func).parameters.items()
        if name not in skip
    ]


def add_arguments(parser: argparse.ArgumentParser, params: list[ParamInfo]) -> None:
    for param in params:
        if param.is_flag:
            parser.add_argument(param.arg_name, action="store_true", dest=param.name, help=param.doc or " ")
            continue
        kwargs: dict[str, Any] = {"type": param.value_type, "help": param.doc}
        if param.required:
            parser.add_argument(param.arg_name, **kwargs)
        else:
            kwargs["help"] = param.doc or " "
            parser.add_argument(param.arg_name, default=param.default, dest=param.name, **kwargs)


@dataclass(frozen=True)
class GlobalOptions:
    config: Path = None
    low_level: Path = None
    seed: int = None
    db: str = DEFAULT_DB
    dialect: str = None
    log_level: str = "INFO"
    log_file: Path = None


def global_options(
    config: Path = None,
    low_level: Path = None,
    seed: int = None,
    db: str = DEFAULT_DB,
    dialect: str = None,
    log_level: str = "INFO",
    log_file: Path = None,
) -> GlobalOptions:
    """
    Synthetic data warehouse benchmark

    Typical session: `estimate`, `load`, `workload`, `run`, then `reset`.

    :param config: KEY=value benchmark parameter file, defaults otherwise
    :param low_level: YAML file with full low-level parameters, replaces their derivation
    :param seed: overrides SEED of the parameter file
    :param db: SQLAlchemy URL or path of an embedded SQLite file
    :param dialect: SQL dialect, chosen from the database URL when omitted
    :param log_level: console logging level
    :param log_file: also write a DEBUG log to this file
    """
    return GlobalOptions(config, low_level, seed, db, dialect, log_level, log_file)


@dataclass
class CommandLine:
    """Parser with one subcommand per registered function; each command receives `GlobalOptions` first"""

    prog: str = "warebench"
    commands: dict[str, Callable[..., int | None]] = dataclasses.field(default_factory=dict)

    def command(self, name: str) -> Callable[[Callable[..., int | None]], Callable[..., int | None]]:
        def register(func: Callable[..., int | None]) -> Callable[..., int | None]:
            if name in self.commands:
                raise KeyError(f"{name} is already registered!")
            self.commands[name] = func
            return func

        return register

    def build_parser(self) -> argparse.ArgumentParser:
        _, description, _ = describe_function(global_options)
        parser = _UsageErrorParser(
            prog=self.prog,
            description=_indent(description),
            formatter_class=_TunedHelpFormatter,
        )
        add_arguments(parser, function_params(global_options))
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_UsageErrorParser)
        subparsers.required = True
        for name, func in self.commands.items():
            short, description, _ = describe_function(func)
            subparser = subparsers.add_parser(
                name,
                help=short,
                description=_indent(description),
                formatter_class=_TunedHelpFormatter,
            )
            add_arguments(subparser, function_params(func, skip=("options",)))
        return parser

    def parse(self, argv: list[str] = None) -> tuple[Callable[..., int | None], GlobalOptions, dict[str, Any]]:
        namespace = vars(self.build_parser().parse_args(argv))
        func = self.commands[namespace.pop("command")]
        option_names = [param.name for param in function_params(global_options)]
        options = global_options(**{name: namespace.pop(name) for name in option_names})
        return func, options, namespace

    def __call__(self, argv: list[str] = None) -> int:
        try:
            func, options, kwargs = self.parse(argv)
            setup_logging(options.log_file, print_level=parse_level(options.log_level))
            return func(options, **kwargs) or 0
        except WarebenchError as exc:
            LOGGER.error(f"{exc.__class__.__name__}: {exc}")  # noqa: TRY400
            return exc.exit_code
        except ValueError as exc:
            LOGGER.error(f"Invalid argument: {exc}")  # noqa: TRY400
            return UsageError.exit_code


CLI = CommandLine()


def _echo(text: str = "") -> None:
    sys.stdout.write(text + "\n")


class Session(NamedTuple):
    """Everything derived from the parameter files and the seed"""

    config: BenchmarkConfig
    rng: SeededRng
    low: LowLevelParams
    schema: WarehouseSchema

    @classmethod
    def from_options(cls, options: GlobalOptions) -> Session:
        config, rng, low = load_parameters(options)
        schema = build_schema(low, rng.spawn("schema"))
        return cls(config, rng, low, schema)

    def backend_config(self, options: GlobalOptions) -> BackendConfig:
        return BackendConfig(options.db, options.dialect, self.config.batch_size)


def load_parameters(options: GlobalOptions) -> tuple[BenchmarkConfig, SeededRng, LowLevelParams]:
    """Parameter files and seed, without building the schema"""
    config = load_config(options.config) if options.config is not None else BenchmarkConfig()
    if options.seed is not None:
        config = dataclasses.replace(config, seed=options.seed)
    rng = SeededRng(config.seed, sigma_ratio=config.high.sigma_ratio)
    if options.low_level is not None:
        low = load_low_level(options.low_level)
    else:
        low = derive_low_level(config.high, rng.spawn("low-level"))
    LOGGER.debug(f"Low-level parameters:\n{dump_low_level(low)}")
    return config, rng, low


@CLI.command("estimate")
def cmd_estimate(options: GlobalOptions) -> int:
    """Print the expected size of the warehouse per table, in megabytes"""
    _, rng, low = load_parameters(options)
    estimate = estimate_size(low)
    if estimate.too_large:
        _echo(f"Configuration too large: warehouse size can't be represented ({estimate.total_bytes} bytes)")
        return 0
    estimate = estimate_size(low, build_schema(low, rng.spawn("schema")))
    width = max(len(name) for name in estimate.rows)
    for name, size in estimate.bytes_per_table.items():
        _echo(f"{name:<{width}} {estimate.rows[name]:>14.0f} rows {to_megabytes(size):>12.3f} MB")
    total_rows = sum(estimate.rows.values())
    _echo(f"{'total':<{width}} {total_rows:>14.0f} rows {to_megabytes(estimate.total_bytes):>12.3f} MB")
    return 0


@CLI.command("load")
def cmd_load(options: GlobalOptions, force_reset: bool = False, ddl: Path = None, no_constraints: bool = False) -> int:
    """
    Create the warehouse tables and load the generated data (load test)

    :param force_reset: drop existing warehouse tables first
    :param ddl: also write the DDL statements to this file
    :param no_constraints: leave out primary and foreign key declarations
    """
    session = Session.from_options(options)
    with connect(session.backend_config(options)) as backend:
        existing = backend.existing_tables()
        if existing and not force_reset:
            raise PreconditionError(
                f"Database already holds {len(existing)} warehouse tables, use `reset` or `load --force-reset`",
            )
        if existing:
            backend.reset_warehouse()
        if ddl is not None:
            write_ddl(emit_ddl(session.schema, backend.dialect, constraints=not no_constraints), ddl)
        report = run_load_test(
            session.schema,
            session.rng,
            backend,
            batch_size=session.config.batch_size,
            max_candidates=session.config.max_fact_candidates,
            constraints=not no_constraints,
        )
        for table in session.schema.table_names:
            LOGGER.debug(f"{table} digest: {backend.table_digest(table)}")
    _echo(f"Load time: {report.load_time:.3f}s")
    _echo(str(report.stats))
    return 0


@CLI.command("workload")
def cmd_workload(options: GlobalOptions, out: Path = DEFAULT_WORKLOAD, dialect: str = None) -> int:
    """
    Generate the query workload and save it

    :param out: workload file to write
    :param dialect: SQL dialect of the saved queries, the global one when omitted
    """
    session = Session.from_options(options)
    dialect_name = get_dialect(dialect or options.dialect or dialect_for_url(options.db).name).name
    workload = generate_workload(
        session.config.workload,
        session.schema,
        session.rng.spawn("workload"),
        seed=session.config.seed,
        dialect=dialect_name,
    )
    save_workload(workload, out)
    _echo(f"{len(workload.queries)} queries ({workload.nb_olap} OLAP) saved to {out}")
    return 0


@CLI.command("run")
def cmd_run(
    options: GlobalOptions,
    workload: Path = None,
    csv: Path = DEFAULT_CSV,
    repn: int = None,
    new_workload: bool = False,
    run_id: int = 1,
    continue_on_error: bool = False,
) -> int:
    """
    Run the performance test: a cold run, then REPN refreshes each followed by a warm run

    :param workload: workload file to execute, or to write with --new-workload
    :param csv: results file to write
    :param repn: overrides REPN of the parameter file
    :param new_workload: generate the workload instead of loading it
    :param run_id: number of this run, each number draws its own workload with --new-workload
    :param continue_on_error: record failed queries and go on instead of aborting
    """
    session = Session.from_options(options)
    protocol = session.config.protocol
    if repn is not None:
        protocol = dataclasses.replace(protocol, repn=repn)
    if continue_on_error:
        protocol = dataclasses.replace(protocol, fail_policy=FailPolicy.RECORD_AND_CONTINUE)

    backend_config = session.backend_config(options)
    if new_workload:
        queries = generate_workload(
            session.config.workload,
            session.schema,
            session.rng.spawn(f"workload:run:{run_id}"),
            seed=session.config.seed,
            dialect=backend_config.dialect.name,
        )
        if workload is not None:
            save_workload(queries, workload)
    elif workload is not None:
        queries = load_workload(workload)
    else:
        raise UsageError("run needs --workload PATH or --new-workload")

    config = dataclasses.replace(session.config, protocol=protocol)
    recap = [*config.describe(), ("queries", len(queries.queries))]
    width = max(len(name) for name, _ in recap)
    _echo("Performance test")
    for name, value in recap:
        _echo(f"  {name:<{width}} {value}")

    with connect(backend_config) as backend:
        timings = run_performance_test(queries, session.schema, config.etl, config.protocol, backend, session.rng)
    summary = summarize(timings)
    write_csv(timings, summary, csv)
    _echo(format_summary(summary))
    if timings.failed:
        _echo(f"{len(timings.failed)} query executions failed, see {csv}")
    return 0


@CLI.command("reset")
def cmd_reset(options: GlobalOptions) -> int:
    """Drop every warehouse table"""
    config = BackendConfig(options.db, options.dialect)
    with connect(config) as backend:
        dropped = backend.reset_warehouse()
    _echo(f"Dropped {dropped} tables")
    return 0


@CLI.command("export")
def cmd_export(options: GlobalOptions, out: Path = Path("export")) -> int:
    """
    Write the generated data as one CSV file per table instead of loading it

    :param out: output directory
    """
    session = Session.from_options(options)
    paths = export_csv(session.schema, session.rng, out, max_candidates=session.config.max_fact_candidates)
    _echo(f"Exported {len(paths)} tables to {out}")
    return 0


def main(argv: list[str] = None) -> int:
    return CLI(argv)
