"""Mine embedded-database schema evolution from frozen source-tree histories."""

from .differ import (
    DiffResult,
    SMO,
    SMOKind,
    apply_smos,
    diff_consecutive,
    diff_schemas,
    diff_tables,
)
from .extractor import (
    FileKind,
    RawStatement,
    SourceFile,
    extract_ddl,
    splice_string_literals,
    strip_sql_comments,
)
from .history import (
    AnalysisConfig,
    RevisionManifest,
    build_history,
    build_manifest,
    load_config,
    load_manifest,
    write_manifest,
)
from .normalizer import NormalizeConfig, normalize_snapshot, normalize_table, order_for_emission
from .parser import (
    ColumnDef,
    ParseError,
    SchemaSnapshot,
    TableDef,
    parse_create_table,
    parse_schema,
    render_table,
)
from .reports import aggregate, per_revision_table, relative_difference, render

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "ColumnDef",
    "DiffResult",
    "FileKind",
    "NormalizeConfig",
    "ParseError",
    "RawStatement",
    "RevisionManifest",
    "SMO",
    "SMOKind",
    "SchemaSnapshot",
    "SourceFile",
    "TableDef",
    "aggregate",
    "apply_smos",
    "build_history",
    "build_manifest",
    "diff_consecutive",
    "diff_schemas",
    "diff_tables",
    "extract_ddl",
    "load_config",
    "load_manifest",
    "normalize_snapshot",
    "normalize_table",
    "order_for_emission",
    "parse_create_table",
    "parse_schema",
    "per_revision_table",
    "relative_difference",
    "render",
    "render_table",
    "splice_string_literals",
    "strip_sql_comments",
    "write_manifest",
]
