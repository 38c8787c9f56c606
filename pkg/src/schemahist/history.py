"""Walk a frozen revision history described by a manifest.

The analyzer never talks to a version-control system.  A manifest is a
JSON document listing, per revision, the files that existed and their
SHA-256 digests; revisions live as plain directories on disk.  Content
hashes are verified eagerly so a corrupted corpus fails before any
statistics are computed.
"""

from __future__ import annotations

import fnmatch
import hashlib
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .extractor import FileKind, SourceFile, extract_ddl
from .normalizer import NormalizeConfig, NormalizeError, normalize_snapshot
from .parser import ParseError, SchemaSnapshot, parse_schema

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ManifestError(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestFile:
    path: str
    sha256: str


@dataclass(frozen=True)
class Revision:
    label: str
    files: tuple[ManifestFile, ...]
    timestamp: str | None = None


@dataclass(frozen=True)
class RevisionManifest:
    project: str
    root: Path
    revisions: tuple[Revision, ...]


@dataclass(frozen=True)
class AnalysisConfig:
    file_rules: tuple[tuple[str, FileKind], ...]
    normalize: NormalizeConfig
    selection_mode: str

    def validate(self) -> None:
        if not any(kind != FileKind.IGNORE for _, kind in self.file_rules):
            raise ConfigError("config needs at least one non-ignore file rule")
        try:
            self.normalize.validate()
        except NormalizeError as exc:
            raise ConfigError(str(exc)) from exc


DEFAULT_CONFIG = AnalysisConfig(
    file_rules=(
        ("*.sql", FileKind.SQL),
        ("*.c", FileKind.C_LIKE),
        ("*.cc", FileKind.C_LIKE),
        ("*.cpp", FileKind.C_LIKE),
        ("*.cxx", FileKind.C_LIKE),
        ("*.h", FileKind.C_LIKE),
        ("*.hh", FileKind.C_LIKE),
        ("*.hpp", FileKind.C_LIKE),
        ("*.m", FileKind.C_LIKE),
        ("*.mm", FileKind.C_LIKE),
    ),
    normalize=NormalizeConfig(),
    selection_mode="sql+code",
)


@dataclass(frozen=True)
class RevisionResult:
    label: str
    snapshot: SchemaSnapshot
    files_scanned: int
    statements_extracted: int


def compute_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _require(doc: dict, key: str, kind: type, where: str):
    value = doc.get(key)
    if not isinstance(value, kind):
        raise ManifestError(f"{where}: field {key!r} must be a {kind.__name__}")
    return value


def load_manifest(path: str | Path) -> RevisionManifest:
    """Load and fully validate a revision manifest.

    Every listed file must exist under the manifest root and match its
    recorded SHA-256 digest; revision labels must be unique and at least
    one revision must be present.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ManifestError(f"manifest {path} must be a JSON object")

    project = _require(doc, "project", str, str(path))
    root_field = _require(doc, "root", str, str(path))
    revisions_field = _require(doc, "revisions", list, str(path))
    if not revisions_field:
        raise ManifestError(f"manifest {path} lists no revisions")

    root = (path.parent / root_field).resolve()
    if not root.is_dir():
        raise ManifestError(f"manifest root {root} is not a directory")

    revisions: list[Revision] = []
    labels: set[str] = set()
    for index, entry in enumerate(revisions_field):
        where = f"{path} revision #{index}"
        if not isinstance(entry, dict):
            raise ManifestError(f"{where}: must be a JSON object")
        label = _require(entry, "label", str, where)
        if label in labels:
            raise ManifestError(f"{where}: duplicate revision label {label!r}")
        labels.add(label)
        timestamp = entry.get("timestamp")
        if timestamp is not None and not isinstance(timestamp, str):
            raise ManifestError(f"{where}: timestamp must be a string when present")
        files_field = _require(entry, "files", list, where)
        files: list[ManifestFile] = []
        for file_entry in files_field:
            if not isinstance(file_entry, dict):
                raise ManifestError(f"{where}: file entries must be JSON objects")
            rel = _require(file_entry, "path", str, where)
            digest = _require(file_entry, "sha256", str, where)
            full = (root / rel).resolve()
            if not full.is_relative_to(root):
                raise ManifestError(f"{where}: path {rel!r} escapes the manifest root")
            if not full.is_file():
                raise ManifestError(f"{where}: listed file {rel!r} does not exist under {root}")
            actual = compute_sha256(full)
            if actual != digest.lower():
                raise ManifestError(
                    f"{where}: content hash mismatch for {rel!r} "
                    f"(manifest {digest.lower()}, on disk {actual})"
                )
            files.append(ManifestFile(rel, digest.lower()))
        revisions.append(Revision(label, tuple(files), timestamp))
    return RevisionManifest(project, root, tuple(revisions))


def build_manifest(
    project: str,
    root: str | Path,
    revisions: list[tuple[str, list[str]]],
) -> RevisionManifest:
    """Construct a manifest for files already on disk, hashing them now.

    ``revisions`` pairs each label with the root-relative paths that make
    up that revision.  Useful for freezing a corpus; the analyzer itself
    only ever loads existing manifests.
    """
    root = Path(root).resolve()
    built = []
    for label, paths in revisions:
        files = tuple(ManifestFile(rel, compute_sha256(root / rel)) for rel in paths)
        built.append(Revision(label, files))
    return RevisionManifest(project, root, tuple(built))


def manifest_to_dict(manifest: RevisionManifest, root_field: str = ".") -> dict:
    return {
        "project": manifest.project,
        "root": root_field,
        "revisions": [
            {
                "label": rev.label,
                **({"timestamp": rev.timestamp} if rev.timestamp is not None else {}),
                "files": [{"path": f.path, "sha256": f.sha256} for f in rev.files],
            }
            for rev in manifest.revisions
        ],
    }


def write_manifest(manifest: RevisionManifest, path: str | Path, root_field: str = ".") -> None:
    Path(path).write_text(
        json.dumps(manifest_to_dict(manifest, root_field), indent=2) + "\n", encoding="utf-8"
    )


_RULE_KINDS = {kind.value: kind for kind in FileKind}


def load_config(path: str | Path | None) -> AnalysisConfig:
    """Load an analysis config from JSON or TOML; None means defaults."""
    if path is None:
        return DEFAULT_CONFIG
    path = Path(path)
    try:
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as handle:
                doc = tomllib.load(handle)
        else:
            doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"config {path} cannot be parsed: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be an object/table")

    rules: list[tuple[str, FileKind]] = []
    for index, entry in enumerate(doc.get("file_rules", [])):
        where = f"{path} file_rules[{index}]"
        if not isinstance(entry, dict) or "pattern" not in entry or "kind" not in entry:
            raise ConfigError(f"{where}: expected an object with 'pattern' and 'kind'")
        kind = _RULE_KINDS.get(str(entry["kind"]))
        if kind is None:
            raise ConfigError(
                f"{where}: unknown kind {entry['kind']!r}; expected sql, c_like, or ignore"
            )
        rules.append((str(entry["pattern"]), kind))
    if not rules:
        rules = list(DEFAULT_CONFIG.file_rules)

    normalize_doc = doc.get("normalize", {})
    if not isinstance(normalize_doc, dict):
        raise ConfigError(f"config {path}: 'normalize' must be an object/table")
    keyword_map = normalize_doc.get("keyword_map")
    if keyword_map is None:
        keyword_pairs = NormalizeConfig().keyword_map
    else:
        try:
            keyword_pairs = tuple((str(a), str(b)) for a, b in keyword_map)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config {path}: keyword_map must be a list of [from, to] pairs") from exc
    normalize = NormalizeConfig(
        default_type=str(normalize_doc.get("default_type", "integer")),
        case_fold=str(normalize_doc.get("case_fold", "lower")),
        keyword_map=keyword_pairs,
    )

    config = AnalysisConfig(
        file_rules=tuple(rules),
        normalize=normalize,
        selection_mode=str(doc.get("selection_mode", DEFAULT_CONFIG.selection_mode)),
    )
    config.validate()
    return config


def classify_path(path: str, rules: tuple[tuple[str, FileKind], ...]) -> FileKind | None:
    """First matching rule wins; None when no rule matches."""
    normalized = path.replace("\\", "/")
    for pattern, kind in rules:
        if fnmatch.fnmatchcase(normalized, pattern):
            return kind
    return None


def build_history(manifest: RevisionManifest, config: AnalysisConfig) -> list[RevisionResult]:
    """Extract, parse, and normalize every revision of a manifest.

    Pure with respect to the inputs: the same manifest and config always
    produce the same results, and nothing here mutates the corpus.
    Extraction and parse problems are carried in each snapshot rather
    than raised, so one broken file never aborts a whole run.
    """
    config.validate()
    results: list[RevisionResult] = []
    for revision in manifest.revisions:
        statements = []
        errors: list[ParseError] = []
        scanned = 0
        for entry in revision.files:
            kind = classify_path(entry.path, config.file_rules)
            if kind is None or kind == FileKind.IGNORE:
                continue
            content = (manifest.root / entry.path).read_text(encoding="utf-8", errors="replace")
            stmts, issues = extract_ddl(SourceFile(entry.path, kind, content))
            statements.extend(stmts)
            errors.extend(ParseError(i.path, i.line, i.message) for i in issues)
            scanned += 1
        snapshot = parse_schema(statements, revision.label, tuple(errors))
        if scanned == 0:
            snapshot = replace(
                snapshot,
                warnings=snapshot.warnings + ("no files matched the selection rules",),
            )
        snapshot = normalize_snapshot(snapshot, config.normalize)
        results.append(RevisionResult(revision.label, snapshot, scanned, len(statements)))
    return results
