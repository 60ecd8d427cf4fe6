"""Project manifests (TOML).

::

    name = "fib"
    entry = "main.main"             # <file_id>.<function>
    files = ["main.ml", "util.ml"]  # relative to the manifest

    [selection]                     # optional; patterns match "<file_id>.<fn>" call targets
    include = ["*"]
    exclude = ["util.debug_*"]
"""

from __future__ import annotations

import fnmatch
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .canon import SourceFile
from .errors import ManifestError
from .minilang.program import CallSite, Program, parse


@dataclass(frozen=True)
class ProjectManifest:
    name: str
    entry: str
    files: tuple
    root: Path
    include: tuple = ("*",)
    exclude: tuple = ()

    def selects(self, site: CallSite) -> bool:
        """Default selection: cross-file calls whose target passes include/exclude."""
        if not site.cross_file:
            return False
        target = site.target
        if not any(fnmatch.fnmatchcase(target, p) for p in self.include):
            return False
        return not any(fnmatch.fnmatchcase(target, p) for p in self.exclude)

    def sources(self) -> list[SourceFile]:
        return [SourceFile.load(self.root / rel, self.root) for rel in self.files]

    def program(self) -> Program:
        return parse(self.sources(), self.entry)


def _str_list(data: dict, key: str, where: str, default=None) -> tuple:
    value = data.get(key, default)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ManifestError(f"{where}: {key} must be a list of strings")
    return tuple(value)


def load_manifest(path: str | Path) -> ProjectManifest:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"{path}: no such manifest") from None
    except tomllib.TOMLDecodeError as exc:
        raise ManifestError(f"{path}: {exc}") from None

    entry = data.get("entry")
    if not isinstance(entry, str) or entry.count(".") != 1:
        raise ManifestError(f"{path}: entry must look like 'file.function'")
    files = _str_list(data, "files", str(path))
    if not files:
        raise ManifestError(f"{path}: files is empty")
    root = path.parent
    for rel in files:
        if not (root / rel).is_file():
            raise ManifestError(f"{path}: listed file {rel} does not exist")
    sel = data.get("selection", {})
    if not isinstance(sel, dict):
        raise ManifestError(f"{path}: [selection] must be a table")
    return ProjectManifest(
        name=str(data.get("name", root.name)),
        entry=entry,
        files=files,
        root=root,
        include=_str_list(sel, "include", str(path), ["*"]),
        exclude=_str_list(sel, "exclude", str(path), []),
    )
