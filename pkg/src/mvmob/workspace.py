"""Reading and writing project directories (``mvmob.json`` plus one file per model)."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from mvmob.diagnostics import Diagnostic, has_errors, sort_diagnostics
from mvmob.dsl import EXTENSIONS, PARSERS, pretty_print
from mvmob.model import ModelKind, Project
from mvmob.projection import ProjectedSlice, Stakeholder

MANIFEST = "mvmob.json"

MANIFEST_KEYS = {
    "navigation": ModelKind.NAVIGATION,
    "data": ModelKind.DATA,
    "ui": ModelKind.UI,
    "logic": ModelKind.BUSINESS_LOGIC,
    "correspondences": ModelKind.CORRESPONDENCE,
}
KEY_OF = {v: k for k, v in MANIFEST_KEYS.items()}


class ManifestError(Exception):
    """The project directory or its manifest cannot be used."""


@dataclass
class LoadedProject:
    root: Path
    manifest: dict
    paths: dict[ModelKind, Path] = field(default_factory=dict)
    sources: dict[ModelKind, str] = field(default_factory=dict)
    models: dict[ModelKind, object] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    project: Optional[Union[Project, ProjectedSlice]] = None

    @property
    def ok(self) -> bool:
        return self.project is not None


def read_manifest(project_dir: Union[str, Path]) -> dict:
    path = Path(project_dir) / MANIFEST
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        manifest = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(manifest, dict) or not isinstance(manifest.get("name"), str):
        raise ManifestError(f"{path}: manifest must be an object with a string 'name'")
    for key in MANIFEST_KEYS:
        value = manifest.get(key)
        if value is not None and not isinstance(value, str):
            raise ManifestError(f"{path}: '{key}' must be a relative path string")
    stakeholder = manifest.get("stakeholder")
    if stakeholder is not None and stakeholder not in {s.value for s in Stakeholder}:
        raise ManifestError(f"{path}: unknown stakeholder {stakeholder!r}")
    if not any(manifest.get(k) for k in MANIFEST_KEYS if k != "correspondences"):
        raise ManifestError(f"{path}: manifest names no model files")
    return manifest


def load_project(project_dir: Union[str, Path]) -> LoadedProject:
    """Parse every model the manifest lists.  Raises :class:`ManifestError` on IO problems."""
    root = Path(project_dir)
    manifest = read_manifest(root)
    loaded = LoadedProject(root=root, manifest=manifest)
    diags: list[Diagnostic] = []
    for key, kind in MANIFEST_KEYS.items():
        rel = manifest.get(key)
        if not rel:
            continue
        path = root / rel
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ManifestError(f"cannot read {kind.value} model {path}: {exc}") from None
        loaded.paths[kind] = path
        loaded.sources[kind] = text
        model, model_diags = PARSERS[kind](text, rel)
        diags += model_diags
        if model is not None:
            loaded.models[kind] = model
    loaded.diagnostics = sort_diagnostics(diags)
    if has_errors(diags):
        return loaded

    files = {k: manifest[KEY_OF[k]] for k in loaded.paths}
    m = loaded.models
    corrs = m.get(ModelKind.CORRESPONDENCE, ())
    viewpoints = (ModelKind.NAVIGATION, ModelKind.DATA, ModelKind.UI, ModelKind.BUSINESS_LOGIC)
    if all(k in m for k in viewpoints) and manifest.get("stakeholder") is None:
        loaded.project = Project(
            manifest["name"], m[ModelKind.NAVIGATION], m[ModelKind.DATA], m[ModelKind.UI],
            m[ModelKind.BUSINESS_LOGIC], corrs, files=files,
        )
    else:
        stakeholder = manifest.get("stakeholder")
        loaded.project = ProjectedSlice(
            manifest["name"],
            Stakeholder(stakeholder) if stakeholder else None,
            m.get(ModelKind.NAVIGATION), m.get(ModelKind.DATA), m.get(ModelKind.UI),
            m.get(ModelKind.BUSINESS_LOGIC), corrs, files=files,
        )
    return loaded


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "-", name).strip("-").lower() or "project"


def model_texts(project) -> dict[ModelKind, str]:
    """Canonical text of every model present in ``project``."""
    out = {}
    for kind, model in (
        (ModelKind.NAVIGATION, project.navigation),
        (ModelKind.DATA, project.data),
        (ModelKind.UI, project.ui),
        (ModelKind.BUSINESS_LOGIC, project.logic),
    ):
        if model is not None:
            out[kind] = pretty_print(model)
    if len(out) > 1:
        out[ModelKind.CORRESPONDENCE] = pretty_print(project.correspondences)
    return out


def write_project(project, out_dir: Union[str, Path]) -> list[Path]:
    """Write ``project`` (full or slice) as an ordinary project directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = getattr(project, "files", None) or {}
    manifest: dict = {"name": project.name}
    stakeholder = getattr(project, "stakeholder", None)
    if stakeholder is not None:
        manifest["stakeholder"] = stakeholder.value
    written = []
    for kind, text in model_texts(project).items():
        fname = Path(files[kind]).name if kind in files else _slug(project.name) + EXTENSIONS[kind]
        (out / fname).write_text(text, encoding="utf-8")
        manifest[KEY_OF[kind]] = fname
        written.append(out / fname)
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    written.append(out / MANIFEST)
    return sorted(written)
