"""Code generation: a resolved JSON bundle and a static hypertext prototype."""

from __future__ import annotations

import html
import json
from pathlib import Path
from typing import Optional, Union

from mvmob.expr import format_expr
from mvmob.model import (
    ApplicationSpecific,
    CorrespondenceType,
    DataOp,
    DeviceAccess,
    DeviceCapability,
    EcaRule,
    ElementId,
    Entity,
    Navigate,
    Project,
    UIElement,
    UIKind,
    UIUpdate,
    UserInteraction,
    data_id,
)
from mvmob.validation import validate_project

BUNDLE_FORMAT = 1


class GenError(Exception):
    """Generation was asked for on a project it cannot handle."""


def _require_valid(project) -> None:
    if not isinstance(project, Project):
        raise GenError("code generation needs a full project with all four viewpoints")
    report = validate_project(project)
    if not report.valid:
        codes = ", ".join(sorted({d.code for d in report.errors}))
        raise GenError(f"project {project.name} is not valid ({codes})")


def _main_containers(project: Project) -> dict[ElementId, ElementId]:
    """View id -> root container id, first ViewMainContainer wins."""
    out: dict[ElementId, ElementId] = {}
    for c in project.correspondences:
        if c.ctype is CorrespondenceType.VIEW_MAIN_CONTAINER:
            out.setdefault(c.left, c.right)
    return out


def _links(project: Project, ctype: CorrespondenceType) -> dict[ElementId, ElementId]:
    out: dict[ElementId, ElementId] = {}
    for c in project.correspondences:
        if c.ctype is ctype:
            out.setdefault(c.left, c.right)
    return out


# -- bundle ------------------------------------------------------------------


def _ui_tree(el: UIElement) -> dict:
    return {
        "id": str(el.id),
        "name": el.name,
        "kind": el.kind.value,
        "attributes": dict(el.attributes),
        "children": [_ui_tree(c) for c in el.children],
    }


def _trigger(event) -> dict:
    if isinstance(event, UserInteraction):
        return {"type": "userInteraction", "gesture": event.gesture.value, "target": str(event.target)}
    if isinstance(event, DeviceCapability):
        return {"type": "deviceCapability", "capability": event.capability.value, "signal": event.signal}
    assert isinstance(event, ApplicationSpecific)
    return {"type": "applicationSpecific", "name": event.name}


def _action(action) -> dict:
    if isinstance(action, DataOp):
        return {
            "type": "dataOp",
            "entity": str(action.entity),
            "operation": str(action.entity.child(action.operation)),
            "args": [format_expr(a) for a in action.args],
            "bindAs": action.bind_as,
        }
    if isinstance(action, UIUpdate):
        return {
            "type": "uiUpdate",
            "element": str(action.element),
            "update": action.update.value,
            "value": format_expr(action.value) if action.value is not None else None,
        }
    if isinstance(action, Navigate):
        return {"type": "navigate", "flow": str(action.flow)}
    assert isinstance(action, DeviceAccess)
    return {
        "type": "deviceAccess",
        "capability": action.capability.value,
        "request": action.request,
        "bindAs": action.bind_as,
    }


def _rule(rule: EcaRule) -> dict:
    return {
        "id": str(rule.id),
        "name": rule.name,
        "scope": str(rule.scope) if rule.scope is not None else None,
        "trigger": _trigger(rule.trigger),
        "entry": str(rule.node_id(rule.entry.name)) if rule.entry else None,
        "nodes": [
            {
                "id": str(rule.node_id(n.name)),
                "name": n.name,
                "action": _action(n.action),
                "next": [
                    {
                        "target": str(rule.node_id(cf.target)),
                        "condition": format_expr(cf.condition) if cf.condition is not None else None,
                    }
                    for cf in n.outgoing
                ],
            }
            for n in rule.nodes
        ],
    }


def _entity(entity: Entity) -> dict:
    return {
        "id": str(entity.id),
        "name": entity.name,
        "properties": [
            {"id": str(data_id(entity.name, p.name)), "name": p.name, "type": p.ptype.value}
            for p in entity.properties
        ],
        "operations": [
            {
                "id": str(data_id(entity.name, op.name)),
                "name": op.name,
                "kind": op.kind.value,
                "params": [{"name": n, "type": t.value} for n, t in op.params],
                "returns": op.returns.value if op.returns is not None else None,
            }
            for op in entity.all_operations()
        ],
        "references": [
            {
                "id": str(data_id(entity.name, r.name)),
                "name": r.name,
                "target": str(r.target),
                "cardinality": r.cardinality.value,
            }
            for r in entity.references
        ],
    }


def generate_bundle(project) -> dict:
    """The joined, fully resolved form of a valid project."""
    _require_valid(project)
    nav, ui = project.navigation, project.ui
    mains = _main_containers(project)
    roots = {r.id: r for r in ui.roots}
    used_roots = set()
    views = []
    for v in nav.views:
        main = mains.get(v.id)
        used_roots.add(main)
        views.append({
            "id": str(v.id),
            "name": v.name,
            "title": v.title,
            "entry": v.id == nav.entry,
            "mainContainer": _ui_tree(roots[main]) if main in roots else None,
            "flows": [
                {
                    "id": str(f.id),
                    "name": f.name,
                    "source": str(f.source),
                    "target": str(f.target),
                    "guard": format_expr(f.guard) if f.guard is not None else None,
                }
                for f in nav.flows
                if f.source == v.id
            ],
            "rules": [str(r.id) for r in project.logic.rules if r.scope in (None, v.id)],
        })
    return {
        "format": BUNDLE_FORMAT,
        "name": project.name,
        "entryView": str(nav.entry),
        "views": views,
        "unassignedContainers": [_ui_tree(r) for r in ui.roots if r.id not in used_roots],
        "entities": [_entity(e) for e in project.data.entities],
        "rules": [_rule(r) for r in project.logic.rules],
        "correspondences": [
            {"id": str(c.id), "name": c.name, "type": c.ctype.value, "left": str(c.left), "right": str(c.right)}
            for c in project.correspondences
        ],
    }


def bundle_to_json(bundle: dict) -> str:
    return json.dumps(bundle, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_bundle(project, path: Union[str, Path]) -> Path:
    text = bundle_to_json(generate_bundle(project))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


# -- prototype -------------------------------------------------------------

STYLES = """\
body { font-family: sans-serif; margin: 0; }
.view { max-width: 24rem; margin: 1rem auto; border: 1px solid #999; padding: 0.5rem; }
.ui-container, .ui-grid, .ui-listItems, .ui-menu, .ui-navigationBar { padding: 0.25rem; margin: 0.25rem 0; }
.ui-navigationBar, .ui-menu { display: flex; gap: 0.5rem; background: #eee; }
.ui-listItems { border-left: 3px solid #ccc; }
.ui-grid { display: grid; grid-template-columns: 1fr 1fr; }
.ui-image, .ui-map { background: #ddd; min-height: 4rem; text-align: center; }
.placeholder { color: #777; font-style: italic; }
.guard { color: #a60; font-size: 0.8em; margin-left: 0.25rem; }
"""


def _esc(text: Optional[str]) -> str:
    return html.escape(text or "", quote=True)


class _Renderer:
    def __init__(self, project: Project):
        self.project = project
        self.nav_links = _links(project, CorrespondenceType.NAV_ITEM_FLOW)
        # AttributeLabel runs Data -> UI, so key it by the label
        self.labels: dict[ElementId, ElementId] = {}
        for c in project.correspondences:
            if c.ctype is CorrespondenceType.ATTRIBUTE_LABEL:
                self.labels.setdefault(c.right, c.left)

    def element(self, el: UIElement, view: ElementId, depth: int) -> list[str]:
        pad = "  " * depth
        cls = f"ui-{el.kind.value}"
        ident = f'id="{_esc(el.name)}"'
        text = _esc(el.attr("text", ""))
        if el.kind.is_container:
            lines = [f'{pad}<div class="{cls}" {ident}>']
            for child in el.children:
                lines += self.element(child, view, depth + 1)
            lines.append(f"{pad}</div>")
            return lines
        kind = el.kind
        if kind is UIKind.NAVIGATION_ITEM:
            flow_id = self.nav_links.get(el.id)
            flow = self.project.navigation.flow(flow_id.name) if flow_id else None
            if flow is not None and flow.source == view:
                guard = ""
                if flow.guard is not None:
                    guard = f'<span class="guard">when {_esc(format_expr(flow.guard))}</span>'
                href = _esc(flow.target.name + ".html")
                return [f'{pad}<a class="{cls}" {ident} href="{href}">{text or _esc(el.name)}</a>{guard}']
            return [f'{pad}<span class="{cls}" {ident}>{text or _esc(el.name)}</span>']
        if kind is UIKind.LABEL:
            prop = self.labels.get(el.id)
            if prop is not None:
                return [
                    f'{pad}<span class="{cls} placeholder" {ident} data-property="{_esc(prop.display)}">'
                    f"{_esc(prop.name)}</span>"
                ]
            return [f'{pad}<span class="{cls}" {ident}>{text}</span>']
        if kind is UIKind.BUTTON:
            return [f'{pad}<button type="button" class="{cls}" {ident}>{text or _esc(el.name)}</button>']
        if kind is UIKind.TEXT_INPUT:
            return [f'{pad}<input type="text" class="{cls}" {ident} placeholder="{_esc(el.attr("placeholder", ""))}">']
        if kind is UIKind.IMAGE:
            alt = _esc(el.attr("alt", el.name))
            return [f'{pad}<div class="{cls}" {ident} role="img" aria-label="{alt}">{alt}</div>']
        # map and anything else: a labelled block
        return [f'{pad}<div class="{cls}" {ident}>{kind.value}</div>']

    def view(self, view, root: Optional[UIElement]) -> str:
        body = self.element(root, view.id, 3) if root is not None else []
        title = _esc(view.title or view.name)
        lines = [
            "<!DOCTYPE html>",
            '<html lang="en">',
            "<head>",
            '  <meta charset="utf-8">',
            f"  <title>{title}</title>",
            '  <link rel="stylesheet" href="styles.css">',
            "</head>",
            "<body>",
            f'  <main class="view" id="view-{_esc(view.name)}">',
            f"    <h1>{title}</h1>",
            '    <div class="body">',
            *body,
            "    </div>",
            "  </main>",
            "</body>",
            "</html>",
        ]
        return "\n".join(lines) + "\n"


def _index(entry: str) -> str:
    target = _esc(entry + ".html")
    return (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n'
        "<head>\n"
        '  <meta charset="utf-8">\n'
        f'  <meta http-equiv="refresh" content="0; url={target}">\n'
        "  <title>Redirect</title>\n"
        "</head>\n"
        "<body></body>\n"
        "</html>\n"
    )


def render_prototype(project) -> dict[str, str]:
    """File name -> content for the static prototype."""
    _require_valid(project)
    nav = project.navigation
    if nav.view("index") is not None or nav.view("styles") is not None:
        raise GenError("views named 'index' or 'styles' would clash with prototype support files")
    renderer = _Renderer(project)
    mains = _main_containers(project)
    roots = {r.id: r for r in project.ui.roots}
    files = {"styles.css": STYLES}
    for v in nav.views:
        files[v.name + ".html"] = renderer.view(v, roots.get(mains.get(v.id)))
    files["index.html"] = _index(nav.entry.name)
    return files


def generate_prototype(project, out_dir: Union[str, Path]) -> list[Path]:
    files = render_prototype(project)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    # index.html is last in insertion order, so it is written last
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
        written.append(out / name)
    return sorted(written)
