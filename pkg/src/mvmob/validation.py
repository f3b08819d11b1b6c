"""Intra-model and cross-model semantic checks.

A project is valid iff no check reports an error.  Validation runs in two
phases: each viewpoint model on its own, then (only if all of those are
clean) the correspondences and the inter-model references.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional

from mvmob.diagnostics import Diagnostic, error, point, sort_diagnostics, warning
from mvmob.expr import Literal, Path, free_paths
from mvmob.model import (
    CRUD_NAMES,
    GESTURE_TARGET_CONTAINERS,
    ActionNode,
    BusinessLogicModel,
    Cardinality,
    CorrespondenceType,
    DataModel,
    DataOp,
    DataOperation,
    DeviceAccess,
    EcaRule,
    ElementIndex,
    Entity,
    ModelKind,
    Navigate,
    NavigationFlow,
    NavigationModel,
    OpKind,
    Property,
    UIElement,
    UIKind,
    UIModel,
    UIUpdate,
    UserInteraction,
    View,
)

# binding name -> entity name, or None when the bound value's shape is unknown
BindingShape = dict[str, Optional[str]]

RESERVED_BINDINGS: BindingShape = {"event": None}


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if not d.is_error]

    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]

    def to_json(self) -> dict:
        return {"valid": self.valid, "diagnostics": [d.to_json() for d in self.diagnostics]}


def _report(diags) -> ValidationReport:
    return ValidationReport(sort_diagnostics(diags))


def _where(el, fallback: str):
    span = getattr(el, "span", None)
    return span if span is not None else point(fallback)


# -- binding shapes ---------------------------------------------------------


def binding_shape(logic: Optional[BusinessLogicModel]) -> BindingShape:
    """Names bound by ``as`` clauses anywhere in the rules, with the entity they hold."""
    shape: BindingShape = dict(RESERVED_BINDINGS)
    if logic is None:
        return shape
    for rule in logic.rules:
        for node in rule.nodes:
            a = node.action
            if isinstance(a, DataOp) and a.bind_as:
                ent = a.entity.name if a.operation in ("create", "read") else None
                if a.bind_as in shape and shape[a.bind_as] != ent:
                    ent = None
                shape[a.bind_as] = ent
            elif isinstance(a, DeviceAccess) and a.bind_as:
                shape[a.bind_as] = None
    return shape


def path_resolves(path: Path, shape: BindingShape, data: Optional[DataModel]) -> bool:
    segs = path.segments
    if segs[0] not in shape:
        return False
    entity_name = shape[segs[0]]
    rest = segs[1:]
    for i, seg in enumerate(rest):
        last = i == len(rest) - 1
        entity = data.entity(entity_name) if (data is not None and entity_name) else None
        if entity is None:
            return True
        if entity.property(seg) is not None:
            return last
        ref = entity.reference(seg)
        if ref is None:
            return False
        if ref.cardinality is Cardinality.MANY:
            return last
        entity_name = ref.target.name
    return True


# -- intra ------------------------------------------------------------------


def _validate_navigation(model: NavigationModel, file: str, shape, data) -> list[Diagnostic]:
    diags = []
    views = {v.id for v in model.views}
    for f in model.flows:
        for end, ref in (("source", f.source), ("target", f.target)):
            if ref not in views:
                diags.append(error("VAL100", f"flow {f.name}: {end} {ref} is not a declared view", _where(f, file)))
        if f.guard is not None and shape is not None:
            for p in sorted(free_paths(f.guard), key=str):
                if not path_resolves(p, shape, data):
                    diags.append(
                        warning("VAL101", f"flow {f.name}: guard path {p} does not resolve", _where(f, file))
                    )
    if model.entry is None:
        diags.append(error("VAL102", "navigation model has no entry view", point(file)))
    elif model.entry not in views:
        diags.append(error("VAL102", f"entry view {model.entry} is not declared", point(file)))
    return diags


def _validate_data(model: DataModel, file: str) -> list[Diagnostic]:
    diags = []
    names = {e.id for e in model.entities}
    for e in model.entities:
        for r in e.references:
            if r.target not in names:
                diags.append(
                    error("VAL110", f"reference {e.name}.{r.name} targets unknown entity {r.target}", _where(r, file))
                )
        for m in (*e.properties, *e.operations, *e.references):
            if m.name in CRUD_NAMES:
                diags.append(
                    error("VAL111", f"{e.name}.{m.name} collides with the implicit {m.name} operation", _where(m, file))
                )
    return diags


def _validate_ui(model: UIModel, file: str) -> list[Diagnostic]:
    diags = []
    for r in model.roots:
        if not r.is_container:
            diags.append(error("VAL120", f"root element {r.name} is a {r.kind.value}, not a container", _where(r, file)))
    seen: dict[str, int] = defaultdict(int)
    visits = 0
    for el in model.walk():
        visits += 1
        seen[el.name] += 1
        if not el.is_container and el.children:
            diags.append(
                error("VAL121", f"{el.kind.value} {el.name} is a basic element but has children", _where(el, file))
            )
    for name, count in seen.items():
        if count > 1:
            diags.append(error("VAL120", f"element {name} has more than one parent", point(file)))
    return diags


def reachable_nodes(rule: EcaRule) -> list[str]:
    if not rule.nodes:
        return []
    names = {n.name for n in rule.nodes}
    order = [rule.nodes[0].name]
    seen = set(order)
    queue = deque(order)
    while queue:
        node = rule.node(queue.popleft())
        for cf in node.outgoing:
            if cf.target in names and cf.target not in seen:
                seen.add(cf.target)
                order.append(cf.target)
                queue.append(cf.target)
    return order


def _validate_logic(model: BusinessLogicModel, file: str) -> list[Diagnostic]:
    diags = []
    for rule in model.rules:
        if not rule.nodes:
            diags.append(error("VAL130", f"rule {rule.name} has an empty body", _where(rule, file)))
            continue
        names = {n.name for n in rule.nodes}
        for n in rule.nodes:
            for cf in n.outgoing:
                if cf.target not in names:
                    diags.append(
                        error("VAL130", f"{rule.name}.{n.name}: goto {cf.target} is not a node of the rule", _where(n, file))
                    )
        reached = set(reachable_nodes(rule))
        for n in rule.nodes:
            if n.name not in reached:
                diags.append(
                    error("VAL131", f"{rule.name}.{n.name} is unreachable from entry {rule.nodes[0].name}", _where(n, file))
                )
    return diags


def validate_intra(model, file: Optional[str] = None, *, bindings: Optional[BindingShape] = None,
                   data: Optional[DataModel] = None) -> ValidationReport:
    """Check one viewpoint model on its own.

    ``bindings`` enables the guard path check for navigation models; ``data``
    refines it with entity property names.
    """
    if isinstance(model, NavigationModel):
        return _report(_validate_navigation(model, file or "<navigation>", bindings, data))
    if isinstance(model, DataModel):
        return _report(_validate_data(model, file or "<data>"))
    if isinstance(model, UIModel):
        return _report(_validate_ui(model, file or "<ui>"))
    if isinstance(model, BusinessLogicModel):
        return _report(_validate_logic(model, file or "<logic>"))
    if isinstance(model, (tuple, list)):
        return ValidationReport()
    raise TypeError(f"cannot validate {type(model).__name__}")


def intra_reports(project) -> dict[ModelKind, ValidationReport]:
    out = {}
    shape = binding_shape(project.logic) if project.logic is not None else None
    for kind, model in (
        (ModelKind.NAVIGATION, project.navigation),
        (ModelKind.DATA, project.data),
        (ModelKind.UI, project.ui),
        (ModelKind.BUSINESS_LOGIC, project.logic),
    ):
        if model is None:
            continue
        if kind is ModelKind.NAVIGATION:
            out[kind] = validate_intra(model, _file_of(project, kind), bindings=shape, data=project.data)
        else:
            out[kind] = validate_intra(model, _file_of(project, kind))
    return out


def _file_of(project, kind: ModelKind) -> str:
    files = getattr(project, "files", None) or {}
    return files.get(kind, f"<{kind.value}>")


# -- cross ------------------------------------------------------------------


class _Cross:
    def __init__(self, project):
        self.p = project
        self.index = ElementIndex(project)
        self.diags: list[Diagnostic] = []
        self.corr_file = _file_of(project, ModelKind.CORRESPONDENCE)
        self.logic_file = _file_of(project, ModelKind.BUSINESS_LOGIC)

    def err(self, code, msg, el, file):
        self.diags.append(error(code, msg, _where(el, file)))

    def warn(self, code, msg, el, file):
        self.diags.append(warning(code, msg, _where(el, file)))

    def run(self) -> list[Diagnostic]:
        self.correspondences()
        if self.p.logic is not None:
            self.logic_refs()
        return self.diags

    def correspondences(self) -> None:
        p, idx, f = self.p, self.index, self.corr_file
        main_of: dict = defaultdict(list)  # view id -> container ids
        views_of: dict = defaultdict(list)  # container id -> view ids
        for c in p.correspondences:
            left, right = idx.get(c.left), idx.get(c.right)
            t = c.ctype
            if t is CorrespondenceType.VIEW_MAIN_CONTAINER:
                if not isinstance(left, View):
                    self.err("VAL200", f"{c.name}: {c.left} is not a view", c, f)
                elif not (isinstance(right, UIElement) and right.is_container and right in p.ui.roots):
                    self.err("VAL200", f"{c.name}: {c.right} is not a root container", c, f)
                else:
                    main_of[c.left].append(c.right)
                    views_of[c.right].append(c.left)
                    if len(main_of[c.left]) > 1:
                        self.err("VAL201", f"{c.name}: view {c.left} already has a main container", c, f)
                    if len(views_of[c.right]) == 2:
                        self.warn("VAL203", f"{c.name}: container {c.right} is the main container of several views", c, f)
            elif t is CorrespondenceType.ATTRIBUTE_LABEL:
                if not isinstance(left, Property):
                    self.err("VAL210", f"{c.name}: {c.left} is not an entity property", c, f)
                elif not (isinstance(right, UIElement) and right.kind is UIKind.LABEL):
                    self.err("VAL210", f"{c.name}: {c.right} is not a label", c, f)
            elif t is CorrespondenceType.ACTION_DATA_OPERATION:
                action = left.action if isinstance(left, ActionNode) else None
                if not isinstance(action, DataOp):
                    self.err("VAL220", f"{c.name}: {c.left} is not a data action", c, f)
                elif not isinstance(right, DataOperation):
                    self.err("VAL220", f"{c.name}: {c.right} is not a data operation", c, f)
                elif action.entity.child(action.operation) != c.right:
                    self.err(
                        "VAL220",
                        f"{c.name}: {c.left} performs {action.entity.name}.{action.operation}, not {c.right.display}",
                        c, f,
                    )
            elif t is CorrespondenceType.ELEMENT_ENTITY_BINDING:
                if not (isinstance(left, UIElement) and left.is_container):
                    self.err("VAL230", f"{c.name}: {c.left} is not a container", c, f)
                elif not isinstance(right, Entity):
                    self.err("VAL230", f"{c.name}: {c.right} is not an entity", c, f)
        # NavItemFlow needs the complete main-container map
        for c in p.correspondences:
            if c.ctype is not CorrespondenceType.NAV_ITEM_FLOW:
                continue
            left, right = idx.get(c.left), idx.get(c.right)
            if not (isinstance(left, UIElement) and left.kind is UIKind.NAVIGATION_ITEM):
                self.err("VAL231", f"{c.name}: {c.left} is not a navigation item", c, f)
            elif not isinstance(right, NavigationFlow):
                self.err("VAL231", f"{c.name}: {c.right} is not a navigation flow", c, f)
            else:
                root = p.ui.root_of(left.name)
                owners = views_of.get(root.id, []) if root is not None else []
                if right.source not in owners:
                    owner_text = ", ".join(str(v) for v in owners) or "no view"
                    self.err(
                        "VAL231",
                        f"{c.name}: flow {right.name} leaves {right.source}, but {left.name} belongs to {owner_text}",
                        c, f,
                    )
        if p.navigation is not None and p.ui is not None:
            nav_file = _file_of(p, ModelKind.NAVIGATION)
            for v in p.navigation.views:
                if v.id not in main_of:
                    self.warn("VAL202", f"view {v.name} has no main container", v, nav_file)

    def logic_refs(self) -> None:
        p, idx, f = self.p, self.index, self.logic_file
        for rule in p.logic.rules:
            if p.navigation is not None and rule.scope is not None and not isinstance(idx.get(rule.scope), View):
                self.err("VAL242", f"rule {rule.name}: scope {rule.scope} is not a declared view", rule, f)
            trig = rule.trigger
            if p.ui is not None and isinstance(trig, UserInteraction):
                el = idx.get(trig.target)
                if not isinstance(el, UIElement):
                    self.err("VAL241", f"rule {rule.name}: event target {trig.target} does not exist", rule, f)
                elif el.is_container and el.kind not in GESTURE_TARGET_CONTAINERS:
                    self.err("VAL241", f"rule {rule.name}: {el.kind.value} {el.name} cannot receive gestures", rule, f)
            for node in rule.nodes:
                self.action(rule, node)

    def action(self, rule: EcaRule, node: ActionNode) -> None:
        p, idx, f = self.p, self.index, self.logic_file
        a = node.action
        where = f"{rule.name}.{node.name}"
        if isinstance(a, Navigate) and p.navigation is not None:
            if not isinstance(idx.get(a.flow), NavigationFlow):
                self.err("VAL240", f"{where}: navigate names unknown flow {a.flow}", node, f)
        elif isinstance(a, UIUpdate) and p.ui is not None:
            if not isinstance(idx.get(a.element), UIElement):
                self.err("VAL244", f"{where}: UI update names unknown element {a.element}", node, f)
        elif isinstance(a, DataOp) and p.data is not None:
            entity = idx.get(a.entity)
            if not isinstance(entity, Entity):
                self.err("VAL243", f"{where}: unknown entity {a.entity}", node, f)
                return
            op = entity.operation(a.operation)
            if op is None:
                self.err("VAL243", f"{where}: entity {entity.name} has no operation {a.operation}", node, f)
                return
            problem = _arity_problem(entity, op, a)
            if problem:
                self.err("VAL243", f"{where}: {problem}", node, f)


def _arity_problem(entity: Entity, op: DataOperation, a: DataOp) -> Optional[str]:
    n = len(a.args)
    if op.kind is OpKind.CREATE:
        want = len(entity.properties)
        if n != want:
            return f"{entity.name}.create takes {want} argument(s) (one per property), got {n}"
    elif op.kind in (OpKind.READ, OpKind.DELETE):
        if n != 1:
            return f"{entity.name}.{op.name} takes exactly 1 argument, got {n}"
    elif op.kind is OpKind.UPDATE:
        if n != 3:
            return f"{entity.name}.update takes (instance, \"property\", value), got {n} argument(s)"
        prop = a.args[1]
        if not (isinstance(prop, Literal) and isinstance(prop.value, str) and entity.property(prop.value)):
            return f"{entity.name}.update: second argument must name a property of {entity.name} as a string"
    else:
        if n != len(op.params):
            return f"{entity.name}.{op.name} takes {len(op.params)} argument(s), got {n}"
    return None


class PreconditionError(ValueError):
    pass


def validate_cross(project) -> ValidationReport:
    """Check correspondences and inter-model references of an intra-valid project."""
    if not all(r.valid for r in intra_reports(project).values()):
        raise PreconditionError("cross-model validation needs every model to pass intra validation")
    return _report(_Cross(project).run())


def validate_project(project) -> ValidationReport:
    """Both phases; the cross phase runs only when every model is intra-valid."""
    reports = intra_reports(project)
    diags = [d for r in reports.values() for d in r.diagnostics]
    if all(r.valid for r in reports.values()):
        diags += _Cross(project).run()
    return _report(diags)
