"""Typed in-memory representation of the four viewpoint models and their correspondences.

Constructors enforce local invariants only (identifier syntax, name uniqueness,
correspondence endpoint kinds).  Referential integrity, such as flow endpoints
or reference targets, is checked by :mod:`mvmob.validation` so that broken
models can still be built and reported on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union

from mvmob.expr import Expr

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ModelError(ValueError):
    """A model constructor invariant was violated."""


class ModelKind(str, Enum):
    NAVIGATION = "Navigation"
    DATA = "Data"
    UI = "UI"
    BUSINESS_LOGIC = "BusinessLogic"
    CORRESPONDENCE = "Correspondence"


VIEWPOINT_KINDS = (ModelKind.NAVIGATION, ModelKind.DATA, ModelKind.UI, ModelKind.BUSINESS_LOGIC)


@dataclass(frozen=True, order=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int


@dataclass(frozen=True, order=True)
class ElementId:
    model: ModelKind
    path: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", ModelKind(self.model))
        object.__setattr__(self, "path", tuple(self.path))
        if not self.path:
            raise ModelError("element path must have at least one segment")
        for seg in self.path:
            if not isinstance(seg, str) or not IDENT_RE.match(seg):
                raise ModelError(f"invalid identifier segment {seg!r}")

    @classmethod
    def parse(cls, text: str) -> "ElementId":
        kind, sep, path = text.partition(":")
        if not sep:
            raise ModelError(f"qualified id must look like Kind:path, got {text!r}")
        try:
            model = ModelKind(kind)
        except ValueError:
            raise ModelError(f"unknown model kind {kind!r}") from None
        return cls(model, tuple(path.split(".")))

    @property
    def display(self) -> str:
        return ".".join(self.path)

    @property
    def name(self) -> str:
        return self.path[-1]

    def child(self, segment: str) -> "ElementId":
        return ElementId(self.model, self.path + (segment,))

    def __str__(self) -> str:
        return f"{self.model.value}:{self.display}"


def nav_id(name: str) -> ElementId:
    return ElementId(ModelKind.NAVIGATION, (name,))


def data_id(*path: str) -> ElementId:
    return ElementId(ModelKind.DATA, path)


def ui_id(name: str) -> ElementId:
    return ElementId(ModelKind.UI, (name,))


def logic_id(*path: str) -> ElementId:
    return ElementId(ModelKind.BUSINESS_LOGIC, path)


def _span_field():
    return field(default=None, compare=False, repr=False)


def _check_ident(name: str, what: str) -> None:
    if not isinstance(name, str) or not IDENT_RE.match(name):
        raise ModelError(f"invalid {what} name {name!r}")


def _check_unique(names, what: str) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise ModelError(f"duplicate {what} {n!r}")
        seen.add(n)


# -- navigation -------------------------------------------------------------


@dataclass(frozen=True)
class View:
    name: str
    title: str
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "view")

    @property
    def id(self) -> ElementId:
        return nav_id(self.name)


@dataclass(frozen=True)
class NavigationFlow:
    name: str
    source: ElementId
    target: ElementId
    guard: Optional[Expr] = None
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "flow")

    @property
    def id(self) -> ElementId:
        return nav_id(self.name)


@dataclass(frozen=True)
class NavigationModel:
    views: tuple[View, ...] = ()
    flows: tuple[NavigationFlow, ...] = ()
    entry: Optional[ElementId] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "views", tuple(self.views))
        object.__setattr__(self, "flows", tuple(self.flows))
        # views and flows share the Navigation id space
        _check_unique([v.name for v in self.views] + [f.name for f in self.flows], "navigation element")

    def view(self, name: str) -> Optional[View]:
        return next((v for v in self.views if v.name == name), None)

    def flow(self, name: str) -> Optional[NavigationFlow]:
        return next((f for f in self.flows if f.name == name), None)


# -- data -------------------------------------------------------------------


class PrimitiveType(str, Enum):
    STRING = "string"
    INTEGER = "integer"
    FLOAT = "float"
    BOOLEAN = "boolean"
    DATE = "date"
    URL = "url"


class OpKind(str, Enum):
    CREATE = "create"
    READ = "read"
    UPDATE = "update"
    DELETE = "delete"
    CUSTOM = "custom"


CRUD_NAMES = ("create", "read", "update", "delete")


class Cardinality(str, Enum):
    ONE = "one"
    MANY = "many"


@dataclass(frozen=True)
class Property:
    name: str
    ptype: PrimitiveType
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "property")
        object.__setattr__(self, "ptype", PrimitiveType(self.ptype))


@dataclass(frozen=True)
class DataOperation:
    name: str
    kind: OpKind = OpKind.CUSTOM
    params: tuple[tuple[str, PrimitiveType], ...] = ()
    returns: Optional[PrimitiveType] = None
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "operation")
        object.__setattr__(self, "kind", OpKind(self.kind))
        params = tuple((n, PrimitiveType(t)) for n, t in self.params)
        for n, _ in params:
            _check_ident(n, "parameter")
        _check_unique([n for n, _ in params], "parameter")
        object.__setattr__(self, "params", params)
        if self.returns is not None:
            object.__setattr__(self, "returns", PrimitiveType(self.returns))


@dataclass(frozen=True)
class Reference:
    name: str
    target: ElementId
    cardinality: Cardinality = Cardinality.ONE
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "reference")
        object.__setattr__(self, "cardinality", Cardinality(self.cardinality))


@dataclass(frozen=True)
class Entity:
    name: str
    properties: tuple[Property, ...] = ()
    operations: tuple[DataOperation, ...] = ()
    references: tuple[Reference, ...] = ()
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "entity")
        for attr in ("properties", "operations", "references"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        _check_unique(
            [p.name for p in self.properties]
            + [o.name for o in self.operations]
            + [r.name for r in self.references],
            f"member of entity {self.name}",
        )

    @property
    def id(self) -> ElementId:
        return data_id(self.name)

    def crud_operations(self) -> tuple[DataOperation, ...]:
        """The implicit CRUD operations every entity owns."""
        return (
            DataOperation("create", OpKind.CREATE, tuple((p.name, p.ptype) for p in self.properties)),
            DataOperation("read", OpKind.READ),
            DataOperation("update", OpKind.UPDATE),
            DataOperation("delete", OpKind.DELETE),
        )

    def all_operations(self) -> tuple[DataOperation, ...]:
        return self.crud_operations() + self.operations

    def operation(self, name: str) -> Optional[DataOperation]:
        return next((o for o in self.all_operations() if o.name == name), None)

    def property(self, name: str) -> Optional[Property]:
        return next((p for p in self.properties if p.name == name), None)

    def reference(self, name: str) -> Optional[Reference]:
        return next((r for r in self.references if r.name == name), None)


@dataclass(frozen=True)
class DataModel:
    entities: tuple[Entity, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entities", tuple(self.entities))
        _check_unique([e.name for e in self.entities], "entity")

    def entity(self, name: str) -> Optional[Entity]:
        return next((e for e in self.entities if e.name == name), None)


# -- UI ---------------------------------------------------------------------


class UIKind(str, Enum):
    BUTTON = "button"
    LABEL = "label"
    MAP = "map"
    IMAGE = "image"
    NAVIGATION_ITEM = "navigationItem"
    TEXT_INPUT = "textInput"
    LIST_ITEMS = "listItems"
    GRID = "grid"
    MENU = "menu"
    NAVIGATION_BAR = "navigationBar"
    CONTAINER = "container"

    @property
    def is_container(self) -> bool:
        return self in CONTAINER_KINDS


CONTAINER_KINDS = frozenset(
    {UIKind.LIST_ITEMS, UIKind.GRID, UIKind.MENU, UIKind.NAVIGATION_BAR, UIKind.CONTAINER}
)
# elements that may be the target of a user gesture
GESTURE_TARGET_CONTAINERS = frozenset({UIKind.MENU, UIKind.NAVIGATION_BAR, UIKind.LIST_ITEMS})


@dataclass(frozen=True)
class UIElement:
    name: str
    kind: UIKind
    children: tuple["UIElement", ...] = ()
    attributes: tuple[tuple[str, str], ...] = ()
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "UI element")
        object.__setattr__(self, "kind", UIKind(self.kind))
        object.__setattr__(self, "children", tuple(self.children))
        attrs = tuple((k, v) for k, v in self.attributes)
        for k, v in attrs:
            _check_ident(k, "attribute")
            if not isinstance(v, str):
                raise ModelError(f"attribute {k} of {self.name} must be a string")
        _check_unique([k for k, _ in attrs], f"attribute of {self.name}")
        object.__setattr__(self, "attributes", attrs)

    @property
    def id(self) -> ElementId:
        return ui_id(self.name)

    @property
    def is_container(self) -> bool:
        return self.kind.is_container

    def attr(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return dict(self.attributes).get(key, default)

    def walk(self) -> Iterator["UIElement"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass(frozen=True)
class UIModel:
    roots: tuple[UIElement, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "roots", tuple(self.roots))
        _check_unique([e.name for e in self.walk()], "UI element")

    def walk(self) -> Iterator[UIElement]:
        for r in self.roots:
            yield from r.walk()

    def walk_with_parents(self) -> Iterator[tuple[UIElement, Optional[UIElement]]]:
        def rec(el, parent):
            yield el, parent
            for c in el.children:
                yield from rec(c, el)

        for r in self.roots:
            yield from rec(r, None)

    def element(self, name: str) -> Optional[UIElement]:
        return next((e for e in self.walk() if e.name == name), None)

    def root_of(self, name: str) -> Optional[UIElement]:
        for r in self.roots:
            if any(e.name == name for e in r.walk()):
                return r
        return None


# -- business logic ---------------------------------------------------------


class Gesture(str, Enum):
    TAP = "tap"
    LONG_PRESS = "longPress"
    SWIPE = "swipe"


class Capability(str, Enum):
    GPS = "gps"
    CAMERA = "camera"
    NETWORK = "network"
    BATTERY = "battery"


class UpdateKind(str, Enum):
    SET_TEXT = "setText"
    SHOW = "show"
    HIDE = "hide"
    REFRESH = "refresh"


@dataclass(frozen=True)
class UserInteraction:
    gesture: Gesture
    target: ElementId

    def __post_init__(self) -> None:
        object.__setattr__(self, "gesture", Gesture(self.gesture))


@dataclass(frozen=True)
class DeviceCapability:
    capability: Capability
    signal: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "capability", Capability(self.capability))
        _check_ident(self.signal, "signal")


@dataclass(frozen=True)
class ApplicationSpecific:
    name: str

    def __post_init__(self) -> None:
        _check_ident(self.name, "application event")


Event = Union[UserInteraction, DeviceCapability, ApplicationSpecific]


@dataclass(frozen=True)
class DataOp:
    entity: ElementId
    operation: str
    args: tuple[Expr, ...] = ()
    bind_as: Optional[str] = None

    def __post_init__(self) -> None:
        _check_ident(self.operation, "operation")
        object.__setattr__(self, "args", tuple(self.args))
        if self.bind_as is not None:
            _check_ident(self.bind_as, "binding")


@dataclass(frozen=True)
class UIUpdate:
    element: ElementId
    update: UpdateKind
    value: Optional[Expr] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "update", UpdateKind(self.update))


@dataclass(frozen=True)
class Navigate:
    flow: ElementId


@dataclass(frozen=True)
class DeviceAccess:
    capability: Capability
    request: str
    bind_as: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "capability", Capability(self.capability))
        _check_ident(self.request, "request")
        if self.bind_as is not None:
            _check_ident(self.bind_as, "binding")


Action = Union[DataOp, UIUpdate, Navigate, DeviceAccess]


@dataclass(frozen=True)
class ControlFlow:
    target: str  # node name within the same rule
    condition: Optional[Expr] = None


@dataclass(frozen=True)
class ActionNode:
    name: str
    action: Action
    outgoing: tuple[ControlFlow, ...] = ()
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "action node")
        object.__setattr__(self, "outgoing", tuple(self.outgoing))


@dataclass(frozen=True)
class EcaRule:
    name: str
    trigger: Event
    nodes: tuple[ActionNode, ...] = ()
    scope: Optional[ElementId] = None
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "rule")
        object.__setattr__(self, "nodes", tuple(self.nodes))
        _check_unique([n.name for n in self.nodes], f"node of rule {self.name}")

    @property
    def id(self) -> ElementId:
        return logic_id(self.name)

    @property
    def entry(self) -> Optional[ActionNode]:
        return self.nodes[0] if self.nodes else None

    def node(self, name: str) -> Optional[ActionNode]:
        return next((n for n in self.nodes if n.name == name), None)

    def node_id(self, name: str) -> ElementId:
        return logic_id(self.name, name)


@dataclass(frozen=True)
class BusinessLogicModel:
    rules: tuple[EcaRule, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        _check_unique([r.name for r in self.rules], "rule")

    def rule(self, name: str) -> Optional[EcaRule]:
        return next((r for r in self.rules if r.name == name), None)


# -- correspondences --------------------------------------------------------


class CorrespondenceType(str, Enum):
    VIEW_MAIN_CONTAINER = "ViewMainContainer"
    ATTRIBUTE_LABEL = "AttributeLabel"
    ACTION_DATA_OPERATION = "ActionDataOperation"
    ELEMENT_ENTITY_BINDING = "ElementEntityBinding"
    NAV_ITEM_FLOW = "NavItemFlow"

    @property
    def endpoints(self) -> tuple[ModelKind, ModelKind]:
        return CORRESPONDENCE_ENDPOINTS[self]


CORRESPONDENCE_ENDPOINTS = {
    CorrespondenceType.VIEW_MAIN_CONTAINER: (ModelKind.NAVIGATION, ModelKind.UI),
    CorrespondenceType.ATTRIBUTE_LABEL: (ModelKind.DATA, ModelKind.UI),
    CorrespondenceType.ACTION_DATA_OPERATION: (ModelKind.BUSINESS_LOGIC, ModelKind.DATA),
    CorrespondenceType.ELEMENT_ENTITY_BINDING: (ModelKind.UI, ModelKind.DATA),
    CorrespondenceType.NAV_ITEM_FLOW: (ModelKind.UI, ModelKind.NAVIGATION),
}


@dataclass(frozen=True)
class Correspondence:
    name: str
    ctype: CorrespondenceType
    left: ElementId
    right: ElementId
    span: Optional[SourceSpan] = _span_field()

    def __post_init__(self) -> None:
        _check_ident(self.name, "correspondence")
        ctype = CorrespondenceType(self.ctype)
        object.__setattr__(self, "ctype", ctype)
        want_left, want_right = ctype.endpoints
        if self.left.model != want_left or self.right.model != want_right:
            raise ModelError(
                f"{ctype.value} links {want_left.value} -> {want_right.value}, "
                f"got {self.left.model.value} -> {self.right.model.value}"
            )

    @property
    def id(self) -> ElementId:
        return ElementId(ModelKind.CORRESPONDENCE, (self.name,))


def check_correspondences(corrs) -> tuple[Correspondence, ...]:
    corrs = tuple(corrs)
    _check_unique([c.name for c in corrs], "correspondence")
    return corrs


@dataclass(frozen=True)
class Project:
    name: str
    navigation: NavigationModel
    data: DataModel
    ui: UIModel
    logic: BusinessLogicModel
    correspondences: tuple[Correspondence, ...] = ()
    # source file per model kind, used only to locate diagnostics
    files: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "correspondences", check_correspondences(self.correspondences))

    def model(self, kind: ModelKind):
        return _model_of(self, kind)


ModelElement = Union[
    View, NavigationFlow, Entity, Property, DataOperation, Reference,
    UIElement, EcaRule, ActionNode, Correspondence,
]


def _model_of(project, kind: ModelKind):
    return {
        ModelKind.NAVIGATION: project.navigation,
        ModelKind.DATA: project.data,
        ModelKind.UI: project.ui,
        ModelKind.BUSINESS_LOGIC: project.logic,
        ModelKind.CORRESPONDENCE: project.correspondences,
    }[kind]


def iter_elements(project, kind: ModelKind) -> Iterator[tuple[ElementId, ModelElement]]:
    """Yield ``(id, element)`` for one model in declaration order.

    Works for any object exposing the Project attributes; absent models
    (``None``, as in a stakeholder slice) yield nothing.
    """
    model = _model_of(project, kind)
    if model is None:
        return
    if kind is ModelKind.NAVIGATION:
        for v in model.views:
            yield v.id, v
        for f in model.flows:
            yield f.id, f
    elif kind is ModelKind.DATA:
        for e in model.entities:
            yield e.id, e
            for p in e.properties:
                yield e.id.child(p.name), p
            for o in e.all_operations():
                yield e.id.child(o.name), o
            for r in e.references:
                yield e.id.child(r.name), r
    elif kind is ModelKind.UI:
        for el in model.walk():
            yield el.id, el
    elif kind is ModelKind.BUSINESS_LOGIC:
        for r in model.rules:
            yield r.id, r
            for n in r.nodes:
                yield r.node_id(n.name), n
    else:
        for c in model:
            yield c.id, c


def elements_of(project, kind: ModelKind) -> list[ElementId]:
    return [eid for eid, _ in iter_elements(project, ModelKind(kind))]


class ElementIndex:
    """Id -> element lookup over a whole project, built once."""

    def __init__(self, project) -> None:
        self._by_id: dict[ElementId, ModelElement] = {}
        for kind in ModelKind:
            for eid, el in iter_elements(project, kind):
                # first declaration wins on collisions (validation reports them)
                self._by_id.setdefault(eid, el)

    def get(self, ref: ElementId) -> Optional[ModelElement]:
        return self._by_id.get(ref)

    def __contains__(self, ref: ElementId) -> bool:
        return ref in self._by_id

    def __len__(self) -> int:
        return len(self._by_id)


def resolve(project, ref: ElementId) -> Optional[ModelElement]:
    return ElementIndex(project).get(ref)
