"""Parsers and canonical printers for the five model files.

Each ``parse_*`` function returns ``(model_or_None, diagnostics)``.  A model is
returned only when no error was reported; parsing recovers at top-level
statement boundaries so one run can report several problems.
"""

from __future__ import annotations

import json
from enum import Enum
from typing import Callable, Iterable, Optional, Sequence, TypeVar

from mvmob.diagnostics import Diagnostic, error, has_errors, point, sort_diagnostics
from mvmob.expr import Expr, format_expr, parse_expression
from mvmob.lexer import EOF, IDENT, STRING, DSLSyntaxError, Token, TokenCursor, tokenize
from mvmob.model import (
    ActionNode,
    ApplicationSpecific,
    BusinessLogicModel,
    Capability,
    Cardinality,
    ControlFlow,
    Correspondence,
    CorrespondenceType,
    DataModel,
    DataOp,
    DataOperation,
    DeviceAccess,
    DeviceCapability,
    EcaRule,
    ElementId,
    Entity,
    Gesture,
    ModelError,
    ModelKind,
    Navigate,
    NavigationFlow,
    NavigationModel,
    OpKind,
    PrimitiveType,
    Property,
    Reference,
    SourceSpan,
    UIElement,
    UIKind,
    UIModel,
    UIUpdate,
    UpdateKind,
    UserInteraction,
    View,
    data_id,
    nav_id,
    ui_id,
)

E = TypeVar("E", bound=Enum)

EXTENSIONS = {
    ModelKind.NAVIGATION: ".nav",
    ModelKind.DATA: ".data",
    ModelKind.UI: ".ui",
    ModelKind.BUSINESS_LOGIC: ".bl",
    ModelKind.CORRESPONDENCE: ".corr",
}

INDENT = "  "


class _Parser:
    top_keywords: frozenset[str] = frozenset()

    def __init__(self, text: str, file: str):
        self.file = file
        tokens, lex_errors = tokenize(text)
        self.cur = TokenCursor(tokens)
        self.diags: list[Diagnostic] = [
            error(e.code, e.message, point(file, e.line, e.col)) for e in lex_errors
        ]

    # -- helpers ---------------------------------------------------------

    def span_from(self, start: Token) -> SourceSpan:
        end = self.cur.previous
        return SourceSpan(self.file, start.line, start.col, end.end_line, end.end_col)

    def report(self, code: str, message: str, span: SourceSpan) -> None:
        self.diags.append(error(code, message, span))

    def ident(self, what: str = "identifier") -> Token:
        return self.cur.expect_kind(IDENT, what)

    def enum_value(self, enum: type[E], what: str) -> E:
        tok = self.cur.peek()
        values = [m.value for m in enum]  # type: ignore[attr-defined]
        if tok.kind == IDENT and tok.text in values:
            self.cur.advance()
            return enum(tok.text)
        raise DSLSyntaxError(
            f"expected {what}, found {tok.describe()}",
            tok.line,
            tok.col,
            {repr(v) for v in values},
            code="PAR005" if tok.kind == IDENT else "PAR001",
        )

    def expression(self) -> Expr:
        return parse_expression(self.cur)

    def statements(self, parse_one: Callable[[], object]) -> list:
        out = []
        while not self.cur.at_kind(EOF):
            start = self.cur.pos
            try:
                out.append(parse_one())
            except DSLSyntaxError as exc:
                self.diags.append(error(exc.code, _message(exc), point(self.file, exc.line, exc.col)))
                self._sync(start)
        return out

    def _sync(self, start: int) -> None:
        depth = 0
        for tok in self.cur.tokens[start:self.cur.pos]:
            if tok.text == "{" and tok.kind != STRING:
                depth += 1
            elif tok.text == "}" and tok.kind != STRING:
                depth -= 1
        if self.cur.pos == start:
            self.cur.advance()
        while not self.cur.at_kind(EOF):
            tok = self.cur.peek()
            prev = self.cur.previous
            at_line_start = tok.line > prev.line
            if depth <= 0 and at_line_start and tok.kind == IDENT and tok.text in self.top_keywords:
                return
            if tok.kind != STRING and tok.text == "{":
                depth += 1
            elif tok.kind != STRING and tok.text == "}":
                depth -= 1
            self.cur.advance()

    def unexpected(self, expected: Iterable[str]) -> DSLSyntaxError:
        tok = self.cur.peek()
        return self.cur.error(f"unexpected {tok.describe()}", expected)

    def finish(self, build: Callable[[], object]):
        if not has_errors(self.diags):
            try:
                model = build()
            except ModelError as exc:  # pragma: no cover - NAM checks run first
                self.report("PAR001", str(exc), point(self.file))
                model = None
        else:
            model = None
        return (model if not has_errors(self.diags) else None), sort_diagnostics(self.diags)

    def check_duplicates(self, items: Sequence[tuple[str, SourceSpan]], code: str, what: str) -> None:
        seen: dict[str, SourceSpan] = {}
        for name, span in items:
            if name in seen:
                first = seen[name]
                self.report(code, f"duplicate {what} {name!r} (first declared at line {first.start_line})", span)
            else:
                seen[name] = span


def _message(exc: DSLSyntaxError) -> str:
    if len(exc.expected) > 1 or (exc.expected and not exc.message.startswith("expected")):
        return f"{exc.message} (expected one of: {', '.join(sorted(exc.expected))})"
    return exc.message


# -- navigation -------------------------------------------------------------


class _NavParser(_Parser):
    top_keywords = frozenset({"view", "flow"})

    def parse(self):
        views: list[tuple[View, bool]] = []
        flows: list[NavigationFlow] = []

        def one():
            start = self.cur.peek()
            if self.cur.accept("view"):
                name = self.ident("view name").text
                title = name
                if self.cur.at_kind(STRING):
                    title = self.cur.advance().value
                is_entry = self.cur.accept("entry") is not None
                views.append((View(name, title, span=self.span_from(start)), is_entry))
            elif self.cur.accept("flow"):
                name = self.ident("flow name").text
                self.cur.expect(":")
                src = self.ident("source view").text
                self.cur.expect("->")
                dst = self.ident("target view").text
                guard = self.expression() if self.cur.accept("when") else None
                flows.append(NavigationFlow(name, nav_id(src), nav_id(dst), guard, span=self.span_from(start)))
            else:
                raise self.unexpected({"'view'", "'flow'"})

        self.statements(one)
        self.check_duplicates(
            [(v.name, v.span) for v, _ in views] + [(f.name, f.span) for f in flows],
            "NAM001",
            "navigation element",
        )
        entries = [v for v, e in views if e]
        if not entries and not has_errors(self.diags):
            self.report("NAM010", "no entry view: mark exactly one view with 'entry'", point(self.file, 1, 1))
        for extra in entries[1:]:
            self.report("NAM011", f"view {extra.name!r} is a second entry view", extra.span)
        return self.finish(
            lambda: NavigationModel(tuple(v for v, _ in views), tuple(flows), entries[0].id if entries else None)
        )


def parse_navigation(text: str, file: str = "<navigation>"):
    return _NavParser(text, file).parse()


# -- data -------------------------------------------------------------------


class _DataParser(_Parser):
    top_keywords = frozenset({"entity"})

    def parse(self):
        entities: list[Entity] = []

        def one():
            start = self.cur.peek()
            if not self.cur.accept("entity"):
                raise self.unexpected({"'entity'"})
            name = self.ident("entity name").text
            self.cur.expect("{")
            props, ops, refs = [], [], []
            members: list[tuple[str, SourceSpan]] = []
            while not self.cur.accept("}"):
                mstart = self.cur.peek()
                if self.cur.accept("prop"):
                    pname = self.ident("property name").text
                    self.cur.expect(":")
                    ptype = self.enum_value(PrimitiveType, "property type")
                    props.append(Property(pname, ptype, span=self.span_from(mstart)))
                    members.append((pname, props[-1].span))
                elif self.cur.accept("op"):
                    oname = self.ident("operation name").text
                    self.cur.expect("(")
                    params = []
                    pspans = []
                    if not self.cur.at(")"):
                        while True:
                            ptok = self.ident("parameter name")
                            self.cur.expect(":")
                            params.append((ptok.text, self.enum_value(PrimitiveType, "parameter type")))
                            pspans.append((ptok.text, self.span_from(ptok)))
                            if not self.cur.accept(","):
                                break
                    self.cur.expect(")")
                    returns = self.enum_value(PrimitiveType, "return type") if self.cur.accept(":") else None
                    self.check_duplicates(pspans, "NAM009", f"parameter of {name}.{oname}")
                    if not has_errors(self.diags):
                        ops.append(DataOperation(oname, OpKind.CUSTOM, tuple(params), returns, span=self.span_from(mstart)))
                    members.append((oname, self.span_from(mstart)))
                elif self.cur.accept("ref"):
                    rname = self.ident("reference name").text
                    self.cur.expect(":")
                    target = self.ident("target entity").text
                    card = self.enum_value(Cardinality, "cardinality")
                    refs.append(Reference(rname, data_id(target), card, span=self.span_from(mstart)))
                    members.append((rname, refs[-1].span))
                else:
                    raise self.unexpected({"'prop'", "'op'", "'ref'", "'}'"})
            self.check_duplicates(members, "NAM003", f"member of entity {name}")
            span = self.span_from(start)
            if not has_errors(self.diags):
                entities.append(Entity(name, tuple(props), tuple(ops), tuple(refs), span=span))
            else:
                entities.append(Entity(name, span=span))

        self.statements(one)
        self.check_duplicates([(e.name, e.span) for e in entities], "NAM002", "entity")
        return self.finish(lambda: DataModel(tuple(entities)))


def parse_data(text: str, file: str = "<data>"):
    return _DataParser(text, file).parse()


# -- UI ---------------------------------------------------------------------

UI_KIND_WORDS = frozenset(k.value for k in UIKind)


class _UIParser(_Parser):
    top_keywords = UI_KIND_WORDS

    def parse(self):
        roots = self.statements(self.element)
        self.check_duplicates(
            [(el.name, el.span) for r in roots for el in r.walk()], "NAM004", "UI element"
        )
        return self.finish(lambda: UIModel(tuple(roots)))

    def element(self) -> UIElement:
        start = self.cur.peek()
        kind = self.enum_value(UIKind, "UI element kind")
        name = self.ident("element name").text
        attrs: list[tuple[str, str]] = []
        spans: list[tuple[str, SourceSpan]] = []
        while self.cur.at_kind(IDENT) and self.cur.at("=", 1):
            key = self.cur.advance()
            self.cur.expect("=")
            value = self.cur.expect_kind(STRING, "string value")
            attrs.append((key.text, value.value))  # type: ignore[arg-type]
            spans.append((key.text, self.span_from(key)))
        children: list[UIElement] = []
        if self.cur.accept("{"):
            while not self.cur.accept("}"):
                children.append(self.element())
        self.check_duplicates(spans, "NAM005", f"attribute of {name}")
        if has_errors(self.diags):
            attrs = list(dict(attrs).items())
        return UIElement(name, kind, tuple(children), tuple(attrs), span=self.span_from(start))


def parse_ui(text: str, file: str = "<ui>"):
    return _UIParser(text, file).parse()


# -- business logic ---------------------------------------------------------


class _LogicParser(_Parser):
    top_keywords = frozenset({"rule"})

    def parse(self):
        rules = self.statements(self.rule)
        self.check_duplicates([(r.name, r.span) for r in rules], "NAM006", "rule")
        return self.finish(lambda: BusinessLogicModel(tuple(rules)))

    def rule(self) -> EcaRule:
        start = self.cur.peek()
        if not self.cur.accept("rule"):
            raise self.unexpected({"'rule'"})
        name = self.ident("rule name").text
        scope = nav_id(self.ident("view name").text) if self.cur.accept("in") else None
        self.cur.expect("on")
        trigger = self.event()
        self.cur.expect("do")
        self.cur.expect("{")
        nodes: list[ActionNode] = []
        while not self.cur.accept("}"):
            nodes.append(self.node())
        self.check_duplicates([(n.name, n.span) for n in nodes], "NAM007", f"node of rule {name}")
        if has_errors(self.diags):
            nodes = list({n.name: n for n in reversed(nodes)}.values())[::-1]
        return EcaRule(name, trigger, tuple(nodes), scope, span=self.span_from(start))

    def event(self):
        if self.cur.accept("device"):
            cap = self.enum_value(Capability, "device capability")
            return DeviceCapability(cap, self.ident("signal name").text)
        if self.cur.accept("app"):
            return ApplicationSpecific(self.ident("event name").text)
        tok = self.cur.peek()
        if tok.kind == IDENT and tok.text in {g.value for g in Gesture}:
            gesture = self.enum_value(Gesture, "gesture")
            return UserInteraction(gesture, ui_id(self.ident("UI element").text))
        raise self.cur.error(
            f"expected an event, found {tok.describe()}",
            {"'device'", "'app'"} | {repr(g.value) for g in Gesture},
        )

    def node(self) -> ActionNode:
        start = self.ident("action node name")
        self.cur.expect(":")
        action = self.action()
        outgoing = []
        while self.cur.accept("goto"):
            target = self.ident("action node name").text
            cond = self.expression() if self.cur.accept("if") else None
            outgoing.append(ControlFlow(target, cond))
        return ActionNode(start.text, action, tuple(outgoing), span=self.span_from(start))

    def _bind(self) -> Optional[str]:
        return self.ident("binding name").text if self.cur.accept("as") else None

    def action(self):
        tok = self.cur.peek()
        if tok.kind == IDENT and self.cur.at(".", 1):
            entity = self.cur.advance().text
            self.cur.expect(".")
            op = self.ident("operation name").text
            self.cur.expect("(")
            args: list[Expr] = []
            if not self.cur.at(")"):
                args.append(self.expression())
                while self.cur.accept(","):
                    args.append(self.expression())
            self.cur.expect(")")
            return DataOp(data_id(entity), op, tuple(args), self._bind())
        if self.cur.accept("ui"):
            update = self.enum_value(UpdateKind, "UI update")
            element = ui_id(self.ident("UI element").text)
            value = self.expression() if self.cur.accept("=") else None
            return UIUpdate(element, update, value)
        if self.cur.accept("navigate"):
            return Navigate(nav_id(self.ident("flow name").text))
        if self.cur.accept("device"):
            cap = self.enum_value(Capability, "device capability")
            request = self.ident("request name").text
            return DeviceAccess(cap, request, self._bind())
        raise self.cur.error(
            f"expected an action, found {tok.describe()}",
            {"Entity.operation(...)", "'ui'", "'navigate'", "'device'"},
        )


def parse_logic(text: str, file: str = "<logic>"):
    return _LogicParser(text, file).parse()


# -- correspondences --------------------------------------------------------

ENDPOINT_KINDS = tuple(k for k in ModelKind if k is not ModelKind.CORRESPONDENCE)


class _CorrParser(_Parser):
    top_keywords = frozenset({"correspond"})

    def parse(self):
        corrs: list[Correspondence] = []

        def one():
            start = self.cur.peek()
            if not self.cur.accept("correspond"):
                raise self.unexpected({"'correspond'"})
            ctype = self.enum_value(CorrespondenceType, "correspondence type")
            name = self.ident("correspondence name").text
            self.cur.expect("<->")
            left = self.qualified_id()
            right = self.qualified_id()
            span = self.span_from(start)
            want = ctype.endpoints
            if (left.model, right.model) != want:
                self.report(
                    "PAR030",
                    f"{ctype.value} {name} must link {want[0].value} -> {want[1].value}, "
                    f"got {left.model.value} -> {right.model.value}",
                    span,
                )
                return
            corrs.append(Correspondence(name, ctype, left, right, span=span))

        self.statements(one)
        self.check_duplicates([(c.name, c.span) for c in corrs], "NAM008", "correspondence")
        return self.finish(lambda: tuple(corrs))

    def qualified_id(self) -> ElementId:
        kind = ModelKind(self.enum_value(_EndpointKind, "model kind").value)
        self.cur.expect(":")
        segs = [self.ident("element name").text]
        while self.cur.accept("."):
            segs.append(self.ident("element name").text)
        return ElementId(kind, tuple(segs))


class _EndpointKind(str, Enum):
    NAVIGATION = "Navigation"
    DATA = "Data"
    UI = "UI"
    BUSINESS_LOGIC = "BusinessLogic"


def parse_correspondences(text: str, file: str = "<correspondences>"):
    return _CorrParser(text, file).parse()


PARSERS = {
    ModelKind.NAVIGATION: parse_navigation,
    ModelKind.DATA: parse_data,
    ModelKind.UI: parse_ui,
    ModelKind.BUSINESS_LOGIC: parse_logic,
    ModelKind.CORRESPONDENCE: parse_correspondences,
}


# -- printing ---------------------------------------------------------------


def _q(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _name(ref: ElementId) -> str:
    if len(ref.path) != 1:
        raise ValueError(f"{ref} cannot be written as a plain name")
    return ref.path[0]


def _blocks(blocks: Iterable[list[str]]) -> str:
    chunks = ["\n".join(b) for b in blocks if b]
    return "\n\n".join(chunks) + "\n" if chunks else ""


def print_navigation(model: NavigationModel) -> str:
    views = []
    for v in model.views:
        line = f"view {v.name} {_q(v.title)}"
        if model.entry == v.id:
            line += " entry"
        views.append(line)
    flows = []
    for f in model.flows:
        line = f"flow {f.name}: {_name(f.source)} -> {_name(f.target)}"
        if f.guard is not None:
            line += f" when {format_expr(f.guard)}"
        flows.append(line)
    return _blocks([views, flows])


def _print_entity(e: Entity) -> list[str]:
    members = [f"prop {p.name}: {p.ptype.value}" for p in e.properties]
    for o in e.operations:
        params = ", ".join(f"{n}: {t.value}" for n, t in o.params)
        line = f"op {o.name}({params})"
        if o.returns is not None:
            line += f": {o.returns.value}"
        members.append(line)
    members += [f"ref {r.name}: {_name(r.target)} {r.cardinality.value}" for r in e.references]
    if not members:
        return [f"entity {e.name} {{}}"]
    return [f"entity {e.name} {{"] + [INDENT + m for m in members] + ["}"]


def print_data(model: DataModel) -> str:
    return _blocks(_print_entity(e) for e in model.entities)


def _print_element(el: UIElement, depth: int) -> list[str]:
    pad = INDENT * depth
    head = f"{pad}{el.kind.value} {el.name}"
    for k, v in el.attributes:
        head += f" {k}={_q(v)}"
    if not el.children:
        return [head + (" {}" if el.is_container else "")]
    lines = [head + " {"]
    for c in el.children:
        lines += _print_element(c, depth + 1)
    lines.append(pad + "}")
    return lines


def print_ui(model: UIModel) -> str:
    return _blocks(_print_element(r, 0) for r in model.roots)


def _print_event(ev) -> str:
    if isinstance(ev, UserInteraction):
        return f"{ev.gesture.value} {_name(ev.target)}"
    if isinstance(ev, DeviceCapability):
        return f"device {ev.capability.value} {ev.signal}"
    return f"app {ev.name}"


def _print_action(a) -> str:
    if isinstance(a, DataOp):
        text = f"{_name(a.entity)}.{a.operation}({', '.join(format_expr(x) for x in a.args)})"
        return text + (f" as {a.bind_as}" if a.bind_as else "")
    if isinstance(a, UIUpdate):
        text = f"ui {a.update.value} {_name(a.element)}"
        return text + (f" = {format_expr(a.value)}" if a.value is not None else "")
    if isinstance(a, Navigate):
        return f"navigate {_name(a.flow)}"
    text = f"device {a.capability.value} {a.request}"
    return text + (f" as {a.bind_as}" if a.bind_as else "")


def _print_rule(r: EcaRule) -> list[str]:
    head = f"rule {r.name}"
    if r.scope is not None:
        head += f" in {_name(r.scope)}"
    head += f" on {_print_event(r.trigger)} do"
    if not r.nodes:
        return [head + " {}"]
    lines = [head + " {"]
    for n in r.nodes:
        line = f"{INDENT}{n.name}: {_print_action(n.action)}"
        for cf in n.outgoing:
            line += f" goto {cf.target}"
            if cf.condition is not None:
                line += f" if {format_expr(cf.condition)}"
        lines.append(line)
    lines.append("}")
    return lines


def print_logic(model: BusinessLogicModel) -> str:
    return _blocks(_print_rule(r) for r in model.rules)


def print_correspondences(corrs: Iterable[Correspondence]) -> str:
    lines = [f"correspond {c.ctype.value} {c.name} <-> {c.left} {c.right}" for c in corrs]
    return _blocks([lines])


def pretty_print(model) -> str:
    if isinstance(model, NavigationModel):
        return print_navigation(model)
    if isinstance(model, DataModel):
        return print_data(model)
    if isinstance(model, UIModel):
        return print_ui(model)
    if isinstance(model, BusinessLogicModel):
        return print_logic(model)
    if isinstance(model, (tuple, list)):
        return print_correspondences(model)
    raise TypeError(f"cannot print {type(model).__name__}")
