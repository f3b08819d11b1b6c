"""Deterministic interpreter for the event-condition-action rules.

A scenario seeds the data store, pre-binds names, and lists stimuli.  Each
stimulus is delivered in turn: every rule whose trigger matches (and whose
scope, if any, is the current view) runs its action graph from the entry
node, taking the first outgoing control flow whose condition is absent or
true.  Every step is appended to the trace.
"""

from __future__ import annotations

import copy
import datetime as dt
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional, Union

from mvmob.expr import EntityInstance, Environment, evaluate, format_expr, value_of
from mvmob.model import (
    ApplicationSpecific,
    Cardinality,
    DataOp,
    DeviceAccess,
    DeviceCapability,
    EcaRule,
    ElementId,
    Entity,
    Event,
    Navigate,
    OpKind,
    PrimitiveType,
    UIUpdate,
    UpdateKind,
    UserInteraction,
    ui_id,
)

STEP_BUDGET = 10_000


class ScenarioError(ValueError):
    """A scenario file is malformed."""


class SeedError(ScenarioError):
    """Seed data does not fit the data model."""


class TraceKind(str, Enum):
    EVENT_DELIVERED = "eventDelivered"
    RULE_FIRED = "ruleFired"
    ACTION_EXECUTED = "actionExecuted"
    CONDITION_EVALUATED = "conditionEvaluated"
    NAVIGATED = "navigated"
    ACTION_SKIPPED = "actionSkipped"
    BUDGET_EXHAUSTED = "budgetExhausted"


def to_jsonable(value: Any) -> Any:
    if isinstance(value, EntityInstance):
        return {"entity": value.entity, "id": value.id}
    if isinstance(value, dt.date):
        return value.isoformat()
    if isinstance(value, ElementId):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class TraceEvent:
    step: int
    kind: TraceKind
    subject: ElementId
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "step": self.step,
            "kind": self.kind.value,
            "subject": str(self.subject),
            "detail": to_jsonable(self.detail),
        }


def trace_to_jsonl(trace: Iterable[TraceEvent]) -> str:
    return "".join(json.dumps(e.to_json(), sort_keys=True, ensure_ascii=False) + "\n" for e in trace)


@dataclass(frozen=True)
class Stimulus:
    event: Event
    payload: dict = field(default_factory=dict)


@dataclass
class Scenario:
    seed: list[tuple[str, dict]] = field(default_factory=list)
    bindings: dict = field(default_factory=dict)
    stimuli: list[Stimulus] = field(default_factory=list)


def event_from_json(data: Any) -> Event:
    if not isinstance(data, dict):
        raise ScenarioError(f"event must be an object, got {data!r}")
    kind = data.get("kind")
    try:
        if kind == "userInteraction":
            target = data["target"]
            ref = ElementId.parse(target) if ":" in target else ui_id(target)
            return UserInteraction(data["gesture"], ref)
        if kind == "deviceCapability":
            return DeviceCapability(data["capability"], data["signal"])
        if kind == "applicationSpecific":
            return ApplicationSpecific(data["name"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ScenarioError(f"malformed {kind} event {data!r}: {exc}") from None
    raise ScenarioError(f"unknown event kind {kind!r}")


def event_to_json(event: Event) -> dict:
    if isinstance(event, UserInteraction):
        return {"kind": "userInteraction", "gesture": event.gesture.value, "target": str(event.target)}
    if isinstance(event, DeviceCapability):
        return {"kind": "deviceCapability", "capability": event.capability.value, "signal": event.signal}
    return {"kind": "applicationSpecific", "name": event.name}


def scenario_from_json(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    seed = []
    for item in data.get("seed", []):
        if not isinstance(item, dict) or not isinstance(item.get("entity"), str):
            raise ScenarioError(f"seed entries need an 'entity' name: {item!r}")
        values = item.get("values", {})
        if not isinstance(values, dict):
            raise ScenarioError(f"seed values must be an object: {item!r}")
        seed.append((item["entity"], values))
    bindings = data.get("bindings", {})
    if not isinstance(bindings, dict):
        raise ScenarioError("'bindings' must be an object")
    stimuli = []
    for item in data.get("stimuli", []):
        if not isinstance(item, dict):
            raise ScenarioError(f"stimulus must be an object: {item!r}")
        payload = item.get("payload", {})
        if not isinstance(payload, dict):
            raise ScenarioError(f"payload must be an object: {item!r}")
        stimuli.append(Stimulus(event_from_json(item.get("event")), payload))
    return Scenario(seed, bindings, stimuli)


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return scenario_from_json(data)


@dataclass
class SimState:
    current_view: ElementId
    store: dict[str, list[EntityInstance]] = field(default_factory=dict)
    env: Environment = field(default_factory=Environment)
    ui_state: dict[str, dict] = field(default_factory=dict)
    step: int = 0
    next_ids: dict[str, int] = field(default_factory=dict)

    def instances(self, entity: str) -> list[EntityInstance]:
        return self.store.get(entity, [])

    def to_json(self) -> dict:
        return {
            "currentView": str(self.current_view),
            "step": self.step,
            "store": to_jsonable({k: [i.snapshot() for i in v] for k, v in sorted(self.store.items())}),
            "bindings": to_jsonable(dict(sorted(self.env.bindings.items()))),
            "ui": to_jsonable(dict(sorted(self.ui_state.items()))),
        }


def conform(value: Any, ptype: PrimitiveType) -> tuple[bool, Any]:
    """Check ``value`` against a property type; returns ``(ok, stored_value)``. Null fits any type."""
    if value is None:
        return True, None
    if ptype in (PrimitiveType.STRING, PrimitiveType.URL):
        return isinstance(value, str), value
    if ptype is PrimitiveType.INTEGER:
        return isinstance(value, int) and not isinstance(value, bool), value
    if ptype is PrimitiveType.FLOAT:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        return ok, float(value) if ok else value
    if ptype is PrimitiveType.BOOLEAN:
        return isinstance(value, bool), value
    if isinstance(value, dt.datetime):
        return False, value
    if isinstance(value, dt.date):
        return True, value
    if isinstance(value, str):
        try:
            return True, dt.date.fromisoformat(value)
        except ValueError:
            return False, value
    return False, value


def _text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, EntityInstance):
        return f"{value.entity}#{value.id}"
    if isinstance(value, dt.date):
        return value.isoformat()
    return str(value)


class Simulator:
    def __init__(self, project, budget: int = STEP_BUDGET):
        self.project = project
        self.budget = budget
        self.entities = {e.name: e for e in project.data.entities}

    # -- setup -----------------------------------------------------------

    def init_state(self, scenario: Optional[Scenario] = None) -> SimState:
        scenario = scenario or Scenario()
        nav = self.project.navigation
        state = SimState(current_view=nav.entry)
        for name in self.entities:
            state.store[name] = []
            state.next_ids[name] = 1
        pending = []
        for entity_name, values in scenario.seed:
            entity = self.entities.get(entity_name)
            if entity is None:
                raise SeedError(f"seed names unknown entity {entity_name!r}")
            inst = self._new_instance(state, entity)
            for key, raw in values.items():
                prop = entity.property(key)
                if prop is not None:
                    ok, stored = conform(raw, prop.ptype)
                    if not ok:
                        raise SeedError(f"{entity.name}.{key}: {raw!r} is not a {prop.ptype.value}")
                    inst.properties[key] = stored
                elif entity.reference(key) is not None:
                    pending.append((inst, entity.reference(key), raw))
                else:
                    raise SeedError(f"{entity.name} has no property or reference {key!r}")
        for inst, ref, raw in pending:
            inst.references[ref.name] = self._seed_reference(state, inst, ref, raw)
        state.env = Environment({k: self._binding(state, k, v) for k, v in scenario.bindings.items()})
        for el in self.project.ui.walk():
            state.ui_state[el.name] = {"visible": True, "text": el.attr("text", "")}
        return state

    def _new_instance(self, state: SimState, entity: Entity) -> EntityInstance:
        iid = state.next_ids[entity.name]
        state.next_ids[entity.name] = iid + 1
        inst = EntityInstance(entity.name, iid, {p.name: None for p in entity.properties})
        for r in entity.references:
            inst.references[r.name] = [] if r.cardinality is Cardinality.MANY else None
        state.store[entity.name].append(inst)
        return inst

    def _find(self, state: SimState, entity: str, iid: Any) -> Optional[EntityInstance]:
        return next((i for i in state.instances(entity) if i.id == iid), None)

    def _seed_reference(self, state, inst, ref, raw):
        target = ref.target.name
        where = f"{inst.entity}#{inst.id}.{ref.name}"
        if ref.cardinality is Cardinality.MANY:
            if not isinstance(raw, list):
                raise SeedError(f"{where}: expected a list of {target} ids")
            out = []
            for iid in raw:
                found = self._find(state, target, iid)
                if found is None:
                    raise SeedError(f"{where}: no {target} with id {iid!r}")
                out.append(found)
            return out
        if raw is None:
            return None
        found = self._find(state, target, raw)
        if found is None:
            raise SeedError(f"{where}: no {target} with id {raw!r}")
        return found

    def _binding(self, state: SimState, name: str, raw: Any) -> Any:
        if isinstance(raw, dict) and set(raw) == {"$ref"}:
            ref = raw["$ref"]
            if not isinstance(ref, dict):
                raise SeedError(f"binding {name}: $ref needs an entity and id")
            found = self._find(state, ref.get("entity"), ref.get("id"))
            if found is None:
                raise SeedError(f"binding {name}: no instance {ref!r}")
            return found
        return raw

    # -- delivery ----------------------------------------------------------

    def matching_rules(self, state: SimState, event: Event) -> list[EcaRule]:
        return [
            r for r in self.project.logic.rules
            if r.trigger == event and (r.scope is None or r.scope == state.current_view)
        ]

    def deliver(self, state: SimState, event: Union[Event, Stimulus],
                payload: Optional[dict] = None) -> tuple[SimState, list[TraceEvent]]:
        if isinstance(event, Stimulus):
            event, payload = event.event, event.payload
        payload = dict(payload or {})
        run = _Delivery(self, copy.deepcopy(state), payload)
        subject = event.target if isinstance(event, UserInteraction) else state.current_view
        run.emit(TraceKind.EVENT_DELIVERED, subject, event=event_to_json(event), payload=payload)
        saved = run.state.env.bindings.pop("event", _UNSET)
        run.state.env.bindings["event"] = payload
        for rule in self.matching_rules(state, event):
            run.fire(rule)
        del run.state.env.bindings["event"]
        if saved is not _UNSET:
            run.state.env.bindings["event"] = saved
        return run.state, run.trace

    def run(self, scenario: Scenario) -> tuple[SimState, list[TraceEvent]]:
        state = self.init_state(scenario)
        trace: list[TraceEvent] = []
        for stimulus in scenario.stimuli:
            state, events = self.deliver(state, stimulus)
            trace.extend(events)
        return state, trace


_UNSET = object()


class _Delivery:
    """Mutable context for one event delivery."""

    def __init__(self, sim: Simulator, state: SimState, payload: dict):
        self.sim = sim
        self.state = state
        self.payload = payload
        self.trace: list[TraceEvent] = []
        self.executed = 0

    def emit(self, kind: TraceKind, subject: ElementId, **detail) -> None:
        self.state.step += 1
        self.trace.append(TraceEvent(self.state.step, kind, subject, detail))

    def fire(self, rule: EcaRule) -> None:
        self.emit(TraceKind.RULE_FIRED, rule.id, rule=rule.name)
        node = rule.entry
        while node is not None:
            if self.executed >= self.sim.budget:
                self.emit(TraceKind.BUDGET_EXHAUSTED, rule.id, budget=self.sim.budget)
                return
            self.executed += 1
            node_id = rule.node_id(node.name)
            self.execute(node_id, node.action)
            taken = None
            for cf in node.outgoing:
                if cf.condition is None:
                    taken = cf.target
                    break
                result = evaluate(cf.condition, self.state.env)
                self.emit(
                    TraceKind.CONDITION_EVALUATED, node_id,
                    condition=format_expr(cf.condition), result=result, target=cf.target,
                )
                if result:
                    taken = cf.target
                    break
            node = rule.node(taken) if taken is not None else None

    def skip(self, node_id: ElementId, reason: str) -> None:
        self.emit(TraceKind.ACTION_SKIPPED, node_id, reason=reason)

    def execute(self, node_id: ElementId, action) -> None:
        if isinstance(action, DataOp):
            self.data_op(node_id, action)
        elif isinstance(action, UIUpdate):
            self.ui_update(node_id, action)
        elif isinstance(action, Navigate):
            self.navigate(node_id, action)
        elif isinstance(action, DeviceAccess):
            value = self.payload.get(action.capability.value)
            if action.bind_as:
                self.state.env.bindings[action.bind_as] = value
            self.emit(
                TraceKind.ACTION_EXECUTED, node_id, action="deviceAccess",
                capability=action.capability.value, request=action.request, value=value,
            )

    def navigate(self, node_id: ElementId, action: Navigate) -> None:
        st = self.state
        flow = self.sim.project.navigation.flow(action.flow.name)
        if flow is None:
            self.skip(node_id, f"unknown flow {action.flow}")
            return
        if flow.source != st.current_view:
            self.skip(node_id, f"flow {flow.name} leaves {flow.source.name}, current view is {st.current_view.name}")
            return
        if flow.guard is not None:
            ok = evaluate(flow.guard, st.env)
            self.emit(TraceKind.CONDITION_EVALUATED, flow.id, condition=format_expr(flow.guard), result=ok)
            if not ok:
                self.skip(node_id, f"guard of flow {flow.name} is false")
                return
        self.emit(TraceKind.ACTION_EXECUTED, node_id, action="navigate", flow=flow.name)
        before = st.current_view
        st.current_view = flow.target
        self.emit(TraceKind.NAVIGATED, flow.id, **{"from": str(before), "to": str(flow.target)})

    def ui_update(self, node_id: ElementId, action: UIUpdate) -> None:
        slot = self.state.ui_state.get(action.element.name)
        if slot is None:
            self.skip(node_id, f"unknown UI element {action.element}")
            return
        detail = {"action": "uiUpdate", "element": action.element.name, "update": action.update.value}
        if action.update is UpdateKind.SET_TEXT:
            slot["text"] = _text(value_of(action.value, self.state.env) if action.value is not None else None)
            detail["text"] = slot["text"]
        elif action.update is UpdateKind.SHOW:
            slot["visible"] = True
        elif action.update is UpdateKind.HIDE:
            slot["visible"] = False
        self.emit(TraceKind.ACTION_EXECUTED, node_id, **detail)

    def _alive(self, inst: Any, entity: str) -> bool:
        return isinstance(inst, EntityInstance) and any(x is inst for x in self.state.instances(entity))

    def data_op(self, node_id: ElementId, action: DataOp) -> None:
        st = self.state
        entity = self.sim.entities.get(action.entity.name)
        op = entity.operation(action.operation) if entity is not None else None
        if op is None:
            self.skip(node_id, f"unknown operation {action.entity.display}.{action.operation}")
            return
        env = st.env
        detail: dict = {"action": "dataOp", "entity": entity.name, "operation": op.name}
        args = action.args

        if op.kind is OpKind.CREATE:
            values = [value_of(a, env) for a in args]
            if len(values) != len(entity.properties):
                self.skip(node_id, f"create expects {len(entity.properties)} argument(s)")
                return
            stored = []
            for prop, v in zip(entity.properties, values):
                ok, sv = conform(v, prop.ptype)
                if not ok:
                    self.skip(node_id, f"{entity.name}.{prop.name}: {_text(v)!r} is not a {prop.ptype.value}")
                    return
                stored.append(sv)
            inst = self.sim._new_instance(st, entity)
            inst.properties.update(zip((p.name for p in entity.properties), stored))
            result: Any = inst
            detail["instance"] = inst.id
        elif op.kind is OpKind.READ:
            if len(args) != 1:
                self.skip(node_id, "read expects one filter")
                return
            result = next(
                (i for i in st.instances(entity.name) if evaluate(args[0], env.bind("it", i))), None
            )
            detail["match"] = result.id if result is not None else None
        elif op.kind is OpKind.UPDATE:
            if len(args) != 3:
                self.skip(node_id, "update expects (instance, property, value)")
                return
            inst = value_of(args[0], env)
            prop_name = value_of(args[1], env)
            prop = entity.property(prop_name) if isinstance(prop_name, str) else None
            if not self._alive(inst, entity.name):
                self.skip(node_id, f"update target is not a live {entity.name}")
                return
            if prop is None:
                self.skip(node_id, f"{entity.name} has no property {prop_name!r}")
                return
            ok, sv = conform(value_of(args[2], env), prop.ptype)
            if not ok:
                self.skip(node_id, f"{entity.name}.{prop.name}: value is not a {prop.ptype.value}")
                return
            inst.properties[prop.name] = sv
            result = inst
            detail.update(instance=inst.id, property=prop.name, value=sv)
        elif op.kind is OpKind.DELETE:
            inst = value_of(args[0], env) if len(args) == 1 else None
            if not self._alive(inst, entity.name):
                self.skip(node_id, f"delete target is not a live {entity.name}")
                return
            st.store[entity.name] = [x for x in st.instances(entity.name) if x is not inst]
            self._drop_references(inst)
            result = None
            detail["instance"] = inst.id
        else:
            # custom operations have no modelled semantics
            result = None
            detail["stub"] = True
        if action.bind_as:
            env.bindings[action.bind_as] = result
        self.emit(TraceKind.ACTION_EXECUTED, node_id, **detail)

    def _drop_references(self, gone: EntityInstance) -> None:
        for instances in self.state.store.values():
            for inst in instances:
                for name, value in inst.references.items():
                    if value is gone:
                        inst.references[name] = None
                    elif isinstance(value, list) and any(v is gone for v in value):
                        inst.references[name] = [v for v in value if v is not gone]


def init_state(project, scenario: Optional[Scenario] = None) -> SimState:
    return Simulator(project).init_state(scenario)


def deliver(project, state: SimState, event, payload: Optional[dict] = None):
    return Simulator(project).deliver(state, event, payload)


def run(project, scenario: Scenario):
    return Simulator(project).run(scenario)
