from __future__ import annotations

import datetime as dt
import json
import random

import pytest

from _fixtures import BASE_BL, BASE_NAV, crud_project, make_project
from conftest import SCENARIO
from mvmob.analysis import reachable_views
from mvmob.dsl import parse_logic
from mvmob.model import (
    ApplicationSpecific,
    BusinessLogicModel,
    DeviceCapability,
    PrimitiveType,
    UserInteraction,
    nav_id,
    ui_id,
)
from mvmob.simulator import (
    STEP_BUDGET,
    Scenario,
    ScenarioError,
    SeedError,
    Simulator,
    Stimulus,
    TraceKind,
    conform,
    deliver,
    event_from_json,
    event_to_json,
    init_state,
    load_scenario,
    run,
    scenario_from_json,
    trace_to_jsonl,
)

TAP = "tap"


def kinds(trace):
    return [e.kind.value for e in trace]


def test_empty_scenario(cityguide):
    state = init_state(cityguide, Scenario())
    assert state.current_view == nav_id("home")
    assert all(v == [] for v in state.store.values())
    assert set(state.store) == {"Country", "City", "Attraction"}


def test_first_seed_gets_id_one(cityguide):
    state = init_state(cityguide, Scenario(seed=[("City", {"name": "Rome"})]))
    [rome] = state.instances("City")
    assert rome.id == 1 and rome.properties["name"] == "Rome"
    assert rome.properties["population"] is None


def test_seed_ids_follow_seed_order(cityguide):
    rng = random.Random(3)
    seed = [(rng.choice(["City", "Country", "Attraction"]), {"name": f"n{i}"}) for i in range(40)]
    state = init_state(cityguide, Scenario(seed=seed))
    counters: dict[str, int] = {}
    expected: dict[str, list] = {}
    for entity, values in seed:
        counters[entity] = counters.get(entity, 0) + 1
        expected.setdefault(entity, []).append((counters[entity], values["name"]))
    for entity, rows in expected.items():
        assert [(i.id, i.properties["name"]) for i in state.instances(entity)] == rows


def test_seed_references_resolve(cityguide):
    state = init_state(cityguide, load_scenario(SCENARIO))
    rome = state.instances("City")[0]
    assert rome.references["country"].properties["name"] == "Italy"
    assert [a.properties["name"] for a in rome.references["attractions"]] == ["Colosseum", "Pantheon"]


@pytest.mark.parametrize(
    "seed",
    [
        [("Planet", {})],
        [("City", {"colour": "red"})],
        [("City", {"population": "many"})],
        [("City", {"country": 7})],
        [("City", {"attractions": 1})],
    ],
)
def test_bad_seeds(cityguide, seed):
    with pytest.raises(SeedError):
        init_state(cityguide, Scenario(seed=seed))


def test_binding_refs(cityguide):
    sc = Scenario(seed=[("City", {"name": "Rome"})], bindings={"selectedCity": {"$ref": {"entity": "City", "id": 1}}})
    assert init_state(cityguide, sc).env.bindings["selectedCity"].properties["name"] == "Rome"
    sc.bindings = {"selectedCity": {"$ref": {"entity": "City", "id": 2}}}
    with pytest.raises(SeedError):
        init_state(cityguide, sc)


def test_event_without_rules(cityguide):
    before = init_state(cityguide)
    after, trace = deliver(cityguide, before, ApplicationSpecific("nothing"))
    assert kinds(trace) == ["eventDelivered"]
    assert after.current_view == before.current_view and after.store == before.store


def test_scope_filters_rules(cityguide):
    # cityList only reacts while the cities view is shown
    state, trace = deliver(cityguide, init_state(cityguide), UserInteraction(TAP, ui_id("cityList")))
    assert kinds(trace) == ["eventDelivered"]


def test_add_button_example(cityguide):
    before = init_state(cityguide)
    after, trace = deliver(cityguide, before, UserInteraction(TAP, ui_id("addButton")))
    assert kinds(trace) == ["eventDelivered", "ruleFired", "actionExecuted", "actionExecuted", "navigated"]
    assert len(after.instances("City")) == len(before.instances("City")) + 1
    assert after.current_view == nav_id("cityDetail")
    assert after.env.bindings["selectedCity"].properties["website"] == "https://example.org"
    # the input state is untouched
    assert before.current_view == nav_id("home") and before.instances("City") == []


def _looping_project(bare=True):
    bl = BASE_BL + (
        "\nrule spin on app spin do {\n"
        "  a: ui refresh itemTitle goto b\n"
        f"  b: ui refresh itemTitle goto a{'' if bare else ' if true'}\n"
        "}\n"
    )
    return make_project(bl=bl)


def test_budget_exhausted_after_exactly_budget_actions():
    project = _looping_project()
    _, trace = deliver(project, init_state(project), ApplicationSpecific("spin"))
    counts = kinds(trace)
    assert counts.count("actionExecuted") == STEP_BUDGET == 10_000
    assert counts[-1] == "budgetExhausted"
    assert "conditionEvaluated" not in counts


def test_conditional_loop_also_hits_budget():
    project = _looping_project(bare=False)
    _, trace = deliver(project, init_state(project), ApplicationSpecific("spin"))
    assert kinds(trace).count("actionExecuted") == STEP_BUDGET
    assert trace[-1].kind is TraceKind.BUDGET_EXHAUSTED


def test_smaller_budget():
    project = _looping_project()
    _, trace = Simulator(project, budget=5).deliver(Simulator(project).init_state(), ApplicationSpecific("spin"))
    assert kinds(trace) == ["eventDelivered", "ruleFired"] + ["actionExecuted"] * 5 + ["budgetExhausted"]


def test_zero_stimuli_is_init_state(cityguide):
    sc = load_scenario(SCENARIO)
    sc.stimuli = []
    final, trace = run(cityguide, sc)
    assert trace == []
    assert final.to_json() == init_state(cityguide, sc).to_json()


def test_scenario_is_deterministic_and_sound(cityguide):
    a_state, a = run(cityguide, load_scenario(SCENARIO))
    b_state, b = run(cityguide, load_scenario(SCENARIO))
    assert trace_to_jsonl(a) == trace_to_jsonl(b)
    assert a_state.to_json() == b_state.to_json()
    reach = set(reachable_views(cityguide.navigation))
    for e in a:
        if e.kind is TraceKind.NAVIGATED:
            assert nav_id(e.detail["to"].split(":")[1]) in reach
    steps = [e.step for e in a]
    assert steps == list(range(1, len(a) + 1))


def test_trace_lines_are_sorted_json(cityguide):
    _, trace = run(cityguide, load_scenario(SCENARIO))
    for line in trace_to_jsonl(trace).splitlines():
        data = json.loads(line)
        assert list(data) == sorted(data)


def test_read_on_empty_store_binds_null():
    project = crud_project()
    state, trace = deliver(project, init_state(project), ApplicationSpecific("find"), {"qty": 1})
    assert state.env.bindings["found"] is None
    assert trace[-1].detail["match"] is None


def test_create_then_read():
    project = crud_project()
    state = init_state(project)
    state, _ = deliver(project, state, ApplicationSpecific("add"), {"label": "x", "qty": 2})
    state, _ = deliver(project, state, ApplicationSpecific("find"), {"qty": 2})
    assert state.env.bindings["found"] is state.env.bindings["last"]
    assert state.env.bindings["found"].properties == {"label": "x", "qty": 2}


def test_ids_are_never_reused():
    project = crud_project()
    state = init_state(project)
    for payload in ({"label": "a", "qty": 1}, {"label": "b", "qty": 2}):
        state, _ = deliver(project, state, ApplicationSpecific("add"), payload)
    state, _ = deliver(project, state, ApplicationSpecific("find"), {"qty": 2})
    state, _ = deliver(project, state, ApplicationSpecific("drop"))
    state, _ = deliver(project, state, ApplicationSpecific("add"), {"label": "c", "qty": 3})
    assert [i.id for i in state.instances("Item")] == [1, 3]


def test_bad_create_is_skipped():
    project = crud_project()
    state, trace = deliver(project, init_state(project), ApplicationSpecific("add"), {"label": 5, "qty": 1})
    assert state.instances("Item") == []
    assert trace[-1].kind is TraceKind.ACTION_SKIPPED


def test_delete_clears_references(cityguide):
    bl_extra = "\nrule wipe on app wipe do {\n  find: Country.read(true) as c goto kill\n  kill: Country.delete(c)\n}\n"
    extra, diags = parse_logic(bl_extra, "x.bl")
    assert not diags
    project = type(cityguide)(
        cityguide.name, cityguide.navigation, cityguide.data, cityguide.ui,
        BusinessLogicModel(cityguide.logic.rules + extra.rules), cityguide.correspondences,
    )
    state, _ = deliver(project, init_state(project, load_scenario(SCENARIO)), ApplicationSpecific("wipe"))
    assert state.instances("Country") == []
    assert all(c.references["country"] is None for c in state.instances("City"))


def test_device_access_reads_payload():
    bl = BASE_BL + "\nrule where on device gps fix do {\n  loc: device gps locate as here\n}\n"
    project = make_project(bl=bl)
    state, trace = deliver(project, init_state(project), DeviceCapability("gps", "fix"), {"gps": {"lat": 1.5}})
    assert state.env.bindings["here"] == {"lat": 1.5}
    assert trace[-1].detail["value"] == {"lat": 1.5}
    assert trace[0].subject == nav_id("home")


def test_false_guard_skips_navigation():
    nav = BASE_NAV.replace("flow open: home -> detail", "flow open: home -> detail when chosen != null")
    project = make_project(nav=nav)
    state, trace = deliver(project, init_state(project), UserInteraction(TAP, ui_id("itemList")))
    assert state.current_view == nav_id("home")
    assert kinds(trace)[-2:] == ["conditionEvaluated", "actionSkipped"]
    assert trace[-2].detail["result"] is False


def test_navigation_from_wrong_view_is_skipped():
    bl = BASE_BL + "\nrule jump on app jump do {\n  go: navigate back\n}\n"
    project = make_project(bl=bl)
    state, trace = deliver(project, init_state(project), ApplicationSpecific("jump"))
    assert state.current_view == nav_id("home")
    assert trace[-1].kind is TraceKind.ACTION_SKIPPED


def test_first_true_branch_wins():
    bl = BASE_BL + (
        "\nrule pick on app pick do {\n"
        "  s: ui refresh itemTitle goto x if event.n > 5 goto y if event.n > 1 goto z\n"
        "  x: ui hide itemTitle\n  y: ui setText itemTitle = event.n\n  z: ui refresh itemTitle\n}\n"
    )
    project = make_project(bl=bl)
    state, trace = deliver(project, init_state(project), ApplicationSpecific("pick"), {"n": 3})
    evaluated = [e.detail["result"] for e in trace if e.kind is TraceKind.CONDITION_EVALUATED]
    assert evaluated == [False, True]
    assert state.ui_state["itemTitle"]["text"] == "3"
    assert "event" not in state.env.bindings


def test_multiple_rules_fire_in_declaration_order():
    bl = BASE_BL + "\nrule one on app go do {\n  a: ui hide itemTitle\n}\n\nrule two on app go do {\n  b: ui show itemTitle\n}\n"
    project = make_project(bl=bl)
    state, trace = deliver(project, init_state(project), ApplicationSpecific("go"))
    assert [e.detail["rule"] for e in trace if e.kind is TraceKind.RULE_FIRED] == ["one", "two"]
    assert state.ui_state["itemTitle"]["visible"] is True


@pytest.mark.parametrize(
    "value, ptype, ok",
    [
        (None, PrimitiveType.INTEGER, True),
        (1, PrimitiveType.FLOAT, True),
        (True, PrimitiveType.INTEGER, False),
        ("2024-01-02", PrimitiveType.DATE, True),
        (dt.date(2024, 1, 2), PrimitiveType.DATE, True),
        (dt.datetime(2024, 1, 2, 3), PrimitiveType.DATE, False),
        ("x", PrimitiveType.BOOLEAN, False),
    ],
)
def test_conform(value, ptype, ok):
    assert conform(value, ptype)[0] is ok


def test_int_stored_as_float():
    assert conform(2, PrimitiveType.FLOAT) == (True, 2.0)


def test_event_json_round_trip():
    for ev in [UserInteraction("swipe", ui_id("x")), DeviceCapability("camera", "shot"), ApplicationSpecific("go")]:
        assert event_from_json(event_to_json(ev)) == ev
    assert event_from_json({"kind": "userInteraction", "gesture": "tap", "target": "x"}).target == ui_id("x")


@pytest.mark.parametrize(
    "data",
    [
        [],
        {"seed": [{"values": {}}]},
        {"stimuli": [{"event": {"kind": "telepathy"}}]},
        {"stimuli": [{"event": {"kind": "userInteraction", "gesture": "wave", "target": "x"}}]},
        {"stimuli": [{"event": {"kind": "applicationSpecific", "name": "go"}, "payload": 3}]},
    ],
)
def test_malformed_scenarios(data):
    with pytest.raises(ScenarioError):
        scenario_from_json(data)


def test_load_scenario_reports_bad_json(tmp_path):
    path = tmp_path / "bad.scn"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ScenarioError):
        load_scenario(path)


def test_stimulus_payload_used_by_run():
    project = crud_project()
    sc = Scenario(stimuli=[Stimulus(ApplicationSpecific("add"), {"label": "q", "qty": 9})])
    state, _ = run(project, sc)
    assert state.instances("Item")[0].properties == {"label": "q", "qty": 9}
