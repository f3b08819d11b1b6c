from __future__ import annotations

import random

import pytest

import _gen
from conftest import CITYGUIDE
from mvmob.diagnostics import CODES
from mvmob.dsl import (
    PARSERS,
    parse_correspondences,
    parse_data,
    parse_logic,
    parse_navigation,
    parse_ui,
    pretty_print,
)
from mvmob.model import (
    DataModel,
    DataOp,
    ModelKind,
    Navigate,
    PrimitiveType,
    UIKind,
    UIUpdate,
    UserInteraction,
    nav_id,
)
from mvmob.workspace import MANIFEST_KEYS, read_manifest


def codes(diags):
    return [d.code for d in diags]


def test_navigation_example():
    text = 'view home "Home" entry\nview detail "Detail"\nflow toDetail: home -> detail\n'
    nav, diags = parse_navigation(text, "a.nav")
    assert diags == []
    assert [v.name for v in nav.views] == ["home", "detail"]
    assert len(nav.flows) == 1 and nav.flows[0].guard is None
    assert nav.entry == nav_id("home")


@pytest.mark.parametrize("kind", [k for k in ModelKind if k is not ModelKind.NAVIGATION])
def test_empty_files(kind):
    model, diags = PARSERS[kind]("", "empty")
    assert diags == []
    assert pretty_print(model) == ""


def test_empty_navigation_needs_entry():
    model, diags = parse_navigation("", "e.nav")
    assert model is None
    assert codes(diags) == ["NAM010"]


def test_cityguide_round_trips_byte_identical():
    manifest = read_manifest(CITYGUIDE)
    counts = {}
    for key, kind in MANIFEST_KEYS.items():
        text = (CITYGUIDE / manifest[key]).read_text(encoding="utf-8")
        model, diags = PARSERS[kind](text, manifest[key])
        assert diags == []
        assert pretty_print(model) == text
        counts[kind] = model
    assert len(counts[ModelKind.NAVIGATION].views) == 5
    assert len(counts[ModelKind.DATA].entities) == 3
    assert len(counts[ModelKind.BUSINESS_LOGIC].rules) == 4


def test_empty_data_prints_empty():
    assert pretty_print(DataModel()) == ""


def test_single_entity_canonical_text():
    data, diags = parse_data("entity City { prop name: string }", "c.data")
    assert diags == []
    out = pretty_print(data)
    assert out == "entity City {\n  prop name: string\n}\n"
    # one-line form and canonical form differ only in layout
    assert " ".join(out.split()) == "entity City { prop name: string }"


def test_data_members():
    text = """
    entity City {
      prop name: string
      op nearby(lat: float, lon: float): string
      ref country: Country one
    }
    entity Country {}
    """
    data, diags = parse_data(text, "c.data")
    assert diags == []
    city = data.entity("City")
    assert city.property("name").ptype is PrimitiveType.STRING
    assert [o.name for o in city.all_operations()] == ["create", "read", "update", "delete", "nearby"]
    assert city.operation("create").params == (("name", PrimitiveType.STRING),)


def test_ui_tree_and_attributes():
    text = 'container main {\n  button go text="Go" hint="tap"\n  menu m {\n    navigationItem a\n  }\n}\n'
    ui, diags = parse_ui(text, "m.ui")
    assert diags == []
    assert [e.name for e in ui.walk()] == ["main", "go", "m", "a"]
    assert ui.element("go").attr("hint") == "tap"
    assert ui.element("m").kind is UIKind.MENU
    assert pretty_print(ui) == text


def test_logic_actions():
    text = """rule r in home on tap go do {
  a: City.create("x", 1) as c goto b if c != null goto d
  b: navigate toDetail
  d: ui setText title = c.name
}

rule s on device gps fix do {
  x: device gps locate as where
}

rule t on app logout do {}
"""
    bl, diags = parse_logic(text, "r.bl")
    assert diags == []
    r = bl.rule("r")
    assert isinstance(r.trigger, UserInteraction) and r.scope == nav_id("home")
    assert isinstance(r.nodes[0].action, DataOp) and r.nodes[0].action.bind_as == "c"
    assert [cf.target for cf in r.nodes[0].outgoing] == ["b", "d"]
    assert isinstance(r.nodes[1].action, Navigate)
    assert isinstance(r.nodes[2].action, UIUpdate)
    assert pretty_print(bl) == text


def test_comments_are_ignored():
    text = '// header\nview a "A" entry /* inline */\n/* multi\nline */ flow f: a -> a\n'
    nav, diags = parse_navigation(text, "c.nav")
    assert diags == [] and len(nav.flows) == 1


def test_recovery_reports_several_errors():
    text = 'view a "A" entry\nflow f a -> b\nview b "B"\nflow g: a => b\nflow h: b -> a\n'
    nav, diags = parse_navigation(text, "r.nav")
    assert nav is None
    assert len(diags) == 2
    assert [(d.span.start_line, d.code) for d in diags] == [(2, "PAR001"), (4, "PAR001")]
    assert diags[1].span.start_col == 11


def test_diagnostics_sorted_and_positioned():
    text = 'entity A {\n  prop x: strin\n}\nentity B {\n  prop y: int\n}\nentity C {}\n'
    data, diags = parse_data(text, "d.data")
    assert data is None
    assert [(d.span.start_line, d.code) for d in diags] == [(2, "PAR005"), (5, "PAR005")]
    assert diags[0].span.start_col == 11
    assert diags[0].human().startswith("d.data:2:11: error PAR005")


def test_duplicate_names():
    _, diags = parse_navigation('view a "A" entry\nflow a: a -> a\n', "n")
    assert codes(diags) == ["NAM001"]
    _, diags = parse_ui("container a {\n  label a\n}\n", "u")
    assert codes(diags) == ["NAM004"]
    _, diags = parse_logic("rule r on app x do {\n  n: navigate f\n  n: navigate g\n}\n", "l")
    assert codes(diags) == ["NAM007"]
    _, diags = parse_navigation('view a "A" entry\nview b "B" entry\n', "n")
    assert codes(diags) == ["NAM011"]


def test_correspondence_wrong_model_kind_is_par030():
    corrs, diags = parse_correspondences("correspond NavItemFlow x <-> Navigation:a UI:b\n", "c")
    assert corrs is None and codes(diags) == ["PAR030"]


def test_lexical_errors():
    _, diags = parse_navigation('view a "unterminated\n', "n")
    assert "PAR002" in codes(diags)
    _, diags = parse_navigation('view a "A" entry /* open', "n")
    assert "PAR003" in codes(diags)
    _, diags = parse_navigation('view a "\\q" entry', "n")
    assert "PAR004" in codes(diags)


def test_every_emitted_code_is_registered():
    bad = [
        ('view a "A" entry\nflow f a -> b\n', parse_navigation),
        ("entity A { prop x: nope }", parse_data),
        ("button b text=", parse_ui),
        ("rule r on tap do {}", parse_logic),
        ("correspond Nope x <-> UI:a UI:b", parse_correspondences),
    ]
    for text, parser in bad:
        _, diags = parser(text, "f")
        assert diags and all(d.code in CODES for d in diags)


@pytest.mark.parametrize("kind", list(ModelKind))
def test_round_trip_random(kind):
    gen = _gen.GENERATORS[kind]
    for seed in range(1000, 1100):
        model = gen(random.Random(seed))
        back, diags = PARSERS[kind](pretty_print(model), "gen")
        assert diags == [] and back == model, seed


@pytest.mark.parametrize("kind", list(ModelKind))
def test_pretty_print_is_fixpoint(kind):
    for seed in range(50):
        text = pretty_print(_gen.GENERATORS[kind](random.Random(seed)))
        back, _ = PARSERS[kind](text, "gen")
        assert pretty_print(back) == text


def test_failure_never_yields_a_model():
    rng = random.Random(7)
    for seed in range(60):
        kind = rng.choice(list(ModelKind))
        text = pretty_print(_gen.GENERATORS[kind](random.Random(seed)))
        if not text:
            continue
        cut = rng.randrange(len(text))
        mangled = text[:cut] + rng.choice(["{", "}", "->", "@", '"', ":"]) + text[cut:]
        model, diags = PARSERS[kind](mangled, "m")
        assert (model is None) == any(d.is_error for d in diags)
