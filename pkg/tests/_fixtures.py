"""Small hand-written projects used across the test modules."""

from __future__ import annotations

from mvmob.dsl import parse_correspondences, parse_data, parse_logic, parse_navigation, parse_ui
from mvmob.model import Project

BASE_NAV = """\
view home "Home" entry
view detail "Detail"

flow open: home -> detail
flow back: detail -> home
"""

BASE_DATA = """\
entity Item {
  prop title: string
}
"""

BASE_UI = """\
container homeMain {
  navigationItem openItem
  listItems itemList {
    label itemTitle
  }
}

container detailMain {
  navigationItem backItem
  label detailTitle
}
"""

BASE_BL = """\
rule select in home on tap itemList do {
  find: Item.read(it.title == "x") as chosen goto go
  go: navigate open
}

rule goBack in detail on tap backItem do {
  leave: navigate back
}
"""

BASE_CORR = """\
correspond ViewMainContainer homeView <-> Navigation:home UI:homeMain
correspond ViewMainContainer detailView <-> Navigation:detail UI:detailMain
"""


def _ok(parsed):
    model, diags = parsed
    assert model is not None, [d.human() for d in diags]
    return model


def make_project(nav=BASE_NAV, data=BASE_DATA, ui=BASE_UI, bl=BASE_BL, corr=BASE_CORR, name="base") -> Project:
    return Project(
        name,
        _ok(parse_navigation(nav, "base.nav")),
        _ok(parse_data(data, "base.data")),
        _ok(parse_ui(ui, "base.ui")),
        _ok(parse_logic(bl, "base.bl")),
        _ok(parse_correspondences(corr, "base.corr")),
    )


# ctype -> (passing extra line, [(failing extra line, expected VAL codes)])
CORRESPONDENCE_CASES = {
    "ViewMainContainer": (
        "",
        [
            ("correspond ViewMainContainer second <-> Navigation:home UI:detailMain", {"VAL201", "VAL203"}),
            ("correspond ViewMainContainer flowAsView <-> Navigation:open UI:homeMain", {"VAL200"}),
        ],
    ),
    "AttributeLabel": (
        "correspond AttributeLabel titleLabel <-> Data:Item.title UI:itemTitle",
        [
            ("correspond AttributeLabel entityLabel <-> Data:Item UI:itemTitle", {"VAL210"}),
            ("correspond AttributeLabel notALabel <-> Data:Item.title UI:openItem", {"VAL210"}),
        ],
    ),
    "ActionDataOperation": (
        "correspond ActionDataOperation findRead <-> BusinessLogic:select.find Data:Item.read",
        [
            ("correspond ActionDataOperation navNode <-> BusinessLogic:select.go Data:Item.read", {"VAL220"}),
            ("correspond ActionDataOperation wrongOp <-> BusinessLogic:select.find Data:Item.create", {"VAL220"}),
        ],
    ),
    "ElementEntityBinding": (
        "correspond ElementEntityBinding listItems <-> UI:itemList Data:Item",
        [
            ("correspond ElementEntityBinding labelBound <-> UI:itemTitle Data:Item", {"VAL230"}),
            ("correspond ElementEntityBinding toProperty <-> UI:itemList Data:Item.title", {"VAL230"}),
        ],
    ),
    "NavItemFlow": (
        "correspond NavItemFlow openLink <-> UI:openItem Navigation:open",
        [
            ("correspond NavItemFlow wrongView <-> UI:openItem Navigation:back", {"VAL231"}),
            ("correspond NavItemFlow labelLink <-> UI:itemTitle Navigation:open", {"VAL231"}),
        ],
    ),
}


def with_correspondence(line: str) -> Project:
    return make_project(corr=BASE_CORR + (line + "\n" if line else ""))


CRUD_BL = """\
rule add on app add do {
  make: Item.create(event.label, event.qty) as last
}

rule find on app find do {
  look: Item.read(it.qty == event.qty) as found
}

rule bump on app bump do {
  set: Item.update(found, "qty", event.qty)
}

rule rename on app rename do {
  set: Item.update(last, "label", event.label)
}

rule drop on app drop do {
  kill: Item.delete(found)
}
"""

CRUD_DATA = """\
entity Item {
  prop label: string
  prop qty: integer
}
"""


def crud_project() -> Project:
    return make_project(
        nav='view home "Home" entry\n',
        data=CRUD_DATA,
        ui="container homeMain {}\n",
        bl=CRUD_BL,
        corr="correspond ViewMainContainer homeView <-> Navigation:home UI:homeMain\n",
        name="crud",
    )
