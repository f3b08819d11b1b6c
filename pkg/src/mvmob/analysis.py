"""Static pre-deployment analyses over a valid project."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from mvmob.diagnostics import Severity
from mvmob.model import (
    CorrespondenceType,
    ElementId,
    Navigate,
    NavigationModel,
    UIKind,
    UserInteraction,
)

INTERACTIVE_KINDS = frozenset({UIKind.BUTTON, UIKind.NAVIGATION_ITEM, UIKind.LIST_ITEMS, UIKind.MENU})


@dataclass(frozen=True)
class Finding:
    element: ElementId
    message: str
    severity: Severity

    def to_json(self) -> dict:
        return {"element": str(self.element), "severity": self.severity.value, "message": self.message}


@dataclass
class AnalysisResult:
    name: str
    findings: list[Finding] = field(default_factory=list)
    summary: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.findings = sorted(self.findings, key=lambda f: (f.element, f.severity.value, f.message))

    @property
    def has_errors(self) -> bool:
        return any(f.severity is Severity.ERROR for f in self.findings)

    def of_severity(self, severity: Severity) -> list[Finding]:
        return [f for f in self.findings if f.severity is severity]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "summary": dict(sorted(self.summary.items())),
            "findings": [f.to_json() for f in self.findings],
        }


def reachable_views(nav: NavigationModel) -> list[ElementId]:
    """Views reachable from the entry view when every flow may be taken (guards ignored)."""
    if nav.entry is None:
        return []
    succ: dict[ElementId, list[ElementId]] = {}
    for f in nav.flows:
        succ.setdefault(f.source, []).append(f.target)
    order = [nav.entry]
    seen = {nav.entry}
    queue = deque(order)
    while queue:
        for nxt in succ.get(queue.popleft(), ()):
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    return order


def reachability(project) -> AnalysisResult:
    nav = project.navigation
    reached = set(reachable_views(nav))
    findings = [
        Finding(v.id, f"view {v.name} is unreachable from entry view {nav.entry.name}", Severity.ERROR)
        for v in nav.views
        if v.id not in reached
    ]
    reachable_count = sum(1 for v in nav.views if v.id in reached)
    return AnalysisResult(
        "reachability",
        findings,
        {"reachable": reachable_count, "unreachable": len(nav.views) - reachable_count},
    )


def flow_references(project) -> dict[ElementId, int]:
    """How many navigate actions and NavItemFlow correspondences name each flow."""
    refs = {f.id: 0 for f in project.navigation.flows}
    if project.logic is not None:
        for rule in project.logic.rules:
            for node in rule.nodes:
                if isinstance(node.action, Navigate) and node.action.flow in refs:
                    refs[node.action.flow] += 1
    for c in project.correspondences:
        if c.ctype is CorrespondenceType.NAV_ITEM_FLOW and c.right in refs:
            refs[c.right] += 1
    return refs


def dead_flows(project) -> AnalysisResult:
    nav = project.navigation
    reached = set(reachable_views(nav))
    refs = flow_references(project)
    findings = []
    unused = unreachable = 0
    for f in nav.flows:
        if refs[f.id] == 0:
            unused += 1
            findings.append(
                Finding(f.id, f"flow {f.name} is taken by no navigate action and no navigation item", Severity.WARNING)
            )
        if f.source not in reached:
            unreachable += 1
            findings.append(Finding(f.id, f"flow {f.name} leaves unreachable view {f.source.name}", Severity.ERROR))
    return AnalysisResult(
        "deadFlows",
        findings,
        {"flows": len(nav.flows), "unreferenced": unused, "unreachableSource": unreachable},
    )


def event_coverage(project) -> AnalysisResult:
    rules = project.logic.rules
    targeted = {r.trigger.target for r in rules if isinstance(r.trigger, UserInteraction)}
    reached = set(reachable_views(project.navigation))
    findings = []
    interactive = inert = 0
    for el in project.ui.walk():
        if el.kind not in INTERACTIVE_KINDS:
            continue
        interactive += 1
        if el.id not in targeted:
            inert += 1
            findings.append(Finding(el.id, f"inert element: no rule reacts to {el.kind.value} {el.name}", Severity.WARNING))
    dead_rules = 0
    for r in rules:
        if r.scope is not None and r.scope not in reached:
            dead_rules += 1
            findings.append(Finding(r.id, f"rule {r.name} is scoped to unreachable view {r.scope.name}", Severity.ERROR))
    return AnalysisResult(
        "eventCoverage",
        findings,
        {
            "interactive": interactive,
            "covered": interactive - inert,
            "inert": inert,
            "rules": len(rules),
            "unreachableScope": dead_rules,
        },
    )


def _cyclic_components(graph: nx.DiGraph) -> list[set[str]]:
    return [
        comp for comp in nx.strongly_connected_components(graph)
        if len(comp) > 1 or any(graph.has_edge(n, n) for n in comp)
    ]


def guarded_cycle_budget(project) -> AnalysisResult:
    """Flag action nodes that lie on a control-flow cycle.

    A node on a cycle made only of unconditioned edges can loop forever and is
    an error; a node whose every cycle passes a condition is reported as info.
    """
    findings = []
    hard = soft = 0
    for rule in project.logic.rules:
        names = [n.name for n in rule.nodes]
        full = nx.DiGraph()
        bare = nx.DiGraph()
        full.add_nodes_from(names)
        bare.add_nodes_from(names)
        for n in rule.nodes:
            for cf in n.outgoing:
                full.add_edge(n.name, cf.target)
                if cf.condition is None:
                    bare.add_edge(n.name, cf.target)
        unguarded = set().union(*_cyclic_components(bare))
        looping = set().union(*_cyclic_components(full))
        for name in names:
            if name in unguarded:
                hard += 1
                findings.append(Finding(
                    rule.node_id(name),
                    f"potential non-termination: {rule.name}.{name} is on a cycle with no condition",
                    Severity.ERROR,
                ))
            elif name in looping:
                soft += 1
                findings.append(Finding(
                    rule.node_id(name),
                    f"{rule.name}.{name} is on a conditional cycle",
                    Severity.INFO,
                ))
    return AnalysisResult(
        "guardedCycleBudget",
        findings,
        {"rules": len(project.logic.rules), "unconditionalCycleNodes": hard, "conditionalCycleNodes": soft},
    )


ANALYSES = {
    "reachability": reachability,
    "deadFlows": dead_flows,
    "eventCoverage": event_coverage,
    "guardedCycleBudget": guarded_cycle_budget,
}


def run_analyses(project, names=None) -> list[AnalysisResult]:
    """Run the named analyses (all by default), ordered by analysis name."""
    names = sorted(names or ANALYSES)
    unknown = [n for n in names if n not in ANALYSES]
    if unknown:
        raise KeyError(f"unknown analysis: {', '.join(unknown)}")
    return [ANALYSES[n](project) for n in names]
