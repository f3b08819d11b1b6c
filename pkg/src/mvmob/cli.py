"""Command-line entry point: ``mvmob <command> --project DIR``.

Exit codes: 0 success, 1 findings, 2 DSL parse error, 3 IO, manifest or
usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from mvmob.analysis import ANALYSES, run_analyses
from mvmob.codegen import GenError, bundle_to_json, generate_bundle, generate_prototype
from mvmob.diagnostics import Severity
from mvmob.dsl import pretty_print
from mvmob.model import Project
from mvmob.projection import Stakeholder, project_slice
from mvmob.simulator import ScenarioError, Simulator, TraceKind, load_scenario, trace_to_jsonl
from mvmob.validation import validate_project
from mvmob.workspace import ManifestError, load_project, write_project

EXIT_OK, EXIT_FINDINGS, EXIT_PARSE, EXIT_ENV = 0, 1, 2, 3
TARGETS = ("bundle", "prototype")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ENV, f"{self.prog}: error: {message}\n")


class _Fail(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _csv(choices):
    def parse(text: str) -> list[str]:
        names = [n.strip() for n in text.split(",") if n.strip()]
        bad = [n for n in names if n not in choices]
        if bad or not names:
            raise argparse.ArgumentTypeError(
                f"unknown name(s) {', '.join(bad) or text!r}; choose from {', '.join(choices)}"
            )
        return names
    return parse


class Runner:
    def __init__(self, args: argparse.Namespace, stdout=None, stderr=None):
        self.args = args
        self.out = stdout or sys.stdout
        self.err = stderr or sys.stderr
        self.json = args.format == "json"
        self.out_dir = Path(args.out)

    def say(self, line: str = "") -> None:
        if not self.json:
            print(line, file=self.out)

    def emit_json(self, doc: dict) -> None:
        if self.json:
            print(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False), file=self.out)

    # -- shared steps ----------------------------------------------------------

    def load(self):
        try:
            loaded = load_project(self.args.project)
        except ManifestError as exc:
            raise _Fail(EXIT_ENV, str(exc)) from None
        if not loaded.ok:
            self.emit_json({"command": self.args.command, "ok": False,
                            "diagnostics": [d.to_json() for d in loaded.diagnostics]})
            for d in loaded.diagnostics:
                self.say(d.human())
            raise _Fail(EXIT_PARSE)
        return loaded

    def valid_project(self, need_full: bool = True):
        project = self.load().project
        if need_full and not isinstance(project, Project):
            raise _Fail(EXIT_ENV, f"'{self.args.command}' needs all four viewpoint models")
        report = validate_project(project)
        if not report.valid:
            self.emit_json({"command": self.args.command, "ok": False, **report.to_json()})
            for d in report.diagnostics:
                self.say(d.human())
            raise _Fail(EXIT_FINDINGS)
        return project

    # -- commands --------------------------------------------------------------

    def check(self) -> int:
        loaded = self.load()
        report = validate_project(loaded.project)
        self.emit_json({"command": "check", **report.to_json()})
        for d in report.diagnostics:
            self.say(d.human())
        self.say(f"{len(report.errors)} error(s), {len(report.warnings)} warning(s)")
        if not report.valid:
            return EXIT_FINDINGS
        if self.args.fail_on_warning and report.warnings:
            return EXIT_FINDINGS
        return EXIT_OK

    def analyze(self) -> int:
        project = self.valid_project()
        results = run_analyses(project, self.args.analysis)
        target = self.out_dir / "analysis"
        target.mkdir(parents=True, exist_ok=True)
        worst = EXIT_OK
        for res in results:
            (target / f"{res.name}.json").write_text(
                json.dumps(res.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            summary = ", ".join(f"{k}={v}" for k, v in sorted(res.summary.items()))
            self.say(f"{res.name}: {summary}")
            for f in res.findings:
                self.say(f"  {f.element}: {f.severity.value} {f.message}")
            if res.has_errors:
                worst = EXIT_FINDINGS
            elif self.args.fail_on_warning and res.of_severity(Severity.WARNING):
                worst = EXIT_FINDINGS
        self.emit_json({"command": "analyze", "analyses": [r.to_json() for r in results]})
        return worst

    def project(self) -> int:
        source = self.valid_project(need_full=False)
        sliced = project_slice(source, self.args.stakeholder)
        dest = self.out_dir / "slices" / sliced.stakeholder.value
        written = write_project(sliced, dest)
        self.emit_json({
            "command": "project",
            "stakeholder": sliced.stakeholder.value,
            "viewpoints": sorted(k.value for k in sliced.viewpoints),
            "correspondences": len(sliced.correspondences),
            "files": [str(p) for p in written],
        })
        for p in written:
            self.say(str(p))
        return EXIT_OK

    def simulate(self) -> int:
        project = self.valid_project()
        scenario_path = Path(self.args.scenario)
        try:
            scenario = load_scenario(scenario_path)
            state, trace = Simulator(project).run(scenario)
        except OSError as exc:
            raise _Fail(EXIT_ENV, f"cannot read scenario {scenario_path}: {exc.strerror or exc}") from None
        except ScenarioError as exc:
            raise _Fail(EXIT_ENV, f"{scenario_path}: {exc}") from None
        target = self.out_dir / "traces"
        target.mkdir(parents=True, exist_ok=True)
        trace_file = target / f"{scenario_path.stem}.jsonl"
        trace_file.write_text(trace_to_jsonl(trace), encoding="utf-8")
        state_file = target / f"{scenario_path.stem}.state.json"
        state_file.write_text(json.dumps(state.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        exhausted = [e for e in trace if e.kind is TraceKind.BUDGET_EXHAUSTED]
        visited = [str(project.navigation.entry)] + [
            e.detail["to"] for e in trace if e.kind is TraceKind.NAVIGATED
        ]
        self.emit_json({
            "command": "simulate",
            "trace": str(trace_file),
            "steps": len(trace),
            "visited": visited,
            "finalView": str(state.current_view),
            "budgetExhausted": [str(e.subject) for e in exhausted],
        })
        self.say(f"{len(trace)} trace event(s) written to {trace_file}")
        self.say("visited: " + " -> ".join(v.split(":", 1)[1] for v in visited))
        for e in exhausted:
            self.say(f"{e.subject}: error step budget exhausted")
        return EXIT_FINDINGS if exhausted else EXIT_OK

    def generate(self) -> int:
        project = self.valid_project()
        targets = self.args.target or list(TARGETS)
        produced = []
        try:
            if "bundle" in targets:
                path = self.out_dir / "bundle.json"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(bundle_to_json(generate_bundle(project)), encoding="utf-8")
                produced.append(path)
            if "prototype" in targets:
                produced += generate_prototype(project, self.out_dir / "prototype")
        except GenError as exc:
            raise _Fail(EXIT_FINDINGS, str(exc)) from None
        self.emit_json({"command": "generate", "files": [str(p) for p in produced]})
        for p in produced:
            self.say(str(p))
        return EXIT_OK

    def format(self) -> int:
        loaded = self.load()
        changed = []
        for kind, path in loaded.paths.items():
            canonical = pretty_print(loaded.models[kind])
            if canonical != loaded.sources[kind]:
                changed.append(path)
                if not self.args.check:
                    path.write_text(canonical, encoding="utf-8")
        verb = "would reformat" if self.args.check else "reformatted"
        self.emit_json({"command": "format", "check": self.args.check, "changed": [str(p) for p in changed]})
        for p in changed:
            self.say(f"{verb} {p}")
        if not changed:
            self.say("all files canonical")
        return EXIT_FINDINGS if self.args.check and changed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--project", default=".", help="project directory containing mvmob.json")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--format", choices=("human", "json"), default="human")
    common.add_argument("--fail-on-warning", action="store_true")

    parser = _Parser(prog="mvmob", description="Check, analyse, simulate and generate mobile app models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("check", parents=[common], help="parse and validate all models")
    p = sub.add_parser("analyze", parents=[common], help="run static analyses")
    p.add_argument("--analysis", type=_csv(sorted(ANALYSES)), default=None,
                   help="comma-separated subset of: " + ", ".join(sorted(ANALYSES)))
    p = sub.add_parser("project", parents=[common], help="export one stakeholder's viewpoint slice")
    p.add_argument("stakeholder", choices=[s.value for s in Stakeholder])
    p = sub.add_parser("simulate", parents=[common], help="run a scenario and write its trace")
    p.add_argument("scenario", help="scenario file (.scn, JSON)")
    p = sub.add_parser("generate", parents=[common], help="emit the app bundle and/or prototype")
    p.add_argument("--target", type=_csv(TARGETS), default=None,
                   help="comma-separated subset of: bundle, prototype (default: both)")
    p = sub.add_parser("format", parents=[common], help="rewrite model files in canonical form")
    p.add_argument("--check", action="store_true", help="report files that would change, write nothing")
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    args = build_parser().parse_args(argv)
    runner = Runner(args, stdout, stderr)
    try:
        return getattr(runner, args.command)()
    except _Fail as exc:
        if str(exc):
            print(f"mvmob {args.command}: {exc}", file=runner.err)
        return exc.code
    except OSError as exc:
        print(f"mvmob {args.command}: {exc}", file=runner.err)
        return EXIT_ENV


if __name__ == "__main__":
    sys.exit(main())
