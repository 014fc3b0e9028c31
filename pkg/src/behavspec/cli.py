"""Command-line entry point: check, infer, trace, export, fmt, version.

Exit status: 0 success, 1 semantic failure, 2 parse, IO or usage failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from behavspec import __version__
from behavspec.consistency import check_suite
from behavspec.diagnostics import Diagnostic, NoEgo, ResolutionError, TargetNotDerived, has_errors, sort_diagnostics
from behavspec.dsl import ast, format_canonical, parse_scenario_text, parse_text
from behavspec.export import build_cbg, emit_dot, emit_result_docs, emit_sequence, union
from behavspec.model import Scenario, SpecModel, resolve, resolve_scenario, validate_model
from behavspec.reasoner import applicable_maneuvers, derived_facts
from behavspec.trace import render_report, trace_report

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

SPEC_SUFFIX = ".nspec"
SCENARIO_SUFFIX = ".nscen"


class UsageError(Exception):
    pass


class InputError(Exception):
    """Unreadable file or syntax errors; carries the diagnostics to print."""

    def __init__(self, message: str, diagnostics: Sequence[Diagnostic] = ()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


@dataclass
class RunConfig:
    spec_paths: list[str] = field(default_factory=list)
    scenario_paths: list[str] = field(default_factory=list)
    strict_traceability: bool = False
    output_format: str = "text"
    out: Optional[str] = None
    max_trees: int = 1
    subclass_match: bool = True
    maneuver: Optional[str] = None


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="behavspec", description="Behavior specification checker and reasoner.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    def common(sp, formats=("text", "doc", "dot", "seq"), default="text"):
        sp.add_argument("files", nargs="*", help=f"{SPEC_SUFFIX} spec files and {SCENARIO_SUFFIX} scenario files")
        sp.add_argument("--strict-traceability", action="store_true", help="require source links on facts and rules")
        sp.add_argument("--format", choices=formats, default=default, dest="output_format")
        sp.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")
        sp.add_argument("--max-trees", type=int, default=1, metavar="N", help="derivation trees per trace")
        sp.add_argument("--no-subclass-match", action="store_true", help="match class atoms by exact class only")

    common(sub.add_parser("check", help="resolve, validate and check scenario outcomes"))
    common(sub.add_parser("infer", help="print derived facts and maneuver options"))
    common(sub.add_parser("trace", help="explain a derived maneuver: trace SPEC... SCEN... MANEUVER"))
    common(sub.add_parser("export", help="write CBG, sequence or result document"), ("dot", "seq", "doc"), "dot")
    fmt = sub.add_parser("fmt", help="print the canonical form of spec or scenario files")
    fmt.add_argument("files", nargs="*")
    fmt.add_argument("--out", metavar="PATH")
    sub.add_parser("version", help="print the version")
    return p


def _classify(command: str, files: list[str], cfg: RunConfig) -> None:
    leftovers = []
    for f in files:
        if f.endswith(SCENARIO_SUFFIX):
            cfg.scenario_paths.append(f)
        elif f.endswith(SPEC_SUFFIX) or Path(f).exists():
            cfg.spec_paths.append(f)
        else:
            leftovers.append(f)
    if command == "trace":
        if len(leftovers) != 1:
            raise UsageError("trace needs exactly one maneuver id")
        cfg.maneuver = leftovers[0]
    elif leftovers:
        # surfaced as an IO error by the loader
        cfg.spec_paths.extend(leftovers)
    if not cfg.spec_paths:
        raise UsageError("at least one spec file is required")


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc


def load_spec(paths: Sequence[str]) -> list[ast.RawDecl]:
    decls: list[ast.RawDecl] = []
    diags: list[Diagnostic] = []
    for path in paths:
        d, errs = parse_text(_read(path), path)
        decls.extend(d)
        diags.extend(errs)
    if has_errors(diags):
        raise InputError("syntax errors", diags)
    return decls


def load_scenarios(model: SpecModel, paths: Sequence[str]) -> list[Scenario]:
    """Scenarios embedded in spec files (by id), then scenario files in argument order."""
    scenarios = [model.scenarios[k] for k in sorted(model.scenarios)]
    decls = []
    diags: list[Diagnostic] = []
    for path in paths:
        decl, errs = parse_scenario_text(_read(path), path)
        diags.extend(errs)
        if decl is not None:
            decls.append(decl)
    if has_errors(diags):
        raise InputError("syntax errors", diags)
    for decl in decls:
        scenarios.append(resolve_scenario(model, decl))
    return scenarios


def _print_diags(diags, stream) -> None:
    for d in sort_diagnostics(diags):
        print(d, file=stream)


class _Output:
    def __init__(self, out: Optional[str]):
        self.out = out
        self.parts: list[str] = []

    def write(self, text: str) -> None:
        self.parts.append(text)

    def line(self, text: str = "") -> None:
        self.parts.append(text + "\n")

    def flush(self) -> None:
        text = "".join(self.parts)
        if self.out is None:
            sys.stdout.write(text)
            return
        try:
            Path(self.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"{self.out}: {exc.strerror or exc}") from exc


def cmd_check(cfg: RunConfig, out: _Output) -> int:
    model = resolve(load_spec(cfg.spec_paths))
    scenarios = load_scenarios(model, cfg.scenario_paths)
    diags = validate_model(model, cfg.strict_traceability)
    for d in diags:
        out.line(str(d))
    status = EXIT_FAIL if has_errors(diags) else EXIT_OK
    if scenarios:
        suite = check_suite(model, scenarios, subclass_match=cfg.subclass_match)
        for report in suite.reports:
            out.line(f"scenario {report.scenario_id}: {report.verdict}")
            for f in report.findings:
                out.line(f"    {f}")
        for f in suite.findings:
            out.line(str(f))
        out.line(f"verdict: {suite.verdict}")
        if suite.verdict != "consistent":
            status = EXIT_FAIL
    else:
        out.line("ok" if status == EXIT_OK else "failed")
    return status


def cmd_infer(cfg: RunConfig, out: _Output) -> int:
    model = resolve(load_spec(cfg.spec_paths))
    scenarios = load_scenarios(model, cfg.scenario_paths)
    suite = check_suite(model, scenarios, subclass_match=cfg.subclass_match)
    results = [suite.results[s.id] for s in scenarios]
    if cfg.output_format == "doc":
        out.write(emit_result_docs(model, results, suite))
        return EXIT_OK
    if cfg.output_format != "text":
        raise UsageError(f"infer does not support --format {cfg.output_format}; use export")
    for res in results:
        out.line(f"scenario {res.scenario_id}")
        out.line(f"    facts: {', '.join(sorted(derived_facts(res))) or '(none)'}")
        out.line(f"    maneuvers: {', '.join(sorted(applicable_maneuvers(res))) or '(none)'}")
        out.line(f"    iterations: {res.iterations}")
    return EXIT_OK


def cmd_trace(cfg: RunConfig, out: _Output) -> int:
    model = resolve(load_spec(cfg.spec_paths))
    scenarios = load_scenarios(model, cfg.scenario_paths)
    if not scenarios:
        raise UsageError("trace needs a scenario")
    if cfg.maneuver not in model.maneuvers:
        print(f"error[UnknownIdentifier]: unknown maneuver {cfg.maneuver!r}", file=sys.stderr)
        return EXIT_FAIL
    suite = check_suite(model, scenarios, subclass_match=cfg.subclass_match)
    status = EXIT_OK
    for scen in scenarios:
        out.line(f"scenario {scen.id}")
        try:
            report = trace_report(model, suite.results[scen.id], cfg.maneuver, cfg.max_trees)
        except TargetNotDerived:
            out.line(f"error[TargetNotDerived]: {cfg.maneuver} is not derived in {scen.id}")
            status = EXIT_FAIL
            continue
        out.write(render_report(model, report))
    return status


def cmd_export(cfg: RunConfig, out: _Output) -> int:
    model = resolve(load_spec(cfg.spec_paths))
    scenarios = load_scenarios(model, cfg.scenario_paths)
    suite = check_suite(model, scenarios, subclass_match=cfg.subclass_match)
    results = [suite.results[s.id] for s in scenarios]
    if cfg.output_format == "dot":
        out.write(emit_dot(union(build_cbg(model, r) for r in results)))
    elif cfg.output_format == "seq":
        blocks = []
        for r in results:
            text = emit_sequence(model, r)
            blocks.append(f"title {r.scenario_id}\n{text}" if len(results) > 1 else text)
        out.write("\n".join(blocks))
    else:
        out.write(emit_result_docs(model, results, suite))
    return EXIT_OK


def cmd_fmt(files: Sequence[str], out: _Output) -> int:
    if not files:
        raise UsageError("fmt needs at least one file")
    out.write(format_canonical(load_spec(files)))
    return EXIT_OK


COMMANDS = {"check": cmd_check, "infer": cmd_infer, "trace": cmd_trace, "export": cmd_export}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "version":
        print(f"behavspec {__version__}")
        return EXIT_OK

    out = _Output(args.out)
    try:
        if args.command == "fmt":
            status = cmd_fmt(args.files, out)
        else:
            cfg = RunConfig(
                strict_traceability=args.strict_traceability,
                output_format=args.output_format,
                out=args.out,
                max_trees=args.max_trees,
                subclass_match=not args.no_subclass_match,
            )
            if cfg.max_trees < 1:
                raise UsageError("--max-trees must be at least 1")
            _classify(args.command, args.files, cfg)
            status = COMMANDS[args.command](cfg, out)
        out.flush()
        return status
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        if exc.diagnostics:
            _print_diags(exc.diagnostics, sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResolutionError as exc:
        _print_diags(exc.diagnostics, sys.stderr)
        return EXIT_FAIL
    except NoEgo as exc:
        print(f"error[NoEgo]: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
