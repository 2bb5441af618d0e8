"""Unified command-line interface.

Exit codes: 0 on success, 1 when a command produces findings or a failed
verdict (or an operation fails), 2 on usage errors (argparse's own
convention). Commands are independent processes; anything that mutates
the evidence registry rewrites it atomically.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Sequence

from firecase import __version__
from firecase.assemble import (
    AssemblyError,
    assemble_case,
    case_summary,
    emit_report,
    load_project,
)
from firecase.data_eval import EvalConfig, evaluate_dataset, load_audit_pairs
from firecase.detector import DetectorError, baseline_spec, spec_from_json
from firecase.evidence import EvidenceError, EvidenceKind
from firecase.findings import Severity
from firecase.gsn import (
    FRAGMENT_IDS,
    DslError,
    GraphIntegrityError,
    MergeError,
    load_corpus,
    load_fragment,
    merge_fragments,
    parse_argument,
    render_dot,
    validate_argument,
)
from firecase.raster import CatalogError, catalog_dataset
from firecase.requirements import (
    ManifestError,
    load_canonical_requirements,
    load_requirements,
    traceability_matrix_rows,
    validate_traceability,
)
from firecase.simulate import SimulationError, load_scenario, simulate_scenario, write_pass_log
from firecase.verification import (
    CampaignError,
    build_case_matrix,
    coverage_report,
    run_campaign,
)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2

_OPERATIONAL_ERRORS = (
    AssemblyError,
    CampaignError,
    CatalogError,
    DetectorError,
    DslError,
    EvidenceError,
    GraphIntegrityError,
    ManifestError,
    MergeError,
    SimulationError,
    OSError,
    json.JSONDecodeError,
)


def _load_requirements_for(args: argparse.Namespace):
    if getattr(args, "requirements", None):
        return load_requirements(args.requirements)
    if args.project:
        return load_project(args.project).requirements
    return load_canonical_requirements()


def _fragments_for(args: argparse.Namespace) -> dict:
    if args.project:
        return load_project(args.project).fragments
    return load_corpus()


def _print_findings(findings) -> None:
    for finding in findings:
        print(finding)


def _need(parser: argparse.ArgumentParser, args: argparse.Namespace, flag: str) -> None:
    if getattr(args, flag) is None:
        parser.error(f"this command requires --{flag}")


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _open_catalog(path_str: str, rs):
    path = Path(path_str)
    if not (path / "metadata.json").is_file():
        raise CatalogError(f"no catalog at {path} (metadata.json missing)")
    return catalog_dataset(path, taxonomy=rs)


def _cmd_validate(parser, args) -> int:
    if args.fragment:
        path = Path(args.fragment)
        if path.suffix == ".gsn" or path.exists():
            graph = parse_argument(path.read_text(encoding="utf-8"), graph_id=path.stem)
        elif args.fragment in FRAGMENT_IDS:
            graph = load_fragment(args.fragment)
        else:
            parser.error(f"--fragment must be a .gsn file or one of: {', '.join(FRAGMENT_IDS)}")
        findings = validate_argument(graph)
        _print_findings(findings)
        print(f"{graph.graph_id}: {len(findings)} finding(s)")
        return EXIT_FINDINGS if findings else EXIT_OK

    fragments = _fragments_for(args)
    total = []
    for fid, graph in fragments.items():
        findings = validate_argument(graph)
        _print_findings(findings)
        total.extend(findings)
    merged = merge_fragments(fragments, root_fragment="ml-scoping")
    findings = validate_argument(merged)
    _print_findings(findings)
    total.extend(findings)
    print(f"{len(fragments)} fragments + merged case: {len(total)} finding(s)")
    return EXIT_FINDINGS if total else EXIT_OK


def _cmd_render(parser, args) -> int:
    fragments = _fragments_for(args)
    merged = merge_fragments(fragments, root_fragment="ml-scoping")
    if args.out is None:
        if args.fragment:
            if args.fragment not in fragments:
                parser.error(f"unknown fragment {args.fragment!r}")
            print(render_dot(fragments[args.fragment]), end="")
        else:
            print(render_dot(merged), end="")
        return EXIT_OK
    out = _out_dir(args)
    (out / "merged.dot").write_text(render_dot(merged), encoding="utf-8")
    for fid, graph in fragments.items():
        (out / f"{fid}.dot").write_text(render_dot(graph), encoding="utf-8")
    print(f"wrote {1 + len(fragments)} DOT files to {out}")
    return EXIT_OK


def _cmd_trace(parser, args) -> int:
    rs = _load_requirements_for(args)
    findings = validate_traceability(rs)
    rows = traceability_matrix_rows(rs)
    header = "from,from_kind,to,to_kind,rationale"
    if args.out is None:
        print(header)
        for r in rows:
            rationale = '"' + r["rationale"].replace('"', '""') + '"'
            print(f'{r["from"]},{r["from_kind"]},{r["to"]},{r["to_kind"]},{rationale}')
    else:
        out = _out_dir(args)
        import csv as _csv

        with (out / "traceability.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = _csv.writer(fh, lineterminator="\n")
            writer.writerow(header.split(","))
            writer.writerows(
                [r["from"], r["from_kind"], r["to"], r["to_kind"], r["rationale"]] for r in rows
            )
        print(f"wrote {out / 'traceability.csv'} ({len(rows)} links)")
    _print_findings(findings)
    return EXIT_FINDINGS if findings else EXIT_OK


def _cmd_eval_data(parser, args) -> int:
    rs = _load_requirements_for(args)
    catalog = _open_catalog(args.catalog, rs)
    audit_pairs = load_audit_pairs(catalog, args.audit_dir) if args.audit_dir else ()
    config = EvalConfig(min_coverage=args.min_coverage, min_share=args.min_share)
    report = evaluate_dataset(catalog, requirements=rs, audit_pairs=audit_pairs, config=config)
    print(report.to_text(), end="")
    if args.out is not None:
        out = _out_dir(args)
        _write_json(out / "data-eval.json", report.to_json())
        (out / "data-eval.txt").write_text(report.to_text(), encoding="utf-8")
    return EXIT_OK if report.passed else EXIT_FINDINGS


def _cmd_run_verification(parser, args) -> int:
    rs = _load_requirements_for(args)
    catalog = _open_catalog(args.catalog, rs)
    if args.detector:
        spec = spec_from_json(json.loads(Path(args.detector).read_text(encoding="utf-8")))
    else:
        spec = baseline_spec()
    matrix = build_case_matrix(catalog, requirements=rs)
    result = run_campaign(matrix, spec, catalog, requirements=rs)
    print(result.findings_text(), end="")
    if args.out is not None:
        out = _out_dir(args)
        _write_json(out / "campaign.json", result.to_json())
        (out / "campaign.csv").write_text(result.to_csv(), encoding="utf-8")
        _write_json(out / "coverage.json", coverage_report(matrix))
        if args.project:
            # bind-ready: record the fresh results in the project's registry
            project = load_project(args.project)
            for name in ("campaign.json", "coverage.json"):
                artifact = project.registry.register(
                    out / name, EvidenceKind.VERIFICATION_RESULTS, "run-verification"
                )
                print(f"registered {name} as {artifact.id}")
            registry_path = Path(args.project).parent / json.loads(
                Path(args.project).read_text(encoding="utf-8")
            )["evidence_registry"]
            project.registry.save(registry_path)
    return EXIT_OK if result.passed else EXIT_FINDINGS


def _cmd_simulate(parser, args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    result = simulate_scenario(scenario)
    summary = result.summary_json()
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out is not None:
        out = _out_dir(args)
        write_pass_log(result.events, out / "passlog.jsonl")
        _write_json(out / "sim-summary.json", summary)
        (out / "alerts.csv").write_text(result.summary_csv(), encoding="utf-8")
    return EXIT_OK


def _cmd_assemble(parser, args) -> int:
    _need(parser, args, "project")
    case = assemble_case(load_project(args.project))
    summary = case_summary(case)
    print(f"assembled: {summary['status']} ({summary['nodes']} nodes, "
          f"{len(summary['solutions'])} solutions bound)")
    for entry in summary["adverse"]:
        print(f"adverse evidence: {entry['solution']} <- {entry['evidence']}")
    for warning in summary["warnings"]:
        print(warning)
    return EXIT_OK if case.assured else EXIT_FINDINGS


def _cmd_report(parser, args) -> int:
    _need(parser, args, "project")
    _need(parser, args, "out")
    case = assemble_case(load_project(args.project))
    written = emit_report(case, args.out)
    print(f"wrote {len(written)} files to {args.out}")
    print(f"status: {case.status}")
    return EXIT_OK if case.assured else EXIT_FINDINGS


def _global_flags(parser: argparse.ArgumentParser, *, suppress: bool) -> None:
    # accepted both before and after the subcommand; the subparser copies
    # use SUPPRESS so an absent flag does not clobber a value parsed earlier
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument(
        "--project", metavar="MANIFEST", default=default, help="project.json manifest path"
    )
    parser.add_argument("--out", metavar="DIR", default=default, help="output directory")
    parser.add_argument(
        "--seed", type=int, metavar="N", default=default, help="seed override where applicable"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firecase",
        description="Safety-assurance toolchain for the wildfire-detection ML component.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", parents=[common], help="validate argument fragments and the merged case")
    p.add_argument("--fragment", metavar="ID|FILE", help="validate a single fragment")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("render", parents=[common], help="render fragments to Graphviz DOT")
    p.add_argument("--fragment", metavar="ID", help="render this fragment instead of the merged case")
    p.set_defaults(handler=_cmd_render)

    p = sub.add_parser("trace", parents=[common], help="emit the requirements traceability matrix")
    p.add_argument("--requirements", metavar="FILE", help="requirement set JSON")
    p.set_defaults(handler=_cmd_trace)

    p = sub.add_parser("eval-data", parents=[common], help="evaluate a dataset against DR1-DR10")
    p.add_argument("catalog", help="catalog directory (metadata.json inside)")
    p.add_argument("--requirements", metavar="FILE", help="requirement set JSON")
    p.add_argument("--audit-dir", metavar="DIR", help="directory of audited reference masks")
    p.add_argument("--min-coverage", type=float, default=1.0, metavar="X")
    p.add_argument("--min-share", type=float, default=0.02, metavar="X")
    p.set_defaults(handler=_cmd_eval_data)

    p = sub.add_parser("run-verification", parents=[common], help="run the verification campaign")
    p.add_argument("catalog", help="verification catalog directory")
    p.add_argument("--requirements", metavar="FILE", help="requirement set JSON")
    p.add_argument("--detector", metavar="FILE", help="detector spec JSON (default: baseline)")
    p.set_defaults(handler=_cmd_run_verification)

    p = sub.add_parser("simulate", parents=[common], help="simulate constellation passes over a scenario")
    p.add_argument("scenario", help="scenario JSON file")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("assemble", parents=[common], help="assemble the safety case from a project manifest")
    p.set_defaults(handler=_cmd_assemble)

    p = sub.add_parser("report", parents=[common], help="assemble and write the full report bundle")
    p.set_defaults(handler=_cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(parser, args)
    except _OPERATIONAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS


if __name__ == "__main__":
    sys.exit(main())
