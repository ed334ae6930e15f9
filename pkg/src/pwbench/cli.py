"""Command-line front door.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
Passing --json switches stdout to machine-readable JSON; diagnostics
always go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .adtree import attack_success, mitigation_status, synthesize_policy, tree_from_json, validate_tree
from .dsl import compile_policy, parse, render_policy_source
from .errors import WorkbenchError
from .guessing import (
    FitOptions,
    empirical_model,
    fit_cdf_zipf,
    fit_pdf_zipf,
    max_attempts,
    model_to_json,
)
from .ingest import DumpFormat, export_csv, parse_dump, to_distribution
from .pipeline import execute, load_pipeline
from .policy import check, load_dictionary, policy_to_json, verdict_to_json
from .workspace import Workspace

_FORMATS = {f.value: f for f in DumpFormat}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this tool reserves 2 for data
    errors, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _epsilon(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("epsilon must be strictly between 0 and 1")
    return value


def _budget(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("budget must be >= 0")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _default_workspace() -> str:
    return os.environ.get("PASSLAB_WORKSPACE", ".")


def _add_workspace_option(parser):
    parser.add_argument(
        "--workspace",
        default=_default_workspace(),
        help="workspace directory (default: $PASSLAB_WORKSPACE or the current directory)",
    )


def _print_json(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _read_table(path: str):
    return parse_dump(Path(path).read_bytes(), DumpFormat.CSV_PASSWORD_COUNT)


def _load_policy(path: str):
    source = Path(path).read_text(encoding="utf-8")
    ast, errors = parse(source)
    if errors:
        for err in errors:
            print(f"{path}:{err}", file=sys.stderr)
        raise WorkbenchError(f"{path}: {len(errors)} parse error(s)")
    policy, warnings = compile_policy(ast)
    for warning in warnings:
        print(f"warning: {warning.message}", file=sys.stderr)
    return policy


def _workspace_dictionaries(root: str):
    # Read directly rather than via Workspace so that pointing --workspace at
    # an arbitrary directory never creates section directories in it.
    dictionaries_dir = Path(root) / "dictionaries"
    if not dictionaries_dir.is_dir():
        return {}
    return {
        path.stem: load_dictionary(path.stem, path.read_bytes())
        for path in sorted(dictionaries_dir.glob("*.txt"))
    }


# Command handlers -----------------------------------------------------------


def cmd_ingest(args) -> int:
    table = parse_dump(Path(args.file).read_bytes(), _FORMATS[args.format])
    Path(args.output).write_bytes(export_csv(table))
    if args.json:
        _print_json(
            {"passwords": len(table.entries), "total": table.total, "output": args.output}
        )
    else:
        print(
            f"wrote {len(table.entries)} unique passwords "
            f"({table.total} total) to {args.output}"
        )
    return 0


def cmd_fit(args) -> int:
    dist = to_distribution(_read_table(args.file))
    options = FitOptions(
        min_count=args.min_count if args.min_count is not None else FitOptions().min_count,
        rank_limit=args.rank_limit,
    )
    fit = fit_pdf_zipf if args.model == "pdf" else fit_cdf_zipf
    model = fit(dist, options)
    if args.json:
        _print_json(model_to_json(model))
    else:
        lo, hi = model.fit_range
        print(f"model = {model.kind}")
        print(f"c = {model.c:.6g}")
        print(f"s = {model.s:.6g}")
        print(f"r_squared = {model.r_squared:.6g}")
        print(f"fit_range = {lo}..{hi} of {model.n_ranks} ranks")
    return 0


def cmd_lockout(args) -> int:
    dist = to_distribution(_read_table(args.file))
    if args.basis == "empirical":
        model = empirical_model(dist)
    elif args.basis == "pdf":
        model = fit_pdf_zipf(dist)
    else:
        model = fit_cdf_zipf(dist)
    recommendation = max_attempts(model, args.epsilon)
    if args.json:
        _print_json(recommendation.to_json())
    else:
        print(f"max_attempts = {recommendation.max_attempts}")
        print(f"achieved_probability = {recommendation.achieved_probability:.6g}")
        print(f"epsilon = {recommendation.epsilon:.6g}")
        print(f"basis = {recommendation.basis}")
    return 0


def cmd_policy_check(args) -> int:
    policy = _load_policy(args.file)
    if args.password is not None:
        password = args.password
    else:
        password = sys.stdin.read().removesuffix("\n")
    verdict = check(policy, password, _workspace_dictionaries(args.workspace))
    if args.json:
        _print_json(verdict_to_json(verdict))
    elif verdict.accepted:
        print("accepted")
    else:
        print("rejected:")
        for _, reason in verdict.violations:
            print(f"  - {reason}")
    return 0 if verdict.accepted else 2


def _load_tree(path: str):
    try:
        doc = json.loads(Path(path).read_bytes())
    except json.JSONDecodeError as exc:
        raise WorkbenchError(f"{path}: not valid JSON: {exc}") from None
    tree = tree_from_json(doc)
    issues = validate_tree(tree)
    if issues:
        for issue in issues:
            print(f"{path}: {issue}", file=sys.stderr)
        raise WorkbenchError(f"{path}: {len(issues)} structural error(s)")
    return tree


def cmd_adtree_eval(args) -> int:
    tree = _load_tree(args.file)
    dist = to_distribution(_read_table(args.dataset))
    dictionaries = _workspace_dictionaries(args.workspace)
    report = mitigation_status(tree, dictionaries)
    probability = attack_success(tree, dist, args.budget, dictionaries)
    if args.json:
        _print_json(
            {"success_probability": float(probability), "mitigation": report.to_json()}
        )
    else:
        print(f"success_probability = {probability:.6g}")
        print(f"root_defended = {str(report.root_defended).lower()}")
        for leaf in report.leaves:
            state = "mitigated" if leaf.mitigated else "unmitigated"
            print(f"  {leaf.leaf_id}: {state} ({leaf.justification})")
    return 0


def cmd_adtree_synth(args) -> int:
    policy = synthesize_policy(_load_tree(args.file))
    source = render_policy_source(policy)
    if args.output:
        Path(args.output).write_text(source, encoding="utf-8")
    if args.json:
        _print_json(
            {"policy": policy_to_json(policy), "source": source, "output": args.output}
        )
    elif args.output:
        print(f"wrote policy {policy.name!r} to {args.output}")
    else:
        print(source, end="")
    return 0


def cmd_pipeline_run(args) -> int:
    pipeline = load_pipeline(Path(args.file).read_bytes())
    results = execute(pipeline, args.workspace)
    if args.json:
        _print_json({"results": {node_id: r.to_json() for node_id, r in results.items()}})
    else:
        for node_id, result in results.items():
            detail = result.artifact if result.status == "ok" else result.error
            print(f"  {node_id}: {result.status} ({detail})")
    return 0 if all(r.status == "ok" for r in results.values()) else 2


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(Workspace(args.workspace))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# Parser ---------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="pwbench", description="Password distribution and policy workbench.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ingest", help="parse a password dump into a frequency CSV")
    p.add_argument("file", help="dump file")
    p.add_argument("--format", required=True, choices=sorted(_FORMATS))
    p.add_argument("-o", "--output", required=True, help="output CSV path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("fit", help="fit a guessing model to a frequency CSV")
    p.add_argument("file", help="frequency CSV")
    p.add_argument("--model", required=True, choices=("pdf", "cdf"))
    p.add_argument("--min-count", type=_positive, default=None)
    p.add_argument("--rank-limit", type=_positive, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("lockout", help="recommend a lockout threshold")
    p.add_argument("file", help="frequency CSV")
    p.add_argument("--epsilon", required=True, type=_epsilon)
    p.add_argument("--basis", choices=("empirical", "pdf", "cdf"), default="empirical")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_lockout)

    policy = sub.add_parser("policy", help="policy operations")
    policy_sub = policy.add_subparsers(dest="policy_command", required=True, metavar="subcommand")
    p = policy_sub.add_parser("check", help="check a password against a policy")
    p.add_argument("file", help="policy source (.srn)")
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--password")
    who.add_argument("--stdin", action="store_true", help="read the password from stdin")
    _add_workspace_option(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_policy_check)

    adtree = sub.add_parser("adtree", help="attack-defence tree operations")
    adtree_sub = adtree.add_subparsers(dest="adtree_command", required=True, metavar="subcommand")
    p = adtree_sub.add_parser("eval", help="evaluate mitigation and attack success")
    p.add_argument("file", help="ADTree JSON")
    p.add_argument("--dataset", required=True, help="frequency CSV")
    p.add_argument("--budget", required=True, type=_budget)
    _add_workspace_option(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_adtree_eval)
    p = adtree_sub.add_parser("synth", help="synthesize the defence policy")
    p.add_argument("file", help="ADTree JSON")
    p.add_argument("-o", "--output", help="write the policy here instead of stdout")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_adtree_synth)

    pipeline = sub.add_parser("pipeline", help="pipeline operations")
    pipeline_sub = pipeline.add_subparsers(dest="pipeline_command", required=True, metavar="subcommand")
    p = pipeline_sub.add_parser("run", help="execute a pipeline document")
    p.add_argument("file", help="pipeline JSON")
    _add_workspace_option(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_pipeline_run)

    p = sub.add_parser("serve", help="serve the HTTP API and UI")
    p.add_argument("--port", type=int, default=8800)
    p.add_argument("--host", default="127.0.0.1")
    _add_workspace_option(p)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except WorkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
