"""Operator command line.

Subcommands: gen-identity, serve, export, import, grant, revoke, workflow.
Exit codes are stable per error category so scripts can branch on failures;
``--json`` switches stdout to machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ServerConfig
from .errors import CasError
from .exchange import build_export, import_package, parse_package
from .server import ServerApp, run_server
from .workflow import WorkflowStepError, provision_identity, run_workflow

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_AUTH = 3
EXIT_NOT_FOUND = 4
EXIT_CONFLICT = 5
EXIT_WORKFLOW = 6

_CATEGORY_EXIT_CODES = {
    "validation": EXIT_USAGE,
    "config": EXIT_USAGE,
    "parse": EXIT_USAGE,
    "auth": EXIT_AUTH,
    "authz": EXIT_AUTH,
    "not_found": EXIT_NOT_FOUND,
    "unknown_actor": EXIT_NOT_FOUND,
    "conflict": EXIT_CONFLICT,
    "integrity": EXIT_CONFLICT,
    "malformed_package": EXIT_CONFLICT,
    "unsupported_version": EXIT_CONFLICT,
    "workflow": EXIT_WORKFLOW,
}


def _emit(args: argparse.Namespace, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(human)


def _fail(args: argparse.Namespace, error: CasError) -> int:
    message = {"error": str(error), "category": error.category}
    if args.json:
        print(json.dumps(message), file=sys.stderr)
    else:
        print(f"error ({error.category}): {error}", file=sys.stderr)
    return _CATEGORY_EXIT_CODES.get(error.category, EXIT_FAILURE)


def _actor_iri(config: ServerConfig, short_name: str) -> str:
    actor = config.actor_by_short_name(short_name)
    if actor is None:
        raise CasError(f"no actor {short_name!r} in config")
    return actor.iri


def cmd_gen_identity(args: argparse.Namespace) -> int:
    paths = provision_identity(
        args.name, args.profile_uri, args.out, key_bits=args.key_bits, force=args.force
    )
    _emit(
        args,
        {"webid": args.profile_uri, "files": paths},
        f"webid: {args.profile_uri}\n" + "\n".join(f"{kind}: {path}" for kind, path in sorted(paths.items())),
    )
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    run_server(_require_config(args))
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    config = _require_config(args)
    app = ServerApp(config)
    zip_bytes = build_export(
        app.store, app.cas, _actor_iri(config, args.actor), subjects=args.subject or None
    )
    with open(args.out, "wb") as fh:
        fh.write(zip_bytes)
    _emit(args, {"out": args.out, "bytes": len(zip_bytes)}, f"wrote {len(zip_bytes)} bytes to {args.out}")
    return EXIT_OK


def cmd_import(args: argparse.Namespace) -> int:
    config = _require_config(args)
    app = ServerApp(config)
    with open(args.package, "rb") as fh:
        package = parse_package(fh.read())
    summary = import_package(app.store, app.cas, package, _actor_iri(config, args.actor))
    app.persist()
    _emit(
        args,
        {"triples_added": summary.triples_added, "files_added": summary.files_added},
        f"imported {summary.triples_added} triples, {summary.files_added} files",
    )
    return EXIT_OK


def _cmd_set_permission(args: argparse.Namespace, grant: bool) -> int:
    config = _require_config(args)
    app = ServerApp(config)
    app.cas.set_permission(_actor_iri(config, args.actor), args.webid, grant)
    app.persist()
    verb = "granted" if grant else "revoked"
    _emit(args, {"actor": args.actor, "webid": args.webid, "granted": grant},
          f"{verb} {args.webid} on {args.actor}")
    return EXIT_OK


def cmd_workflow(args: argparse.Namespace) -> int:
    try:
        result = run_workflow(
            args.workspace,
            host=args.host,
            port=args.port,
            skip_grant=args.skip_grant,
            decision=args.decision,
        )
    except WorkflowStepError as error:
        for index, step in enumerate(error.transcript):
            print(f"[{index + 1}] {step.name}: {step.status}" + (f" - {step.detail}" if step.detail else ""))
        return _fail(args, error)
    if args.json:
        print(
            json.dumps(
                {
                    "ok": result.ok,
                    "recorded_decision": result.recorded_decision,
                    "retrieved_decision": result.retrieved_decision,
                    "steps": [{"name": s.name, "status": s.status, "detail": s.detail} for s in result.steps],
                },
                indent=2,
            )
        )
    else:
        print(result.transcript())
    return EXIT_OK if result.ok else EXIT_WORKFLOW


def _require_config(args: argparse.Namespace) -> ServerConfig:
    if not getattr(args, "config", None):
        raise CasError("--config is required for this command")
    return ServerConfig.load(args.config)


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted on both sides of the subcommand; SUPPRESS on
    # the subparser side keeps a pre-subcommand value from being clobbered
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="debug logging")
    common.add_argument("--config", default=argparse.SUPPRESS, help="server config path")

    parser = argparse.ArgumentParser(prog="webid-cas", description=__doc__)
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--config", default=None, help="server config path")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-identity", parents=[common],
                       help="generate key, certificate, and profile for one actor")
    p.add_argument("name")
    p.add_argument("--profile-uri", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--key-bits", type=int, default=2048)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_gen_identity)

    p = sub.add_parser("serve", parents=[common], help="run the HTTPS server (blocking)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", parents=[common],
                       help="build a package from an actor's graph (server offline)")
    p.add_argument("--actor", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--subject", action="append", help="restrict to this subject IRI (repeatable)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("import", parents=[common],
                       help="import a package into an actor's graph (server offline)")
    p.add_argument("--actor", required=True)
    p.add_argument("package")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("grant", parents=[common], help="grant a WebID access to an actor's data")
    p.add_argument("--actor", required=True)
    p.add_argument("--webid", required=True)
    p.set_defaults(func=lambda args: _cmd_set_permission(args, True))

    p = sub.add_parser("revoke", parents=[common], help="revoke a WebID's access")
    p.add_argument("--actor", required=True)
    p.add_argument("--webid", required=True)
    p.set_defaults(func=lambda args: _cmd_set_permission(args, False))

    p = sub.add_parser("workflow", parents=[common],
                       help="run the scripted three-actor exchange end to end")
    p.add_argument("--workspace", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--skip-grant", action="store_true", help="suppress the student's grant (negative path)")
    p.add_argument("--decision", choices=("accepted", "rejected"), default="accepted")
    p.set_defaults(func=cmd_workflow)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except CasError as error:
        return _fail(args, error)
    except OSError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
