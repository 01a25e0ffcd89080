#!/usr/bin/env python3
"""Run the full three-actor enrollment exchange against a scratch deployment.

Creates (or reuses) a workspace with three identities and a server config,
starts the server in-process, drives all seven workflow steps over HTTPS,
and prints the transcript. Re-running against the same workspace must report
zero-added imports.
"""

import argparse
import sys

from webid_cas.workflow import WorkflowStepError, run_workflow


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workspace", default="demo-workspace")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--decision", choices=("accepted", "rejected"), default="accepted")
    parser.add_argument("--skip-grant", action="store_true",
                        help="suppress the student's grant to show the 403 path")
    args = parser.parse_args()

    try:
        result = run_workflow(
            args.workspace, host=args.host, skip_grant=args.skip_grant, decision=args.decision
        )
    except WorkflowStepError as error:
        for step in error.transcript:
            print(f"{step.name}: {step.status} {step.detail}")
        print(f"\nworkflow aborted at {error.step!r}: {error.detail}", file=sys.stderr)
        return 1
    print(result.transcript())
    return 0 if result.ok else 1


if __name__ == "__main__":
    sys.exit(main())
