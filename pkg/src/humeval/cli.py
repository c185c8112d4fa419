"""Operator entry point: add a campaign, run the server, list campaigns.

    humeval add my_campaign.json
    humeval run
    humeval list

`add` prints one line per magic link (tab-separated: role, user id, URL) with
the dashboard link last, so the output is scriptable. Links embed whatever
host/port the flags name; changing them later invalidates nothing since the
token is all that matters.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import HumevalError
from .store import Store

DEFAULT_PORT = 8000
DEFAULT_HOST = "127.0.0.1"
DEFAULT_DATA_DIR = "./humeval-data"


def _env(name: str, default):
    return os.environ.get(f"HUMEVAL_{name}", default)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data-dir", default=_env("DATA_DIR", DEFAULT_DATA_DIR),
                        help="directory holding the campaign logs")
    parser.add_argument("--host", default=_env("HOST", DEFAULT_HOST))
    parser.add_argument("--port", type=int, default=int(_env("PORT", DEFAULT_PORT)))


def cmd_add(args: argparse.Namespace) -> int:
    store = Store(args.data_dir)
    try:
        store.load()
        with open(args.campaign_file, "rb") as fh:
            raw = fh.read()
        base_url = f"http://{args.host}:{args.port}"
        annotators, manager = store.add_campaign(raw, base_url=base_url)
    except (HumevalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        store.close()
    for identity, url in annotators:
        print(f"annotator\t{identity.user_id}\t{url}")
    identity, url = manager
    print(f"dashboard\t{identity.user_id}\t{url}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    from .server import run_server

    store = Store(args.data_dir)
    try:
        store.load()
    except HumevalError as exc:
        print(f"error: refusing to start: {exc}", file=sys.stderr)
        store.close()
        return 1
    try:
        run_server(store, host=args.host, port=args.port)
    finally:
        store.close()
    return 0


def cmd_list(args: argparse.Namespace) -> int:
    store = Store(args.data_dir)
    try:
        store.load()
        rows = store.list_campaigns()
    except HumevalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        store.close()
    if not rows:
        return 0
    header = ("campaign", "protocol", "assignment", "done", "total", "percent")
    table = [header] + [
        (r["campaign_id"], r["protocol"], r["assignment"],
         str(r["items_done"]), str(r["items_total"]), f"{r['percent']:.1f}%")
        for r in rows
    ]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    for row in table:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="humeval", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    add_p = sub.add_parser("add", help="validate a campaign file and print its magic links")
    add_p.add_argument("campaign_file", help="path to the campaign JSON file")
    _add_common(add_p)
    add_p.set_defaults(func=cmd_add)

    run_p = sub.add_parser("run", help="replay the logs and serve until interrupted")
    _add_common(run_p)
    run_p.set_defaults(func=cmd_run)

    list_p = sub.add_parser("list", help="show campaigns with their completion state")
    _add_common(list_p)
    list_p.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
