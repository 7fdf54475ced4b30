"""Command-line client: serve the gateway or drive a running instance.

Subcommands: serve, ingest <file>, ask <question>, bench <dataset>,
report <run_id>. All client subcommands talk HTTP to a gateway; the token
comes from --token or the RAGBENCH_TOKEN environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import httpx

from .config import DEFAULT_TOKEN_ENV, AppConfig, load_config


def _client(args) -> httpx.Client:
    token = args.token or os.environ.get(DEFAULT_TOKEN_ENV)
    if not token:
        sys.exit(f"error: no token (use --token or set {DEFAULT_TOKEN_ENV})")
    return httpx.Client(base_url=args.url,
                        headers={"Authorization": f"Bearer {token}"},
                        timeout=args.timeout)


def _check(resp: httpx.Response) -> httpx.Response:
    if resp.status_code >= 400:
        try:
            err = resp.json()
            sys.exit(f"error {resp.status_code}: {err.get('code')}: {err.get('message')}")
        except ValueError:
            sys.exit(f"error {resp.status_code}: {resp.text}")
    return resp


def cmd_serve(args) -> None:
    import uvicorn

    from .gateway import create_app

    config = load_config(args.config) if args.config else AppConfig()
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port or config.port)


def cmd_ingest(args) -> None:
    with _client(args) as client:
        session_id = args.session
        if not session_id:
            session_id = _check(client.post("/api/sessions")).json()["session_id"]
            print(f"session: {session_id}")
        path = Path(args.file)
        with path.open("rb") as fh:
            resp = _check(client.post(
                "/api/documents",
                data={"session_id": session_id, "title": args.title or path.name},
                files={"file": (path.name, fh)},
            ))
        info = resp.json()
        print(f"doc_id: {info['doc_id']}  pages: {info['pages']}  "
              f"chunks: {info['chunks']}")


def cmd_ask(args) -> None:
    with _client(args) as client:
        resp = _check(client.post(
            f"/api/sessions/{args.session}/query",
            json={"question": args.question, "model_id": args.model, "k": args.k},
        ))
        data = resp.json()
        print(data["answer"])
        print(f"\n[{data['model_id']}  latency {data['latency_s']:.2f}s  "
              f"retrieval {data['retrieval_s']:.3f}s  "
              f"{len(data['contexts'])} context chunk(s)]")
        if args.show_context:
            for ctx in data["contexts"]:
                print(f"\n--- {ctx['chunk_id']} (similarity {ctx['similarity']:.3f})")
                print(ctx["text"])


def cmd_bench(args) -> None:
    dataset = json.loads(Path(args.dataset).read_text(encoding="utf-8"))
    with _client(args) as client:
        payload = {
            "session_id": args.session,
            "model_ids": args.models.split(","),
            "dataset": dataset,
            "strict": args.strict,
            "workers": args.workers,
        }
        run_id = _check(client.post("/api/benchmark/run", json=payload)).json()["run_id"]
        print(f"run_id: {run_id}")
        while True:
            resp = _check(client.get(f"/api/benchmark/{run_id}/report",
                                     params={"format": "json"}))
            if resp.status_code != 202:
                break
            time.sleep(args.poll_s)
        print("run complete; fetch it with: report", run_id)


def cmd_report(args) -> None:
    with _client(args) as client:
        resp = _check(client.get(f"/api/benchmark/{args.run_id}/report",
                                 params={"format": args.format}))
        if resp.status_code == 202:
            print("run still in progress")
            return
        sys.stdout.write(resp.text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ragbench",
        description="Document QA over local model backends, with benchmarking.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    def client_args(p):
        p.add_argument("--url", default="http://127.0.0.1:8000")
        p.add_argument("--token", default=None)
        p.add_argument("--timeout", type=float, default=300.0)

    p = sub.add_parser("ingest", help="upload a document")
    p.add_argument("file")
    p.add_argument("--title", default=None)
    p.add_argument("--session", default=None,
                   help="existing session id (a new one is created if omitted)")
    client_args(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("ask", help="ask a question against an indexed session")
    p.add_argument("question")
    p.add_argument("--session", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--show-context", action="store_true")
    client_args(p)
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("bench", help="run a benchmark dataset against models")
    p.add_argument("dataset", help="dataset JSON file")
    p.add_argument("--session", required=True)
    p.add_argument("--models", required=True, help="comma-separated model ids")
    p.add_argument("--strict", action="store_true",
                   help="enforce the 3x4 dataset shape")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--poll-s", type=float, default=2.0)
    client_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="fetch a benchmark report")
    p.add_argument("run_id")
    p.add_argument("--format", default="markdown",
                   choices=["markdown", "csv", "json"])
    client_args(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
