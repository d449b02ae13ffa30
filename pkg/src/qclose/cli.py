"""Thin command-line client for the experiment service.

Without --server the request is dispatched to the in-process app over an
ASGI transport, so no running server is needed; with --server it talks
to a remote instance.  Exit codes: 0 success, 2 config error, 3
capacity error.

Examples:
    qclose --mode l2 --n 4 --epsilon 0.2 --nu 0.5 --family bump_pair \
        --target-distance 0.2 --trials 100 --seed 7 --out result.json
    qclose --serve --port 8000
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qclose", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--mode", choices=["l2", "equality", "l1", "classical_l2",
                                           "lemma_check", "qae_envelope"])
    parser.add_argument("--n", type=int)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--nu", type=float, default=1.0)
    parser.add_argument("--t-rule", choices=["proof", "algorithm"], default="proof")
    parser.add_argument("--repeats", type=int, default=15)
    parser.add_argument("--backend", choices=["subspace", "dense"], default="subspace")
    parser.add_argument("--style", choices=["mirror", "permuted"], default="mirror")
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--family", choices=["uniform", "point_mass", "bump_pair",
                                             "dirichlet_random"], default="bump_pair")
    parser.add_argument("--target-distance", type=float)
    parser.add_argument("--amplitude", type=float, help="true amplitude for qae_envelope")
    parser.add_argument("--grover-power", type=int, help="t for qae_envelope")
    parser.add_argument("--samples", type=int, help="classical sample budget override")
    parser.add_argument("--dist-file", action="append", default=None, metavar="PATH",
                        help="distribution file; give twice for an explicit (p, q) pair")
    parser.add_argument("--out", help="path for the serialized result record")
    parser.add_argument("--server", help="base URL of a running service; default in-process")
    parser.add_argument("--serve", action="store_true", help="run the HTTP service instead")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    return parser


_BACKEND_NAMES = {"subspace": "subspace_exact", "dense": "dense_qpe"}


def _read_dist_file(path: str) -> list[str]:
    lines = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                lines.append(line)
    return lines


def _request_payload(args: argparse.Namespace) -> dict:
    payload = {
        "mode": args.mode,
        "n": args.n,
        "family": args.family,
        "target_distance": args.target_distance,
        "epsilon": args.epsilon,
        "nu": args.nu,
        "t_rule": args.t_rule,
        "repeats": args.repeats,
        "backend": _BACKEND_NAMES[args.backend],
        "style": args.style,
        "trials": args.trials,
        "seed": args.seed,
        "amplitude": args.amplitude,
        "grover_power": args.grover_power,
        "samples": args.samples,
    }
    if args.dist_file:
        if len(args.dist_file) != 2:
            raise SystemExit("--dist-file must be given exactly twice (p then q)")
        payload["dist_p"] = _read_dist_file(args.dist_file[0])
        payload["dist_q"] = _read_dist_file(args.dist_file[1])
    return payload


def _make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    from .service import app  # deferred so --help stays fast

    return TestClient(app, raise_server_exceptions=False)


def _summarize(record: dict) -> str:
    mode = record["mode"]
    parts = [f"mode={mode}", f"trials={record['trials']}",
             f"success_rate={record['success_rate']:.4f}"]
    if record.get("delta_true") is not None:
        parts.append(f"delta_true={record['delta_true']:.6g}")
    if record.get("threshold") is not None:
        parts.append(f"threshold={record['threshold']:.6g}")
    if record.get("ledger_total") is not None:
        parts.append(f"queries={record['ledger_total']}")
    if record.get("samples") is not None:
        parts.append(f"samples={record['samples']}")
    return "  ".join(parts)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.serve:
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    if not args.mode:
        parser.error("--mode is required unless --serve is given")

    payload = _request_payload(args)
    with _make_client(args.server) as client:
        resp = client.post("/experiments/run", json=payload)
    if resp.status_code in (400, 422):
        detail = resp.json().get("detail")
        print(f"config error: {detail}", file=sys.stderr)
        return EXIT_CONFIG
    if resp.status_code == 409:
        print(f"capacity error: {resp.json().get('detail')}", file=sys.stderr)
        return EXIT_CAPACITY
    resp.raise_for_status()
    record = resp.json()["record"]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True, indent=2) + "\n")
    print(_summarize(record))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
