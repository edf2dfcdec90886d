"""`victim-adapter` command line entry point."""
from __future__ import annotations

import argparse
import logging
import sys

from .server import AdapterConfig, AdapterServer


def _parse_shape(s: str) -> tuple[int, int, int, int]:
    parts = tuple(int(p) for p in s.split(","))
    if len(parts) != 4:
        raise SystemExit(f"shape must be T,H,W,C, got {s!r}")
    return parts


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="victim-adapter",
        description="Serve a classifier callable over the victim wire protocol")
    parser.add_argument("--entrypoint", required=True,
                        help="module:function mapping a (T,H,W,C) array to K scores")
    parser.add_argument("--shape", required=True, help="T,H,W,C")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--mean", type=float, nargs="+", default=None,
                        help="per-channel mean subtracted before the model")
    parser.add_argument("--std", type=float, nargs="+", default=None,
                        help="per-channel std divided out before the model")
    parser.add_argument("--max-batch", type=int, default=64)
    parser.add_argument("--reentrant", action="store_true",
                        help="model is safe for concurrent calls; skip the query lock")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(message)s")
    cfg = AdapterConfig(
        entrypoint=args.entrypoint,
        shape=_parse_shape(args.shape),
        port=args.port,
        host=args.host,
        mean=tuple(args.mean) if args.mean else None,
        std=tuple(args.std) if args.std else None,
        max_batch=args.max_batch,
        reentrant=args.reentrant,
    )
    try:
        server = AdapterServer(cfg)
    except (ValueError, ImportError) as exc:
        raise SystemExit(f"cannot start adapter: {exc}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
