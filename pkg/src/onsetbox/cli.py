"""Command-line front door; a thin client of the onset service.

By default the service app runs in-process (no server needed); pass
--server URL to talk to a running instance instead, in which case all
paths are resolved on the server's filesystem.

Exit codes: 0 success, 1 validation/usage error, 2 I/O or format failure.
"""

from __future__ import annotations

import argparse
import sys

import httpx

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2

_CATEGORY_EXIT = {"validation": EXIT_USAGE, "format": EXIT_IO, "not_found": EXIT_IO}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message}", file=sys.stderr)
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


class _InProcessTransport(httpx.BaseTransport):
    """Drive the ASGI app directly so the CLI works without a server."""

    def __init__(self, app):
        self._app = app

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def call():
            transport = httpx.ASGITransport(app=self._app)
            response = await transport.handle_async_request(request)
            body = b"".join([part async for part in response.stream])
            return httpx.Response(
                status_code=response.status_code,
                headers=response.headers,
                content=body,
            )

        return asyncio.run(call())


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service.app import create_app

    return httpx.Client(
        transport=_InProcessTransport(create_app()),
        base_url="http://onsetbox.local",
    )


def _fail(response: httpx.Response) -> int:
    try:
        body = response.json()
        detail = body.get("detail", response.text)
        category = body.get("category", "")
    except ValueError:
        detail, category = response.text, ""
    if isinstance(detail, list):  # pydantic request-validation errors
        detail = "; ".join(
            ".".join(str(part) for part in err.get("loc", [])[1:]) + ": " + err.get("msg", "")
            for err in detail
        )
    print(f"error: {detail}", file=sys.stderr)
    if category in _CATEGORY_EXIT:
        return _CATEGORY_EXIT[category]
    if response.status_code == 422:
        return EXIT_USAGE
    return EXIT_IO


def _detector_params(args) -> dict:
    params = {
        "detector": args.detector,
        "frame_ms": args.frame_ms,
        "hop_ms": args.hop_ms,
        "threshold": args.threshold,
        "min_sep_ms": args.min_sep_ms,
        "refine_ms": args.refine_ms,
    }
    return {k: v for k, v in params.items() if v is not None}


def _add_detector_flags(parser):
    parser.add_argument("--detector", default="hfc",
                        choices=["hfc", "complex", "spectral_flux", "external"])
    parser.add_argument("--threshold", type=float, default=None,
                        help="peak-picking threshold in [0,1] (default per detector)")
    parser.add_argument("--frame-ms", type=float, default=11.0, dest="frame_ms")
    parser.add_argument("--hop-ms", type=float, default=None, dest="hop_ms",
                        help="hop in ms (default: half the frame)")
    parser.add_argument("--min-sep-ms", type=float, default=None, dest="min_sep_ms",
                        help="minimum onset separation in ms (default per detector)")
    parser.add_argument("--refine-ms", type=float, default=0.0, dest="refine_ms",
                        help="spectral-flux refinement window in ms (0 = off)")
    parser.add_argument("--server", default=None, help="URL of a running onsetbox service")
    parser.add_argument("--export", default=None, help="write machine-readable results here")


def build_parser() -> _Parser:
    parser = _Parser(prog="onsetbox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect onsets in one audio file")
    p.add_argument("audio", nargs="?", default=None, help="WAV file to analyse")
    p.add_argument("--curve-file", default=None, dest="curve_file",
                   help="activation curve for the external detector")
    _add_detector_flags(p)

    p = sub.add_parser("eval", help="score a detector against annotations")
    p.add_argument("pair", nargs="*", default=[],
                   help="AUDIO ANNOTATIONS file pair (alternative to --root)")
    p.add_argument("--root", default=None, help="dataset tree to evaluate")
    p.add_argument("--tolerance-ms", type=float, default=50.0, dest="tolerance_ms")
    p.add_argument("--include-discarded", action="store_true")
    p.add_argument("--curve-file", default=None, dest="curve_file",
                   help="activation curve for an external file-pair run")
    p.add_argument("--curve-suffix", default=None, dest="curve_suffix",
                   help="sidecar suffix for external runs over a tree, e.g. .odf.txt")
    p.add_argument("--per-file", action="store_true", help="also print per-file scores")
    _add_detector_flags(p)

    p = sub.add_parser("sweep", help="grid-search one detector parameter")
    p.add_argument("pair", nargs="*", default=[],
                   help="AUDIO ANNOTATIONS file pair (alternative to --root)")
    p.add_argument("--root", default=None)
    p.add_argument("--param", required=True, dest="param",
                   choices=["threshold", "frame_ms", "hop_ms", "min_sep_ms", "refine_ms"])
    p.add_argument("--min", type=float, required=True, dest="minimum")
    p.add_argument("--max", type=float, required=True, dest="maximum")
    p.add_argument("--num", type=int, default=10, dest="num_values")
    p.add_argument("--tolerance-ms", type=float, default=50.0, dest="tolerance_ms")
    p.add_argument("--include-discarded", action="store_true")
    p.add_argument("--curve-file", default=None, dest="curve_file")
    p.add_argument("--curve-suffix", default=None, dest="curve_suffix")
    _add_detector_flags(p)

    p = sub.add_parser("stats", help="print the dataset content summary")
    p.add_argument("--root", required=True)
    p.add_argument("--exclude-discarded", action="store_true",
                   help="leave Discarded-folder files out of the summary")
    p.add_argument("--server", default=None)
    p.add_argument("--export", default=None)
    return parser


def _pair_files(args) -> list[dict] | None:
    """File list for eval/sweep when an explicit pair is given."""
    if not args.pair:
        return None
    if len(args.pair) != 2:
        print("error: expected exactly AUDIO ANNOTATIONS", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    audio, annotations = args.pair
    if args.detector == "external":
        if args.curve_file is None:
            print("error: external detector requires --curve-file", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
        return [{"input_path": args.curve_file, "annotation_path": annotations,
                 "audio_path": audio}]
    return [{"input_path": audio, "annotation_path": annotations}]


def cmd_detect(client, args) -> int:
    payload = {"params": _detector_params(args)}
    if args.audio is not None:
        payload["audio_path"] = args.audio
    if args.curve_file is not None:
        payload["curve_path"] = args.curve_file
    if args.detector != "external" and args.audio is None:
        print("error: an audio file is required", file=sys.stderr)
        return EXIT_USAGE
    if args.export is not None:
        payload["export_path"] = args.export
    response = client.post("/detect", json=payload)
    if response.status_code != 200:
        return _fail(response)
    for t in response.json()["onsets_sec"]:
        print(f"{t:.6f}")
    return EXIT_OK


def cmd_eval(client, args) -> int:
    files = _pair_files(args)
    if files is None and args.root is None:
        print("error: provide --root or an AUDIO ANNOTATIONS pair", file=sys.stderr)
        return EXIT_USAGE
    payload = {
        "params": _detector_params(args),
        "tolerance_ms": args.tolerance_ms,
        "include_discarded": args.include_discarded,
    }
    if files is not None:
        payload["files"] = files
    else:
        payload["root"] = args.root
    if args.curve_suffix is not None:
        payload["curve_suffix"] = args.curve_suffix
    if args.export is not None:
        payload["export_path"] = args.export
    response = client.post("/eval", json=payload)
    if response.status_code != 200:
        return _fail(response)
    body = response.json()
    if args.per_file:
        for fr in body["per_file"]:
            print(f"{fr['input_path']}: F1 {fr['f1']:.3f} "
                  f"(tp {fr['tp']} fp {fr['fp']} fn {fr['fn']}, MAD {fr['mad_ms']:.1f} ms)")
    for line in body["skipped"]:
        print(f"skipped: {line}", file=sys.stderr)
    print(f"files evaluated: {body['files_evaluated']}")
    print(f"precision: {body['precision']:.3f}  recall: {body['recall']:.3f}  "
          f"F1: {body['f1']:.3f}")
    print(f"tp: {body['tp']}  fp: {body['fp']}  fn: {body['fn']}")
    print(f"mean absolute deviation: {body['mad_ms']:.1f} ms")
    print(f"detection duration: {body['wall_clock_sec']:.2f} s")
    return EXIT_OK


def cmd_sweep(client, args) -> int:
    files = _pair_files(args)
    if files is None and args.root is None:
        print("error: provide --root or an AUDIO ANNOTATIONS pair", file=sys.stderr)
        return EXIT_USAGE
    payload = {
        "parameter": args.param,
        "minimum": args.minimum,
        "maximum": args.maximum,
        "num_values": args.num_values,
        "params": _detector_params(args),
        "tolerance_ms": args.tolerance_ms,
        "include_discarded": args.include_discarded,
    }
    if files is not None:
        payload["files"] = files
    else:
        payload["root"] = args.root
    if args.curve_suffix is not None:
        payload["curve_suffix"] = args.curve_suffix
    if args.export is not None:
        payload["export_path"] = args.export
    response = client.post("/sweep", json=payload)
    if response.status_code != 200:
        return _fail(response)
    body = response.json()
    print(f"{body['parameter']}\tprecision\trecall\tF1\tMAD_ms")
    for row in body["rows"]:
        print(f"{row['value']:g}\t{row['precision']:.3f}\t{row['recall']:.3f}"
              f"\t{row['f1']:.3f}\t{row['mad_ms']:.1f}")
    print(f"best {body['parameter']}: {body['best_value']:g}")
    if body.get("selected_refine_ms") is not None:
        print(f"refinement window by 1% rule: {body['selected_refine_ms']:g} ms")
    return EXIT_OK


def cmd_stats(client, args) -> int:
    payload = {"root": args.root, "include_discarded": not args.exclude_discarded}
    if args.export is not None:
        payload["export_path"] = args.export
    response = client.post("/stats", json=payload)
    if response.status_code != 200:
        return _fail(response)
    body = response.json()
    columns = ["personal", "fixed", "improvisation"]
    print("label\t" + "\t".join(columns))
    for label, row in body["counts"].items():
        print(label + "\t" + "\t".join(str(row[c]) for c in columns))
    totals = body["column_totals"]
    print("total\t" + "\t".join(str(totals[c]) for c in columns))
    if body["unlabeled"]:
        print(f"unlabeled onsets: {body['unlabeled']}")
    print(f"utterances: {body['total_utterances']}  files: {body['audio_files']}  "
          f"participants: {body['participants']}")
    for problem in body["problems"]:
        print(f"warning: {problem}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with make_client(args.server) as client:
            handler = {
                "detect": cmd_detect,
                "eval": cmd_eval,
                "sweep": cmd_sweep,
                "stats": cmd_stats,
            }[args.command]
            return handler(client, args)
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
