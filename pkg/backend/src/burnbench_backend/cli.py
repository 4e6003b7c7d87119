"""Backend entry point.

Single job:   burnbench-backend --manifest runs/r0/jobs/E2-P1-S00/manifest.json
HTTP server:  burnbench-backend --serve --port 8765
VLM request:  burnbench-backend --vlm-request out/vlm/S00.request.json \
                                --vlm-response out/vlm/S00.response.json
"""

from __future__ import annotations

import argparse
import sys

from .capabilities import BackendCapabilities
from .pipelines import DiffusersProvider, WeightsConfig
from .service import serve_manifest_file
from .vlm import QwenVlProvider, VlmConfig, VlmUnavailable, serve_vlm_request


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="burnbench-backend", description=__doc__)
    ap.add_argument("--manifest", help="serve one job manifest")
    ap.add_argument("--serve", action="store_true", help="run the HTTP endpoint")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8765)
    ap.add_argument("--base-model", default=None)
    ap.add_argument("--controlnet-model", default=None)
    ap.add_argument("--device", default=None)
    ap.add_argument("--vlm-request", help="serve one VLM request document")
    ap.add_argument("--vlm-response", help="where to write the raw VLM response")
    ap.add_argument("--vlm-model", default=None)
    return ap


def _weights(args) -> WeightsConfig:
    defaults = WeightsConfig()
    return WeightsConfig(
        base_model=args.base_model or defaults.base_model,
        controlnet_model=args.controlnet_model or defaults.controlnet_model,
        device=args.device or defaults.device,
        dtype=defaults.dtype,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.vlm_request:
        if not args.vlm_response:
            print("error: --vlm-response is required with --vlm-request",
                  file=sys.stderr)
            return 2
        config = VlmConfig(model=args.vlm_model) if args.vlm_model else VlmConfig()
        try:
            path = serve_vlm_request(args.vlm_request, args.vlm_response,
                                     provider=QwenVlProvider(config))
        except VlmUnavailable as exc:
            print(f"error: VLM feature disabled: {exc}", file=sys.stderr)
            return 3
        except (ValueError, FileNotFoundError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"response -> {path}")
        return 0

    provider = DiffusersProvider(_weights(args))
    if args.serve:
        from .server import serve

        server = serve(args.host, args.port, provider, BackendCapabilities())
        print(f"serving POST /generate on {args.host}:{args.port}")
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            server.shutdown()
        return 0

    if args.manifest:
        ok, detail = serve_manifest_file(args.manifest, provider)
        if not ok:
            print(f"job failed: {detail}", file=sys.stderr)
            return 1
        print(detail)
        return 0

    build_parser().print_help()
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
