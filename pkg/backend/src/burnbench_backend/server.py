"""HTTP endpoint speaking the same contract as the manifest files:
POST /generate with the manifest JSON body."""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .capabilities import BackendCapabilities
from .manifest import ManifestError, parse_job
from .pipelines import DiffusersProvider
from .service import JobFailed, run_job, write_failure


def make_handler(provider, capabilities: BackendCapabilities):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # quiet by default
            pass

        def _reply(self, status: int, doc: dict):
            body = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            if self.path != "/generate":
                self._reply(404, {"status": "error", "reason": "unknown endpoint"})
                return
            length = int(self.headers.get("Content-Length", 0))
            try:
                doc = json.loads(self.rfile.read(length))
                job = parse_job(doc)
            except (json.JSONDecodeError, ManifestError) as exc:
                self._reply(400, {"status": "rejected", "reason": str(exc)})
                return
            try:
                output = run_job(job, provider, capabilities)
            except JobFailed as exc:
                write_failure(job.output_path, exc.reason, exc.kind)
                self._reply(502, {"status": "failed", "reason": exc.reason,
                                  "kind": exc.kind})
                return
            self._reply(200, {"status": "ok", "output_path": str(output)})

    return Handler


def serve(host: str = "127.0.0.1", port: int = 8765, provider=None,
          capabilities: BackendCapabilities | None = None) -> ThreadingHTTPServer:
    """Start the endpoint; caller owns the returned server object."""
    provider = provider or DiffusersProvider()
    capabilities = capabilities or BackendCapabilities()
    server = ThreadingHTTPServer((host, port), make_handler(provider, capabilities))
    return server
