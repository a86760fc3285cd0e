"""HTTP serve mode backing the annotation UI.

Endpoints (all JSON unless noted):

    GET  /api/instances                     dataset index
    GET  /api/instances/{id}                metadata + summary
    GET  /api/taxonomy                      the 6/68 vocabulary
    GET  /api/instances/{id}/annotations    stored annotations
    PUT  /api/instances/{id}/annotations    replace annotations (validated,
                                            atomic; 422 with the validation
                                            report on failure, 403 read-only)
    GET  /api/instances/{id}/bundle/{file}  static bundle files, built
                                            lazily and cached by content hash

Static UI files, when a directory is configured, are served at /.  The
server mutates nothing outside annotations.json and the bundle cache.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import asdict, dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .dataset import (
    BundleOptions,
    export_bundle,
    instance_content_hash,
    scan_dataset,
)
from .geo import summarize_instance
from .instance import Instance, load_instance, metadata_to_json
from .taxonomy import (
    Annotation,
    load_taxonomy,
    read_annotations,
    validate_annotations,
    write_annotations,
)

API_VERSION = "1"
BUNDLE_CACHE_DIR = ".bundles"
MAX_BODY_BYTES = 16 * 1024 * 1024

_SAFE_FILE = re.compile(r"^[A-Za-z0-9._-]+$")

_CONTENT_TYPES = {
    ".json": "application/json",
    ".geojson": "application/geo+json",
    ".csv": "text/csv",
    ".mp4": "video/mp4",
    ".png": "image/png",
    ".html": "text/html",
    ".js": "text/javascript",
    ".css": "text/css",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


@dataclass
class ServeConfig:
    root: str
    port: int = 8765
    host: str = "127.0.0.1"
    read_only: bool = False
    ui_dir: str | None = None
    bundle_rate_hz: float = 10.0

    def __post_init__(self):
        if not (1 <= self.port <= 65535) and self.port != 0:
            raise ValueError(f"port {self.port} out of range")


class DatasetState:
    """Shared, thread-safe view of the dataset for request handlers."""

    def __init__(self, config: ServeConfig):
        self.config = config
        self.root = Path(config.root)
        self.taxonomy = load_taxonomy()
        self.index = scan_dataset(self.root)
        self._instances: dict[str, Instance] = {}
        self._load_lock = threading.Lock()
        self._write_locks: dict[str, threading.Lock] = {}
        self._write_locks_guard = threading.Lock()
        self.cache_root = self.root / BUNDLE_CACHE_DIR

    def instance_dir(self, instance_id: str) -> Path | None:
        entry = self.index.entry(instance_id)
        if entry is None or not entry.ok:
            return None
        return Path(entry.path)

    def instance(self, instance_id: str) -> Instance | None:
        path = self.instance_dir(instance_id)
        if path is None:
            return None
        with self._load_lock:
            if instance_id not in self._instances:
                self._instances[instance_id] = load_instance(path)
            return self._instances[instance_id]

    def write_lock(self, instance_id: str) -> threading.Lock:
        with self._write_locks_guard:
            return self._write_locks.setdefault(instance_id, threading.Lock())

    def bundle_dir(self, instance_id: str) -> Path:
        """Cached bundle for the instance's current content, built lazily."""
        inst_dir = self.instance_dir(instance_id)
        assert inst_dir is not None
        digest = instance_content_hash(inst_dir)
        target = self.cache_root / instance_id / digest
        if target.is_dir():
            return target
        with self.write_lock(instance_id):
            if not target.is_dir():
                inst = load_instance(inst_dir)
                export_bundle(inst, target,
                              BundleOptions(rate_hz=self.config.bundle_rate_hz))
        return target


class _Handler(BaseHTTPRequestHandler):
    state: DatasetState  # assigned by create_server
    protocol_version = "HTTP/1.1"

    # --- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("X-API-Version", API_VERSION)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, PUT, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def _json(self, status: int, doc) -> None:
        body = json.dumps(doc, ensure_ascii=False).encode("utf-8")
        self._send(status, body, "application/json; charset=utf-8")

    def _error(self, status: int, message: str) -> None:
        self._json(status, {"error": message})

    # --- routing ----------------------------------------------------------

    def do_OPTIONS(self):
        self._send(204, b"", "text/plain")

    def do_GET(self):
        try:
            self._route_get()
        except BrokenPipeError:
            pass
        except Exception as exc:
            self._error(500, f"internal error: {exc}")

    def do_PUT(self):
        try:
            self._route_put()
        except BrokenPipeError:
            pass
        except Exception as exc:
            self._error(500, f"internal error: {exc}")

    def _route_get(self):
        state = self.state
        path = self.path.split("?", 1)[0]
        if path == "/api/instances":
            self._json(200, state.index.to_dict())
            return
        if path == "/api/taxonomy":
            self._json(200, state.taxonomy.to_dict())
            return
        m = re.fullmatch(r"/api/instances/([^/]+)", path)
        if m:
            inst = state.instance(m.group(1))
            if inst is None:
                self._error(404, f"unknown instance: {m.group(1)}")
                return
            self._json(200, {
                "instance_id": inst.instance_id,
                "metadata": metadata_to_json(inst.metadata),
                "summary": asdict(summarize_instance(inst)),
                "sensor_only": inst.sensor_only,
            })
            return
        m = re.fullmatch(r"/api/instances/([^/]+)/annotations", path)
        if m:
            inst_dir = state.instance_dir(m.group(1))
            if inst_dir is None:
                self._error(404, f"unknown instance: {m.group(1)}")
                return
            anns = read_annotations(inst_dir)
            self._json(200, [a.to_dict() for a in anns])
            return
        m = re.fullmatch(r"/api/instances/([^/]+)/bundle/([^/]+)", path)
        if m:
            instance_id, filename = m.group(1), m.group(2)
            if state.instance_dir(instance_id) is None:
                self._error(404, f"unknown instance: {instance_id}")
                return
            if not _SAFE_FILE.fullmatch(filename):
                self._error(404, "no such bundle file")
                return
            bundle = state.bundle_dir(instance_id)
            target = bundle / filename
            if not target.is_file():
                self._error(404, f"no {filename} in bundle")
                return
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self._send(200, target.read_bytes(), ctype)
            return
        if self._serve_static(path):
            return
        self._error(404, "not found")

    def _serve_static(self, path: str) -> bool:
        ui = self.state.config.ui_dir
        if ui is None or path.startswith("/api/"):
            return False
        rel = path.lstrip("/") or "index.html"
        target = (Path(ui) / rel).resolve()
        try:
            target.relative_to(Path(ui).resolve())
        except ValueError:
            return False
        if not target.is_file():
            return False
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)
        return True

    def _route_put(self):
        state = self.state
        path = self.path.split("?", 1)[0]
        m = re.fullmatch(r"/api/instances/([^/]+)/annotations", path)
        if not m:
            self._error(404, "not found")
            return
        instance_id = m.group(1)
        if state.config.read_only:
            self._error(403, "server is read-only")
            return
        inst = state.instance(instance_id)
        if inst is None:
            self._error(404, f"unknown instance: {instance_id}")
            return
        length = int(self.headers.get("Content-Length", 0))
        if length <= 0 or length > MAX_BODY_BYTES:
            self._error(400, "missing or oversized body")
            return
        raw = self.rfile.read(length)
        try:
            doc = json.loads(raw.decode("utf-8"))
            if not isinstance(doc, list):
                raise ValueError("body must be a JSON array of annotations")
            anns = [Annotation.from_dict(d) for d in doc]
        except (ValueError, KeyError, TypeError) as exc:
            self._error(400, f"malformed annotations: {exc}")
            return
        report = validate_annotations(anns, inst, state.taxonomy)
        if not report.passed:
            self._json(422, {"error": "validation failed",
                             "report": [asdict(e) for e in report.entries]})
            return
        with state.write_lock(instance_id):
            write_annotations(state.instance_dir(instance_id), anns)
        self._json(200, {"ok": True, "count": len(anns)})


def create_server(config: ServeConfig) -> ThreadingHTTPServer:
    """Bind a threading HTTP server; port 0 picks an ephemeral port."""
    state = DatasetState(config)
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer((config.host, config.port), handler)
    server.daemon_threads = True
    return server


def serve(config: ServeConfig) -> None:
    server = create_server(config)
    host, port = server.server_address[:2]
    mode = " (read-only)" if config.read_only else ""
    print(f"serving {config.root} on http://{host}:{port}/api{mode}",
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
