"""HTTP service exposing prediction, introspection, editing, and
comparison, plus static assets for the web UI.

Built directly on ``http.server``: handlers are stateless over a shared
immutable model, every response body is JSON unless an endpoint returns
WAV, and errors always serialize as ``{"error": {code, message, detail}}``.

Uploaded clips are cached in memory keyed by content hash (the
``input_id`` echoed in responses) so follow-up feature-audio requests can
skip re-uploading; the cache is advisory and bounded.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import re
import threading
from collections import OrderedDict
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import audio_io, edits, introspect
from .errors import AudioError, EditError, NoParameters, UnknownEditOp
from .nn.model import Model

log = logging.getLogger(__name__)

MAX_UPLOAD_BYTES = 10 * 1024 * 1024
MAX_BODY_BYTES = MAX_UPLOAD_BYTES + 64 * 1024  # multipart framing allowance
MAX_CLIP_SECONDS = 10.0
CACHE_ENTRIES = 64
PREVIEW_POINTS = 1000


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str,
                 detail: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.detail = detail


def _bad_request(message, detail=None):
    return ApiException(400, "bad_request", message, detail)


# -- multipart/form-data -----------------------------------------------------

@dataclass
class FormPart:
    name: str
    filename: str | None
    body: bytes


def parse_multipart(content_type: str, body: bytes) -> list[FormPart]:
    m = re.search(r'boundary="?([^";]+)"?', content_type)
    if not m:
        raise _bad_request("multipart body without boundary")
    delimiter = b"--" + m.group(1).encode("latin-1")
    parts = []
    segments = body.split(delimiter)
    for segment in segments[1:]:
        if segment.startswith(b"--"):
            break  # closing delimiter
        segment = segment.removeprefix(b"\r\n")
        header_blob, sep, content = segment.partition(b"\r\n\r\n")
        if not sep:
            continue
        content = content.removesuffix(b"\r\n")
        name, filename = "", None
        for line in header_blob.split(b"\r\n"):
            if line.lower().startswith(b"content-disposition:"):
                text = line.decode("latin-1")
                nm = re.search(r'name="([^"]*)"', text)
                fn = re.search(r'filename="([^"]*)"', text)
                if nm:
                    name = nm.group(1)
                if fn:
                    filename = fn.group(1)
        parts.append(FormPart(name=name, filename=filename, body=content))
    return parts


# -- application state -------------------------------------------------------

@dataclass
class _CacheEntry:
    clip: audio_io.AudioClip
    activations: introspect.ActivationSet


class AppState:
    """Model slot plus the bounded upload cache. Swapping the model is
    exclusive; requests seeing an empty slot get 503."""

    def __init__(self, model: Model | None = None,
                 static_dir: Path | None = None):
        self._model = model
        self._model_lock = threading.Lock()
        self.static_dir = Path(static_dir).resolve() if static_dir else None
        self._cache: OrderedDict[str, _CacheEntry] = OrderedDict()
        self._cache_lock = threading.Lock()

    @property
    def model(self) -> Model | None:
        return self._model

    def set_model(self, model: Model | None):
        with self._model_lock:
            self._model = model

    def require_model(self) -> Model:
        model = self._model
        if model is None:
            raise ApiException(503, "model_unavailable",
                               "no checkpoint loaded")
        return model

    def cache_get(self, input_id: str) -> _CacheEntry | None:
        with self._cache_lock:
            entry = self._cache.get(input_id)
            if entry is not None:
                self._cache.move_to_end(input_id)
            return entry

    def cache_put(self, input_id: str, entry: _CacheEntry):
        with self._cache_lock:
            self._cache[input_id] = entry
            self._cache.move_to_end(input_id)
            while len(self._cache) > CACHE_ENTRIES:
                self._cache.popitem(last=False)


def _decode_upload(raw: bytes) -> audio_io.AudioClip:
    if len(raw) > MAX_UPLOAD_BYTES:
        raise ApiException(413, "bad_request", "upload exceeds 10 MiB")
    try:
        clip = audio_io.load_wav(raw)
    except AudioError as exc:
        raise ApiException(400, "unsupported_media", str(exc))
    if len(clip) == 0:
        raise ApiException(400, "unsupported_media", "empty audio clip")
    if clip.duration_seconds > MAX_CLIP_SECONDS:
        raise _bad_request(
            f"clip is {clip.duration_seconds:.1f}s, limit is "
            f"{MAX_CLIP_SECONDS:.0f}s")
    return clip


def _input_id(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()[:32]


def _activations_for(state: AppState, raw: bytes) -> tuple[str, _CacheEntry]:
    model = state.require_model()
    input_id = _input_id(raw)
    entry = state.cache_get(input_id)
    if entry is None:
        clip = _decode_upload(raw)
        entry = _CacheEntry(clip=clip,
                            activations=introspect.activations(model, clip))
        state.cache_put(input_id, entry)
    return input_id, entry


def _sig6_list(arr) -> list:
    return introspect._sig6(np.asarray(arr, dtype=np.float64)).tolist()


def _png_b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _layer_payload(acts: introspect.ActivationSet,
                   only_layer: int | None = None) -> list[dict]:
    layers = []
    for la in acts.layers:
        if only_layer is not None and la.layer_index != only_layer:
            continue
        layers.append({
            "layer_index": la.layer_index,
            "filters": [
                {
                    "index": f,
                    "height": int(la.maps.shape[1]),
                    "width": int(la.maps.shape[2]),
                    "png_base64": _png_b64(
                        introspect.feature_map_to_image(la.maps[f])),
                }
                for f in range(la.filter_count)
            ],
        })
    return layers


def _activation_side(input_id: str, acts: introspect.ActivationSet) -> dict:
    return {
        "input_id": input_id,
        "predicted_label": acts.predicted_label,
        "probs": _sig6_list(acts.probs),
        "spectrogram_png_base64": _png_b64(
            introspect.spectrogram_to_image(acts.input_spectrogram)),
        "layers": _layer_payload(acts),
    }


def _waveform_preview(samples: np.ndarray) -> list[float]:
    n = len(samples)
    points = min(PREVIEW_POINTS, n)
    if points == 0:
        return []
    edges = (np.arange(points + 1) * n) // points
    return [float(np.max(np.abs(samples[edges[i]:edges[i + 1]])))
            for i in range(points)]


# -- request handling --------------------------------------------------------

class Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "audioscope"

    # ---- plumbing

    @property
    def state(self) -> AppState:
        return self.server.app_state

    def log_message(self, fmt, *args):
        log.debug("%s %s", self.address_string(), fmt % args)

    def _send(self, status: int, content_type: str, body: bytes):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, obj, status: int = 200):
        self._send(status, "application/json; charset=utf-8",
                   json.dumps(obj).encode("utf-8"))

    def _send_error_obj(self, exc: ApiException):
        payload = {"error": {"code": exc.code, "message": str(exc)}}
        if exc.detail:
            payload["error"]["detail"] = exc.detail
        self._send_json(payload, status=exc.status)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        if length > MAX_BODY_BYTES:
            raise ApiException(413, "bad_request", "request body too large")
        return self.rfile.read(length) if length else b""

    def _multipart(self, body: bytes) -> list[FormPart]:
        ctype = self.headers.get("Content-Type", "")
        if not ctype.startswith("multipart/form-data"):
            raise _bad_request("expected multipart/form-data")
        return parse_multipart(ctype, body)

    def _file_part(self, parts: list[FormPart],
                   *names: str) -> FormPart:
        for name in names:
            for p in parts:
                if p.name == name:
                    return p
        for p in parts:
            if p.filename is not None:
                return p
        raise _bad_request("no file in request")

    # ---- dispatch

    def do_GET(self):
        try:
            path = self.path.split("?", 1)[0]
            if path == "/api/model/summary":
                return self._get_summary()
            m = re.fullmatch(r"/api/layers/(\d+)/weights/histogram", path)
            if m:
                return self._get_histogram(int(m.group(1)))
            if path.startswith("/api/"):
                raise ApiException(404, "bad_request", f"no such endpoint {path}")
            return self._get_static(path)
        except ApiException as exc:
            self._send_error_obj(exc)
        except Exception:
            log.exception("GET %s failed", self.path)
            self._send_error_obj(ApiException(500, "internal",
                                              "internal server error"))

    def do_POST(self):
        try:
            path, _, query = self.path.partition("?")
            body = self._read_body()
            if path == "/api/predict":
                return self._post_predict(body)
            if path == "/api/activations":
                return self._post_activations(body, query)
            if path == "/api/feature-audio":
                return self._post_feature_audio(body)
            if path == "/api/edit":
                return self._post_edit(body)
            if path == "/api/compare":
                return self._post_compare(body)
            raise ApiException(404, "bad_request", f"no such endpoint {path}")
        except ApiException as exc:
            self._send_error_obj(exc)
        except Exception:
            log.exception("POST %s failed", self.path)
            self._send_error_obj(ApiException(500, "internal",
                                              "internal server error"))

    # ---- endpoints

    def _post_predict(self, body: bytes):
        parts = self._multipart(body)
        raw = self._file_part(parts, "file", "audio", "wav").body
        input_id, entry = _activations_for(self.state, raw)
        acts = entry.activations
        self._send_json({
            "input_id": input_id,
            "label": acts.predicted_label,
            "probs": _sig6_list(acts.probs),
            "spectrogram_png_base64": _png_b64(
                introspect.spectrogram_to_image(acts.input_spectrogram)),
        })

    def _post_activations(self, body: bytes, query: str):
        parts = self._multipart(body)
        raw = self._file_part(parts, "file", "audio", "wav").body
        layer_str = None
        qm = re.search(r"(?:^|&)layer=(-?\d+)", query)
        if qm:
            layer_str = qm.group(1)
        for p in parts:
            if p.name == "layer" and p.filename is None:
                layer_str = p.body.decode("ascii", "replace").strip()
        only_layer = None
        if layer_str is not None:
            try:
                only_layer = int(layer_str)
            except ValueError:
                raise _bad_request("layer must be an integer")
        input_id, entry = _activations_for(self.state, raw)
        acts = entry.activations
        if only_layer is not None:
            if not any(la.layer_index == only_layer for la in acts.layers):
                raise _bad_request(f"no conv block {only_layer} "
                                   f"(have 0..{len(acts.layers) - 1})")
        self._send_json({
            "input_id": input_id,
            "predicted_label": acts.predicted_label,
            "probs": _sig6_list(acts.probs),
            "layers": _layer_payload(acts, only_layer),
        })

    def _post_feature_audio(self, body: bytes):
        ctype = self.headers.get("Content-Type", "")
        if ctype.startswith("application/json"):
            try:
                req = json.loads(body.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise _bad_request(f"bad JSON body: {exc}")
            if not isinstance(req, dict) or "input_id" not in req:
                raise _bad_request("need {input_id, layer, filter}")
            entry = self.state.cache_get(str(req["input_id"]))
            if entry is None:
                raise _bad_request("unknown input_id (cache may have "
                                   "expired; re-upload the file)")
            layer, filt = req.get("layer"), req.get("filter")
        else:
            parts = self._multipart(body)
            raw = self._file_part(parts, "file", "audio", "wav").body
            fields = {p.name: p.body.decode("ascii", "replace")
                      for p in parts if p.filename is None}
            _, entry = _activations_for(self.state, raw)
            layer, filt = fields.get("layer"), fields.get("filter")

        try:
            layer = int(layer)
            filt = int(filt)
        except (TypeError, ValueError):
            raise _bad_request("layer and filter must be integers")
        acts = entry.activations
        blocks = {la.layer_index: la for la in acts.layers}
        if layer not in blocks:
            raise _bad_request(f"layer {layer} out of range "
                               f"(have 0..{len(acts.layers) - 1})")
        if not 0 <= filt < blocks[layer].filter_count:
            raise _bad_request(
                f"filter {filt} out of range for layer {layer} "
                f"({blocks[layer].filter_count} filters)")
        clip = introspect.feature_to_audio(blocks[layer].maps[filt],
                                           acts.input_spectrogram)
        clip = audio_io.fit_to_duration(clip, audio_io.CANONICAL_SECONDS)
        self._send(200, "audio/wav", audio_io.write_wav(clip))

    def _post_edit(self, body: bytes):
        parts = self._multipart(body)
        raw = self._file_part(parts, "file", "audio", "wav").body
        clip = _decode_upload(raw)
        ops_blob = next((p.body for p in parts
                         if p.name == "ops" and p.filename is None), b"[]")
        try:
            ops_json = json.loads(ops_blob.decode("utf-8"))
            if not isinstance(ops_json, list):
                raise _bad_request("ops must be a JSON array")
            ops = [edits.EditOp.from_json(o) for o in ops_json]
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _bad_request(f"ops is not valid JSON: {exc}")
        except UnknownEditOp as exc:
            raise _bad_request(str(exc))
        try:
            edited = edits.apply(clip, ops)
        except EditError as exc:
            raise _bad_request(str(exc), detail={"op_index": exc.op_index})
        self._send_json({
            "wav_base64": base64.b64encode(
                audio_io.write_wav(edited)).decode("ascii"),
            "duration_ms": round(edited.duration_ms, 3),
            "waveform_preview": _sig6_list(
                _waveform_preview(edited.samples)),
        })

    def _post_compare(self, body: bytes):
        parts = self._multipart(body)
        files = [p for p in parts if p.filename is not None or
                 p.name in ("a", "b")]
        named = {p.name: p for p in files}
        if "a" in named and "b" in named:
            raw_a, raw_b = named["a"].body, named["b"].body
        elif len(files) >= 2:
            raw_a, raw_b = files[0].body, files[1].body
        else:
            raise _bad_request("compare needs two WAV parts (a and b)")
        self.state.require_model()
        id_a, entry_a = _activations_for(self.state, raw_a)
        id_b, entry_b = _activations_for(self.state, raw_b)
        distances = []
        for la, lb in zip(entry_a.activations.layers,
                          entry_b.activations.layers):
            diff = la.maps.astype(np.float64) - lb.maps.astype(np.float64)
            distances.append(np.sqrt((diff * diff).sum(axis=(1, 2))))
        probs_l1 = float(np.abs(
            entry_a.activations.probs.astype(np.float64)
            - entry_b.activations.probs.astype(np.float64)).sum())
        self._send_json({
            "a": _activation_side(id_a, entry_a.activations),
            "b": _activation_side(id_b, entry_b.activations),
            "layer_distances": [_sig6_list(d) for d in distances],
            "probs_l1": float(introspect._sig6(np.array(probs_l1))),
        })

    def _get_summary(self):
        model = self.state.require_model()
        shapes = model.output_shapes()
        layers = [
            {
                "kind": layer.kind,
                "params": int(sum(p.size for p in layer.params())),
                "output_shape": list(shapes[i]),
            }
            for i, layer in enumerate(model.layers)
        ]
        self._send_json({
            "layers": layers,
            "class_labels": list(model.class_labels),
            "checkpoint_version": 1,
            "input_shape": list(model.input_shape),
        })

    def _get_histogram(self, layer_index: int):
        model = self.state.require_model()
        try:
            hist = introspect.weight_histogram(model, layer_index)
        except NoParameters as exc:
            raise _bad_request(str(exc), detail={"error": "no_parameters"})
        self._send_json({
            "layer_index": hist.layer_index,
            "bin_edges": _sig6_list(hist.bin_edges),
            "counts": [int(c) for c in hist.counts],
        })

    def _get_static(self, path: str):
        if self.state.static_dir is None:
            raise ApiException(404, "bad_request", "no static assets")
        rel = path.lstrip("/") or "index.html"
        target = (self.state.static_dir / rel).resolve()
        if not str(target).startswith(str(self.state.static_dir)) \
                or not target.is_file():
            raise ApiException(404, "bad_request", f"not found: {path}")
        suffix = target.suffix.lower()
        ctype = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".png": "image/png",
            ".svg": "image/svg+xml",
            ".wav": "audio/wav",
            ".ico": "image/x-icon",
        }.get(suffix, "application/octet-stream")
        self._send(200, ctype, target.read_bytes())


def create_server(model: Model | None, port: int = 8722,
                  static_dir=None, host: str = "127.0.0.1") -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), Handler)
    server.app_state = AppState(model=model, static_dir=static_dir)
    return server
