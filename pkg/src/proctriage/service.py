"""Collection and classification service.

Hosts post raw process listings; each submission is appended to a
JSON-lines log before the response goes out, then scored against the
active model (tree or neural net) when one is loaded.  Humans label
records after the fact and export the labeled slice as a dataset CSV.
The verdict is the whole response; nothing is ever served back to the
submitting host beyond it.

Persistence is deliberately plain: one JSONL file per UTC day, each line
a full snapshot of one record, newest snapshot winning at reload.  An
in-memory index is rebuilt by scanning the log at startup, which is
cheap at the volumes this service sees.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
import uuid
from dataclasses import dataclass, replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

from .ann import ANN_SCHEMA_VERSION, ann_from_dict, predict_ann
from .dtree import TREE_SCHEMA_VERSION, predict_proba, predict_tree, tree_from_dict
from .errors import ModelFormatError, TriageError
from .features import (
    FeatureVector,
    Label,
    LabeledDataset,
    LabeledSample,
    dataset_to_csv,
    featurize,
)
from .proclist import parse_process_list

logger = logging.getLogger(__name__)

MODEL_FILENAME = "model.json"
VERDICT_DISPLAY = {Label.TARGET: "safe", Label.SANDBOX: "sandbox"}


@dataclass(frozen=True)
class SampleRecord:
    """One submitted listing, as persisted.

    `features` is present iff the listing parsed and featurized;
    `predicted` only if a model was active at ingest.
    """

    id: str
    received_at: float
    raw_text: str
    features: FeatureVector | None = None
    predicted: tuple[Label, float] | None = None
    human_label: Label | None = None
    parse_warnings: int = 0

    def __post_init__(self):
        if not self.id:
            raise ValueError("empty record id")
        if self.parse_warnings < 0:
            raise ValueError("negative warning count")


def record_to_dict(record: SampleRecord) -> dict:
    doc = {
        "id": record.id,
        "received_at": record.received_at,
        "raw_text": record.raw_text,
        "features": None,
        "predicted": None,
        "human_label": None if record.human_label is None else int(record.human_label),
        "parse_warnings": record.parse_warnings,
    }
    if record.features is not None:
        f = record.features
        doc["features"] = {"process_count": f.process_count,
                           "user_count": f.user_count, "ratio": f.ratio}
    if record.predicted is not None:
        label, prob = record.predicted
        doc["predicted"] = {"label": int(label), "probability": prob}
    return doc


def record_from_dict(doc: dict) -> SampleRecord:
    features = None
    if doc.get("features") is not None:
        f = doc["features"]
        features = FeatureVector(process_count=int(f["process_count"]),
                                 user_count=int(f["user_count"]),
                                 ratio=float(f["ratio"]))
    predicted = None
    if doc.get("predicted") is not None:
        p = doc["predicted"]
        predicted = (Label(int(p["label"])), float(p["probability"]))
    human_label = doc.get("human_label")
    return SampleRecord(
        id=str(doc["id"]),
        received_at=float(doc["received_at"]),
        raw_text=str(doc["raw_text"]),
        features=features,
        predicted=predicted,
        human_label=None if human_label is None else Label(int(human_label)),
        parse_warnings=int(doc.get("parse_warnings", 0)),
    )


class SampleStore:
    """Append-only JSONL store with an in-memory index.

    Appends are serialized by a lock and fsynced before the caller is
    told the record exists; updates append a fresh full snapshot rather
    than rewriting history.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: dict[str, SampleRecord] = {}
        self._order: list[str] = []
        self._reload()

    def _reload(self) -> None:
        for path in sorted(self.root.glob("samples-*.jsonl")):
            with open(path, encoding="utf-8") as fh:
                for line_no, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        record = record_from_dict(json.loads(line))
                    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                        # torn trailing write or manual edit; keep serving
                        logger.warning("%s:%d unreadable row skipped", path.name, line_no)
                        continue
                    self._index(record)

    def _index(self, record: SampleRecord) -> None:
        if record.id not in self._records:
            self._order.append(record.id)
        self._records[record.id] = record

    def append(self, record: SampleRecord) -> None:
        """Durably append a snapshot, then make it visible."""
        line = json.dumps(record_to_dict(record), separators=(",", ":"))
        with self._lock:
            day = time.strftime("%Y%m%d", time.gmtime(record.received_at))
            path = self.root / f"samples-{day}.jsonl"
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._index(record)

    def get(self, record_id: str) -> SampleRecord | None:
        with self._lock:
            return self._records.get(record_id)

    def all_records(self) -> list[SampleRecord]:
        with self._lock:
            return [self._records[i] for i in self._order]

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str | Path
    host: str = "127.0.0.1"
    port: int = 8750
    token: str | None = None
    strict: bool = False
    model_path: str | Path | None = None


class Service:
    """The application behind the HTTP layer; usable directly in tests."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.store = SampleStore(self.data_dir / "samples")
        self._model_lock = threading.Lock()
        self._active = None  # (kind, model, model_id, activated_at)
        persisted = self.data_dir / MODEL_FILENAME
        if config.model_path is not None:
            with open(config.model_path, encoding="utf-8") as fh:
                self.activate_model(json.load(fh))
        elif persisted.exists():
            with open(persisted, encoding="utf-8") as fh:
                self._install(json.load(fh), persist=False)

    # model management

    def _install(self, doc: dict, persist: bool) -> dict:
        version = doc.get("version") if isinstance(doc, dict) else None
        if version == TREE_SCHEMA_VERSION:
            kind, model = "dtree", tree_from_dict(doc)
        elif version == ANN_SCHEMA_VERSION:
            kind, model = "ann", ann_from_dict(doc)
        else:
            raise ModelFormatError(f"unsupported model version {version!r}")
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        model_id = hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
        if persist:
            tmp = self.data_dir / (MODEL_FILENAME + ".tmp")
            tmp.write_text(blob + "\n", encoding="utf-8")
            os.replace(tmp, self.data_dir / MODEL_FILENAME)
        with self._model_lock:
            self._active = (kind, model, model_id, time.time())
        return self.model_info()

    def activate_model(self, doc: dict) -> dict:
        """Validate, persist, and atomically swap in a model document."""
        return self._install(doc, persist=True)

    def model_info(self) -> dict:
        with self._model_lock:
            active = self._active
        if active is None:
            return {"active": False}
        kind, model, model_id, activated_at = active
        info = {"active": True, "kind": kind, "model_id": model_id,
                "activated_at": activated_at}
        if kind == "dtree":
            info["version"] = TREE_SCHEMA_VERSION
            info["feature_names"] = list(model.feature_names)
            info["n_samples"] = model.n_samples
        else:
            info["version"] = ANN_SCHEMA_VERSION
            info["layer_sizes"] = list(model.layer_sizes)
        return info

    def _predict(self, features: FeatureVector):
        with self._model_lock:
            active = self._active
        if active is None:
            return None
        kind, model, _, _ = active
        if kind == "dtree":
            return predict_tree(model, features), predict_proba(model, features)
        label, prob = predict_ann(model, features)
        return label, prob

    # ingestion and labeling

    def _extract(self, raw_text: str) -> tuple[FeatureVector | None, int]:
        """Parse + featurize; under the strict flag failures propagate."""
        try:
            plist = parse_process_list(raw_text, strict=self.config.strict)
            return featurize(plist), len(plist.warnings)
        except TriageError:
            if self.config.strict:
                raise
            return None, 0

    def submit(self, raw_text: str) -> SampleRecord:
        features, warnings = self._extract(raw_text)
        predicted = self._predict(features) if features is not None else None
        record = SampleRecord(
            id=uuid.uuid4().hex,
            received_at=time.time(),
            raw_text=raw_text,
            features=features,
            predicted=predicted,
            parse_warnings=warnings,
        )
        self.store.append(record)
        return record

    def classify(self, raw_text: str) -> dict:
        """Stateless verdict for a raw listing; nothing is persisted."""
        features, _ = self._extract(raw_text)
        predicted = self._predict(features) if features is not None else None
        out = {"verdict": None, "probability": None, "features": None}
        if features is not None:
            out["features"] = {"process_count": features.process_count,
                               "user_count": features.user_count,
                               "ratio": features.ratio}
        if predicted is not None:
            label, prob = predicted
            out["verdict"] = VERDICT_DISPLAY[label]
            out["label"] = int(label)
            out["probability"] = prob
        return out

    def label(self, record_id: str, label: Label) -> SampleRecord:
        record = self.store.get(record_id)
        if record is None:
            raise KeyError(record_id)
        updated = replace(record, human_label=label)
        self.store.append(updated)
        return updated

    def samples(self, labeled: bool | None = None) -> list[SampleRecord]:
        records = self.store.all_records()
        if labeled is None:
            return records
        return [r for r in records if (r.human_label is not None) == labeled]

    def export_dataset(self) -> str:
        """Dataset CSV of every record carrying both features and a label."""
        rows = [LabeledSample(features=r.features, label=r.human_label, origin=r.id)
                for r in self.store.all_records()
                if r.features is not None and r.human_label is not None]
        return dataset_to_csv(LabeledDataset(samples=tuple(rows)))


def submit_response(record: SampleRecord) -> dict:
    doc = {"id": record.id, "verdict": None, "probability": None,
           "parse_warnings": record.parse_warnings}
    if record.predicted is not None:
        label, prob = record.predicted
        doc["verdict"] = VERDICT_DISPLAY[label]
        doc["label"] = int(label)
        doc["probability"] = prob
    return doc


_LABEL_PATH = re.compile(r"^/v1/samples/([0-9a-fA-F-]+)/label$")


class _HttpError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class _Handler(BaseHTTPRequestHandler):
    server_version = "proctriage"
    protocol_version = "HTTP/1.1"

    @property
    def service(self) -> Service:
        return self.server.service  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):
        logger.debug("%s %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, doc) -> None:
        body = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_text(self, status: int, text: str, content_type: str) -> None:
        body = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _check_auth(self) -> None:
        token = self.service.config.token
        if token is None:
            return
        supplied = self.headers.get("Authorization", "")
        if supplied != f"Bearer {token}":
            raise _HttpError(401, "missing or invalid bearer token")

    def _read_body(self) -> str:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw.strip():
            raise _HttpError(400, "empty body")
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise _HttpError(400, "body is not valid UTF-8") from None

    def _read_json(self) -> dict:
        try:
            doc = json.loads(self._read_body())
        except json.JSONDecodeError:
            raise _HttpError(400, "body is not valid JSON") from None
        if not isinstance(doc, dict):
            raise _HttpError(400, "JSON object expected")
        return doc

    # dispatch

    def do_POST(self):  # noqa: N802 (http.server API)
        self._dispatch("POST")

    def do_GET(self):  # noqa: N802
        self._dispatch("GET")

    def _dispatch(self, method: str) -> None:
        try:
            self._check_auth()
            parts = urlsplit(self.path)
            route = (method, parts.path)
            if route == ("POST", "/v1/submit"):
                self._handle_submit()
            elif route == ("POST", "/v1/classify"):
                self._handle_classify()
            elif route == ("POST", "/v1/model"):
                self._handle_activate()
            elif route == ("GET", "/v1/model"):
                self._send_json(200, self.service.model_info())
            elif route == ("GET", "/v1/samples"):
                self._handle_samples(parts.query)
            elif route == ("GET", "/v1/export.csv"):
                self._send_text(200, self.service.export_dataset(), "text/csv; charset=utf-8")
            elif method == "POST" and (m := _LABEL_PATH.match(parts.path)):
                self._handle_label(m.group(1))
            elif parts.path in ("/v1/submit", "/v1/classify", "/v1/model",
                                "/v1/samples", "/v1/export.csv"):
                raise _HttpError(405, f"{method} not supported here")
            else:
                raise _HttpError(404, "no such resource")
        except _HttpError as err:
            self._send_json(err.status, {"error": err.message})
        except TriageError as err:
            # strict-mode parse or model validation failures surface here
            status = 400 if isinstance(err, ModelFormatError) else 422
            self._send_json(status, {"error": f"{type(err).__name__}: {err}"})
        except Exception:
            logger.exception("unhandled error serving %s %s", method, self.path)
            self._send_json(500, {"error": "internal error"})

    def _handle_submit(self) -> None:
        record = self.service.submit(self._read_body())
        self._send_json(200, submit_response(record))

    def _handle_classify(self) -> None:
        self._send_json(200, self.service.classify(self._read_body()))

    def _handle_activate(self) -> None:
        info = self.service.activate_model(self._read_json())
        self._send_json(200, info)

    def _handle_label(self, record_id: str) -> None:
        doc = self._read_json()
        value = doc.get("label")
        if value not in (0, 1) or isinstance(value, bool):
            raise _HttpError(400, "label must be 0 or 1")
        try:
            record = self.service.label(record_id, Label(value))
        except KeyError:
            raise _HttpError(404, f"no sample {record_id}") from None
        self._send_json(200, record_to_dict(record))

    def _handle_samples(self, query: str) -> None:
        params = parse_qs(query)
        labeled = None
        if "labeled" in params:
            flag = params["labeled"][-1].lower()
            if flag in ("true", "1"):
                labeled = True
            elif flag in ("false", "0"):
                labeled = False
            else:
                raise _HttpError(400, "labeled must be true or false")
        records = self.service.samples(labeled)
        self._send_json(200, [record_to_dict(r) for r in records])


def make_server(service: Service) -> ThreadingHTTPServer:
    """Bind the service; port 0 in the config picks a free port."""
    server = ThreadingHTTPServer((service.config.host, service.config.port), _Handler)
    server.daemon_threads = True
    server.service = service  # type: ignore[attr-defined]
    return server


def run_service(config: ServiceConfig) -> None:
    """Blocking entry point used by the command line."""
    service = Service(config)
    server = make_server(service)
    host, port = server.server_address[0], server.server_address[1]
    print(f"listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
