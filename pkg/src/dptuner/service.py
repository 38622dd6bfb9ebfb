"""HTTP/JSON session service for interactive use.

Endpoints:
  POST   /sessions               create a session on a registered dataset
  POST   /sessions/{id}/queries  submit a WireQuery, get an EngineResponse
  GET    /sessions/{id}          public status report
  GET    /datasets               public metadata only
  DELETE /sessions/{id}          close a session

A denial is a 200 with status "denied" — it is a protocol outcome, not a
transport error. Responses never carry true counts, noise values, or
record contents. Single tenant, no auth.
"""

from __future__ import annotations

import itertools
import json
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .accountant import AccountantError, AccountantMode, PrivacyParams
from .data import Dataset, PairTable, build_pair_table, load_dataset, load_labels
from .engine import (
    EngineError,
    Session,
    SessionData,
    open_session,
    session_status,
    submit,
)
from .formulas import FormulaError
from .mechanisms import BETA_DEFAULT, MechanismError
from .queries import QueryTarget
from .synth import SynthConfig, write_files
from .wire import WireError, parse_wire_query, response_to_dict


@dataclass
class DatasetEntry:
    d1: Dataset
    d2: Dataset
    pair_table: PairTable

    def public_metadata(self, dataset_id: str) -> dict:
        size, positives = self.pair_table.public_counts
        return {
            "id": dataset_id,
            "schema": list(self.pair_table.schema.attributes),
            "pairs": size,
            "positives": positives,
            "stability": self.pair_table.stability,
        }


@dataclass
class ServiceConfig:
    datasets: dict = field(default_factory=dict)  # id -> {d1, d2, labels, m?} paths
    host: str = "127.0.0.1"
    port: int = 8400
    default_B: float = 0.5
    default_delta: float = BETA_DEFAULT
    default_beta: float = BETA_DEFAULT
    accountant: AccountantMode = field(default_factory=AccountantMode)
    seed_base: int = 0
    console_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, obj: dict) -> "ServiceConfig":
        kwargs = {}
        for key in ("datasets", "host", "port", "default_B", "default_delta",
                    "default_beta", "seed_base", "console_dir"):
            if key in obj:
                kwargs[key] = obj[key]
        if "accountant" in obj:
            kwargs["accountant"] = AccountantMode.from_dict(obj["accountant"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        return cls.from_dict(_read_config(path))


def _read_config(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".toml", ".tml"):
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib  # type: ignore[no-redef]
        return tomllib.loads(text)
    return json.loads(text)


def load_registry(config: ServiceConfig) -> dict[str, DatasetEntry]:
    """Load every registered dataset up front; a broken entry fails startup."""
    registry: dict[str, DatasetEntry] = {}
    for dataset_id, spec in config.datasets.items():
        if "synthetic" in spec:
            import tempfile

            tmp = tempfile.mkdtemp(prefix="dptuner-data-")
            paths = write_files(tmp, SynthConfig(**spec["synthetic"]))
            spec = {**spec, **paths}
        d1 = load_dataset(spec["d1"])
        d2 = load_dataset(spec["d2"])
        labels = load_labels(spec["labels"])
        table = build_pair_table(d1, d2, labels, m=int(spec.get("m", 1)))
        registry[dataset_id] = DatasetEntry(d1=d1, d2=d2, pair_table=table)
    return registry


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="dptuner session service")
    registry = load_registry(config)
    sessions: dict[str, Session] = {}
    session_meta: dict[str, dict] = {}
    counter = itertools.count(1)
    lock = threading.Lock()

    def _get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.get("/datasets")
    def list_datasets():
        return [entry.public_metadata(ds_id) for ds_id, entry in sorted(registry.items())]

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        dataset_id = body.get("dataset")
        if dataset_id not in registry:
            raise HTTPException(status_code=404, detail=f"unknown dataset {dataset_id!r}")
        entry = registry[dataset_id]
        try:
            privacy = PrivacyParams(
                B=float(body.get("B", config.default_B)),
                delta=float(body.get("delta", config.default_delta)),
            )
            mode = (
                AccountantMode.from_dict(body["mode"])
                if "mode" in body
                else config.accountant
            )
        except (AccountantError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        with lock:
            n = next(counter)
            session_id = f"s{n}"
            seed = int(body.get("seed", config.seed_base + n))
            session = open_session(
                SessionData(pair_table=entry.pair_table, datasets={"d1": entry.d1, "d2": entry.d2}),
                privacy,
                mode=mode,
                seed=seed,
                session_id=session_id,
                default_beta=float(body.get("beta", config.default_beta)),
            )
            sessions[session_id] = session
            session_meta[session_id] = {"dataset": dataset_id, "seed": seed}
        status = session_status(session)
        status["dataset"] = dataset_id
        return status

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = _get_session(session_id)
        status = session_status(session)
        status["dataset"] = session_meta[session_id]["dataset"]
        return status

    @app.delete("/sessions/{session_id}", status_code=204)
    def close_session(session_id: str):
        session = _get_session(session_id)
        session.state = "closed"
        return JSONResponse(status_code=204, content=None)

    @app.post("/sessions/{session_id}/queries")
    def post_query(session_id: str, body: dict):
        session = _get_session(session_id)
        if session.state == "closed":
            raise HTTPException(status_code=409, detail=f"session {session_id} is closed")
        try:
            req = parse_wire_query(body, default_beta=session.default_beta)
            _validate_against_data(req, session)
            resp = submit(session, req)
        except (WireError, FormulaError, MechanismError, EngineError, KeyError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return response_to_dict(req, resp)

    if config.console_dir and Path(config.console_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=config.console_dir, html=True), name="console")

    return app


def _validate_against_data(req, session) -> None:
    """Reject queries naming unknown attributes or datasets before any
    mechanism work happens."""
    schema = session.data.schema
    for formula in ([req.formula] if req.formula else list(req.formulas)):
        for atom in formula.atoms:
            schema.index(atom.attribute)
    if req.target.kind == "baseTable" and req.target.dataset_id not in session.data.datasets:
        raise WireError(f"unknown dataset {req.target.dataset_id!r}")


def serve(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
