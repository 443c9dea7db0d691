"""HTTP facade over the experiment pipeline.

Thin by design: every endpoint validates with the same parser and executes
with the same runner the CLI uses, so a config behaves identically whether
it is run locally or through a server.  Runs execute in a worker thread and
are tracked in an in-process registry keyed by run id.
"""

from __future__ import annotations

import threading
import traceback
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .config import parse_config
from .errors import ConfigError, FroglabError
from .experiments import (TOOL_VERSION, emit_report, run_dir_for,
                          run_experiment)


class ValidateRequest(BaseModel):
    config_text: str


class Problem(BaseModel):
    location: str
    message: str


class ValidateResponse(BaseModel):
    valid: bool
    problems: list[Problem] = Field(default_factory=list)
    config_hash: str | None = None
    kind: str | None = None


class RunRequest(BaseModel):
    config_text: str
    output_dir: str | None = None
    wait: bool = True


class RunStatus(BaseModel):
    run_id: str
    status: str                       # running | complete | failed
    kind: str | None = None
    config_hash: str | None = None
    run_dir: str | None = None
    error: str | None = None


class ReportResponse(BaseModel):
    run_id: str
    passed: bool
    checks: list[dict]
    text: str


class _Job:
    def __init__(self, run_id: str):
        self.run_id = run_id
        self.status = "running"
        self.kind: str | None = None
        self.config_hash: str | None = None
        self.run_dir: str | None = None
        self.error: str | None = None
        self.done = threading.Event()

    def as_status(self) -> RunStatus:
        return RunStatus(run_id=self.run_id, status=self.status, kind=self.kind,
                         config_hash=self.config_hash, run_dir=self.run_dir,
                         error=self.error)


def create_app(default_output_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="froglab", version=TOOL_VERSION)
    jobs: dict[str, _Job] = {}
    jobs_lock = threading.Lock()

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "tool_version": TOOL_VERSION}

    @app.post("/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest) -> ValidateResponse:
        try:
            cfg = parse_config(req.config_text)
        except ConfigError as exc:
            return ValidateResponse(valid=False, problems=[
                Problem(location=loc, message=msg) for loc, msg in exc.problems])
        return ValidateResponse(valid=True, config_hash=cfg.config_hash,
                                kind=cfg.kind)

    def _execute(job: _Job, cfg, output_dir) -> None:
        try:
            run_experiment(cfg, output_dir)
            job.status = "complete"
        except Exception as exc:           # surfaced via the status endpoint
            job.status = "failed"
            job.error = f"{type(exc).__name__}: {exc}"
            traceback.print_exc()
        finally:
            job.done.set()

    @app.post("/runs", response_model=RunStatus)
    def start_run(req: RunRequest) -> RunStatus:
        try:
            cfg = parse_config(req.config_text)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=[
                {"location": loc, "message": msg} for loc, msg in exc.problems])
        output_dir = req.output_dir or default_output_dir
        job = _Job(uuid.uuid4().hex[:12])
        job.kind = cfg.kind
        job.config_hash = cfg.config_hash
        job.run_dir = str(run_dir_for(cfg, output_dir))
        with jobs_lock:
            jobs[job.run_id] = job
        worker = threading.Thread(target=_execute, args=(job, cfg, output_dir),
                                  daemon=True)
        worker.start()
        if req.wait:
            job.done.wait()
        return job.as_status()

    def _get_job(run_id: str) -> _Job:
        with jobs_lock:
            job = jobs.get(run_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"no run {run_id!r}")
        return job

    @app.get("/runs/{run_id}", response_model=RunStatus)
    def run_status(run_id: str) -> RunStatus:
        return _get_job(run_id).as_status()

    @app.get("/runs/{run_id}/report", response_model=ReportResponse)
    def run_report(run_id: str) -> ReportResponse:
        job = _get_job(run_id)
        if job.status == "running":
            raise HTTPException(status_code=409, detail="run still in progress")
        if job.status == "failed":
            raise HTTPException(status_code=409, detail=f"run failed: {job.error}")
        try:
            report = emit_report(Path(job.run_dir))
        except FroglabError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return ReportResponse(run_id=run_id, passed=report.passed,
                              checks=[{"name": c.name, "passed": c.passed,
                                       "observed": c.observed,
                                       "description": c.description}
                                      for c in report.checks],
                              text=report.text)

    return app


app = create_app()
