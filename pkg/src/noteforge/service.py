"""Job-oriented HTTP service: submit videos, poll status, fetch scheme,
assets, and rendered notes."""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from starlette.datastructures import UploadFile

from .config import PipelineConfig
from .errors import SchemaVersionUnsupported, ValidationFailed
from .htmlrender import RenderOptions, render_printable
from .jobs import JobStore, execute_job
from .serialize import parse_scheme, serialize_scheme

_MEDIA_TYPES = {".png": "image/png", ".gif": "image/gif", ".jpg": "image/jpeg"}


def _strip_editable(data: dict) -> dict:
    """Scheme with every PUT-editable field blanked; equal stripped forms
    mean the edit touched only summaries and highlights."""
    out = json.loads(json.dumps(data))
    for chapter in out.get("chapters", []):
        chapter["summary"] = None
        for step in chapter.get("steps", []):
            step["summary"] = None
    return out


def create_app(config: PipelineConfig, jobs_root: str | Path,
               static_dir: str | Path | None = None) -> FastAPI:
    if not config.mock:
        missing = [name for name, settings in
                   (("vlm", config.vlm), ("embed", config.embed), ("asr", config.asr))
                   if not settings.endpoint]
        if missing:
            raise ValueError(f"remote providers not configured: {', '.join(missing)} "
                             f"(set the NOTEFORGE_*_URL variables or pass --mock)")
    store = JobStore(jobs_root)
    locks: dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    def job_lock(job_id: str) -> threading.Lock:
        with locks_guard:
            return locks.setdefault(job_id, threading.Lock())

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.executor = ThreadPoolExecutor(
            max_workers=max(1, config.max_concurrent_jobs))
        yield
        app.state.executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="noteforge", lifespan=lifespan)
    app.state.store = store
    app.state.config = config

    def get_job(job_id: str):
        job = store.read(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job id")
        return job

    @app.post("/api/jobs")
    async def submit_job(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("file")
            if not isinstance(upload, UploadFile):
                raise HTTPException(status_code=422, detail="missing file field")
            job = store.create(upload.filename or "upload.bin", config)
            upload_dir = store.job_dir(job.job_id) / "upload"
            upload_dir.mkdir(parents=True, exist_ok=True)
            target = upload_dir / Path(upload.filename or "upload.bin").name
            target.write_bytes(await upload.read())
            job.source_uri = str(target)
            store.write_status(job)
        else:
            try:
                body = await request.json()
            except Exception:
                raise HTTPException(status_code=422, detail="expected JSON body")
            source = body.get("source") if isinstance(body, dict) else None
            if not source:
                raise HTTPException(status_code=422, detail="missing source")
            job = store.create(source, config)
        request.app.state.executor.submit(execute_job, store, job, config)
        return JSONResponse({"job_id": job.job_id}, status_code=201)

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        return get_job(job_id).to_dict()

    @app.get("/api/jobs/{job_id}/scheme")
    def get_scheme(job_id: str):
        job = get_job(job_id)
        path = store.scheme_path(job_id)
        if job.status != "DONE" or not path.exists():
            raise HTTPException(status_code=409,
                                detail=f"job status is {job.status}, scheme not ready")
        return PlainTextResponse(path.read_text(encoding="utf-8"),
                                 media_type="application/json")

    @app.put("/api/jobs/{job_id}/scheme")
    async def put_scheme(job_id: str, request: Request):
        get_job(job_id)
        path = store.scheme_path(job_id)
        if not path.exists():
            raise HTTPException(status_code=409, detail="scheme not ready")
        body = (await request.body()).decode("utf-8")
        assets = {p.name for p in store.assets_dir(job_id).iterdir()} \
            if store.assets_dir(job_id).exists() else set()
        try:
            edited = parse_scheme(body, assets=assets)
        except (ValidationFailed, SchemaVersionUnsupported) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        with job_lock(job_id):
            current = json.loads(path.read_text(encoding="utf-8"))
            if _strip_editable(current) != _strip_editable(edited.to_dict()):
                raise HTTPException(
                    status_code=422,
                    detail="only summaries and highlights may be edited")
            canonical = serialize_scheme(edited)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(canonical, encoding="utf-8")
            tmp.rename(path)
        return {"job_id": job_id, "status": "updated"}

    @app.get("/api/jobs/{job_id}/assets/{name}")
    def get_asset(job_id: str, name: str):
        get_job(job_id)
        target = store.assets_dir(job_id) / Path(name).name
        if not target.exists():
            raise HTTPException(status_code=404, detail="no such asset")
        return FileResponse(target,
                            media_type=_MEDIA_TYPES.get(target.suffix,
                                                        "application/octet-stream"))

    @app.get("/api/jobs/{job_id}/render")
    def render_job(job_id: str, modality: str = "TEXT_IMAGE",
                   verbosity: str = "VERBOSE", engagement: str = "PRINTABLE",
                   show_emoji: bool = True):
        job = get_job(job_id)
        path = store.scheme_path(job_id)
        if job.status != "DONE" or not path.exists():
            raise HTTPException(status_code=409, detail="scheme not ready")
        if engagement == "INTERACTABLE":
            raise HTTPException(
                status_code=422,
                detail="interactable rendering happens in the viewer app")
        try:
            opts = RenderOptions(modality=modality, verbosity=verbosity,
                                 engagement=engagement, show_emoji=show_emoji)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        scheme = parse_scheme(path.read_text(encoding="utf-8"))
        assets = store.assets_dir(job_id)
        html = render_printable(scheme, opts,
                                asset_exists=lambda name: (assets / name).exists())
        return HTMLResponse(html)

    @app.get("/api/jobs/{job_id}/transcript")
    def get_transcript(job_id: str):
        get_job(job_id)
        path = store.transcript_path(job_id)
        if not path.exists():
            return JSONResponse([])
        return JSONResponse(json.loads(path.read_text(encoding="utf-8")))

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="viewer")

    return app
