"""HTTP facade over the store, segmentation, and evaluation.

Endpoints (UTF-8 JSON unless noted):

    GET  /sequences                              sequence summaries
    GET  /sequences/{id}/frames/{k}              rendered PNG frame
         ?colormap=gray|iron&corrected=&vmin=&vmax=
    GET  /sequences/{id}/curve?row=&col=         raw + corrected time series
    POST /sequences/{id}/segment                 box-prompt segmentation
    POST /annotations                            store an accepted mask
    POST /eval                                   score sequences vs ground truth
    POST /simulate                               async scene simulation job
    GET  /jobs/{id}                              job status

Responses are pure functions of store state and request; segmentation
results persist under results/<result_id> keyed by a content hash, so
identical requests are idempotent.  Annotation writes serialize through
a per-sequence lock.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import threading
from collections import defaultdict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel, Field

from . import __version__
from .dataset import SequenceStore, ThermalSequence, subtract_tail_mean
from .dataset.store import read_pgm, write_pgm
from .enhance import contrast_map
from .errors import ThermosegError
from .metrics import DEFAULT_GAMMA, DEFAULT_MATCH_IOU
from .physics import parse_scene_config, simulate_sequence
from .pipeline import (PipelineParams, evaluate_store, prepared_frames,
                       segment_prompts_on_sequence)
from .promptseg import BoxPrompt, SegParams, segment_with_prompts
from .render import colormap_names, render_png


class PromptIn(BaseModel):
    id: str = Field(min_length=1, pattern=r"^\S+$")
    row0: int
    col0: int
    row1: int
    col1: int


class SegmentRequest(BaseModel):
    prompts: list[PromptIn] = Field(min_length=1)
    frame: int | None = None          # None: per-prompt strongest frame
    corrected: bool = True
    normalize_gain: bool = True
    expand_margin: float = 0.1
    threshold_override: float | None = None


class AnnotationIn(BaseModel):
    sequence_id: str
    annotator: str = Field(min_length=1, pattern=r"^[A-Za-z0-9_.-]+$")
    prompts: list[PromptIn] = []
    mask_pgm_base64: str
    timestamp: str


class EvalRequest(BaseModel):
    ids: list[str] | None = None      # None: every sequence with ground truth
    dilation: float = 0.1
    expand_margin: float = 0.1
    match_iou: float = DEFAULT_MATCH_IOU
    gamma: float = DEFAULT_GAMMA
    corrected: bool = True
    normalize_gain: bool = True


class SimulateRequest(BaseModel):
    config: str
    overwrite: bool = False


def _b64_pgm(mask: np.ndarray) -> str:
    buf = io.BytesIO()
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    buf.write(b"P5\n%d %d\n255\n" % (mask.shape[1], mask.shape[0]))
    buf.write(data.tobytes())
    return base64.b64encode(buf.getvalue()).decode("ascii")


def create_app(store_root: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    store = SequenceStore(store_root, create=True)
    app = FastAPI(title="thermoseg service", version=__version__)
    seq_cache: dict[str, ThermalSequence] = {}
    cache_lock = threading.Lock()
    write_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
    jobs: dict[str, dict] = {}
    jobs_lock = threading.Lock()

    def get_sequence(seq_id: str) -> ThermalSequence:
        with cache_lock:
            cached = seq_cache.get(seq_id)
        if cached is not None:
            return cached
        if seq_id not in store:
            raise HTTPException(404, f"sequence {seq_id!r} not found")
        seq = store.read(seq_id)
        with cache_lock:
            seq_cache[seq_id] = seq
        return seq

    def adaptive_tail(n_frames: int) -> int:
        return min(15, max(1, n_frames // 4))

    @app.get("/")
    def root() -> dict:
        return {"service": "thermoseg", "version": __version__,
                "endpoints": ["/sequences", "/sequences/{id}/frames/{k}",
                              "/sequences/{id}/curve", "/sequences/{id}/segment",
                              "/annotations", "/eval", "/simulate", "/jobs/{id}"]}

    @app.get("/sequences")
    def list_sequences() -> list[dict]:
        out = []
        for sid in store.ids():
            meta = store.read_meta(sid)
            if meta.get("source") == "derived":
                continue
            out.append({
                "id": sid,
                "rows": int(meta["m"]), "cols": int(meta["n"]),
                "frames": int(meta["f"]),
                "frame_rate": float(meta["frame_rate"]),
                "source": meta.get("source", "imported"),
                "system_tag": meta.get("system_tag", "other"),
                "sample_tag": meta.get("sample_tag", "flat"),
                "ambient": float(meta.get("ambient", "293.15")),
                "has_ground_truth": (store.path(sid) / "gt.pgm").is_file(),
            })
        return out

    @app.get("/sequences/{seq_id}/frames/{index}")
    def get_frame(seq_id: str, index: int,
                  colormap: str = Query("gray"),
                  corrected: bool = Query(False),
                  vmin: float | None = Query(None),
                  vmax: float | None = Query(None)) -> Response:
        if colormap not in colormap_names():
            raise HTTPException(
                422, f"colormap must be one of {colormap_names()}")
        seq = get_sequence(seq_id)
        n = seq.frames.shape[2]
        if not 0 <= index < n:
            raise HTTPException(404, f"frame {index} outside 0..{n - 1}")
        frames = seq.frames.astype(np.float64)
        if corrected:
            frames = subtract_tail_mean(frames, adaptive_tail(n))
        png = render_png(frames[:, :, index], colormap, vmin, vmax)
        return Response(content=png, media_type="image/png")

    @app.get("/sequences/{seq_id}/curve")
    def get_curve(seq_id: str, row: int = Query(...), col: int = Query(...)) -> dict:
        seq = get_sequence(seq_id)
        rows, cols, n = seq.frames.shape
        if not (0 <= row < rows and 0 <= col < cols):
            raise HTTPException(
                422, f"pixel ({row},{col}) outside {rows}x{cols}")
        raw = seq.frames[row, col, :].astype(np.float64)
        tail = adaptive_tail(n)
        corrected = raw - raw[n - tail:].mean()
        times = (np.arange(n) + 1.0) / seq.frame_rate
        return {"sequence_id": seq_id, "row": row, "col": col,
                "frame_rate": seq.frame_rate,
                "times": times.tolist(),
                "raw": raw.tolist(),
                "corrected": corrected.tolist()}

    @app.post("/sequences/{seq_id}/segment")
    def post_segment(seq_id: str, req: SegmentRequest) -> dict:
        seq = get_sequence(seq_id)
        shape = seq.frames.shape[:2]
        try:
            prompts = [BoxPrompt(p.id, p.row0, p.col0, p.row1, p.col1)
                       for p in req.prompts]
            for p in prompts:
                p.validate_in(shape)
        except ThermosegError as exc:
            raise HTTPException(422, str(exc)) from exc
        if len({p.id for p in prompts}) != len(prompts):
            raise HTTPException(422, "prompt ids must be unique")
        n = seq.frames.shape[2]
        if req.frame is not None and not 0 <= req.frame < n:
            raise HTTPException(422, f"frame {req.frame} outside 0..{n - 1}")

        params = PipelineParams(expand_margin=req.expand_margin,
                                normalize_gain=req.normalize_gain,
                                corrected=req.corrected)
        frames = prepared_frames(seq, params)
        try:
            if req.frame is None:
                result, frames_used = segment_prompts_on_sequence(
                    frames, prompts, params)
            else:
                surface = contrast_map(frames, req.frame)
                result = segment_with_prompts(
                    surface, prompts,
                    SegParams(expand_margin=req.expand_margin,
                              threshold_override=req.threshold_override))
                frames_used = [req.frame] * len(prompts)
        except ThermosegError as exc:
            raise HTTPException(422, str(exc)) from exc

        payload = json.dumps({"sequence": seq_id,
                              "request": req.model_dump(mode="json")},
                             sort_keys=True, separators=(",", ":"))
        result_id = hashlib.sha256(payload.encode()).hexdigest()[:16]

        with write_locks[seq_id]:
            out_dir = store.path(seq_id) / "results" / result_id
            if not out_dir.is_dir():
                out_dir.mkdir(parents=True)
                (out_dir / "request.json").write_text(payload + "\n",
                                                      encoding="utf-8")
                (out_dir / "summary.txt").write_text(result.summary_text(),
                                                     encoding="utf-8")
                write_pgm(out_dir / "semantic.pgm", result.semantic_mask)
                for pid, mask in zip(result.prompt_ids, result.instance_masks):
                    write_pgm(out_dir / f"mask-{pid}.pgm", mask)

        return {
            "result_id": result_id,
            "sequence_id": seq_id,
            "frames_used": dict(zip(result.prompt_ids, frames_used)),
            "prompts": [
                {"id": pid, "status": status, "confidence": conf,
                 "threshold": thr}
                for pid, status, conf, thr in zip(
                    result.prompt_ids, result.statuses, result.confidences,
                    result.thresholds)],
            "masks": {pid: _b64_pgm(mask) for pid, mask in
                      zip(result.prompt_ids, result.instance_masks)},
            "semantic_mask": _b64_pgm(result.semantic_mask),
        }

    @app.post("/annotations")
    def post_annotation(req: AnnotationIn) -> dict:
        seq = get_sequence(req.sequence_id)
        try:
            raw = base64.b64decode(req.mask_pgm_base64, validate=True)
        except Exception as exc:
            raise HTTPException(422, "mask_pgm_base64 is not valid base64") from exc
        tmp = store.path(req.sequence_id) / f".incoming-{req.annotator}.pgm"
        with write_locks[req.sequence_id]:
            tmp.write_bytes(raw)
            try:
                mask = read_pgm(tmp)
            except ThermosegError as exc:
                tmp.unlink()
                raise HTTPException(422, f"mask is not a valid PGM: {exc}") from exc
            if mask.shape != seq.frames.shape[:2]:
                tmp.unlink()
                raise HTTPException(
                    422, f"mask shape {mask.shape} differs from sequence "
                         f"{seq.frames.shape[:2]}")
            mask_file = f"annotator-{req.annotator}.pgm"
            tmp.replace(store.path(req.sequence_id) / mask_file)
            record = {
                "sequence_id": req.sequence_id,
                "annotator": req.annotator,
                "prompts": [p.model_dump() for p in req.prompts],
                "mask_file": mask_file,
                "timestamp": req.timestamp,
            }
            (store.path(req.sequence_id) / f"annotator-{req.annotator}.json"
             ).write_text(json.dumps(record, sort_keys=True, indent=1) + "\n",
                          encoding="utf-8")
        return {"stored": True, "sequence_id": req.sequence_id,
                "annotator": req.annotator, "mask_file": mask_file}

    @app.post("/eval")
    def post_eval(req: EvalRequest) -> dict:
        ids = req.ids
        if ids is None:
            ids = [sid for sid in store.ids()
                   if (store.path(sid) / "gt.pgm").is_file()]
        params = PipelineParams(
            dilation=req.dilation, expand_margin=req.expand_margin,
            match_iou=req.match_iou, gamma=req.gamma,
            corrected=req.corrected, normalize_gain=req.normalize_gain)
        try:
            report = evaluate_store(store, ids, params)
        except ThermosegError as exc:
            raise HTTPException(422, str(exc)) from exc
        return {
            "gamma": report.gamma,
            "scores": [
                {"id": s.image_id, "iou": s.iou, "precision": s.precision,
                 "recall": s.recall, "f2": s.f_gamma,
                 "matched": len(s.detection.matches) if s.detection else None,
                 "missed": len(s.detection.missed) if s.detection else None}
                for s in report.scores],
            "aggregates": {k: {"mean": m, "std": d}
                           for k, (m, d) in report.aggregates().items()},
            "detection": report.detection_totals(),
            "csv": report.to_csv(),
        }

    def _run_simulation(job_id: str, config: str, overwrite: bool) -> None:
        try:
            scene = parse_scene_config(config)
            seq, gt = simulate_sequence(scene)
            with write_locks[seq.id]:
                store.write(seq, gt, overwrite=overwrite)
                (store.path(seq.id) / "scene.cfg").write_text(
                    config, encoding="utf-8")
            with jobs_lock:
                jobs[job_id].update(status="done", sequence_id=seq.id)
            with cache_lock:
                seq_cache.pop(seq.id, None)
        except Exception as exc:  # job errors surface via status, not a crash
            with jobs_lock:
                jobs[job_id].update(status="error", error=str(exc))

    @app.post("/simulate")
    def post_simulate(req: SimulateRequest) -> dict:
        try:
            parse_scene_config(req.config)  # fail fast on malformed configs
        except ThermosegError as exc:
            raise HTTPException(422, str(exc)) from exc
        with jobs_lock:
            job_id = f"job-{len(jobs):05d}"
            jobs[job_id] = {"id": job_id, "kind": "simulate",
                            "status": "running", "sequence_id": None,
                            "error": None}
        thread = threading.Thread(
            target=_run_simulation, args=(job_id, req.config, req.overwrite),
            daemon=True)
        thread.start()
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str) -> dict:
        with jobs_lock:
            job = jobs.get(job_id)
            if job is None:
                raise HTTPException(404, f"job {job_id!r} not found")
            return dict(job)

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")

    return app
