"""FastAPI application: POST /topk and GET /health."""

from __future__ import annotations

from typing import List, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backends import Backend, SyntheticBackend


class TopKRequest(BaseModel):
    tokens: List[int]
    positions: List[int]
    k: int
    exclude_original: bool = True


class Candidate(BaseModel):
    token_text: str
    token_id: int
    logprob: float


class TopKResponse(BaseModel):
    candidates: List[List[Candidate]]


def topk_for_position(backend: Backend, tokens, position: int, k: int,
                      exclude_original: bool) -> list:
    lp = backend.logprobs(tokens, position)
    order = np.argsort(-lp, kind="stable")
    original = int(tokens[position])
    out = []
    for tid in order:
        tid = int(tid)
        if exclude_original and tid == original:
            continue
        out.append(Candidate(token_text=backend.token_text(tid), token_id=tid,
                             logprob=float(lp[tid])))
        if len(out) == k:
            break
    return out


def create_app(backend: Optional[Backend] = None) -> FastAPI:
    backend = backend if backend is not None else SyntheticBackend()
    app = FastAPI(title="mlm-provider")
    app.state.backend = backend

    @app.get("/health")
    def health():
        if not backend.ready:
            return JSONResponse({"status": "loading"}, status_code=503)
        return {"status": "ready"}

    @app.post("/topk", response_model=TopKResponse)
    def topk(req: TopKRequest):
        if not backend.ready:
            raise HTTPException(status_code=503, detail="model loading")
        if req.k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        if not req.tokens:
            raise HTTPException(status_code=400, detail="tokens must be non-empty")
        n = len(req.tokens)
        for p in req.positions:
            if not 0 <= p < n:
                raise HTTPException(status_code=400,
                                    detail=f"position {p} out of range [0, {n})")
        return TopKResponse(candidates=[
            topk_for_position(backend, req.tokens, p, req.k, req.exclude_original)
            for p in req.positions
        ])

    return app
