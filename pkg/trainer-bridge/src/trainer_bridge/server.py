"""HTTP server exposing the trained model behind the MT/scorer wire protocol.

POST /translate
    {"source_lang": ..., "target_lang": ..., "texts": [...], "beam_size": N}
    -> {"translations": [...]}
POST /score
    {"source_lang": ..., "target_lang": ...,
     "pairs": [{"source": ..., "target": ...}, ...], "max_batch_tokens": N}
    -> {"scores": [...]}  (average log-probability per target token)

Malformed requests get HTTP 400 with a JSON error body.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .model import load_model, score_pairs, translate


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": message})


def validate_translate(body) -> str | None:
    if not isinstance(body, dict):
        return "body must be a JSON object"
    texts = body.get("texts")
    if not isinstance(texts, list) or not texts or \
            not all(isinstance(t, str) for t in texts):
        return "texts must be a non-empty list of strings"
    beam = body.get("beam_size", 4)
    if not isinstance(beam, int) or beam < 1:
        return "beam_size must be a positive integer"
    return None


def validate_score(body) -> str | None:
    if not isinstance(body, dict):
        return "body must be a JSON object"
    pairs = body.get("pairs")
    if not isinstance(pairs, list) or not pairs:
        return "pairs must be a non-empty list"
    for p in pairs:
        if (not isinstance(p, dict) or not isinstance(p.get("source"), str)
                or not isinstance(p.get("target"), str) or not p["target"]):
            return "each pair needs string source and non-empty string target"
    return None


def create_app(model_dir) -> FastAPI:
    model, vocab = load_model(model_dir)
    app = FastAPI(title="trainer-bridge")

    @app.post("/translate")
    async def translate_endpoint(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _bad_request("invalid JSON body")
        problem = validate_translate(body)
        if problem:
            return _bad_request(problem)
        translations = translate(model, vocab, body["texts"],
                                 beam_size=body.get("beam_size", 4))
        return {"translations": translations}

    @app.post("/score")
    async def score_endpoint(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _bad_request("invalid JSON body")
        problem = validate_score(body)
        if problem:
            return _bad_request(problem)
        pairs = [(p["source"], p["target"]) for p in body["pairs"]]
        return {"scores": score_pairs(model, vocab, pairs)}

    return app


def serve(model_dir, port: int = 8000, host: str = "127.0.0.1"):
    import uvicorn

    uvicorn.run(create_app(model_dir), host=host, port=port)
