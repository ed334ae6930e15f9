"""HTTP+JSON service over a workspace.

All error responses share one shape:

    {"status": <http status>, "code": <stable string>, "message": <text>,
     "detail": <optional structured payload>}

Optimistic concurrency: GET responses carry an ETag (sha256 of the stored
bytes); a PUT or DELETE sending If-Match fails with 409 when the stored
document has changed. Stored ADTree and pipeline documents are canonical
JSON, so a save/load cycle is byte-stable; datasets and policies are stored
exactly as uploaded.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .adtree import attack_success, mitigation_status, synthesize_policy, tree_from_json, tree_to_json, validate_tree
from .dsl import compile_policy, parse, render_policy_source
from .errors import WorkbenchError
from .guessing import (
    empirical_model,
    fit_cdf_zipf,
    fit_pdf_zipf,
    max_attempts,
    success_probability,
)
from .ingest import DumpFormat, parse_dump, to_distribution
from .pipeline import execute, load_pipeline, pipeline_to_json
from .policy import check, verdict_to_json
from .workspace import BadName, NotFound, Workspace


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail

    def body(self) -> dict:
        doc = {"status": self.status, "code": self.code, "message": self.message}
        if self.detail is not None:
            doc["detail"] = self.detail
        return doc


class TextBody(BaseModel):
    content: str


class CheckBody(BaseModel):
    password: str


class LockoutBody(BaseModel):
    dataset: str
    epsilon: float
    basis: str = "empirical"


class EvaluateBody(BaseModel):
    # tree lets the editor evaluate unsaved drafts; dataset is optional so
    # mitigation badges work in an empty workspace.
    dataset: str | None = None
    budget: int = 0
    tree: dict | None = None


class SynthesizeBody(BaseModel):
    tree: dict | None = None


def _json_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _sampled_curve(model, limit: int = 256) -> list[list[float]]:
    """Cumulative success per budget, downsampled for plotting."""
    n = model.n_ranks
    if n <= limit:
        budgets = np.arange(1, n + 1)
    else:
        budgets = np.unique(np.linspace(1, n, limit).round().astype(int))
    return [[int(b), float(success_probability(model, int(b)))] for b in budgets]


def create_app(workspace: Workspace | str | Path, frontend_dir: str | Path | None = None) -> FastAPI:
    ws = workspace if isinstance(workspace, Workspace) else Workspace(workspace)
    app = FastAPI(title="pwbench", version=__version__, docs_url=None, redoc_url=None)

    @app.exception_handler(ApiException)
    async def api_exception_handler(request: Request, exc: ApiException):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(piece) for piece in err.get("loc", [])], "message": str(err.get("msg", ""))}
            for err in exc.errors()
        ]
        body = ApiException(422, "validation", "request body failed validation", detail).body()
        return JSONResponse(status_code=422, content=body)

    @app.exception_handler(WorkbenchError)
    async def workbench_error_handler(request: Request, exc: WorkbenchError):
        return JSONResponse(status_code=422, content=_to_api(exc).body())

    def _to_api(exc: WorkbenchError) -> ApiException:
        if isinstance(exc, NotFound):
            return ApiException(404, "not_found", str(exc))
        if isinstance(exc, BadName):
            return ApiException(422, "bad_name", str(exc))
        return ApiException(422, "validation", str(exc))

    def _read(section: str, name: str) -> bytes:
        try:
            return ws.read(section, name)
        except WorkbenchError as exc:
            raise _to_api(exc) from None

    def _precondition(request: Request, section: str, name: str) -> None:
        expected = request.headers.get("if-match")
        if expected is None:
            return
        current = ws.etag(section, name) if ws.exists(section, name) else None
        if expected.strip('"') != current:
            raise ApiException(
                409,
                "conflict",
                f"{section}/{name} changed since it was read",
                {"expected": expected, "current": current},
            )

    def _store(request: Request, section: str, name: str, data: bytes) -> JSONResponse:
        try:
            with ws.entry_lock(section, name):
                _precondition(request, section, name)
                created = not ws.exists(section, name)
                etag = ws.write(section, name, data)
        except WorkbenchError as exc:
            raise _to_api(exc) from None
        return JSONResponse({"name": name, "etag": etag, "created": created}, headers={"ETag": etag})

    def _document_response(doc, etag: str) -> JSONResponse:
        return JSONResponse(doc, headers={"ETag": etag})

    def _dataset_distribution(name: str):
        table = parse_dump(_read("datasets", name), DumpFormat.CSV_PASSWORD_COUNT)
        return to_distribution(table)

    def _load_stored_tree(name: str):
        return tree_from_json(json.loads(_read("adtrees", name)))

    # Health and collections -------------------------------------------------

    @app.get("/api/health")
    async def health():
        return {"status": "ok", "version": __version__}

    @app.get("/api/datasets")
    async def list_datasets():
        return {"names": ws.list_names("datasets")}

    @app.get("/api/policies")
    async def list_policies():
        return {"names": ws.list_names("policies")}

    @app.get("/api/adtrees")
    async def list_adtrees():
        return {"names": ws.list_names("adtrees")}

    @app.get("/api/pipelines")
    async def list_pipelines():
        return {"names": ws.list_names("pipelines")}

    # Datasets ---------------------------------------------------------------

    @app.get("/api/datasets/{name}")
    async def get_dataset(name: str):
        data = _read("datasets", name)
        return _document_response(
            {"name": name, "content": data.decode("utf-8")}, ws.etag("datasets", name)
        )

    @app.put("/api/datasets/{name}")
    async def put_dataset(name: str, body: TextBody, request: Request):
        data = body.content.encode("utf-8")
        try:
            parse_dump(data, DumpFormat.CSV_PASSWORD_COUNT)
        except WorkbenchError as exc:
            raise ApiException(422, "validation", f"not a frequency CSV: {exc}") from None
        return _store(request, "datasets", name, data)

    # Policies ---------------------------------------------------------------

    @app.get("/api/policies/{name}")
    async def get_policy(name: str):
        data = _read("policies", name)
        return _document_response(
            {"name": name, "content": data.decode("utf-8")}, ws.etag("policies", name)
        )

    @app.put("/api/policies/{name}")
    async def put_policy(name: str, body: TextBody, request: Request):
        ast, errors = parse(body.content)
        if errors:
            raise ApiException(
                422,
                "parse_error",
                f"policy source has {len(errors)} parse error(s)",
                [e.to_json() for e in errors],
            )
        compile_policy(ast)
        return _store(request, "policies", name, body.content.encode("utf-8"))

    @app.post("/api/policies/{name}/check")
    async def check_policy(name: str, body: CheckBody):
        ast, errors = parse(_read("policies", name).decode("utf-8"))
        if errors:
            raise ApiException(422, "parse_error", "stored policy does not parse", [e.to_json() for e in errors])
        policy, _ = compile_policy(ast)
        verdict = check(policy, body.password, ws.load_dictionaries())
        return verdict_to_json(verdict)

    # ADTrees ----------------------------------------------------------------

    @app.get("/api/adtrees/{name}")
    async def get_adtree(name: str):
        return _document_response(json.loads(_read("adtrees", name)), ws.etag("adtrees", name))

    @app.put("/api/adtrees/{name}")
    async def put_adtree(name: str, request: Request):
        try:
            doc = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise ApiException(422, "validation", f"not valid JSON: {exc}") from None
        tree = tree_from_json(doc)
        issues = validate_tree(tree)
        if issues:
            raise ApiException(
                422,
                "invalid_tree",
                f"tree has {len(issues)} structural error(s)",
                [issue.to_json() for issue in issues],
            )
        return _store(request, "adtrees", name, _json_bytes(tree_to_json(tree)))

    @app.delete("/api/adtrees/{name}")
    async def delete_adtree(name: str, request: Request):
        try:
            with ws.entry_lock("adtrees", name):
                _precondition(request, "adtrees", name)
                ws.delete("adtrees", name)
        except WorkbenchError as exc:
            raise _to_api(exc) from None
        return {"deleted": name}

    def _tree_from_body(name: str, doc: dict | None):
        if doc is None:
            return _load_stored_tree(name)
        tree = tree_from_json(doc)
        issues = validate_tree(tree)
        if issues:
            raise ApiException(
                422,
                "invalid_tree",
                f"tree has {len(issues)} structural error(s)",
                [issue.to_json() for issue in issues],
            )
        return tree

    @app.post("/api/adtrees/{name}/synthesize")
    async def synthesize_adtree(name: str, body: SynthesizeBody | None = None):
        tree = _tree_from_body(name, body.tree if body else None)
        policy = synthesize_policy(tree)
        return {"name": name, "policy_name": policy.name, "source": render_policy_source(policy)}

    @app.post("/api/adtrees/{name}/evaluate")
    async def evaluate_adtree(name: str, body: EvaluateBody):
        if body.budget < 0:
            raise ApiException(422, "validation", "budget must be >= 0")
        tree = _tree_from_body(name, body.tree)
        dictionaries = ws.load_dictionaries()
        report = mitigation_status(tree, dictionaries)
        result: dict = {"mitigation": report.to_json(), "success_probability": None}
        if body.dataset is not None:
            dist = _dataset_distribution(body.dataset)
            result["success_probability"] = float(
                attack_success(tree, dist, body.budget, dictionaries)
            )
        return result

    # Lockout ----------------------------------------------------------------

    @app.post("/api/lockout")
    async def lockout(body: LockoutBody):
        if not 0 < body.epsilon < 1:
            raise ApiException(422, "validation", "epsilon must be strictly between 0 and 1")
        if body.basis not in ("empirical", "pdf", "cdf"):
            raise ApiException(422, "validation", f"unknown basis {body.basis!r}")
        dist = _dataset_distribution(body.dataset)
        if body.basis == "empirical":
            model = empirical_model(dist)
        elif body.basis == "pdf":
            model = fit_pdf_zipf(dist)
        else:
            model = fit_cdf_zipf(dist)
        recommendation = max_attempts(model, body.epsilon)
        return {**recommendation.to_json(), "curve": _sampled_curve(model)}

    # Pipelines --------------------------------------------------------------

    @app.get("/api/pipelines/{name}")
    async def get_pipeline(name: str):
        return _document_response(json.loads(_read("pipelines", name)), ws.etag("pipelines", name))

    @app.put("/api/pipelines/{name}")
    async def put_pipeline(name: str, request: Request):
        raw = await request.body()
        pipeline = load_pipeline(raw)  # PipelineError -> 422 via handler
        from .pipeline import type_check

        stored = _store(request, "pipelines", name, _json_bytes(pipeline_to_json(pipeline)))
        doc = json.loads(stored.body)
        doc["type_issues"] = [issue.to_json() for issue in type_check(pipeline)]
        return JSONResponse(doc, headers={"ETag": doc["etag"]})

    @app.post("/api/pipelines/{name}/run")
    async def run_pipeline(name: str):
        pipeline = load_pipeline(_read("pipelines", name))
        with ws.exec_lock:
            results = execute(pipeline, ws.root)
        return {"results": {node_id: result.to_json() for node_id, result in results.items()}}

    # Artifacts --------------------------------------------------------------

    @app.get("/api/artifacts/{artifact_id:path}")
    async def get_artifact(artifact_id: str):
        try:
            # NodeResult.artifact values are workspace-relative ("out/x.json");
            # accept those verbatim as well as the bare file name.
            path = ws.artifact_path(artifact_id.removeprefix("out/"))
        except WorkbenchError as exc:
            raise _to_api(exc) from None
        media = {
            ".json": "application/json",
            ".csv": "text/csv; charset=utf-8",
        }.get(path.suffix, "application/octet-stream")
        return Response(content=path.read_bytes(), media_type=media)

    # Static UI --------------------------------------------------------------

    dist_dir = Path(frontend_dir) if frontend_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if dist_dir.is_dir():
        app.mount("/", StaticFiles(directory=dist_dir, html=True), name="ui")

    return app
