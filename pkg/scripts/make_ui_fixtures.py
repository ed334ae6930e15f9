"""Capture API responses the frontend tests replay.

The values land in frontend/tests/fixtures/api.json. A Python-side test
(tests/test_ui_fixtures.py) recomputes everything here and fails when the
committed fixture drifts from the live backend, so the vitest suite can
trust the file without talking to a server.
"""

from __future__ import annotations

import json
import shutil
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from pwbench.service import create_app
from pwbench.workspace import Workspace

ROOT = Path(__file__).resolve().parent.parent
ASSETS = ROOT / "assets" / "workspace"
FIXTURE_PATH = ROOT / "frontend" / "tests" / "fixtures" / "api.json"

LOCKOUT_EPSILONS = (0.02, 0.05, 0.2)

BROKEN_PIPELINE = {
    "nodes": [
        {"id": "src", "kind": "source", "params": {"path": "raw/sample-dump.txt", "format": "raw"}},
        {"id": "fit", "kind": "zipf_fit", "params": {"model": "pdf"}},
    ],
    "edges": [["src", "fit"]],
}


def build_fixture() -> dict:
    workdir = Path(tempfile.mkdtemp(prefix="pwbench-fixture-"))
    try:
        workspace = workdir / "ws"
        shutil.copytree(ASSETS, workspace)
        client = TestClient(create_app(Workspace(workspace)))

        tree_doc = json.loads((ASSETS / "adtrees" / "bimodal-guess.json").read_text())
        pipeline_doc = json.loads((ASSETS / "pipelines" / "dump-to-model.json").read_text())

        synth = client.post("/api/adtrees/bimodal-guess/synthesize")
        synth.raise_for_status()
        evaluated = client.post(
            "/api/adtrees/bimodal-guess/evaluate", json={"dataset": "demo", "budget": 10}
        )
        evaluated.raise_for_status()
        mitigation_only = client.post("/api/adtrees/bimodal-guess/evaluate", json={})
        mitigation_only.raise_for_status()

        lockout = {}
        for epsilon in LOCKOUT_EPSILONS:
            response = client.post(
                "/api/lockout",
                json={"dataset": "sample", "epsilon": epsilon, "basis": "empirical"},
            )
            response.raise_for_status()
            lockout[str(epsilon)] = response.json()

        put_broken = client.put("/api/pipelines/scratch", json=BROKEN_PIPELINE)
        put_broken.raise_for_status()

        run = client.post("/api/pipelines/dump-to-model/run")
        run.raise_for_status()
        fit_artifact = client.get("/api/artifacts/fit_cdf.json")
        fit_artifact.raise_for_status()

        return {
            "tree": tree_doc,
            "synthesize": synth.json(),
            "evaluate": evaluated.json(),
            "mitigation_only": mitigation_only.json(),
            "lockout": lockout,
            "pipeline": pipeline_doc,
            "pipeline_type_issues": put_broken.json()["type_issues"],
            "run_results": run.json()["results"],
            "fit_model": fit_artifact.json(),
            "datasets": client.get("/api/datasets").json()["names"],
        }
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


def main() -> None:
    doc = build_fixture()
    FIXTURE_PATH.parent.mkdir(parents=True, exist_ok=True)
    FIXTURE_PATH.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {FIXTURE_PATH.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
