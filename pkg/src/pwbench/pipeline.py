"""Typed dataflow pipelines: source -> formatter -> fit -> export.

A pipeline is a small acyclic graph of named nodes. Every node consumes at
most one input (sources consume none) and produces exactly one value, typed
by a port type. Loading validates structure, type_check validates the
wiring against the port-type table, and execute runs the nodes in a
topological order, persisting every node's output under ``out/`` in the
workspace so intermediate results stay inspectable.

Nodes are pure given the workspace contents, so any valid topological
order produces byte-identical artifacts.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

from .dsl import compile_policy, parse
from .errors import WorkbenchError
from .guessing import FitOptions, fit_cdf_zipf, fit_pdf_zipf, max_attempts, model_to_json
from .ingest import (
    DumpFormat,
    FrequencyTable,
    export_csv,
    parse_dump,
    to_distribution,
)
from .policy import Dictionary, check, load_dictionary

PORT_RAW_BYTES = "raw_bytes"
PORT_FREQUENCY_TABLE = "frequency_table"
PORT_DISTRIBUTION = "distribution"
PORT_MODEL = "model"
PORT_RECOMMENDATION = "recommendation"

PORT_TYPES = (
    PORT_RAW_BYTES,
    PORT_FREQUENCY_TABLE,
    PORT_DISTRIBUTION,
    PORT_MODEL,
    PORT_RECOMMENDATION,
)

# kind -> (input port or None for sources, output port or None for passthrough)
_NODE_SIGNATURES: dict[str, tuple[str | None, str | None]] = {
    "source": (None, PORT_RAW_BYTES),
    "formatter": (PORT_RAW_BYTES, PORT_FREQUENCY_TABLE),
    "zipf_fit": (PORT_FREQUENCY_TABLE, PORT_MODEL),
    "lockout": (PORT_MODEL, PORT_RECOMMENDATION),
    "policy_filter": (PORT_FREQUENCY_TABLE, PORT_FREQUENCY_TABLE),
    "export": ("any", None),
}

_ARTIFACT_EXT = {
    PORT_RAW_BYTES: "bin",
    PORT_FREQUENCY_TABLE: "csv",
    PORT_DISTRIBUTION: "json",
    PORT_MODEL: "json",
    PORT_RECOMMENDATION: "json",
}

_FORMATS = {f.value: f for f in DumpFormat}


class PipelineError(WorkbenchError):
    """Base class for pipeline document and wiring failures."""


class SchemaError(PipelineError):
    """Document violates the pipeline schema at `path` (a JSON-ish locator
    such as "nodes[2].params.epsilon")."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class DuplicateId(PipelineError):
    def __init__(self, node_id: str):
        super().__init__(f"duplicate node id {node_id!r}")
        self.node_id = node_id


class DanglingEdge(PipelineError):
    def __init__(self, from_id: str, to_id: str):
        super().__init__(f"edge {from_id!r} -> {to_id!r} references an unknown node")
        self.from_id = from_id
        self.to_id = to_id


class CycleDetected(PipelineError):
    def __init__(self, node_ids: list[str]):
        super().__init__(f"pipeline graph has a cycle involving {', '.join(sorted(node_ids))}")
        self.node_ids = tuple(sorted(node_ids))


@dataclass(frozen=True)
class PipelineNode:
    id: str
    kind: str
    params: tuple[tuple[str, object], ...] = ()

    def param(self, key: str, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


@dataclass(frozen=True)
class Pipeline:
    nodes: tuple[PipelineNode, ...]
    edges: tuple[tuple[str, str], ...]

    def node(self, node_id: str) -> PipelineNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def upstream_of(self, node_id: str) -> str | None:
        for from_id, to_id in self.edges:
            if to_id == node_id:
                return from_id
        return None


@dataclass(frozen=True)
class TypeIssue:
    from_id: str
    to_id: str
    expected: str
    actual: str

    def __str__(self) -> str:
        return (
            f"edge {self.from_id!r} -> {self.to_id!r}: "
            f"downstream expects {self.expected}, upstream produces {self.actual}"
        )

    def to_json(self) -> dict:
        return {
            "from": self.from_id,
            "to": self.to_id,
            "expected": self.expected,
            "actual": self.actual,
        }


@dataclass(frozen=True)
class NodeResult:
    node_id: str
    status: str  # ok | failed | skipped
    artifact: str | None = None  # workspace-relative path, ok nodes only
    error: str | None = None

    def to_json(self) -> dict:
        doc: dict = {"node_id": self.node_id, "status": self.status}
        if self.artifact is not None:
            doc["artifact"] = self.artifact
        if self.error is not None:
            doc["error"] = self.error
        return doc


# Loading --------------------------------------------------------------------


_REQUIRED_PARAMS = {
    "source": ("path", "format"),
    "formatter": (),
    "zipf_fit": ("model",),
    "lockout": ("epsilon",),
    "policy_filter": ("policy",),
    "export": ("path",),
}

_OPTIONAL_PARAMS = {
    "zipf_fit": ("min_count", "rank_limit"),
}


def _check_params(node_path: str, kind: str, params: Mapping) -> None:
    required = _REQUIRED_PARAMS[kind]
    allowed = set(required) | set(_OPTIONAL_PARAMS.get(kind, ()))
    for key in required:
        if key not in params:
            raise SchemaError(f"{node_path}.params", f"{kind} node requires {key!r}")
    for key in params:
        if key not in allowed:
            raise SchemaError(f"{node_path}.params.{key}", f"unknown parameter for {kind}")
    if kind == "source" and (
        not isinstance(params["format"], str) or params["format"] not in _FORMATS
    ):
        raise SchemaError(
            f"{node_path}.params.format",
            f"format must be one of {sorted(_FORMATS)}, not {params['format']!r}",
        )
    if kind == "zipf_fit":
        if params["model"] not in ("pdf", "cdf"):
            raise SchemaError(f"{node_path}.params.model", "model must be 'pdf' or 'cdf'")
        for key in ("min_count", "rank_limit"):
            if key in params and (not isinstance(params[key], int) or params[key] < 1):
                raise SchemaError(f"{node_path}.params.{key}", "must be an integer >= 1")
    if kind == "lockout":
        epsilon = params["epsilon"]
        if not isinstance(epsilon, (int, float)) or not 0 < float(epsilon) < 1:
            raise SchemaError(f"{node_path}.params.epsilon", "epsilon must be in (0, 1)")
    for key in ("path", "policy"):
        if key in params and (not isinstance(params[key], str) or not params[key]):
            raise SchemaError(f"{node_path}.params.{key}", "must be a non-empty string")


def load_pipeline(data: bytes | str) -> Pipeline:
    """Parse and structurally validate a pipeline document.

    The document is JSON: {"nodes": [{"id", "kind", "params"}], "edges":
    [["from", "to"], ...]}; a top-level or per-node "description" string is
    allowed and ignored. Raises SchemaError, DuplicateId, DanglingEdge or
    CycleDetected; a returned Pipeline satisfies all structural invariants
    (unique ids, resolvable acyclic edges, arity matching each kind).
    """
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("$", "document must be a JSON object")
    for key in doc:
        if key not in ("nodes", "edges", "description"):
            raise SchemaError(f"$.{key}", "unknown top-level key")
    nodes_doc = doc.get("nodes")
    edges_doc = doc.get("edges", [])
    if not isinstance(nodes_doc, list) or not nodes_doc:
        raise SchemaError("$.nodes", "must be a non-empty list")
    if not isinstance(edges_doc, list):
        raise SchemaError("$.edges", "must be a list")

    nodes: list[PipelineNode] = []
    ids: set[str] = set()
    for i, node_doc in enumerate(nodes_doc):
        path = f"nodes[{i}]"
        if not isinstance(node_doc, dict):
            raise SchemaError(path, "node must be an object")
        for key in node_doc:
            if key not in ("id", "kind", "params", "description"):
                raise SchemaError(f"{path}.{key}", "unknown node key")
        node_id = node_doc.get("id")
        kind = node_doc.get("kind")
        if not isinstance(node_id, str) or not node_id:
            raise SchemaError(f"{path}.id", "node id must be a non-empty string")
        if kind not in _NODE_SIGNATURES:
            raise SchemaError(f"{path}.kind", f"unknown node kind {kind!r}")
        params = node_doc.get("params", {})
        if not isinstance(params, dict):
            raise SchemaError(f"{path}.params", "params must be an object")
        _check_params(path, kind, params)
        if node_id in ids:
            raise DuplicateId(node_id)
        ids.add(node_id)
        nodes.append(PipelineNode(id=node_id, kind=kind, params=tuple(sorted(params.items()))))

    edges: list[tuple[str, str]] = []
    for i, edge_doc in enumerate(edges_doc):
        if (
            not isinstance(edge_doc, (list, tuple))
            or len(edge_doc) != 2
            or not all(isinstance(e, str) for e in edge_doc)
        ):
            raise SchemaError(f"$.edges[{i}]", "edge must be a [from, to] pair of node ids")
        from_id, to_id = edge_doc
        if from_id not in ids or to_id not in ids:
            raise DanglingEdge(from_id, to_id)
        edges.append((from_id, to_id))

    pipeline = Pipeline(nodes=tuple(nodes), edges=tuple(edges))
    _check_arity(pipeline)
    topological_order(pipeline)  # raises CycleDetected
    return pipeline


def _check_arity(pipeline: Pipeline) -> None:
    incoming: dict[str, int] = {node.id: 0 for node in pipeline.nodes}
    for _, to_id in pipeline.edges:
        incoming[to_id] += 1
    for i, node in enumerate(pipeline.nodes):
        expected = 0 if node.kind == "source" else 1
        if incoming[node.id] != expected:
            raise SchemaError(
                f"nodes[{i}]",
                f"{node.kind} node {node.id!r} needs {expected} input(s), has {incoming[node.id]}",
            )


def topological_order(pipeline: Pipeline) -> list[str]:
    """Kahn's algorithm with a lexicographic tiebreak, so the default
    execution order is canonical."""
    incoming: dict[str, int] = {node.id: 0 for node in pipeline.nodes}
    outgoing: dict[str, list[str]] = {node.id: [] for node in pipeline.nodes}
    for from_id, to_id in pipeline.edges:
        incoming[to_id] += 1
        outgoing[from_id].append(to_id)
    ready = sorted(node_id for node_id, n in incoming.items() if n == 0)
    order: list[str] = []
    while ready:
        node_id = ready.pop(0)
        order.append(node_id)
        for successor in outgoing[node_id]:
            incoming[successor] -= 1
            if incoming[successor] == 0:
                ready.append(successor)
        ready.sort()
    if len(order) != len(pipeline.nodes):
        raise CycleDetected([node_id for node_id, n in incoming.items() if n > 0])
    return order


# Type checking --------------------------------------------------------------


def output_port(pipeline: Pipeline, node_id: str, _seen: frozenset = frozenset()) -> str:
    """Port type a node produces; export nodes pass their input through."""
    node = pipeline.node(node_id)
    produced = _NODE_SIGNATURES[node.kind][1]
    if produced is not None:
        return produced
    upstream = pipeline.upstream_of(node_id)
    if upstream is None or node_id in _seen:
        return "any"
    return output_port(pipeline, upstream, _seen | {node_id})


def type_check(pipeline: Pipeline) -> list[TypeIssue]:
    """Check every edge against the port-type table; issues are data."""
    issues: list[TypeIssue] = []
    for from_id, to_id in pipeline.edges:
        expected = _NODE_SIGNATURES[pipeline.node(to_id).kind][0]
        actual = output_port(pipeline, from_id)
        if expected in (None, "any") or actual == "any":
            continue
        if actual != expected:
            issues.append(TypeIssue(from_id=from_id, to_id=to_id, expected=expected, actual=actual))
    return issues


# Execution ------------------------------------------------------------------


@dataclass(frozen=True)
class _Value:
    port: str
    payload: object  # bytes / FrequencyTable / GuessingModel / LockoutRecommendation


def _resolve_inside(workspace: Path, relative: str, what: str) -> Path:
    candidate = (workspace / relative).resolve()
    root = workspace.resolve()
    if root != candidate and root not in candidate.parents:
        raise WorkbenchError(f"{what} {relative!r} escapes the workspace")
    return candidate


def _json_bytes(doc: dict) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def _serialize(value: _Value) -> bytes:
    if value.port == PORT_RAW_BYTES:
        return value.payload.data
    if value.port == PORT_FREQUENCY_TABLE:
        return export_csv(value.payload)
    if value.port == PORT_MODEL:
        return _json_bytes(model_to_json(value.payload))
    if value.port == PORT_RECOMMENDATION:
        return _json_bytes(value.payload.to_json())
    raise WorkbenchError(f"cannot serialize port type {value.port}")


@dataclass(frozen=True)
class _RawDump:
    data: bytes
    format: DumpFormat


def _load_workspace_dictionaries(workspace: Path) -> dict[str, Dictionary]:
    directory = workspace / "dictionaries"
    if not directory.is_dir():
        return {}
    loaded = {}
    for entry in sorted(directory.glob("*.txt")):
        loaded[entry.stem] = load_dictionary(entry.stem, entry.read_bytes())
    return loaded


def _run_node(node: PipelineNode, inputs: list[_Value], workspace: Path) -> _Value:
    if node.kind == "source":
        path = _resolve_inside(workspace, node.param("path"), "source path")
        if not path.is_file():
            raise WorkbenchError(f"source path {node.param('path')!r} does not exist")
        return _Value(PORT_RAW_BYTES, _RawDump(path.read_bytes(), _FORMATS[node.param("format")]))
    if node.kind == "formatter":
        dump = inputs[0].payload
        return _Value(PORT_FREQUENCY_TABLE, parse_dump(dump.data, dump.format))
    if node.kind == "zipf_fit":
        dist = to_distribution(inputs[0].payload)
        options = FitOptions(
            min_count=node.param("min_count", FitOptions().min_count),
            rank_limit=node.param("rank_limit"),
        )
        fit = fit_pdf_zipf if node.param("model") == "pdf" else fit_cdf_zipf
        return _Value(PORT_MODEL, fit(dist, options))
    if node.kind == "lockout":
        return _Value(PORT_RECOMMENDATION, max_attempts(inputs[0].payload, float(node.param("epsilon"))))
    if node.kind == "policy_filter":
        return _Value(PORT_FREQUENCY_TABLE, _filter_table(node, inputs[0].payload, workspace))
    if node.kind == "export":
        target = _resolve_inside(workspace, node.param("path"), "export path")
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(_serialize(inputs[0]))
        return inputs[0]
    raise WorkbenchError(f"unknown node kind {node.kind}")  # unreachable after load


def _filter_table(node: PipelineNode, table: FrequencyTable, workspace: Path) -> FrequencyTable:
    path = _resolve_inside(workspace, node.param("policy"), "policy path")
    if not path.is_file():
        raise WorkbenchError(f"policy path {node.param('policy')!r} does not exist")
    ast, errors = parse(path.read_text(encoding="utf-8"))
    if errors:
        raise WorkbenchError(
            f"policy {node.param('policy')!r} does not parse: {'; '.join(str(e) for e in errors)}"
        )
    policy, _ = compile_policy(ast)
    dictionaries = _load_workspace_dictionaries(workspace)
    survivors = {
        password: count
        for password, count in table.entries
        if check(policy, password, dictionaries).accepted
    }
    if not survivors:
        raise WorkbenchError(f"policy {policy.name!r} rejects every password in the table")
    return FrequencyTable.from_counts(survivors, source_label=table.source_label)


def execute(
    pipeline: Pipeline,
    workspace: str | Path,
    order: list[str] | None = None,
) -> dict[str, NodeResult]:
    """Run the pipeline against a workspace directory.

    Every node's output is written to ``out/<node_id>.<ext>`` (ext from the
    port type). A failing node is reported in its NodeResult; its
    downstream nodes are skipped, everything independent still runs. The
    optional `order` must be a valid topological order and exists so tests
    can demonstrate order independence.
    """
    workspace = Path(workspace)
    issues = type_check(pipeline)
    if issues:
        raise WorkbenchError("pipeline does not type-check: " + "; ".join(str(i) for i in issues))
    chosen = list(order) if order is not None else topological_order(pipeline)
    _validate_order(pipeline, chosen)

    out_dir = workspace / "out"
    out_dir.mkdir(parents=True, exist_ok=True)
    results: dict[str, NodeResult] = {}
    values: dict[str, _Value] = {}
    for node_id in chosen:
        node = pipeline.node(node_id)
        upstream = pipeline.upstream_of(node_id)
        if upstream is not None and upstream not in values:
            results[node_id] = NodeResult(
                node_id=node_id,
                status="skipped",
                error=f"upstream node {upstream!r} did not produce a value",
            )
            continue
        inputs = [values[upstream]] if upstream is not None else []
        try:
            value = _run_node(node, inputs, workspace)
            payload = _serialize(value)
        except (WorkbenchError, OSError) as exc:
            results[node_id] = NodeResult(node_id=node_id, status="failed", error=str(exc))
            continue
        artifact = f"out/{node_id}.{_ARTIFACT_EXT[value.port]}"
        (workspace / artifact).write_bytes(payload)
        values[node_id] = value
        results[node_id] = NodeResult(node_id=node_id, status="ok", artifact=artifact)
    return results


def _validate_order(pipeline: Pipeline, order: list[str]) -> None:
    if sorted(order) != sorted(node.id for node in pipeline.nodes):
        raise ValueError("order must mention every node exactly once")
    position = {node_id: i for i, node_id in enumerate(order)}
    for from_id, to_id in pipeline.edges:
        if position[from_id] > position[to_id]:
            raise ValueError(f"order violates edge {from_id!r} -> {to_id!r}")


def pipeline_to_json(pipeline: Pipeline) -> dict:
    return {
        "nodes": [
            {"id": node.id, "kind": node.kind, "params": dict(node.params)}
            for node in pipeline.nodes
        ],
        "edges": [[from_id, to_id] for from_id, to_id in pipeline.edges],
    }
