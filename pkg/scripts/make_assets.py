"""Regenerate the bundled sample workspace under assets/workspace/.

Everything here is deterministic (fixed seeds, canonical serialization), so
re-running the script leaves the tree byte-identical. The sample dump uses a
flat exponent so the bundled lockout node lands on a non-trivial budget
instead of zero.
"""

from __future__ import annotations

import json
import shutil
from pathlib import Path

from pwbench.adtree import (
    ADTree,
    BruteForceAttack,
    DefenceNode,
    DictionaryAttack,
    Node,
    tree_to_json,
    validate_tree,
)
from pwbench.guessing import sample_zipf_dump
from pwbench.ingest import DumpFormat, export_csv, parse_dump
from pwbench.pipeline import load_pipeline
from pwbench.policy import BanDictionary, MinLength

ROOT = Path(__file__).resolve().parent.parent
WORKSPACE = ROOT / "assets" / "workspace"

DUMP_ARGS = dict(s=0.55, n_ranks=2000, n_samples=50000, seed=1729)

COMMON_WORDS = "123456\npassword\nletmein\ndragon\nmonkey\n"

DEMO_DATASET = """\
password,count
123456,512
password,256
letmein,128
dragon,64
monkey,32
correcthorsebatterystaple,8
Tr0ub4dor&3Secure,4
longpassphraseexample,2
"""

CORP_POLICY = """\
policy "corp" {
  # Length window and a digit, plus the usual suspects.
  min_length 12;
  max_length 64;
  require digit >= 1;
  ban dictionary "common";
  ban substring "1234";
}
"""

PIPELINE_DOC = {
    "description": "Sample dump to fitted models and a lockout recommendation.",
    "nodes": [
        {
            "id": "src",
            "kind": "source",
            "params": {"path": "raw/sample-dump.txt", "format": "raw"},
        },
        {"id": "fmt", "kind": "formatter", "params": {}},
        {"id": "fit_pdf", "kind": "zipf_fit", "params": {"model": "pdf"}},
        {"id": "fit_cdf", "kind": "zipf_fit", "params": {"model": "cdf"}},
        {"id": "lock", "kind": "lockout", "params": {"epsilon": 0.05}},
    ],
    "edges": [
        ["src", "fmt"],
        ["fmt", "fit_pdf"],
        ["fmt", "fit_cdf"],
        ["fit_cdf", "lock"],
    ],
}


def guess_tree() -> ADTree:
    """Two attack modes on an OR root, each with the defence that blocks it."""
    return ADTree(
        root=Node(
            id="guess",
            label="guess the password",
            refinement="or",
            children=(
                Node(
                    id="dict-attack",
                    label="dictionary attack",
                    attack=DictionaryAttack("common"),
                    countermeasure=DefenceNode(
                        "no-dict", "ban dictionary words", BanDictionary("common")
                    ),
                ),
                Node(
                    id="brute-attack",
                    label="brute force short passwords",
                    attack=BruteForceAttack("printable", 14),
                    countermeasure=DefenceNode(
                        "long", "require long passwords", MinLength(15)
                    ),
                ),
            ),
        )
    )


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write(path: Path, data: bytes | str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.write_bytes(data)
    print(f"wrote {path.relative_to(ROOT)} ({len(data)} bytes)")


def main() -> None:
    if WORKSPACE.exists():
        shutil.rmtree(WORKSPACE)

    dump = sample_zipf_dump(**DUMP_ARGS)
    write(WORKSPACE / "raw" / "sample-dump.txt", dump)
    write(WORKSPACE / "datasets" / "sample.csv", export_csv(parse_dump(dump, DumpFormat.RAW_LINES)))
    write(WORKSPACE / "datasets" / "demo.csv", DEMO_DATASET)
    write(WORKSPACE / "dictionaries" / "common.txt", COMMON_WORDS)
    write(WORKSPACE / "policies" / "corp.srn", CORP_POLICY)

    tree = guess_tree()
    issues = validate_tree(tree)
    assert not issues, issues
    write(WORKSPACE / "adtrees" / "bimodal-guess.json", canonical_json(tree_to_json(tree)))

    load_pipeline(json.dumps(PIPELINE_DOC))  # fail fast if the document is bad
    write(WORKSPACE / "pipelines" / "dump-to-model.json", canonical_json(PIPELINE_DOC))


if __name__ == "__main__":
    main()
