"""Attack-defence trees for password guessing.

An attacker tree describes how a guessing attack decomposes: inner nodes
refine into alternatives ("or") or required conjuncts ("and"); leaves carry
a concrete attack mode (a dictionary, or brute force over an alphabet up to
a length). Any attacker node may carry one countermeasure, a defence node
holding a single composition-policy rule.

Three evaluations are provided over a validated tree:

- synthesize_policy: the conjunction of every defence rule in the tree.
- mitigation_status: per-leaf, whether the synthesized policy provably
  blocks the leaf's coverage, propagated up to a root verdict.
- attack_success: numeric success probability of the tree against a
  password distribution, after filtering it through the synthesized policy.

Mitigation is deliberately conservative: a leaf counts as mitigated only
when a sufficient condition applies (a superset dictionary ban, or a
minimum length strictly above the brute-force bound). A false "unmitigated"
is acceptable; a false "mitigated" is not.
"""

from __future__ import annotations

import string
from collections.abc import Iterator, Mapping
from dataclasses import dataclass

from .errors import WorkbenchError
from .ingest import Distribution
from .policy import (
    BanDictionary,
    CompositionPolicy,
    Dictionary,
    MinLength,
    Rule,
    UnknownDictionary,
    filter_distribution,
    rule_from_json,
    rule_to_json,
)

BUILTIN_ALPHABETS: dict[str, frozenset[str]] = {
    "lower": frozenset(string.ascii_lowercase),
    "upper": frozenset(string.ascii_uppercase),
    "digit": frozenset(string.digits),
    "symbol": frozenset(chr(c) for c in range(0x21, 0x7F)) - frozenset(string.ascii_letters + string.digits),
    "alphanumeric": frozenset(string.ascii_letters + string.digits),
    "printable": frozenset(chr(c) for c in range(0x21, 0x7F)),
}


class TreeError(WorkbenchError):
    """Malformed attack-defence tree document."""


class UnknownAlphabet(WorkbenchError):
    def __init__(self, ref: str):
        super().__init__(f"unknown alphabet {ref!r}")
        self.ref = ref


# Domain types ---------------------------------------------------------------


@dataclass(frozen=True)
class DictionaryAttack:
    dict_ref: str


@dataclass(frozen=True)
class BruteForceAttack:
    alphabet_ref: str
    max_len: int

    def __post_init__(self):
        if self.max_len < 1:
            raise ValueError(f"brute force max_len must be >= 1, got {self.max_len}")


AttackLeaf = DictionaryAttack | BruteForceAttack


@dataclass(frozen=True)
class DefenceNode:
    """A countermeasure carrying exactly one rule.

    `children` exists only so that malformed documents stay representable
    for validate_tree; a valid defence node has none.
    """

    id: str
    label: str
    rule: Rule
    children: tuple["Node", ...] = ()


@dataclass(frozen=True)
class Node:
    id: str
    label: str
    refinement: str = "or"
    children: tuple["Node", ...] = ()
    attack: AttackLeaf | None = None
    countermeasure: DefenceNode | None = None


@dataclass(frozen=True)
class ADTree:
    root: Node


@dataclass(frozen=True)
class ValidationIssue:
    node_id: str
    message: str

    def __str__(self) -> str:
        return f"{self.node_id}: {self.message}"

    def to_json(self) -> dict:
        return {"node_id": self.node_id, "message": self.message}


@dataclass(frozen=True)
class LeafMitigation:
    leaf_id: str
    mitigated: bool
    justification: str


@dataclass(frozen=True)
class MitigationReport:
    leaves: tuple[LeafMitigation, ...]
    root_defended: bool

    def to_json(self) -> dict:
        return {
            "leaves": [
                {"id": m.leaf_id, "mitigated": m.mitigated, "justification": m.justification}
                for m in self.leaves
            ],
            "root_defended": self.root_defended,
        }


def iter_nodes(tree: ADTree) -> Iterator[Node]:
    """Attacker nodes in depth-first pre-order."""
    stack = [tree.root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


# Validation -----------------------------------------------------------------


def validate_tree(tree: ADTree) -> list[ValidationIssue]:
    """Structural checks; an empty list means the tree is well-formed.

    Reference resolution (dictionaries, alphabets) is not attempted here;
    missing references surface when the tree is evaluated.
    """
    issues: list[ValidationIssue] = []
    seen_ids: set[str] = set()

    def check_id(node_id: str):
        if not node_id:
            issues.append(ValidationIssue(node_id, "node id must be non-empty"))
        elif node_id in seen_ids:
            issues.append(ValidationIssue(node_id, "duplicate node id"))
        seen_ids.add(node_id)

    for node in iter_nodes(tree):
        check_id(node.id)
        if node.refinement not in ("and", "or"):
            issues.append(
                ValidationIssue(node.id, f"refinement must be 'and' or 'or', not {node.refinement!r}")
            )
        if node.attack is not None and node.children:
            issues.append(ValidationIssue(node.id, "attack leaf must not have children"))
        if node.attack is None and not node.children:
            issues.append(ValidationIssue(node.id, "attacker node needs children or an attack"))
        cm = node.countermeasure
        if cm is not None:
            check_id(cm.id)
            if cm.children:
                issues.append(ValidationIssue(cm.id, "defence node must not have children"))
    return issues


def _require_valid(tree: ADTree):
    issues = validate_tree(tree)
    if issues:
        raise TreeError("; ".join(str(i) for i in issues))


# Synthesis ------------------------------------------------------------------


def synthesize_policy(tree: ADTree, name: str | None = None) -> CompositionPolicy:
    """Conjunction of all defence rules, pre-order, first occurrence kept."""
    _require_valid(tree)
    rules: list[Rule] = []
    for node in iter_nodes(tree):
        if node.countermeasure is not None and node.countermeasure.rule not in rules:
            rules.append(node.countermeasure.rule)
    return CompositionPolicy(name=name or f"{tree.root.id}-policy", rules=tuple(rules))


# Mitigation -----------------------------------------------------------------


def _leaf_mitigation(
    leaf: Node,
    policy: CompositionPolicy,
    dictionaries: Mapping[str, Dictionary],
) -> LeafMitigation:
    attack = leaf.attack
    if isinstance(attack, DictionaryAttack):
        bans = [r for r in policy.rules if isinstance(r, BanDictionary)]
        # An equal reference needs no content lookup, so try those first.
        for rule in bans:
            if rule.dict_ref == attack.dict_ref:
                return LeafMitigation(
                    leaf.id, True, f"ban_dictionary({rule.dict_ref!r}) bans the attack dictionary"
                )
        for rule in bans:
            attacked = _resolve_dictionary(attack.dict_ref, dictionaries)
            banned = _resolve_dictionary(rule.dict_ref, dictionaries)
            if attacked.words <= banned.words:
                return LeafMitigation(
                    leaf.id,
                    True,
                    f"ban_dictionary({rule.dict_ref!r}) covers every word of {attack.dict_ref!r}",
                )
        return LeafMitigation(
            leaf.id, False, f"no ban covers dictionary {attack.dict_ref!r}"
        )
    best = max((r.n for r in policy.rules if isinstance(r, MinLength)), default=None)
    if best is not None and best > attack.max_len:
        return LeafMitigation(
            leaf.id, True, f"min_length {best} exceeds brute-force bound {attack.max_len}"
        )
    detail = "no min_length rule" if best is None else f"min_length {best} does not exceed {attack.max_len}"
    return LeafMitigation(leaf.id, False, detail)


def _resolve_dictionary(ref: str, dictionaries: Mapping[str, Dictionary]) -> Dictionary:
    try:
        return dictionaries[ref]
    except KeyError:
        raise UnknownDictionary(ref) from None


def mitigation_status(
    tree: ADTree,
    dictionaries: Mapping[str, Dictionary] | None = None,
) -> MitigationReport:
    """Per-leaf mitigation under the synthesized policy, propagated to the
    root: an "or" node is defended only if every child is, an "and" node if
    any child is.

    A ban of the attack's own dictionary reference counts without resolving
    contents; distinct references need both dictionaries present so the
    subset condition can be checked.
    """
    _require_valid(tree)
    dictionaries = dictionaries or {}
    policy = synthesize_policy(tree)
    leaves: list[LeafMitigation] = []

    def visit(node: Node) -> bool:
        if node.attack is not None:
            status = _leaf_mitigation(node, policy, dictionaries)
            leaves.append(status)
            return status.mitigated
        verdicts = [visit(child) for child in node.children]
        return all(verdicts) if node.refinement == "or" else any(verdicts)

    defended = visit(tree.root)
    return MitigationReport(leaves=tuple(leaves), root_defended=defended)


# Numeric evaluation ---------------------------------------------------------


def _leaf_covers(
    attack: AttackLeaf,
    password: str,
    dictionaries: Mapping[str, Dictionary],
    alphabets: Mapping[str, frozenset[str]],
) -> bool:
    if isinstance(attack, DictionaryAttack):
        return password in _resolve_dictionary(attack.dict_ref, dictionaries).words
    if len(password) > attack.max_len:
        return False
    try:
        symbols = alphabets[attack.alphabet_ref]
    except KeyError:
        raise UnknownAlphabet(attack.alphabet_ref) from None
    return all(ch in symbols for ch in password)


def _leaf_success(
    attack: AttackLeaf,
    filtered: Distribution,
    budget: int,
    dictionaries: Mapping[str, Dictionary],
    alphabets: Mapping[str, frozenset[str]],
) -> float:
    """Sum of the `budget` largest covered probabilities. Entries are already
    in descending order, so the first `budget` covered ones are the largest;
    integer counts are used when available so full coverage sums to exactly 1."""
    taken = 0
    if filtered.counts is not None:
        hits = 0
        for (password, _), count in zip(filtered.entries, filtered.counts):
            if taken == budget:
                break
            if _leaf_covers(attack, password, dictionaries, alphabets):
                hits += count
                taken += 1
        return hits / sum(filtered.counts)
    total = 0.0
    for password, probability in filtered.entries:
        if taken == budget:
            break
        if _leaf_covers(attack, password, dictionaries, alphabets):
            total += probability
            taken += 1
    return min(1.0, total)


def attack_success(
    tree: ADTree,
    dist: Distribution,
    budget: int,
    dictionaries: Mapping[str, Dictionary] | None = None,
    alphabets: Mapping[str, frozenset[str]] | None = None,
) -> float:
    """Worst-case success probability of the attack against `dist`, with the
    synthesized policy applied first (survivors renormalized). The attacker
    spends `budget` guesses per leaf, in descending probability order over
    the passwords that leaf can generate; "or" takes the best child, "and"
    needs every child to succeed.
    """
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    _require_valid(tree)
    dictionaries = dictionaries or {}
    effective_alphabets = {**BUILTIN_ALPHABETS, **(alphabets or {})}
    policy = synthesize_policy(tree)
    filtered = filter_distribution(policy, dist, dictionaries)

    def visit(node: Node) -> float:
        if node.attack is not None:
            return _leaf_success(node.attack, filtered, budget, dictionaries, effective_alphabets)
        values = [visit(child) for child in node.children]
        if node.refinement == "or":
            return max(values)
        product = 1.0
        for v in values:
            product *= v
        return product

    return min(1.0, visit(tree.root))


# Serialization --------------------------------------------------------------


def _attack_to_json(attack: AttackLeaf) -> dict:
    if isinstance(attack, DictionaryAttack):
        return {"kind": "dictionary", "dictionary": attack.dict_ref}
    return {"kind": "brute_force", "alphabet": attack.alphabet_ref, "max_len": attack.max_len}


def _attack_from_json(doc, node_id: str) -> AttackLeaf:
    if not isinstance(doc, Mapping) or "kind" not in doc:
        raise TreeError(f"node {node_id!r}: attack must be an object with a 'kind'")
    kind = doc["kind"]
    try:
        if kind == "dictionary":
            return DictionaryAttack(dict_ref=str(doc["dictionary"]))
        if kind == "brute_force":
            return BruteForceAttack(alphabet_ref=str(doc["alphabet"]), max_len=int(doc["max_len"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise TreeError(f"node {node_id!r}: bad {kind} attack: {exc}") from None
    raise TreeError(f"node {node_id!r}: unknown attack kind {kind!r}")


def node_to_json(node: Node) -> dict:
    doc: dict = {"id": node.id, "actor": "attacker", "label": node.label}
    if node.children:
        doc["refinement"] = node.refinement
        doc["children"] = [node_to_json(child) for child in node.children]
    if node.attack is not None:
        doc["attack"] = _attack_to_json(node.attack)
    if node.countermeasure is not None:
        cm = node.countermeasure
        doc["countermeasure"] = {
            "id": cm.id,
            "actor": "defender",
            "label": cm.label,
            "rule": rule_to_json(cm.rule),
        }
    return doc


def node_from_json(doc) -> Node:
    if not isinstance(doc, Mapping):
        raise TreeError("node must be an object")
    try:
        node_id = str(doc["id"])
        label = str(doc["label"])
    except KeyError as exc:
        raise TreeError(f"node is missing required field {exc.args[0]!r}") from None
    actor = doc.get("actor", "attacker")
    if actor != "attacker":
        raise TreeError(f"node {node_id!r}: actor must be 'attacker', not {actor!r}")
    children_doc = doc.get("children", [])
    if not isinstance(children_doc, list):
        raise TreeError(f"node {node_id!r}: children must be a list")
    children = tuple(node_from_json(child) for child in children_doc)
    refinement = doc.get("refinement", "or")
    attack = None
    if "attack" in doc and doc["attack"] is not None:
        attack = _attack_from_json(doc["attack"], node_id)
    countermeasure = None
    if "countermeasure" in doc and doc["countermeasure"] is not None:
        countermeasure = _defence_from_json(doc["countermeasure"], node_id)
    return Node(
        id=node_id,
        label=label,
        refinement=str(refinement),
        children=children,
        attack=attack,
        countermeasure=countermeasure,
    )


def _defence_from_json(doc, node_id: str) -> DefenceNode:
    if not isinstance(doc, Mapping):
        raise TreeError(f"node {node_id!r}: countermeasure must be an object")
    try:
        defence_id = str(doc["id"])
        label = str(doc["label"])
        rule = rule_from_json(doc["rule"])
    except KeyError as exc:
        raise TreeError(
            f"node {node_id!r}: countermeasure is missing field {exc.args[0]!r}"
        ) from None
    except (ValueError, TypeError, AttributeError) as exc:
        raise TreeError(f"node {node_id!r}: countermeasure rule: {exc}") from None
    actor = doc.get("actor", "defender")
    if actor != "defender":
        raise TreeError(f"node {node_id!r}: countermeasure actor must be 'defender'")
    children = tuple(node_from_json(child) for child in doc.get("children", []))
    return DefenceNode(id=defence_id, label=label, rule=rule, children=children)


def tree_to_json(tree: ADTree) -> dict:
    return {"root": node_to_json(tree.root)}


def tree_from_json(doc) -> ADTree:
    if not isinstance(doc, Mapping) or "root" not in doc:
        raise TreeError("tree document must be an object with a 'root' node")
    return ADTree(root=node_from_json(doc["root"]))
