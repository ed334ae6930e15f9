"""Password composition policies as rule conjunctions.

A policy is a named conjunction of rules; a password is accepted iff it
satisfies every rule. The rule vocabulary:

  min_length(n) / max_length(n)      length bounds, counted in Unicode
                                     scalar values
  require_class(char_class, k)       at least k characters of an ASCII
                                     class (lower/upper/digit/symbol)
  ban_dictionary(dict_ref)           reject members of a named word list
  ban_substring(s) / ban_exact(w)    case-sensitive containment / equality

Character classes are ASCII-defined; symbol means any other visible ASCII
character. Non-ASCII characters belong to no class but still count toward
length. Dictionary matching is exact, case-sensitive equality with no
leetspeak normalization.

Filtering a distribution through a policy uses the normalization model:
rejected passwords are removed and surviving probabilities are rescaled to
sum to 1. This is the simplest defensible account of how banned users
re-pick; ranked-reselection user models are out of scope.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import WorkbenchError
from .ingest import Distribution

CHAR_CLASSES = ("lower", "upper", "digit", "symbol")

MAX_UNIVERSE = 10**6


class PolicyError(WorkbenchError):
    """Base class for policy evaluation failures."""


class UnknownDictionary(PolicyError):
    def __init__(self, dict_ref: str):
        super().__init__(f"no dictionary named {dict_ref!r} is loaded")
        self.dict_ref = dict_ref


class PolicyRejectsEverything(PolicyError):
    """Filtering removed the entire support of the distribution."""


class UniverseTooLarge(PolicyError):
    def __init__(self, size: int):
        super().__init__(f"candidate universe has {size} strings, limit is {MAX_UNIVERSE}")
        self.size = size


# Rule vocabulary -----------------------------------------------------------


@dataclass(frozen=True)
class MinLength:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"min_length must be >= 0, got {self.n}")


@dataclass(frozen=True)
class MaxLength:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"max_length must be >= 0, got {self.n}")


@dataclass(frozen=True)
class RequireClass:
    char_class: str
    k: int

    def __post_init__(self):
        if self.char_class not in CHAR_CLASSES:
            raise ValueError(f"unknown character class {self.char_class!r}")
        if self.k < 1:
            raise ValueError(f"require_class needs k >= 1, got {self.k}")


@dataclass(frozen=True)
class BanDictionary:
    dict_ref: str


@dataclass(frozen=True)
class BanSubstring:
    substring: str

    def __post_init__(self):
        if not self.substring:
            raise ValueError("ban_substring needs a non-empty substring")


@dataclass(frozen=True)
class BanExact:
    word: str


Rule = MinLength | MaxLength | RequireClass | BanDictionary | BanSubstring | BanExact


@dataclass(frozen=True)
class CompositionPolicy:
    """A named conjunction of rules. An empty rule list accepts everything.

    Duplicate rules are representable (so validate_policy can report them)
    but are never produced by synthesis.
    """

    name: str
    rules: tuple[Rule, ...] = ()


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    violations: tuple[tuple[Rule, str], ...] = ()

    def __post_init__(self):
        if self.accepted != (not self.violations):
            raise ValueError("accepted must match emptiness of violations")


@dataclass(frozen=True)
class Dictionary:
    name: str
    words: frozenset[str]

    def __post_init__(self):
        if not self.name:
            raise ValueError("dictionary needs a non-empty name")


@dataclass(frozen=True)
class PolicyConflict:
    kind: str
    message: str


def load_dictionary(name: str, data: bytes) -> Dictionary:
    """One word per line, UTF-8, LF; blank lines skipped, CR stripped."""
    words = set()
    for line in data.decode("utf-8", errors="replace").split("\n"):
        word = line[:-1] if line.endswith("\r") else line
        if word:
            words.add(word)
    return Dictionary(name=name, words=frozenset(words))


def char_class_of(ch: str) -> str | None:
    if "a" <= ch <= "z":
        return "lower"
    if "A" <= ch <= "Z":
        return "upper"
    if "0" <= ch <= "9":
        return "digit"
    if "!" <= ch <= "~":
        return "symbol"
    return None


def class_count(password: str, char_class: str) -> int:
    return sum(1 for ch in password if char_class_of(ch) == char_class)


def _violation(rule: Rule, password: str, dictionaries: Mapping[str, Dictionary]) -> str | None:
    if isinstance(rule, MinLength):
        if len(password) < rule.n:
            return f"length {len(password)} is below the minimum of {rule.n}"
    elif isinstance(rule, MaxLength):
        if len(password) > rule.n:
            return f"length {len(password)} exceeds the maximum of {rule.n}"
    elif isinstance(rule, RequireClass):
        have = class_count(password, rule.char_class)
        if have < rule.k:
            return f"needs at least {rule.k} {rule.char_class} character(s), has {have}"
    elif isinstance(rule, BanDictionary):
        if rule.dict_ref not in dictionaries:
            raise UnknownDictionary(rule.dict_ref)
        if password in dictionaries[rule.dict_ref].words:
            return f"appears in the {rule.dict_ref!r} dictionary"
    elif isinstance(rule, BanSubstring):
        if rule.substring in password:
            return f"contains the banned substring {rule.substring!r}"
    elif isinstance(rule, BanExact):
        if password == rule.word:
            return "is a banned password"
    return None


def check(
    policy: CompositionPolicy,
    password: str,
    dictionaries: Mapping[str, Dictionary] | None = None,
) -> Verdict:
    """Evaluate every rule (no short-circuit) and report all violations."""
    dictionaries = dictionaries or {}
    violations = []
    for rule in policy.rules:
        reason = _violation(rule, password, dictionaries)
        if reason is not None:
            violations.append((rule, reason))
    return Verdict(accepted=not violations, violations=tuple(violations))


def filter_distribution(
    policy: CompositionPolicy,
    dist: Distribution,
    dictionaries: Mapping[str, Dictionary] | None = None,
) -> Distribution:
    """Remove rejected passwords and rescale the survivors to sum to 1.

    Counts survive filtering when present, so repeated filtering stays
    exact. Relative order of survivors is preserved.
    """
    keep = [
        i
        for i, (password, _) in enumerate(dist.entries)
        if check(policy, password, dictionaries).accepted
    ]
    if not keep:
        raise PolicyRejectsEverything(f"policy {policy.name!r} rejects the entire support")
    if len(keep) == len(dist.entries):
        return dist
    if dist.counts is not None:
        counts = [dist.counts[i] for i in keep]
        total = sum(counts)
        entries = tuple((dist.entries[i][0], c / total) for i, c in zip(keep, counts))
        return Distribution(entries=entries, counts=tuple(counts), source_label=dist.source_label)
    mass = sum(dist.entries[i][1] for i in keep)
    entries = tuple((dist.entries[i][0], dist.entries[i][1] / mass) for i in keep)
    return Distribution(entries=entries, source_label=dist.source_label)


def validate_policy(policy: CompositionPolicy) -> list[PolicyConflict]:
    """Report structural contradictions; conflicts are data, not failures."""
    conflicts: list[PolicyConflict] = []
    min_lengths = [r.n for r in policy.rules if isinstance(r, MinLength)]
    max_lengths = [r.n for r in policy.rules if isinstance(r, MaxLength)]
    if min_lengths and max_lengths and max(min_lengths) > min(max_lengths):
        conflicts.append(
            PolicyConflict(
                kind="length_bounds",
                message=f"min_length {max(min_lengths)} exceeds max_length {min(max_lengths)}",
            )
        )
    required: dict[str, int] = {}
    for rule in policy.rules:
        if isinstance(rule, RequireClass):
            required[rule.char_class] = max(required.get(rule.char_class, 0), rule.k)
    if required and max_lengths and sum(required.values()) > min(max_lengths):
        conflicts.append(
            PolicyConflict(
                kind="class_requirements",
                message=(
                    f"required class characters ({sum(required.values())}) "
                    f"cannot fit in max_length {min(max_lengths)}"
                ),
            )
        )
    seen: set[Rule] = set()
    for rule in policy.rules:
        if rule in seen:
            conflicts.append(PolicyConflict(kind="duplicate_rule", message=f"duplicate rule {rule}"))
        seen.add(rule)
    return conflicts


def enumerate_accepted(
    policy: CompositionPolicy,
    alphabet: Sequence[str],
    max_len: int,
    dictionaries: Mapping[str, Dictionary] | None = None,
) -> set[str]:
    """Brute-force oracle: every accepted string over the alphabet with
    length 0..max_len. Refuses universes above 10**6 candidates."""
    symbols = sorted(set(alphabet))
    size = _universe_size(len(symbols), max_len)
    if size > MAX_UNIVERSE:
        raise UniverseTooLarge(size)
    accepted = set()
    for length in range(max_len + 1):
        for combo in itertools.product(symbols, repeat=length):
            candidate = "".join(combo)
            if check(policy, candidate, dictionaries).accepted:
                accepted.add(candidate)
    return accepted


def _universe_size(n_symbols: int, max_len: int) -> int:
    if n_symbols <= 1:
        return max_len + 1
    return (n_symbols ** (max_len + 1) - 1) // (n_symbols - 1)


# JSON wire format ----------------------------------------------------------

_RULE_KINDS = {
    MinLength: "min_length",
    MaxLength: "max_length",
    RequireClass: "require_class",
    BanDictionary: "ban_dictionary",
    BanSubstring: "ban_substring",
    BanExact: "ban_exact",
}


def rule_to_json(rule: Rule) -> dict:
    kind = _RULE_KINDS[type(rule)]
    if isinstance(rule, (MinLength, MaxLength)):
        return {"kind": kind, "n": rule.n}
    if isinstance(rule, RequireClass):
        return {"kind": kind, "class": rule.char_class, "k": rule.k}
    if isinstance(rule, BanDictionary):
        return {"kind": kind, "dictionary": rule.dict_ref}
    if isinstance(rule, BanSubstring):
        return {"kind": kind, "substring": rule.substring}
    return {"kind": kind, "word": rule.word}


def rule_from_json(doc: Mapping) -> Rule:
    kind = doc.get("kind")
    try:
        if kind == "min_length":
            return MinLength(int(doc["n"]))
        if kind == "max_length":
            return MaxLength(int(doc["n"]))
        if kind == "require_class":
            return RequireClass(str(doc["class"]), int(doc["k"]))
        if kind == "ban_dictionary":
            return BanDictionary(str(doc["dictionary"]))
        if kind == "ban_substring":
            return BanSubstring(str(doc["substring"]))
        if kind == "ban_exact":
            return BanExact(str(doc["word"]))
    except KeyError as missing:
        raise ValueError(f"rule {kind!r} is missing field {missing}") from None
    raise ValueError(f"unknown rule kind {kind!r}")


def policy_to_json(policy: CompositionPolicy) -> dict:
    return {"name": policy.name, "rules": [rule_to_json(r) for r in policy.rules]}


def policy_from_json(doc: Mapping) -> CompositionPolicy:
    return CompositionPolicy(
        name=str(doc.get("name", "")),
        rules=tuple(rule_from_json(r) for r in doc.get("rules", [])),
    )


def verdict_to_json(verdict: Verdict) -> dict:
    return {
        "accepted": verdict.accepted,
        "violations": [
            {"rule": rule_to_json(rule), "reason": reason} for rule, reason in verdict.violations
        ],
    }


def load_dictionaries(named_blobs: Iterable[tuple[str, bytes]]) -> dict[str, Dictionary]:
    """Convenience loader for several (name, file bytes) pairs."""
    return {name: load_dictionary(name, blob) for name, blob in named_blobs}
