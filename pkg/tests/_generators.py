"""Shared test-side generators for the policy/DSL oracle-equivalence suites.

The universe is intentionally tiny: alphabet {a, B, 1, !} (one character per
class) at lengths 0..4 gives 341 candidates, small enough to enumerate
exhaustively yet rich enough that every rule kind can both fire and pass.
"""

from __future__ import annotations

import random

from pwbench.adtree import ADTree, BruteForceAttack, DefenceNode, DictionaryAttack, Node
from pwbench.policy import (
    CHAR_CLASSES,
    BanDictionary,
    BanExact,
    BanSubstring,
    CompositionPolicy,
    MaxLength,
    MinLength,
    RequireClass,
    Rule,
    load_dictionaries,
)

ORACLE_ALPHABET = ("a", "B", "1", "!")
ORACLE_MAX_LEN = 4
ORACLE_UNIVERSE_SIZE = 341  # 4^0 + 4^1 + ... + 4^4

ORACLE_DICTIONARIES = load_dictionaries(
    [
        ("common", b"a\naB\nB1\n!\n"),
        ("banned", b"a1\nBB\naaaa\n"),
    ]
)

_DICT_NAMES = tuple(sorted(ORACLE_DICTIONARIES))


def random_rule(rng: random.Random) -> Rule:
    kind = rng.randrange(6)
    if kind == 0:
        return MinLength(rng.randint(0, 4))
    if kind == 1:
        return MaxLength(rng.randint(0, 4))
    if kind == 2:
        return RequireClass(rng.choice(CHAR_CLASSES), rng.randint(1, 4))
    if kind == 3:
        return BanDictionary(rng.choice(_DICT_NAMES))
    if kind == 4:
        length = rng.randint(1, 2)
        return BanSubstring("".join(rng.choice(ORACLE_ALPHABET) for _ in range(length)))
    length = rng.randint(0, 4)
    return BanExact("".join(rng.choice(ORACLE_ALPHABET) for _ in range(length)))


def random_policy(rng: random.Random, index: int) -> CompositionPolicy:
    rules = tuple(random_rule(rng) for _ in range(rng.randint(0, 4)))
    return CompositionPolicy(name=f"gen{index}", rules=rules)


def dict_leaf(node_id="dict-attack", ref="common", defence=None):
    return Node(
        id=node_id,
        label=f"dictionary attack using {ref}",
        attack=DictionaryAttack(ref),
        countermeasure=defence,
    )


def brute_leaf(node_id="brute-attack", alphabet="printable", max_len=14, defence=None):
    return Node(
        id=node_id,
        label=f"brute force up to {max_len}",
        attack=BruteForceAttack(alphabet, max_len),
        countermeasure=defence,
    )


def two_leaf_tree():
    """An OR root: guess via a dictionary, or brute-force short passwords.
    Each mode carries the defence that blocks it."""
    return ADTree(
        root=Node(
            id="guess",
            label="guess the password",
            refinement="or",
            children=(
                dict_leaf(defence=DefenceNode("no-dict", "ban dictionary words", BanDictionary("common"))),
                brute_leaf(defence=DefenceNode("long", "require long passwords", MinLength(15))),
            ),
        )
    )
