import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pwbench.adtree import (
    ADTree,
    BUILTIN_ALPHABETS,
    BruteForceAttack,
    DefenceNode,
    DictionaryAttack,
    Node,
    TreeError,
    UnknownAlphabet,
    attack_success,
    mitigation_status,
    synthesize_policy,
    tree_from_json,
    tree_to_json,
    validate_tree,
)
from pwbench.ingest import Distribution, FrequencyTable, to_distribution
from pwbench.policy import (
    BanDictionary,
    BanExact,
    MinLength,
    PolicyRejectsEverything,
    UnknownDictionary,
    enumerate_accepted,
    load_dictionaries,
)

from _generators import brute_leaf, dict_leaf, two_leaf_tree


def counts_dist(counts):
    return to_distribution(FrequencyTable.from_counts(counts))


# Validation ------------------------------------------------------------------


def test_two_leaf_tree_is_valid():
    assert validate_tree(two_leaf_tree()) == []


def test_duplicate_node_ids():
    tree = ADTree(
        root=Node(
            id="a",
            label="root",
            children=(dict_leaf(node_id="a"),),
        )
    )
    issues = validate_tree(tree)
    assert len(issues) == 1
    assert "duplicate" in issues[0].message


def test_defence_node_with_children_is_invalid():
    bad_defence = DefenceNode("d", "defence", MinLength(8), children=(dict_leaf(node_id="x"),))
    tree = ADTree(root=dict_leaf(defence=bad_defence))
    issues = validate_tree(tree)
    assert [i.node_id for i in issues] == ["d"]
    assert "children" in issues[0].message


def test_attack_leaf_with_children_is_invalid():
    tree = ADTree(
        root=Node(
            id="r",
            label="bad",
            attack=DictionaryAttack("common"),
            children=(dict_leaf(node_id="c"),),
        )
    )
    assert any("must not have children" in i.message for i in validate_tree(tree))


def test_inner_node_without_children_is_invalid():
    tree = ADTree(root=Node(id="r", label="empty"))
    issues = validate_tree(tree)
    assert len(issues) == 1
    assert "needs children or an attack" in issues[0].message


def test_bad_refinement_reported():
    tree = ADTree(root=Node(id="r", label="x", refinement="xor", children=(dict_leaf(),)))
    assert any("refinement" in i.message for i in validate_tree(tree))


def test_defence_id_collides_with_attacker_id():
    tree = ADTree(
        root=Node(
            id="guess",
            label="root",
            children=(dict_leaf(defence=DefenceNode("guess", "d", MinLength(1))),),
        )
    )
    assert any("duplicate" in i.message for i in validate_tree(tree))


def test_evaluation_refuses_invalid_tree():
    tree = ADTree(root=Node(id="r", label="empty"))
    with pytest.raises(TreeError):
        synthesize_policy(tree)


# Synthesis -------------------------------------------------------------------


def test_synthesize_two_leaf_tree():
    policy = synthesize_policy(two_leaf_tree())
    assert policy.rules == (BanDictionary("common"), MinLength(15))


def test_synthesize_without_defences_is_accept_all():
    tree = ADTree(root=Node(id="r", label="root", children=(dict_leaf(), brute_leaf())))
    policy = synthesize_policy(tree)
    assert policy.rules == ()


def test_synthesize_deduplicates_identical_rules():
    tree = ADTree(
        root=Node(
            id="r",
            label="root",
            children=(
                dict_leaf(defence=DefenceNode("d1", "a", MinLength(12))),
                brute_leaf(defence=DefenceNode("d2", "b", MinLength(12))),
            ),
        )
    )
    assert synthesize_policy(tree).rules == (MinLength(12),)


def test_synthesize_preorder_rule_ordering():
    tree = ADTree(
        root=Node(
            id="r",
            label="root",
            countermeasure=DefenceNode("d0", "at root", BanExact("root-rule")),
            children=(
                Node(
                    id="mid",
                    label="inner",
                    countermeasure=DefenceNode("d1", "mid", MinLength(10)),
                    children=(dict_leaf(defence=DefenceNode("d2", "leaf", BanDictionary("common"))),),
                ),
                brute_leaf(defence=DefenceNode("d3", "sibling", MinLength(15))),
            ),
        )
    )
    policy = synthesize_policy(tree)
    assert policy.rules == (
        BanExact("root-rule"),
        MinLength(10),
        BanDictionary("common"),
        MinLength(15),
    )


def test_synthesize_policy_name():
    assert synthesize_policy(two_leaf_tree()).name == "guess-policy"
    assert synthesize_policy(two_leaf_tree(), name="corp").name == "corp"


# Mitigation ------------------------------------------------------------------


def test_two_leaf_tree_fully_mitigated():
    report = mitigation_status(two_leaf_tree())
    assert [m.mitigated for m in report.leaves] == [True, True]
    assert all(m.justification for m in report.leaves)
    assert report.root_defended


def test_undefended_dictionary_leaf():
    report = mitigation_status(ADTree(root=dict_leaf()))
    assert len(report.leaves) == 1
    assert not report.leaves[0].mitigated
    assert not report.root_defended


def test_brute_force_boundary_is_strict():
    tree = ADTree(root=brute_leaf(alphabet="lower", max_len=3, defence=DefenceNode("d", "x", MinLength(3))))
    report = mitigation_status(tree)
    assert not report.leaves[0].mitigated
    assert not report.root_defended

    tree = ADTree(root=brute_leaf(alphabet="lower", max_len=3, defence=DefenceNode("d", "x", MinLength(4))))
    assert mitigation_status(tree).root_defended


def test_equal_dictionary_reference_needs_no_contents():
    tree = ADTree(root=dict_leaf(ref="whatever", defence=DefenceNode("d", "x", BanDictionary("whatever"))))
    assert mitigation_status(tree).root_defended


def test_subset_dictionary_mitigates():
    dictionaries = load_dictionaries(
        [("small", b"abc\ndef\n"), ("big", b"abc\ndef\nghi\n"), ("other", b"zzz\n")]
    )
    covered = ADTree(root=dict_leaf(ref="small", defence=DefenceNode("d", "x", BanDictionary("big"))))
    assert mitigation_status(covered, dictionaries).root_defended

    not_covered = ADTree(root=dict_leaf(ref="big", defence=DefenceNode("d", "x", BanDictionary("small"))))
    assert not mitigation_status(not_covered, dictionaries).root_defended

    disjoint = ADTree(root=dict_leaf(ref="small", defence=DefenceNode("d", "x", BanDictionary("other"))))
    assert not mitigation_status(disjoint, dictionaries).root_defended


def test_distinct_references_require_loaded_dictionaries():
    tree = ADTree(root=dict_leaf(ref="a", defence=DefenceNode("d", "x", BanDictionary("b"))))
    with pytest.raises(UnknownDictionary):
        mitigation_status(tree)


def test_or_needs_all_children_and_needs_any():
    half_defended = (
        dict_leaf(defence=DefenceNode("d1", "x", BanDictionary("common"))),
        brute_leaf(),  # undefended
    )
    or_tree = ADTree(root=Node(id="r", label="or", refinement="or", children=half_defended))
    assert not mitigation_status(or_tree).root_defended

    and_tree = ADTree(root=Node(id="r", label="and", refinement="and", children=half_defended))
    assert mitigation_status(and_tree).root_defended


def test_mitigation_ignores_child_order():
    base = two_leaf_tree()
    flipped = ADTree(
        root=Node(
            id=base.root.id,
            label=base.root.label,
            refinement=base.root.refinement,
            children=tuple(reversed(base.root.children)),
        )
    )
    a = mitigation_status(base)
    b = mitigation_status(flipped)
    assert a.root_defended == b.root_defended
    assert {(m.leaf_id, m.mitigated) for m in a.leaves} == {(m.leaf_id, m.mitigated) for m in b.leaves}


def test_mitigation_report_json_shape():
    doc = mitigation_status(two_leaf_tree()).to_json()
    assert doc["root_defended"] is True
    assert [leaf["id"] for leaf in doc["leaves"]] == ["dict-attack", "brute-attack"]
    assert all(set(leaf) == {"id", "mitigated", "justification"} for leaf in doc["leaves"])


# Numeric evaluation ----------------------------------------------------------

TINY = {"ab": frozenset("ab")}


def test_full_coverage_reaches_exactly_one():
    dictionaries = load_dictionaries([("breached", b"123456\npassword\n")])
    tree = ADTree(root=dict_leaf(ref="breached"))
    dist = counts_dist({"123456": 2, "password": 1})
    assert attack_success(tree, dist, budget=2, dictionaries=dictionaries) == 1.0


def test_banning_entire_support_raises():
    dictionaries = load_dictionaries([("breached", b"123456\npassword\n")])
    tree = ADTree(
        root=dict_leaf(ref="breached", defence=DefenceNode("d", "x", BanDictionary("breached")))
    )
    dist = counts_dist({"123456": 2, "password": 1})
    with pytest.raises(PolicyRejectsEverything):
        attack_success(tree, dist, budget=2, dictionaries=dictionaries)


def test_brute_force_coverage_respects_alphabet_and_length():
    tree = ADTree(root=brute_leaf(alphabet="ab", max_len=2))
    dist = Distribution(entries=(("aa", 0.5), ("zzz", 0.5)))
    assert attack_success(tree, dist, budget=1, alphabets=TINY) == 0.5


def test_zero_budget_means_zero_success():
    tree = ADTree(root=dict_leaf(ref="breached"))
    dictionaries = load_dictionaries([("breached", b"123456\n")])
    dist = counts_dist({"123456": 1, "other": 1})
    assert attack_success(tree, dist, budget=0, dictionaries=dictionaries) == 0.0


def test_negative_budget_rejected():
    with pytest.raises(ValueError):
        attack_success(ADTree(root=dict_leaf()), counts_dist({"a": 1}), budget=-1)


def test_success_monotone_in_budget_and_bounded():
    rng = random.Random(5)
    counts = {f"pw{i}": rng.randint(1, 50) for i in range(40)}
    counts.update({"abc": 30, "ab": 25, "zz!": 10})
    dist = counts_dist(counts)
    tree = ADTree(
        root=Node(
            id="r",
            label="root",
            refinement="or",
            children=(brute_leaf(alphabet="lower", max_len=3), dict_leaf(ref="breached")),
        )
    )
    dictionaries = load_dictionaries([("breached", b"abc\npw1\npw2\n")])
    values = [
        attack_success(tree, dist, budget=b, dictionaries=dictionaries) for b in range(0, 50, 5)
    ]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(earlier <= later for earlier, later in zip(values, values[1:]))


def test_adding_a_defence_never_helps_the_attacker():
    counts = {"password": 40, "longpassword!": 25, "x9!kqzmplert": 20, "aB1!aB1!aB1!": 15}
    dist = counts_dist(counts)
    dictionaries = load_dictionaries([("breached", b"password\n")])
    undefended = ADTree(root=dict_leaf(ref="breached"))
    defended = ADTree(
        root=dict_leaf(ref="breached", defence=DefenceNode("d", "x", MinLength(10)))
    )
    for budget in (0, 1, 2, 5):
        base = attack_success(undefended, dist, budget, dictionaries=dictionaries)
        hardened = attack_success(defended, dist, budget, dictionaries=dictionaries)
        assert hardened <= base


def test_or_takes_max_and_takes_product():
    dictionaries = load_dictionaries([("d1", b"aa\n"), ("d2", b"bb\n")])
    dist = counts_dist({"aa": 3, "bb": 1})
    leaves = (dict_leaf(node_id="l1", ref="d1"), dict_leaf(node_id="l2", ref="d2"))
    or_tree = ADTree(root=Node(id="r", label="or", refinement="or", children=leaves))
    and_tree = ADTree(root=Node(id="r", label="and", refinement="and", children=leaves))
    assert attack_success(or_tree, dist, 5, dictionaries=dictionaries) == 0.75
    assert attack_success(and_tree, dist, 5, dictionaries=dictionaries) == pytest.approx(0.75 * 0.25)


def test_builtin_alphabets():
    assert BUILTIN_ALPHABETS["lower"] == frozenset("abcdefghijklmnopqrstuvwxyz")
    assert "!" in BUILTIN_ALPHABETS["symbol"]
    assert "a" not in BUILTIN_ALPHABETS["symbol"]
    tree = ADTree(root=brute_leaf(alphabet="lower", max_len=3))
    dist = counts_dist({"abc": 2, "Abc": 1, "abcd": 1})
    assert attack_success(tree, dist, budget=4) == 0.5


def test_unknown_alphabet():
    tree = ADTree(root=brute_leaf(alphabet="klingon", max_len=2))
    with pytest.raises(UnknownAlphabet):
        attack_success(tree, counts_dist({"a": 1}), budget=1)


def test_unknown_dictionary_in_leaf():
    tree = ADTree(root=dict_leaf(ref="missing"))
    with pytest.raises(UnknownDictionary):
        attack_success(tree, counts_dist({"a": 1}), budget=1)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_success_bounded_on_random_distributions(seed):
    rng = random.Random(seed)
    counts = {f"w{i}": rng.randint(1, 100) for i in range(rng.randint(1, 30))}
    dist = counts_dist(counts)
    tree = ADTree(root=brute_leaf(alphabet="alphanumeric", max_len=rng.randint(1, 6)))
    value = attack_success(tree, dist, budget=rng.randint(0, 40))
    assert 0.0 <= value <= 1.0


# Synthesis soundness ---------------------------------------------------------

SOUND_ALPHABET = ("a", "B", "1", "!")
SOUND_DICTIONARIES = load_dictionaries(
    [("common", b"a\naB\nB1\n!\n"), ("banned", b"a1\nBB\naaaa\n"), ("huge", b"a\naB\nB1\n!\na1\nBB\naaaa\n")]
)
SOUND_ALPHABETS = {"tiny": frozenset(SOUND_ALPHABET)}


def _leaf_coverage(attack):
    if isinstance(attack, DictionaryAttack):
        return set(SOUND_DICTIONARIES[attack.dict_ref].words)
    covered = {""}
    for length in range(1, attack.max_len + 1):
        covered.update("".join(t) for t in itertools.product(SOUND_ALPHABET, repeat=length))
    return covered


def _random_sound_leaf(rng, index):
    if rng.random() < 0.5:
        ref = rng.choice(["common", "banned"])
        options = [None, BanDictionary(ref), BanDictionary("huge"), BanDictionary("common"), MinLength(rng.randint(1, 5))]
    else:
        max_len = rng.randint(1, 4)
        ref = None
        options = [None, MinLength(rng.randint(1, 6)), BanDictionary("common")]
        attack = BruteForceAttack("tiny", max_len)
    if ref is not None:
        attack = DictionaryAttack(ref)
    rule = rng.choice(options)
    defence = None if rule is None else DefenceNode(f"d{index}", "defence", rule)
    return Node(id=f"leaf{index}", label="leaf", attack=attack, countermeasure=defence)


def test_synthesis_soundness_exhaustive():
    """Whenever every leaf is reported mitigated, nothing the leaves can
    generate survives the synthesized policy."""
    rng = random.Random(99)
    fully_mitigated = 0
    for trial in range(80):
        n_leaves = rng.randint(1, 3)
        leaves = tuple(_random_sound_leaf(rng, i) for i in range(n_leaves))
        if n_leaves == 1:
            tree = ADTree(root=leaves[0])
        else:
            tree = ADTree(
                root=Node(id="root", label="root", refinement=rng.choice(["and", "or"]), children=leaves)
            )
        report = mitigation_status(tree, SOUND_DICTIONARIES)
        if not all(m.mitigated for m in report.leaves):
            continue
        fully_mitigated += 1
        policy = synthesize_policy(tree)
        accepted = enumerate_accepted(policy, SOUND_ALPHABET, 4, SOUND_DICTIONARIES)
        for node, status in zip(leaves, report.leaves):
            coverage = _leaf_coverage(node.attack)
            assert accepted.isdisjoint(coverage), (
                f"trial {trial}: leaf {status.leaf_id} coverage leaks through: "
                f"{sorted(accepted & coverage)[:5]}"
            )
    assert fully_mitigated >= 10


# Serialization ---------------------------------------------------------------


def test_json_round_trip():
    tree = two_leaf_tree()
    assert tree_from_json(tree_to_json(tree)) == tree


def test_json_shape():
    doc = tree_to_json(two_leaf_tree())
    root = doc["root"]
    assert root["actor"] == "attacker"
    assert root["refinement"] == "or"
    dict_node, brute_node = root["children"]
    assert dict_node["attack"] == {"kind": "dictionary", "dictionary": "common"}
    assert brute_node["attack"] == {"kind": "brute_force", "alphabet": "printable", "max_len": 14}
    cm = dict_node["countermeasure"]
    assert cm["actor"] == "defender"
    assert cm["rule"] == {"kind": "ban_dictionary", "dictionary": "common"}
    assert "children" not in dict_node


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ({}, "root"),
        ({"root": {"label": "x"}}, "id"),
        ({"root": {"id": "r", "label": "x", "actor": "defender"}}, "actor"),
        ({"root": {"id": "r", "label": "x", "attack": {"kind": "rainbow"}}}, "kind"),
        ({"root": {"id": "r", "label": "x", "attack": {"kind": "dictionary"}}}, "dictionary"),
        (
            {"root": {"id": "r", "label": "x", "attack": {"kind": "brute_force", "alphabet": "lower", "max_len": 0}}},
            "max_len",
        ),
        ({"root": {"id": "r", "label": "x", "children": "nope"}}, "children"),
        (
            {"root": {"id": "r", "label": "x", "countermeasure": {"id": "d", "label": "y"}}},
            "rule",
        ),
        (
            {
                "root": {
                    "id": "r",
                    "label": "x",
                    "countermeasure": {"id": "d", "label": "y", "rule": {"kind": "wat"}},
                }
            },
            "rule",
        ),
    ],
)
def test_malformed_documents(doc, fragment):
    with pytest.raises(TreeError) as excinfo:
        tree_from_json(doc)
    assert fragment in str(excinfo.value)


def test_defence_children_parse_then_fail_validation():
    doc = {
        "root": {
            "id": "r",
            "label": "x",
            "attack": {"kind": "dictionary", "dictionary": "d"},
            "countermeasure": {
                "id": "cm",
                "label": "y",
                "rule": {"kind": "min_length", "n": 8},
                "children": [{"id": "sub", "label": "z", "attack": {"kind": "dictionary", "dictionary": "d"}}],
            },
        }
    }
    tree = tree_from_json(doc)
    issues = validate_tree(tree)
    assert any("defence node must not have children" in i.message for i in issues)
