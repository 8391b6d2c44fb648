import random

from ndsuggest.classify import LogicClass, classify_formula, classify_goal
from ndsuggest.parser import Parser
from ndsuggest.terms import iter_subterms, subterm_at

from .gen import random_formula


def test_class_total_order():
    assert LogicClass.PROP < LogicClass.FO < LogicClass.HO
    assert max(LogicClass.PROP, LogicClass.HO) == LogicClass.HO
    assert LogicClass.parse("fo") == LogicClass.FO
    assert str(LogicClass.HO) == "HO"


def test_higher_order_examples(ref_parser):
    # applying p : o>o to a formula makes the problem higher-order
    assert classify_goal(ref_parser.parse("(p (a & b))")) == LogicClass.HO
    assert classify_goal(ref_parser.parse("(p (a & b)) => (p (b & a))")) == LogicClass.HO
    # equality between formulas needs boolean extensionality
    assert classify_goal(ref_parser.parse("(b & a) = (a & b)")) == LogicClass.HO


def test_propositional_examples(ref_parser):
    assert classify_goal(ref_parser.parse("(b & a) <=> (a & b)")) == LogicClass.PROP
    assert classify_goal(ref_parser.parse("a & ~b")) == LogicClass.PROP


def test_first_order_examples():
    p = Parser()
    assert classify_goal(p.parse("all x:i . (q:(i>o) x)")) == LogicClass.FO
    assert classify_goal(p.parse("d:i = e:i")) == LogicClass.FO
    # atoms over individuals stay propositional
    assert classify_goal(p.parse("(q d)")) == LogicClass.PROP


def test_functional_equality_and_quantifier_are_higher_order():
    p = Parser()
    assert classify_formula(p.parse("f:(i>o) = g:(i>o)")) == LogicClass.HO
    assert classify_formula(p.parse("all h:(i>o) . (h d:i)")) == LogicClass.HO


def test_walkthrough_goal_classes(ref_parser, walkthrough):
    # goal progression of the worked example: HO, HO, HO, then PROP
    goals = {
        "start": ("C", LogicClass.HO),
        "after_impi": ("L2", LogicClass.HO),
        "after_eqsubst": ("L3", LogicClass.HO),
        "after_equiv2eq": ("L4", LogicClass.PROP),
    }
    for state, (label, expected) in goals.items():
        formula = walkthrough[state].line(label).formula
        assert classify_goal(formula) == expected, state


def test_subformula_class_never_exceeds_formula_class():
    rng = random.Random(4242)
    for _ in range(300):
        t = random_formula(rng, rng.randint(1, 10), first_order=True)
        cls = classify_formula(t)
        for pos, _ in iter_subterms(t):
            sub = subterm_at(t, pos)
            if sub.type.__class__.__name__ == "BaseType" and sub.type.name == "o":
                assert classify_formula(sub) <= cls
