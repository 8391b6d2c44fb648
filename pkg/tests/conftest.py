import pytest

from ndsuggest.argmap import ArgMap, LabelsArg, LineRef, PositionsArg
from ndsuggest.parser import Parser
from ndsuggest.proof import PartialProof, apply_tactic
from ndsuggest.tactics import catalog, catalog_by_name

REFERENCE_TEXT = "(p:(o>o) (a:o & b:o)) => (p (b & a))"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.module.__name__.endswith("test_acceptance"):
        name = item.name.removeprefix("test_")
        verdict = "PASS" if rep.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {name}: {verdict}")


@pytest.fixture
def ref_parser():
    p = Parser()
    p.parse(REFERENCE_TEXT)
    return p


@pytest.fixture
def cat():
    return catalog_by_name(catalog())


def _am(descriptor, **values):
    return ArgMap.make(descriptor.name, descriptor.slot_names, values)


@pytest.fixture
def walkthrough(ref_parser, cat):
    """Proof snapshots for each construction step of the worked example."""
    states = {}
    p0 = PartialProof.initial(ref_parser.parse(REFERENCE_TEXT))
    states["start"] = p0
    p1 = apply_tactic(p0, cat["ImpI"].outline, _am(cat["ImpI"], c=LineRef("C")))
    states["after_impi"] = p1
    p2 = apply_tactic(
        p1,
        cat["EqSubst"].outline,
        _am(cat["EqSubst"], u=LineRef("L1"), s=LineRef("L2"), pl=PositionsArg(((1,),))),
    )
    states["after_eqsubst"] = p2
    p3 = apply_tactic(p2, cat["Equiv2Eq"].outline, _am(cat["Equiv2Eq"], c=LineRef("L3")))
    states["after_equiv2eq"] = p3
    p4 = apply_tactic(
        p3,
        cat["PropSolve"].outline,
        _am(cat["PropSolve"], conc=LineRef("L4"), prems=LabelsArg(())),
    )
    states["final"] = p4
    return states


@pytest.fixture
def make_argmap():
    return _am
