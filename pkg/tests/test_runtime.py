import random

import pytest

from ndsuggest.agents import build_societies
from ndsuggest.argmap import ArgMap, LineRef
from ndsuggest.boards import BoardHub, SuggestionEntry
from ndsuggest.classify import LogicClass
from ndsuggest.errors import ProverError
from ndsuggest.proof import current_focus
from ndsuggest.resources import ResourceConfig, ResourceManager
from ndsuggest.runtime import (
    ConcurrentEngine,
    EpochState,
    RuntimeConfig,
    elect,
    pinned_active_set,
    post_extension,
    run_deterministic,
    sort_suggestions,
)
from .gen import random_proof


def fresh_runtime(cat, mode="deterministic", excluded=frozenset()):
    specs = build_societies(cat.values())
    manager = ResourceManager(ResourceConfig(excluded_commands=excluded))
    for s in specs:
        manager.register(s.id, s.command, s.baseline, s.logic_class)
    hub = BoardHub([c.name for c in cat.values()], epoch=1)
    cfg = RuntimeConfig(mode=mode)
    return specs, manager, hub, cfg


def make_state(proof, specs, manager, cfg, epoch=1):
    focus = current_focus(proof)
    return EpochState(
        epoch=epoch,
        proof=proof,
        focus=focus,
        active=pinned_active_set(specs, manager, LogicClass.HO, cfg),
    )


def run_once(cat, proof, permutation_seed=None, excluded=frozenset()):
    specs, manager, hub, cfg = fresh_runtime(cat, excluded=excluded)
    if permutation_seed is not None:
        specs = list(specs)
        random.Random(permutation_seed).shuffle(specs)
        specs = tuple(specs)
    state = make_state(proof, specs, manager, cfg)
    entries = run_deterministic(state, specs, cat.values(), manager, hub, cfg)
    boards = {
        name: frozenset(e.render() for e in hub.board(name).snapshot().entries)
        for name in hub.boards
    }
    elections = {e.command: e.argmap.render() for e in entries}
    return boards, elections, hub, manager


class TestDeterministicFixpoint:
    def test_reference_state_board_fixpoint(self, cat, walkthrough):
        boards, elections, hub, _ = run_once(cat, walkthrough["after_impi"])
        assert boards["EqSubst"] == {
            "EqSubst{u:L1,eq:~,s:L2,pl:~}",
            "EqSubst{u:L1,eq:~,s:L2,pl:[1]}",
        }
        assert elections["EqSubst"] == "EqSubst{u:L1,eq:~,s:L2,pl:[1]}"

    def test_initial_conjecture_suggests_implication_intro(self, cat, walkthrough):
        boards, elections, _, _ = run_once(cat, walkthrough["start"])
        assert elections["ImpI"] == "ImpI{c:C}"

    def test_no_agents_empty_board(self, cat, walkthrough):
        specs, manager, hub, cfg = fresh_runtime(cat)
        state = EpochState(1, walkthrough["after_impi"],
                           current_focus(walkthrough["after_impi"]), frozenset())
        entries = run_deterministic(state, (), cat.values(), manager, hub, cfg)
        assert entries == []
        assert hub.command_board.snapshot().entries == ()

    def test_fixpoint_independent_of_agent_order(self, cat, walkthrough):
        reference = run_once(cat, walkthrough["after_impi"])[:2]
        for seed in range(5):
            assert run_once(cat, walkthrough["after_impi"], permutation_seed=seed)[:2] == reference

    def test_user_excluded_command_not_elected(self, cat, walkthrough):
        _, elections, _, _ = run_once(
            cat, walkthrough["after_impi"], excluded=frozenset({"EqSubst"})
        )
        assert "EqSubst" not in elections

    def test_propositional_goal_gates_quantifier_societies(self, cat, walkthrough):
        proof = walkthrough["after_equiv2eq"]
        boards, elections, hub, _ = run_once(cat, proof)
        # the classification broadcast empties the HO/FO boards
        assert boards["EqSubst"] == frozenset()
        assert boards["ForallE"] == frozenset()
        assert elections["PropSolve"] == "PropSolve{conc:L4,prems:()}"

    def test_final_state_is_quiet(self, cat, walkthrough):
        boards, elections, _, _ = run_once(cat, walkthrough["final"])
        assert elections == {}
        assert all(not entries for entries in boards.values())


class TestElection:
    def test_empty_board_elects_nothing(self, cat, walkthrough):
        hub = BoardHub(["EqSubst"], epoch=1)
        view = hub.board("EqSubst").snapshot()
        assert elect(view, walkthrough["after_impi"], cat["EqSubst"]) is None

    def test_all_empty_argmap_is_not_electable(self, cat, walkthrough):
        hub = BoardHub(["EqSubst"], epoch=1)
        empty = cat["EqSubst"].empty_map(epoch=1)
        hub.board("EqSubst").post(empty)
        view = hub.board("EqSubst").snapshot()
        assert elect(view, walkthrough["after_impi"], cat["EqSubst"]) is None

    def test_inapplicable_entries_filtered(self, cat, walkthrough):
        hub = BoardHub(["EqSubst"], epoch=1)
        # u references the goal line itself: fails the pre-check
        bogus = ArgMap.make(
            "EqSubst", cat["EqSubst"].slot_names,
            {"u": LineRef("L2"), "s": LineRef("L2")}, epoch=1,
        )
        hub.board("EqSubst").post(bogus)
        assert elect(hub.board("EqSubst").snapshot(),
                     walkthrough["after_impi"], cat["EqSubst"]) is None


class TestSorting:
    def entry(self, cmd, filled, total, complete, closing):
        slots = tuple(f"s{i}" for i in range(total))
        values = {f"s{i}": LineRef(f"L{i+1}") for i in range(filled)}
        m = ArgMap.make(cmd, slots, values)
        return SuggestionEntry(cmd, m, filled / total, complete, closing, 1)

    def test_fully_instantiated_first(self):
        eqsubst = self.entry("EqSubst", 3, 4, False, False)
        propsolve = self.entry("PropSolve", 2, 2, True, True)
        assert sort_suggestions([eqsubst, propsolve])[0].command == "PropSolve"

    def test_single_entry(self):
        e = self.entry("AndI", 1, 3, False, False)
        assert sort_suggestions([e]) == [e]

    def test_name_tiebreak(self):
        andi = self.entry("AndI", 1, 3, False, False)
        ande = self.entry("AndE", 1, 3, False, False)
        assert [e.command for e in sort_suggestions([andi, ande])] == ["AndE", "AndI"]

    def test_goal_closing_preference(self):
        axiom = self.entry("Axiom", 1, 2, False, True)
        impi = self.entry("ImpI", 1, 2, False, False)
        assert [e.command for e in sort_suggestions([impi, axiom])] == ["Axiom", "ImpI"]


def test_broadcast_class_propagates_and_drops_stale(cat):
    from ndsuggest.runtime import broadcast_class

    hub = BoardHub(cat.keys(), epoch=1)
    assert broadcast_class(LogicClass.PROP, hub, epoch=1)
    for board in hub.boards.values():
        assert board.snapshot().classification() == LogicClass.PROP
    # re-broadcast is idempotent
    assert broadcast_class(LogicClass.PROP, hub, epoch=1)
    # a stale broadcast is dropped everywhere
    hub.reinitialize_all(2)
    assert not broadcast_class(LogicClass.HO, hub, epoch=1)
    for board in hub.boards.values():
        assert board.snapshot().classification() is None


def test_ho_broadcast_gates_nobody(cat):
    from ndsuggest.agents import build_societies, trigger_set
    from ndsuggest.runtime import broadcast_class

    hub = BoardHub(cat.keys(), epoch=1)
    broadcast_class(LogicClass.HO, hub, epoch=1)
    for spec in build_societies(cat.values()):
        if LogicClass.HO in spec.goal_classes:
            view = hub.board(spec.command).snapshot()
            # empty-trigger agents still fire; nothing is silenced by HO
            if not spec.requires:
                assert trigger_set(spec, view), spec.id


def test_post_extension_guards_strictness(cat):
    hub = BoardHub(["EqSubst"], epoch=1)
    board = hub.board("EqSubst")
    trigger = cat["EqSubst"].empty_map(epoch=1)
    good = trigger.assign({"u": LineRef("L1")}, epoch=1)
    assert post_extension(board, trigger, good)
    with pytest.raises(ProverError):
        post_extension(board, trigger, trigger)
    other = ArgMap.make("EqSubst", cat["EqSubst"].slot_names, {"s": LineRef("L9")}, epoch=1)
    with pytest.raises(ProverError):
        post_extension(board, good, other)


class TestConcurrentEngine:
    def run_concurrent(self, cat, proof, timeout=8.0):
        specs, manager, hub, _ = fresh_runtime(cat, mode="concurrent")
        cfg = RuntimeConfig(mode="concurrent", debounce_ms=0.0,
                            resource_interval_ms=10_000.0, idle_wait_s=0.02)
        engine = ConcurrentEngine(specs, list(cat.values()), manager, hub, cfg)
        try:
            engine.start()
            state = make_state(proof, specs, manager, cfg)
            engine.set_state(state)
            assert engine.quiesce(timeout), "engine did not quiesce"
            entries = sort_suggestions(hub.command_board.snapshot().entries)
            return {e.command: e.argmap.render() for e in entries}
        finally:
            engine.stop()

    def test_agrees_with_deterministic_on_reference_state(self, cat, walkthrough):
        proof = walkthrough["after_impi"]
        _, det, _, _ = run_once(cat, proof)
        conc = self.run_concurrent(cat, proof)
        assert conc == det

    def test_agrees_on_propositional_goal(self, cat, walkthrough):
        proof = walkthrough["after_equiv2eq"]
        _, det, _, _ = run_once(cat, proof)
        conc = self.run_concurrent(cat, proof)
        assert conc == det

    def test_randomized_agreement_smoke(self, cat):
        rng = random.Random(1717)
        for _ in range(10):
            proof = random_proof(rng)
            _, det, _, _ = run_once(cat, proof)
            conc = self.run_concurrent(cat, proof)
            assert conc == det
