import math

import pytest

from ndsuggest.classify import LogicClass
from ndsuggest.resources import (
    AgentRunRecord,
    Directive,
    DirectiveKind,
    RatingState,
    ResourceConfig,
    ResourceManager,
    RunOutcome,
    apply_directive,
    build_reports,
    is_active,
    record_run,
    resource_step,
)

CFG = ResourceConfig(threshold=3.0, window=10, penalty=1.0, min_active=4)


def rec(agent, outcome, ms=0.0, n=0, epoch=1):
    return AgentRunRecord(agent, epoch, ms, outcome, n)


def failures(state, k, cfg=CFG):
    for _ in range(k):
        state = record_run(state, rec(state.agent, RunOutcome.NO_CONTRIBUTION), cfg)
    return state


class TestRecordRun:
    def test_penalty_ladder_and_retirement(self):
        st = RatingState.fresh("x", baseline=1.0)
        ratings = []
        for _ in range(3):
            st = failures(st, 1)
            ratings.append(st.rating)
        assert ratings == [2.0, 3.0, 4.0]
        # retirement needs a strictly greater rating, so only the third hits
        assert st.retired
        st2 = failures(RatingState.fresh("x", 1.0), 2)
        assert not st2.retired

    def test_contribution_resets_failures(self):
        st = failures(RatingState.fresh("x", 1.0), 2)
        st = record_run(st, rec("x", RunOutcome.CONTRIBUTED, n=1), CFG)
        assert st.failures == 0
        assert st.rating == pytest.approx(st.time_component())

    def test_window_average_enters_rating(self):
        st = RatingState.fresh("x", 1.0)
        for _ in range(10):
            st = record_run(st, rec("x", RunOutcome.CONTRIBUTED, ms=10.0, n=1), CFG)
        assert st.rating == pytest.approx(1.0 + math.log10(11.0))
        assert not st.retired

    def test_window_is_bounded(self):
        st = RatingState.fresh("x", 1.0)
        for i in range(15):
            st = record_run(st, rec("x", RunOutcome.CONTRIBUTED, ms=float(i), n=1), CFG)
        assert len(st.window) == 10
        assert st.window[0] == 5.0

    def test_interruption_counts_as_failure(self):
        st = RatingState.fresh("x", 1.0)
        st = record_run(st, rec("x", RunOutcome.INTERRUPTED), CFG)
        assert st.failures == 1

    def test_retirement_bound_formula(self):
        # with time component t, retirement takes floor((threshold-t)/penalty)+1
        for baseline, expected in [(1.0, 3), (0.5, 3), (1.5, 2), (2.5, 1)]:
            st = RatingState.fresh("x", baseline)
            k = 0
            while not st.retired:
                st = failures(st, 1)
                k += 1
                assert k < 10
            t = baseline
            assert k == math.floor((CFG.threshold - t) / CFG.penalty) + 1


class TestIsActive:
    def test_class_gating(self):
        st = RatingState.fresh("x", 1.0)
        assert not is_active(st, CFG, LogicClass.PROP, LogicClass.FO, "ForallE")
        assert is_active(st, CFG, LogicClass.HO, LogicClass.FO, "ForallE")

    def test_rating_gate(self):
        st = RatingState.fresh("x", 2.0)
        assert is_active(st, CFG, LogicClass.HO, LogicClass.PROP, "AndI")
        assert not is_active(failures(st, 2), CFG, LogicClass.HO, LogicClass.PROP, "AndI")

    def test_user_exclusion_wins(self):
        cfg = ResourceConfig(excluded_commands=frozenset({"AndI"}))
        st = RatingState.fresh("x", 0.5)
        assert not is_active(st, cfg, LogicClass.HO, LogicClass.PROP, "AndI")


class TestResourceStep:
    def states(self, ratings, retired):
        out = {}
        for i, (r, dead) in enumerate(zip(ratings, retired)):
            name = f"a{i}"
            out[name] = RatingState(name, 1.0, rating=r, retired=dead)
        return out

    def test_min_active_reactivation_order(self):
        cfg = ResourceConfig(threshold=3.0, penalty=1.0, min_active=5)
        states = self.states(
            [1.0, 1.0, 1.0, 4.2, 5.0, 3.5],
            [False, False, False, True, True, True],
        )
        membership = {a: "EqSubst" for a in states}
        classes = {"EqSubst": LogicClass.HO}
        reports = build_reports(states, membership)
        ds = resource_step(reports, states, cfg, membership, classes, LogicClass.HO)
        reactivations = [d for d in ds if d.kind == DirectiveKind.REACTIVATE]
        assert [d.agent for d in reactivations] == ["a5", "a3"]  # 3.5 then 4.2
        assert all(d.rating == pytest.approx(2.0) for d in reactivations)

    def test_no_violation_means_no_directives(self):
        states = self.states([1.0, 1.0, 1.0, 1.0], [False] * 4)
        membership = {a: "AndI" for a in states}
        classes = {"AndI": LogicClass.PROP}
        ds = resource_step(
            build_reports(states, membership), states, CFG, membership, classes,
            LogicClass.HO,
        )
        assert ds == []

    def test_class_exclusion_directives(self):
        states = self.states([1.0] * 4, [False] * 4)
        membership = {a: "EqSubst" for a in states}
        classes = {"EqSubst": LogicClass.HO}
        ds = resource_step(
            build_reports(states, membership), states, CFG, membership, classes,
            LogicClass.PROP,
        )
        excludes = [d for d in ds if d.kind == DirectiveKind.EXCLUDE]
        assert sorted(d.agent for d in excludes) == ["a0", "a1", "a2", "a3"]

    def test_second_chance(self):
        cfg = ResourceConfig(threshold=3.0, penalty=1.0, min_active=1, second_chance=0.5)
        states = self.states([4.0, 5.0, 2.0, 6.0], [True, True, False, True])
        membership = {a: "EqSubst" for a in states}
        classes = {"EqSubst": LogicClass.HO}
        ds = resource_step(
            build_reports(states, membership), states, cfg, membership, classes,
            LogicClass.HO,
        )
        reactivated = {d.agent for d in ds if d.kind == DirectiveKind.REACTIVATE}
        assert reactivated == {"a0", "a1", "a3"}

    def test_idempotence(self):
        cfg = ResourceConfig(threshold=3.0, penalty=1.0, min_active=5)
        states = self.states(
            [1.0, 1.0, 1.0, 4.2, 5.0, 3.5],
            [False, False, False, True, True, True],
        )
        membership = {a: "EqSubst" for a in states}
        classes = {"EqSubst": LogicClass.HO}
        ds = resource_step(
            build_reports(states, membership), states, cfg, membership, classes,
            LogicClass.PROP,
        )
        for d in ds:
            states[d.agent] = apply_directive(states[d.agent], d, cfg)
        again = resource_step(
            build_reports(states, membership), states, cfg, membership, classes,
            LogicClass.PROP,
        )
        assert again == []

    def test_directive_precedence_until_contribution(self):
        st = RatingState("x", 1.0, rating=5.0, retired=True)
        st = apply_directive(st, Directive(DirectiveKind.REACTIVATE, "x", 2.0), CFG)
        assert st.rating == 2.0 and not st.retired and st.override
        assert st.failures == 0
        # failures do not push the pinned rating around
        st = record_run(st, rec("x", RunOutcome.NO_CONTRIBUTION), CFG)
        assert st.rating == 2.0 and not st.retired
        # a contribution releases the override
        st = record_run(st, rec("x", RunOutcome.CONTRIBUTED, n=1), CFG)
        assert st.rating == pytest.approx(st.time_component())
        assert not st.override


class TestManager:
    def test_end_to_end_retirement_and_restore(self):
        cfg = ResourceConfig(threshold=3.0, penalty=1.0, min_active=4)
        mgr = ResourceManager(cfg)
        for i in range(5):
            mgr.register(f"a{i}", "EqSubst", 1.0, LogicClass.HO)
        for i in range(2):
            for _ in range(3):
                mgr.record(rec(f"a{i}", RunOutcome.NO_CONTRIBUTION))
        assert mgr.state("a0").retired and mgr.state("a1").retired
        assert not mgr.active("a0", LogicClass.HO)
        directives = mgr.step(LogicClass.HO)
        # 3 active < min_active 4: exactly one reactivation needed
        assert [d.kind for d in directives] == [DirectiveKind.REACTIVATE]
        assert mgr.state(directives[0].agent).rating == pytest.approx(2.0)
        assert sum(1 for a in mgr.states() if mgr.active(a, LogicClass.HO)) == 4

    def test_exclusions_cleared_when_goal_class_rises(self):
        mgr = ResourceManager(CFG)
        mgr.register("e1", "EqSubst", 1.0, LogicClass.HO)
        mgr.register("p1", "AndI", 1.0, LogicClass.PROP)
        mgr.step(LogicClass.PROP)
        assert not mgr.active("e1", LogicClass.PROP)
        assert mgr.active("p1", LogicClass.PROP)
        mgr.step(LogicClass.HO)
        assert mgr.active("e1", LogicClass.HO)

    def test_csv_dump(self):
        mgr = ResourceManager(CFG)
        mgr.register("z", "AndI", 1.0, LogicClass.PROP)
        mgr.record(rec("z", RunOutcome.NO_CONTRIBUTION))
        dump = mgr.csv_dump().splitlines()
        assert dump[0] == "agent,rating,failures,retired"
        assert dump[1] == "z,2.000,1,false"
