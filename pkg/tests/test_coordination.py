"""Dedup grouping, replacement selection, and rescue planning."""

import math
import random

import pytest

from hotl.coordination import (
    DeliveryCandidate,
    Detection,
    ReplacementCandidate,
    deduplicate_detections,
    plan_rescue,
    select_replacement,
)


def det(did, agent, x, y, conf=0.9, err=2.0, tick=0):
    return Detection(did, agent, x, y, conf, err, tick)


class TestDedup:
    def test_two_close_sightings_collapse(self):
        # dist((100,100),(104,103)) = 5; limit = 10 + 2 + 2 = 14
        groups = deduplicate_detections(
            [det("det-1", "uav1", 100, 100), det("det-2", "uav2", 104, 103)]
        )
        assert len(groups) == 1
        assert {d.detection_id for d in groups[0].members} == {"det-1", "det-2"}
        assert not groups[0].ambiguous

    def test_far_sightings_stay_separate(self):
        groups = deduplicate_detections(
            [det("det-1", "uav1", 100, 100), det("det-2", "uav2", 150, 100)]
        )
        assert len(groups) == 2

    def test_large_error_marks_group_ambiguous(self):
        groups = deduplicate_detections(
            [det("det-1", "uav1", 100, 100), det("det-2", "uav2", 130, 100, err=40.0)]
        )
        # 30 <= 10 + 2 + 40, so they link, but the 40 m error exceeds
        # the 15 m accuracy limit.
        assert len(groups) == 1
        assert groups[0].ambiguous

    def test_transitive_chain_links(self):
        # a-b and b-c are within range, a-c is not; single linkage
        # still puts all three in one group.
        groups = deduplicate_detections(
            [
                det("det-1", "uav1", 0, 0),
                det("det-2", "uav2", 12, 0),
                det("det-3", "uav3", 24, 0),
            ]
        )
        assert len(groups) == 1

    def test_best_member_prefers_confidence_then_agent_id(self):
        g = deduplicate_detections(
            [det("det-1", "uav2", 0, 0, conf=0.8), det("det-2", "uav1", 1, 0, conf=0.8)]
        )[0]
        assert g.best.agent_id == "uav1"

    def test_group_id_from_lowest_member(self):
        g = deduplicate_detections([det("det-9", "uav1", 0, 0), det("det-2", "uav2", 1, 1)])[0]
        assert g.group_id == "g:det-2"

    def test_empty_input(self):
        assert deduplicate_detections([]) == []

    def test_nonpositive_radius_rejected(self):
        with pytest.raises(ValueError):
            deduplicate_detections([det("det-1", "uav1", 0, 0)], radius=0)

    def test_shuffle_invariance(self):
        rnd = random.Random(13)
        base = [
            det(f"det-{i}", f"uav{i % 3 + 1}", rnd.uniform(0, 200), rnd.uniform(0, 200))
            for i in range(8)
        ]
        reference = deduplicate_detections(list(base))
        ref_sets = sorted(frozenset(d.detection_id for d in g.members) for g in reference)
        for _ in range(20):
            rnd.shuffle(base)
            got = deduplicate_detections(list(base))
            assert sorted(frozenset(d.detection_id for d in g.members) for g in got) == ref_sets

    def test_bad_confidence_rejected(self):
        with pytest.raises(ValueError):
            det("det-1", "uav1", 0, 0, conf=1.5)


class TestSelectReplacement:
    def cands(self):
        return [
            ReplacementCandidate("uav1", 0, 0, True, True),  # requester
            ReplacementCandidate("uav2", 50, 0, True, True),
            ReplacementCandidate("uav3", 80, 0, True, True),
        ]

    def test_nearest_permitted_wins(self):
        choice, rows = select_replacement(self.cands(), "uav1", 0, 0)
        assert choice == "uav2"
        assert any(r["agent"] == "uav1" and not r["eligible"] for r in rows)

    def test_permission_excludes(self):
        cands = self.cands()
        cands[1] = ReplacementCandidate("uav2", 50, 0, False, True)
        choice, rows = select_replacement(cands, "uav1", 0, 0)
        assert choice == "uav3"
        reasons = {r["agent"]: r.get("reason") for r in rows}
        assert "not granted" in reasons["uav2"]

    def test_capability_excludes(self):
        cands = [
            ReplacementCandidate("uav1", 0, 0, True, True),
            ReplacementCandidate("uav2", 10, 0, True, False),
        ]
        choice, _ = select_replacement(cands, "uav1", 0, 0)
        assert choice is None

    def test_distance_tie_breaks_to_lower_id(self):
        cands = [
            ReplacementCandidate("uav1", 0, 0, True, True),
            ReplacementCandidate("uav3", 0, 30, True, True),
            ReplacementCandidate("uav2", 30, 0, True, True),
        ]
        choice, _ = select_replacement(cands, "uav1", 0, 0)
        assert choice == "uav2"

    def test_rationale_covers_every_candidate(self):
        _, rows = select_replacement(self.cands(), "uav1", 0, 0)
        assert {r["agent"] for r in rows} == {"uav1", "uav2", "uav3"}


class TestPlanRescue:
    def test_delivery_beats_boat(self):
        # courier 500 m away at 5 m/s: eta = 100 + 20 = 120; 120 + 30 < 300
        d = plan_rescue(
            "v1", 0, 0, boat_eta=300,
            couriers=[DeliveryCandidate("uav2", 500, 0, 5.0, True)],
        )
        assert d.choice == "deliver-flotation"
        assert d.delivery_agent == "uav2"
        assert d.delivery_eta == pytest.approx(120.0)
        assert "beats the boat" in d.rationale

    def test_boat_beats_delivery(self):
        d = plan_rescue(
            "v1", 0, 0, boat_eta=100,
            couriers=[DeliveryCandidate("uav2", 500, 0, 5.0, True)],
        )
        assert d.choice == "stream-only"
        assert d.delivery_agent is None

    def test_margin_is_inclusive_boundary(self):
        # eta 120 + margin 30 == boat 150: not strictly less, stream only
        d = plan_rescue(
            "v1", 0, 0, boat_eta=150,
            couriers=[DeliveryCandidate("uav2", 500, 0, 5.0, True)],
        )
        assert d.choice == "stream-only"

    def test_no_courier_available(self):
        d = plan_rescue("v1", 0, 0, boat_eta=600, couriers=[])
        assert d.choice == "stream-only"
        assert d.delivery_eta is None

    def test_unpermitted_courier_ignored(self):
        d = plan_rescue(
            "v1", 0, 0, boat_eta=600,
            couriers=[DeliveryCandidate("uav2", 10, 0, 5.0, False)],
        )
        assert d.choice == "stream-only"

    def test_forced_stream_only_overrides(self):
        d = plan_rescue(
            "v1", 0, 0, boat_eta=600,
            couriers=[DeliveryCandidate("uav2", 10, 0, 5.0, True)],
            forced_stream_only=True,
        )
        assert d.choice == "stream-only"
        assert "Operator" in d.rationale

    def test_nearest_courier_chosen(self):
        d = plan_rescue(
            "v1", 0, 0, boat_eta=600,
            couriers=[
                DeliveryCandidate("uav3", 100, 0, 5.0, True),
                DeliveryCandidate("uav2", 400, 0, 5.0, True),
            ],
        )
        assert d.delivery_agent == "uav3"
        assert d.delivery_eta == pytest.approx(100 / 5.0 + 20.0)
