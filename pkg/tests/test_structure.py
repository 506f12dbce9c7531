import random

import pytest

from noteforge.dedup import KeyframeSet
from noteforge.errors import EmptyContent, SchemaViolation
from noteforge.graph import validate_dag
from noteforge.providers.mock import MockTables, MockVisionLanguageProvider
from noteforge.structure import (
    Chapter,
    Relation,
    build_dag,
    build_hierarchy,
    cap_text,
    caption_keyframes,
    classify_relations,
    cluster_chapters,
    extract_steps,
    snap_boundary,
)

from conftest import make_frame, make_segment


class FlakyCaptioner(MockVisionLanguageProvider):
    def __init__(self, fail_digest):
        super().__init__()
        self.fail_digest = fail_digest

    def caption_pair(self, prev, cur, context=""):
        if cur.content_digest == self.fail_digest:
            raise SchemaViolation("scripted caption failure")
        return super().caption_pair(prev, cur, context)


class TestCaptioning:
    def test_single_keyframe_is_change(self):
        frames = [make_frame(0, color=(10, 10, 10))]
        captions = caption_keyframes(KeyframeSet((0,)), frames,
                                     MockVisionLanguageProvider())
        assert len(captions) == 1
        assert captions[0].kind == "CHANGE"

    def test_digest_pattern_a_a_b(self):
        frames = [make_frame(0, color=(1, 1, 1)),
                  make_frame(1, color=(1, 1, 1)),
                  make_frame(2, color=(250, 0, 0))]
        captions = caption_keyframes(KeyframeSet((0, 1, 2)), frames,
                                     MockVisionLanguageProvider())
        assert [c.kind for c in captions] == ["CHANGE", "CONTINUOUS", "CHANGE"]

    def test_scripted_caption_table(self):
        frames = [make_frame(i, color=(i * 37 % 256, 20, 20)) for i in range(6)]
        table = {f.content_digest: f"Scripted caption {i}."
                 for i, f in enumerate(frames)}
        vlm = MockVisionLanguageProvider(MockTables(captions={"by_digest": table}))
        captions = caption_keyframes(KeyframeSet(tuple(range(6))), frames, vlm)
        assert [c.text for c in captions] == [f"Scripted caption {i}." for i in range(6)]

    def test_schema_violation_downgrades_to_continuous(self):
        frames = [make_frame(0, color=(1, 1, 1)), make_frame(1, color=(99, 0, 0))]
        warnings = []
        captions = caption_keyframes(KeyframeSet((0, 1)), frames,
                                     FlakyCaptioner(frames[1].content_digest),
                                     warnings=warnings)
        assert captions[1].kind == "CONTINUOUS"
        assert any("downgraded" in w for w in warnings)

    def test_first_frame_downgrade_coerced_back_to_change(self):
        frames = [make_frame(0, color=(1, 1, 1))]
        warnings = []
        captions = caption_keyframes(KeyframeSet((0,)), frames,
                                     FlakyCaptioner(frames[0].content_digest),
                                     warnings=warnings)
        assert captions[0].kind == "CHANGE"


def _captions_for(frames):
    return caption_keyframes(KeyframeSet(tuple(f.index for f in frames)), frames,
                             MockVisionLanguageProvider())


class TestChapters:
    def test_scripted_five_chapters(self):
        frames = [make_frame(i, timestamp=i * 10.0, color=(i * 50 % 256, 0, 0))
                  for i in range(5)]
        captions = _captions_for(frames)
        spans = [{"t_s": i * 10.0, "t_e": (i + 1) * 10.0} for i in range(5)]
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "chapter_cluster", "response": {"chapters": spans}}]))
        chapters = cluster_chapters(captions, [], 50.0, vlm)
        assert [c.chapter_id for c in chapters] == [1, 2, 3, 4, 5]
        assert chapters[0].t_s == 0.0 and chapters[-1].t_e == 50.0

    def test_degenerate_single_caption(self):
        frames = [make_frame(0, color=(3, 3, 3))]
        chapters = cluster_chapters(_captions_for(frames), [], 30.0,
                                    MockVisionLanguageProvider())
        assert len(chapters) == 1
        assert (chapters[0].t_s, chapters[0].t_e) == (0.0, 30.0)

    def test_overlap_normalization_hand_computed(self):
        frames = [make_frame(0, color=(4, 4, 4))]
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "chapter_cluster",
             "response": {"chapters": [{"t_s": 0, "t_e": 10}, {"t_s": 8, "t_e": 20}]}}]))
        chapters = cluster_chapters(_captions_for(frames), [], 20.0, vlm)
        assert [(c.t_s, c.t_e) for c in chapters] == [(0.0, 10.0), (10.0, 20.0)]

    def test_schema_failure_falls_back_degraded(self):
        frames = [make_frame(0, color=(5, 5, 5))]
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "chapter_cluster",
             "responses": [{"bad": 1}, {"bad": 2}]}]))
        warnings = []
        chapters = cluster_chapters(_captions_for(frames), [], 12.0, vlm,
                                    warnings=warnings)
        assert len(chapters) == 1
        assert "DEGRADED" in chapters[0].flags

    def test_chapters_tile_timeline(self):
        frames = [make_frame(i, timestamp=float(i * 7), color=(i * 31 % 256, 9, 9))
                  for i in range(6)]
        segs = [make_segment(i, f"sentence {i}.", i * 6.0, i * 6.0 + 4.0)
                for i in range(7)]
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "chapter_cluster",
             "response": {"chapters": [
                 {"t_s": 0, "t_e": 11.8}, {"t_s": 13, "t_e": 29.5},
                 {"t_s": 31, "t_e": 42.0}]}}]))
        chapters = cluster_chapters(_captions_for(frames), segs, 42.0, vlm)
        assert chapters[0].t_s == 0.0
        assert chapters[-1].t_e == 42.0
        for a, b in zip(chapters, chapters[1:]):
            assert a.t_e == b.t_s

    def test_empty_inputs_rejected(self):
        with pytest.raises(EmptyContent):
            cluster_chapters([], [], 10.0, MockVisionLanguageProvider())


class TestSteps:
    def _chapter(self, n_segments=3, t_s=0.0, t_e=30.0):
        segs = [make_segment(i, f"step sentence {i}.",
                             t_s + i * 10.0, t_s + i * 10.0 + 8.0)
                for i in range(n_segments)]
        return Chapter(chapter_id=2, t_s=t_s, t_e=t_e, segments=segs)

    def test_scripted_six_sequential_steps(self):
        chapter = self._chapter(3, 0.0, 30.0)
        steps_raw = [{"t_s": i * 5.0, "t_e": (i + 1) * 5.0} for i in range(6)]
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "step_extract", "when": {"chapter_id": "2"},
             "response": {"steps": steps_raw}}]))
        steps = extract_steps(chapter, vlm)
        assert [s.step_id for s in steps] == [f"2.{j}" for j in range(1, 7)]

    def test_single_sentence_single_step(self):
        chapter = self._chapter(1, 0.0, 10.0)
        steps = extract_steps(chapter, MockVisionLanguageProvider())
        assert len(steps) == 1
        assert (steps[0].t_s, steps[0].t_e) == (0.0, 10.0)

    def test_step_outside_chapter_clipped(self):
        chapter = self._chapter(2, 10.0, 30.0)
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "step_extract", "when": {"chapter_id": "2"},
             "response": {"steps": [{"t_s": 5.0, "t_e": 20.0},
                                    {"t_s": 20.0, "t_e": 45.0}]}}]))
        steps = extract_steps(chapter, vlm)
        assert steps[0].t_s == 10.0
        assert steps[-1].t_e == 30.0

    def test_empty_chapter_rejected(self):
        with pytest.raises(EmptyContent):
            extract_steps(Chapter(chapter_id=1, t_s=0, t_e=5),
                          MockVisionLanguageProvider())


class TestRelations:
    ELEMENTS = [(1, 0.0), (2, 10.0), (3, 20.0), (4, 30.0), (5, 40.0)]

    def test_scripted_parallel_group(self):
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "relation_classify", "when": {"level": "chapter"},
             "response": {"relations": [{"kind": "PARALLEL", "members": [2, 3, 4]}]}}]))
        relations = classify_relations(self.ELEMENTS, "content", "chapter", vlm)
        parallel = [r for r in relations if r.kind == "PARALLEL"]
        assert parallel[0].members == (2, 3, 4)

    def test_two_elements_scripted_sequential(self):
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "relation_classify",
             "response": {"relations": [{"kind": "SEQUENTIAL", "from": 1, "to": 2}]}}]))
        relations = classify_relations([(1, 0.0), (2, 5.0)], "c", "chapter", vlm)
        assert relations == [Relation(kind="SEQUENTIAL", from_id=1, to_id=2)]

    def test_unknown_id_dropped_with_orphan_chain(self):
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "relation_classify",
             "response": {"relations": [{"kind": "SEQUENTIAL", "from": 2, "to": 9}]}}]))
        warnings = []
        relations = classify_relations([(1, 0.0), (2, 10.0), (3, 20.0)], "c",
                                       "chapter", vlm, warnings)
        assert any("unknown id" in w for w in warnings)
        seq_pairs = {(r.from_id, r.to_id) for r in relations if r.kind == "SEQUENTIAL"}
        assert (1, 2) in seq_pairs or (2, 1) in seq_pairs or (2, 3) in seq_pairs
        covered = {x for r in relations for x in (r.from_id, r.to_id) if x is not None}
        assert covered >= {1, 2, 3}

    def test_singleton_gets_unary_marker(self):
        relations = classify_relations([(1, 0.0)], "c", "chapter",
                                       MockVisionLanguageProvider(MockTables(completions=[
                                           {"template_id": "relation_classify",
                                            "response": {"relations": []}}])))
        assert relations == [Relation(kind="SEQUENTIAL", from_id=1, to_id=None)]

    def test_every_element_covered(self, rng):
        for _ in range(20):
            n = rng.randint(1, 8)
            elements = [(i + 1, i * 5.0) for i in range(n)]
            relations = classify_relations(elements, "c", "chapter",
                                           MockVisionLanguageProvider())
            covered = set()
            for r in relations:
                if r.kind == "SEQUENTIAL":
                    covered.update(x for x in (r.from_id, r.to_id) if x is not None)
                else:
                    covered.update(r.members)
            assert covered == {i + 1 for i in range(n)}


class TestBuildDag:
    ELEMENTS = [(1, 0.0), (2, 10.0), (3, 20.0), (4, 30.0), (5, 40.0)]

    def test_chain(self):
        relations = [Relation("SEQUENTIAL", a, a + 1) for a in range(1, 5)]
        g = build_dag(self.ELEMENTS, relations)
        assert g.edges == [(1, 2), (2, 3), (3, 4), (4, 5)]
        assert validate_dag(g) == []

    def test_diamond_from_parallel_group(self):
        relations = [Relation("PARALLEL", members=(2, 3, 4))]
        g = build_dag(self.ELEMENTS, relations)
        assert set(g.edges) == {(1, 2), (1, 3), (1, 4), (2, 5), (3, 5), (4, 5)}

    def test_parallel_members_share_neighbor_sets(self):
        relations = [Relation("PARALLEL", members=(2, 3, 4))]
        g = build_dag(self.ELEMENTS, relations)
        preds = {m: tuple(sorted(g.predecessors(m))) for m in (2, 3, 4)}
        succs = {m: tuple(sorted(g.successors(m))) for m in (2, 3, 4)}
        assert len(set(preds.values())) == 1
        assert len(set(succs.values())) == 1

    def test_parallel_group_at_edges_uses_virtual_bounds(self):
        relations = [Relation("PARALLEL", members=(1, 2))]
        g = build_dag([(1, 0.0), (2, 10.0), (3, 20.0)], relations)
        assert set(g.edges) == {(1, 3), (2, 3)}

    def test_cycle_forming_edge_dropped(self):
        warnings = []
        relations = [Relation("SEQUENTIAL", 1, 2), Relation("SEQUENTIAL", 2, 1)]
        g = build_dag([(1, 0.0), (2, 10.0)], relations, warnings)
        assert g.edges == [(1, 2)]
        assert any("cycle" in w for w in warnings)

    def test_randomized_relations_always_yield_valid_dag(self):
        rnd = random.Random(31)
        for _ in range(200):
            n = rnd.randint(1, 9)
            elements = [(i + 1, i * 5.0) for i in range(n)]
            relations = []
            for _ in range(rnd.randint(0, 12)):
                if rnd.random() < 0.6 or n < 3:
                    a, b = rnd.randint(1, n), rnd.randint(1, n)
                    relations.append(Relation("SEQUENTIAL", a, b))
                else:
                    k = rnd.randint(2, min(4, n))
                    members = tuple(rnd.sample(range(1, n + 1), k))
                    relations.append(Relation("PARALLEL", members=members))
            g = build_dag(elements, relations, warnings=[])
            assert validate_dag(g) == []


class TestHelpers:
    def test_snap_boundary(self):
        segs = [make_segment(0, "a", 0.0, 4.8), make_segment(1, "b", 5.2, 9.0)]
        assert snap_boundary(5.0, segs, 1.0) == 4.8
        assert snap_boundary(7.0, segs, 1.0) == 7.0

    def test_cap_text_drops_oldest(self):
        text = "\n".join(f"line {i}" for i in range(100))
        capped = cap_text(text, 200)
        assert len(capped) <= 200
        assert capped.endswith("line 99")
        assert "line 0\n" not in capped


class TestHierarchy:
    def test_full_hierarchy_invariants(self):
        frames = [make_frame(i, timestamp=i * 5.0, color=(i * 29 % 256, 50, 60))
                  for i in range(8)]
        captions = _captions_for(frames)
        segs = [make_segment(i, f"sentence number {i}.", i * 5.0, i * 5.0 + 4.0)
                for i in range(8)]
        vlm = MockVisionLanguageProvider(MockTables(completions=[
            {"template_id": "chapter_cluster",
             "response": {"chapters": [{"t_s": 0, "t_e": 20}, {"t_s": 20, "t_e": 40}]}}]))
        hierarchy = build_hierarchy(captions, segs, 40.0, vlm)
        chapter_ids = [c.chapter_id for c in hierarchy.chapters]
        assert set(hierarchy.chapter_graph.nodes) == set(chapter_ids)
        for chapter in hierarchy.chapters:
            g = hierarchy.step_graphs[chapter.chapter_id]
            assert set(g.nodes) == {s.step_id for s in chapter.steps}
            assert validate_dag(g) == []
            for step in chapter.steps:
                assert chapter.t_s <= step.t_s < step.t_e <= chapter.t_e
