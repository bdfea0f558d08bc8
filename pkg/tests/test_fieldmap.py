"""Three-tier mapping engine: aggregation, tiers, cascade, cache, oracle."""

import pytest

from groundfill import resources
from groundfill.fieldmap import (
    ContextNode,
    FieldDescriptor,
    MappingCache,
    MappingConfig,
    MappingTier,
    aggregate_field_text,
    map_field,
    tier1_direct,
    tier2_contextual,
    tier3_similarity,
)
from groundfill.similarity import jaro_winkler, word_overlap
from groundfill.textutil import normalize_text

from conftest import make_field, make_schema

CFG = MappingConfig()


class TestAggregateFieldText:
    def test_label_and_name_attr(self):
        d = FieldDescriptor(label_text="Cumulative GPA", name_attr="cum_gpa")
        assert aggregate_field_text(d) == "cumulative gpa cum gpa"

    def test_label_then_placeholder(self):
        d = FieldDescriptor(placeholder="MM/DD/YYYY", label_text="Date of Birth")
        assert aggregate_field_text(d) == "date of birth mm dd yyyy"

    def test_single_aria_source(self):
        assert aggregate_field_text(FieldDescriptor(aria_label="x")) == "x"

    def test_camel_case_name_split(self):
        d = FieldDescriptor(name_attr="cumGpa")
        assert aggregate_field_text(d) == "cum gpa"

    def test_descriptor_needs_some_text(self):
        with pytest.raises(ValueError):
            FieldDescriptor(element_id="only-an-id")


class TestTier1:
    def test_keyword_hit(self):
        schema = make_schema(make_field("user.academics.gpa", keywords=("gpa",)))
        result = tier1_direct("cumulative gpa", schema)
        assert result.field_id == "user.academics.gpa"
        assert result.tier is MappingTier.DIRECT
        assert result.confidence == 1.0

    def test_empty_text_is_none(self):
        schema = make_schema(make_field("a", keywords=("gpa",)))
        assert tier1_direct("", schema) is None

    def test_whole_word_only(self):
        schema = make_schema(make_field("a", keywords=("act",)))
        assert tier1_direct("activities list", schema) is None
        assert tier1_direct("act composite", schema) is not None

    def test_longest_keyword_wins(self):
        schema = make_schema(
            make_field("a.short", keywords=("gpa",)),
            make_field("a.long", keywords=("cumulative gpa",)),
        )
        assert tier1_direct("cumulative gpa", schema).field_id == "a.long"

    def test_equal_length_tie_breaks_to_smaller_id(self):
        first = make_schema(
            make_field("alpha.city", keywords=("city",)),
            make_field("beta.city", keywords=("city",)),
        )
        second = make_schema(
            make_field("beta.city", keywords=("city",)),
            make_field("alpha.city", keywords=("city",)),
        )
        assert tier1_direct("city", first).field_id == "alpha.city"
        assert tier1_direct("city", second).field_id == "alpha.city"


class TestTier2:
    def test_city_under_mailing_address(self, reference_schema):
        d = FieldDescriptor(
            label_text="City",
            ancestors=(ContextNode(tag="section", heading_text="Mailing Address"),),
        )
        result = tier2_contextual(d, reference_schema)
        assert result.field_id == "user.profile.address.city"
        assert result.tier is MappingTier.CONTEXTUAL
        assert result.confidence == 0.9

    def test_start_date_under_activities(self, reference_schema):
        d = FieldDescriptor(
            label_text="Start date",
            ancestors=(
                ContextNode(tag="fieldset", heading_text="Extracurricular Activities"),
            ),
        )
        result = tier2_contextual(d, reference_schema)
        assert result.field_id == "user.activities.0.start_date"

    def test_no_ancestors_is_none(self, reference_schema):
        d = FieldDescriptor(label_text="City")
        assert tier2_contextual(d, reference_schema) is None

    def test_nearest_ancestor_wins(self, reference_schema):
        d = FieldDescriptor(
            label_text="City",
            ancestors=(
                ContextNode(tag="div", heading_text="High School"),
                ContextNode(tag="section", heading_text="Mailing Address"),
            ),
        )
        # Ancestors are outermost-first: Mailing Address is nearest.
        assert tier2_contextual(d, reference_schema).field_id == "user.profile.address.city"

    def test_id_attr_tokens_count_as_context(self, reference_schema):
        d = FieldDescriptor(
            label_text="State",
            ancestors=(ContextNode(tag="div", id_attr="mailing_address"),),
        )
        assert tier2_contextual(d, reference_schema).field_id == "user.profile.address.state"


def tier3_oracle(text: str, schema, cfg: MappingConfig):
    """Exhaustive argmax over fields, recomputed with the raw metrics."""
    best = None
    for fid in sorted(schema.fields):
        intent = normalize_text(schema.fields[fid].intent)
        score = cfg.jw_weight * jaro_winkler(text, intent) + cfg.overlap_weight * word_overlap(
            text, intent
        )
        if best is None or score > best[1]:
            best = (fid, score)
    if best is None or best[1] < cfg.similarity_threshold:
        return None
    return best


class TestTier3:
    def test_identity_with_intent_scores_one(self):
        schema = make_schema(
            make_field("a", intent="Combined total score on the SAT.", keywords=("zz",)),
            make_field("b", intent="Rank in the graduating cohort.", keywords=("qq",)),
        )
        text = normalize_text("Combined total score on the SAT.")
        result = tier3_similarity(text, schema, CFG)
        assert result.field_id == "a"
        assert result.confidence == pytest.approx(1.0)

    def test_no_shared_vocabulary_is_none(self):
        schema = make_schema(make_field("a", intent="alpha beta gamma", keywords=("zz",)))
        assert tier3_similarity("qqq www", schema, CFG) is None

    def test_agrees_with_bruteforce_oracle_on_fixture(self, reference_schema):
        for entry in resources.mapping_fixture():
            descriptor = resources.descriptor_from_dict(entry["descriptor"])
            text = aggregate_field_text(descriptor)
            expected = tier3_oracle(text, reference_schema, CFG)
            actual = tier3_similarity(text, reference_schema, CFG)
            if expected is None:
                assert actual is None, text
            else:
                assert actual is not None, text
                assert actual.field_id == expected[0]
                assert actual.confidence == pytest.approx(expected[1], abs=1e-12)

    def test_never_below_threshold(self, reference_schema):
        for entry in resources.mapping_fixture():
            descriptor = resources.descriptor_from_dict(entry["descriptor"])
            result = tier3_similarity(
                aggregate_field_text(descriptor), reference_schema, CFG
            )
            if result is not None:
                assert result.confidence >= CFG.similarity_threshold


class TestMapField:
    def test_direct_short_circuits_tier3(self):
        # Text equals the intent (tier3 would score 1.0) but a keyword hits first.
        schema = make_schema(
            make_field("a", intent="cumulative gpa", keywords=("gpa",))
        )
        d = FieldDescriptor(label_text="cumulative gpa")
        assert map_field(d, schema, CFG).tier is MappingTier.DIRECT

    def test_gibberish_is_unmapped(self, reference_schema):
        d = FieldDescriptor(label_text="zzqx")
        result = map_field(d, reference_schema, CFG)
        assert result.tier is MappingTier.UNMAPPED
        assert result.field_id is None

    def test_cache_short_circuits_tiers(self, reference_schema, monkeypatch):
        import groundfill.fieldmap as fm

        calls = {"n": 0}
        original = fm.tier1_direct

        def counting(text, schema):
            calls["n"] += 1
            return original(text, schema)

        monkeypatch.setattr(fm, "tier1_direct", counting)
        cache = MappingCache()
        d = FieldDescriptor(label_text="Cumulative GPA")
        first = fm.map_field(d, reference_schema, CFG, cache)
        second = fm.map_field(d, reference_schema, CFG, cache)
        assert calls["n"] == 1
        assert first == second

    def test_pure_given_empty_cache(self, reference_schema):
        d = FieldDescriptor(
            label_text="Start Date",
            ancestors=(ContextNode(tag="div", heading_text="Extracurricular Activities"),),
        )
        results = {map_field(d, reference_schema, CFG, MappingCache()) for _ in range(3)}
        assert len(results) == 1

    def test_labeled_fixture_full_accuracy(self, reference_schema):
        from groundfill.evalharness import run_mapping_fixture

        accuracy, rows = run_mapping_fixture(reference_schema)
        assert accuracy == 1.0, [r for r in rows if not r["ok"]]

    def test_cascade_monotonicity(self, reference_schema):
        # Whenever tier1 succeeds on the aggregated text, map_field is Direct
        # regardless of configuration.
        for entry in resources.mapping_fixture():
            d = resources.descriptor_from_dict(entry["descriptor"])
            text = aggregate_field_text(d)
            for threshold in (0.5, 0.85, 1.0):
                cfg = MappingConfig(similarity_threshold=threshold)
                if tier1_direct(text, reference_schema):
                    assert map_field(d, reference_schema, cfg).tier is MappingTier.DIRECT


class TestMappingConfig:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            MappingConfig(jw_weight=0.7, overlap_weight=0.5)

    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            MappingConfig(similarity_threshold=0.0)


class TestDebugTrace:
    def test_debug_flag_emits_score_trace(self, reference_schema, caplog):
        import logging

        cfg = MappingConfig(debug=True)
        d = FieldDescriptor(label_text="Cumulative GPA")
        with caplog.at_level(logging.DEBUG, logger="groundfill.fieldmap"):
            map_field(d, reference_schema, cfg)
        assert any("score_per_field" in message for message in caplog.messages)
