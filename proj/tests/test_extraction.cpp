#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cgr/extraction.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cgr;

namespace {

/// Comparable shape of a raw tuple: entity1 | relation | entity2 | conditions.
using TupleKey = std::tuple<std::string, std::string, std::string, std::vector<std::string>>;

std::set<TupleKey> extract_all(const std::map<std::string, std::string>& corpus) {
    RuleBasedExtractor extractor;
    std::set<TupleKey> out;
    for (const auto& [doc_id, text] : corpus) {
        for (const auto& chunk : chunk_document(doc_id, text)) {
            for (const auto& tuple : extract_tuples(chunk, extractor).tuples) {
                out.insert({tuple.entity1, tuple.relation, tuple.entity2, tuple.conditions});
            }
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("extraction") {
    TEST_CASE("chunk_document partitions the text") {
        const std::string text =
            "First sentence about treatment. Second sentence about dosing. Third sentence about "
            "contraindications in pregnancy and beyond.";
        auto chunks = chunk_document("doc", text, 200);
        REQUIRE(!chunks.empty());
        std::string rebuilt;
        std::size_t expected_offset = 0;
        std::size_t index = 0;
        for (const auto& chunk : chunks) {
            CHECK(chunk.doc_id == "doc");
            CHECK(chunk.chunk_index == index++);
            CHECK(chunk.char_offset == expected_offset);
            expected_offset += chunk.text.size();
            rebuilt += chunk.text;
            CHECK(chunk.text.size() <= 200);
        }
        CHECK(rebuilt == text);
    }

    TEST_CASE("oversized sentences fall back to hard cuts") {
        std::string word = "entity";
        std::string text;
        for (int i = 0; i < 100; ++i) text += word + std::to_string(i) + " ";
        auto chunks = chunk_document("doc", text, 200);
        CHECK(chunks.size() > 1);
        std::string rebuilt;
        for (const auto& chunk : chunks) {
            CHECK(chunk.text.size() <= 200);
            rebuilt += chunk.text;
        }
        CHECK(rebuilt == text);
    }

    TEST_CASE("chunking edge cases") {
        CHECK(chunk_document("doc", "").empty());
        CHECK(chunk_document("doc", "   \n  ").empty());
        CHECK_THROWS_AS(chunk_document("doc", "text", 100), ConfigError);
    }

    TEST_CASE("verb frames over the clinical corpus") {
        auto tuples = extract_all(fixtures::clinical_corpus());
        CHECK(tuples.size() == 16);

        auto has = [&tuples](const char* e1, const char* rel, const char* e2,
                             std::vector<std::string> conditions) {
            return tuples.count({e1, rel, e2, std::move(conditions)}) == 1;
        };
        // Regimen comparison with stacked qualifiers.
        CHECK(has("PI-based regimen", "superior_to", "NNRTI-based regimen",
                  {"children < 3 years", "not exposed to NNRTIs"}));
        CHECK(has("WHO", "recommends", "PI-based regimens", {"children < 3"}));
        CHECK(has("viral load", "proportional_to", "transmission risk", {"pregnant women"}));
        CHECK(has("ART", "reduces", "transmission", {"pregnant women"}));
        // Contraindication plus causal frames.
        CHECK(has("Misoprostol", "contraindicated_in", "wanted pregnancies", {"pregnant women"}));
        CHECK(has("Misoprostol", "increases", "uterine tone and contractions", {"pregnancy"}));
        CHECK(has("Misoprostol", "causes", "partial or complete abortions", {"pregnancy"}));
        CHECK(has("Misoprostol", "associated_with", "birth defects", {"pregnancy"}));
        // Diagnosis, treatment, and risk-factor frames.
        CHECK(has("Urinary tract symptoms", "diagnosed_by", "symptoms alone",
                  {"young healthy women"}));
        CHECK(has("Urinary tract symptoms", "treated_with", "vaginal estrogen replacement",
                  {"Postmenopausal women"}));
        CHECK(has("Urinary tract symptoms", "risk_factor", "sexual activity", {"young women"}));
        CHECK(has("Urinary tract symptoms", "risk_factor", "chronic prostatitis", {"males"}));
        CHECK(has("Urinary tract symptoms", "risk_factor", "vesico-ureteral reflux",
                  {"children"}));
        // Symptom list split into one tuple per presentation.
        CHECK(has("Urinary tract symptoms", "presents_with", "incontinence", {}));
        CHECK(has("Urinary tract symptoms", "presents_with", "change in mental status", {}));
        CHECK(has("Urinary tract symptoms", "presents_with", "fatigue", {}));
    }

    TEST_CASE("extractor supplies inverse relations for known frames") {
        DocumentChunk chunk{"doc", 0, 0, "Hypertension is treated with amlodipine."};
        auto tuples = rule_based_extract(chunk);
        REQUIRE(tuples.size() == 1);
        CHECK(tuples[0].relation == "treated_with");
        CHECK(tuples[0].inverse_relation == "treats");
        CHECK(tuples[0].doc_id == "doc");
    }

    TEST_CASE("extract_tuples drops invalid outputs and counts them") {
        struct Sloppy final : TupleExtractor {
            std::vector<RawTuple> extract(const DocumentChunk& chunk) override {
                RawTuple good{"a", "treats", "", "b", {"c"}, chunk.doc_id, chunk.chunk_index};
                RawTuple no_entity{"", "treats", "", "b", {}, chunk.doc_id, chunk.chunk_index};
                RawTuple no_relation{"a", "", "", "b", {}, chunk.doc_id, chunk.chunk_index};
                RawTuple blank_condition{"a", "treats", "", "c", {"  "}, chunk.doc_id,
                                         chunk.chunk_index};
                return {good, no_entity, no_relation, blank_condition};
            }
        };
        Sloppy extractor;
        auto outcome = extract_tuples({"doc", 0, 0, "irrelevant"}, extractor);
        CHECK(outcome.tuples.size() == 1);
        CHECK(outcome.dropped == 3);
    }

    TEST_CASE("provider errors pass through extract_tuples") {
        struct Failing final : TupleExtractor {
            std::vector<RawTuple> extract(const DocumentChunk&) override {
                throw ProviderError(ProviderError::Kind::Timeout, "boom");
            }
        };
        Failing extractor;
        CHECK_THROWS_AS(extract_tuples({"doc", 0, 0, "text"}, extractor), ProviderError);
    }

    TEST_CASE("dictionary maps canonical surfaces") {
        SynonymDictionary dict;
        dict.add("Urinary Tract Symptoms", "UTI");
        CHECK(dict.apply(canonicalize_entity("urinary tract symptoms")).value() == "uti");
        CHECK(dict.apply(canonicalize_entity("warfarin")).value() == "warfarin");
        CHECK(dict.size() == 1);
    }

    TEST_CASE("dictionary TSV loading") {
        const auto path = std::filesystem::temp_directory_path() / "cgr_dict.tsv";
        {
            std::ofstream out(path);
            out << "urinary tract symptoms\tuti\n";
            out << "ascorbic acid\tvitamin c\n";
        }
        auto dict = SynonymDictionary::load_tsv(path);
        CHECK(dict.size() == 2);
        CHECK(dict.apply(canonicalize_entity("Ascorbic Acid")).value() == "vitamin c");
        {
            std::ofstream out(path);
            out << "row without a tab\n";
        }
        CHECK_THROWS_AS(SynonymDictionary::load_tsv(path), FormatError);
        std::filesystem::remove(path);
    }

    TEST_CASE("normalize_tuple produces a graph-ready edge with provenance") {
        const std::string text =
            "Unrelated first sentence. Urinary tract symptoms may be treated with vaginal "
            "estrogen replacement in postmenopausal women.";
        DocumentChunk chunk{"uti", 0, 0, text};
        RawTuple raw{"Urinary Tract Symptoms",
                     "treated with",
                     "treats",
                     "vaginal estrogen replacement",
                     {"Postmenopausal women", "not during pregnancy"},
                     "uti",
                     0};
        auto edge = normalize_tuple(raw, fixtures::clinical_dictionary(), &chunk);
        CHECK(edge.source.value() == "uti");
        CHECK(edge.relation == "treated_with");
        CHECK(edge.target.value() == "vaginal estrogen replacement");
        REQUIRE(edge.conditions.size() == 2);
        CHECK(edge.conditions[0].serialized() == "not:during pregnancy");
        CHECK(edge.conditions[1].serialized() == "postmenopausal women");
        REQUIRE(edge.snippets.size() == 1);
        CHECK(edge.snippets[0].doc_id == "uti");
        // The snippet is the sentence holding both entities, not the chunk.
        CHECK(edge.snippets[0].text.find("Urinary tract symptoms") != std::string::npos);
        CHECK(edge.snippets[0].text.find("Unrelated") == std::string::npos);
        REQUIRE(edge.snippets[0].char_span.has_value());
        auto [start, end] = *edge.snippets[0].char_span;
        CHECK(text.substr(start, end - start) == edge.snippets[0].text);
    }

    TEST_CASE("normalize_tuple without a chunk still yields a valid edge") {
        RawTuple raw{"a", "treats", "", "b", {}, "doc", 0};
        auto edge = normalize_tuple(raw, SynonymDictionary{});
        CHECK(edge.source.value() == "a");
        CHECK(edge.snippets.empty());
    }
}
