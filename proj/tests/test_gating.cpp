#include <string>
#include <vector>

#include "cgr/gating.hpp"
#include "cgr/query.hpp"
#include "cgr/text.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cgr;

namespace {

ParsedQuery parse(const std::string& question) {
    OfflineQueryParser parser;
    return parse_query(question, parser);
}

std::vector<ConditionLabel> labels(const std::vector<const char*>& raw) {
    std::vector<ConditionLabel> out;
    out.reserve(raw.size());
    for (const char* text : raw) out.push_back(ConditionLabel::parse(text));
    return out;
}

}  // namespace

TEST_SUITE("gating") {
    TEST_CASE("contrastive pediatric question populates the lookup table") {
        auto query =
            parse("Which gene causes cardiomyopathy in pediatric patients but not in adults?");
        OfflineConditionEvaluator evaluator;
        auto conditions = labels({"pediatric", "in children", "in adults", "adult patients"});
        auto verdicts = evaluator.evaluate_batch(query, conditions);
        REQUIRE(verdicts.size() == 4);
        CHECK(verdicts[0] == Verdict::True);   // pediatric
        CHECK(verdicts[1] == Verdict::True);   // in children
        CHECK(verdicts[2] == Verdict::False);  // in adults
        CHECK(verdicts[3] == Verdict::False);  // adult patients
    }

    TEST_CASE("age, sex, and negated-history rules combine on one question") {
        auto query = parse(
            "What antibiotic is safe for a 5-year-old boy with pneumonia and no known "
            "allergies?");
        OfflineConditionEvaluator evaluator;
        auto conditions =
            labels({"in children", "in adults", "penicillin allergy", "renal impairment",
                    "pregnancy"});
        auto verdicts = evaluator.evaluate_batch(query, conditions);
        REQUIRE(verdicts.size() == 5);
        CHECK(verdicts[0] == Verdict::True);   // age 5 is pediatric
        CHECK(verdicts[1] == Verdict::False);  // and therefore not adult
        CHECK(verdicts[2] == Verdict::False);  // "no known allergies" denies it
        CHECK(verdicts[3] == Verdict::Null);   // nothing known about renal status
        CHECK(verdicts[4] == Verdict::False);  // a boy cannot be pregnant
    }

    TEST_CASE("numeric age bounds and named age groups") {
        auto elderly = parse("Which anticoagulant is preferred in an 82-year-old patient?");
        OfflineConditionEvaluator evaluator;
        auto conditions = labels({"elderly", "pediatric", "age > 65", "age < 18", "adults"});
        auto verdicts = evaluator.evaluate_batch(elderly, conditions);
        REQUIRE(verdicts.size() == 5);
        CHECK(verdicts[0] == Verdict::True);
        CHECK(verdicts[1] == Verdict::False);
        CHECK(verdicts[2] == Verdict::True);
        CHECK(verdicts[3] == Verdict::False);
        CHECK(verdicts[4] == Verdict::True);
    }

    TEST_CASE("negated labels flip true and false but leave null alone") {
        for (const char* question :
             {"Which gene causes cardiomyopathy in pediatric patients but not in adults?",
              "What antibiotic is safe for a 5-year-old boy with pneumonia and no known "
              "allergies?",
              fixtures::kStenosisQuestion}) {
            auto query = parse(question);
            for (const char* text :
                 {"pediatric", "in adults", "pregnancy", "renal impairment", "penicillin allergy",
                  "bilateral renal artery stenosis", "liver failure"}) {
                auto positive = offline_evaluate(query, ConditionLabel::make(text, false));
                auto negative = offline_evaluate(query, ConditionLabel::make(text, true));
                CAPTURE(question);
                CAPTURE(text);
                if (positive == Verdict::True) CHECK(negative == Verdict::False);
                if (positive == Verdict::False) CHECK(negative == Verdict::True);
                if (positive == Verdict::Null) CHECK(negative == Verdict::Null);
            }
        }
    }

    TEST_CASE("evaluate_conditions makes exactly one batch call") {
        auto query = parse(fixtures::kStenosisQuestion);
        fixtures::CountingEvaluator evaluator;
        auto conditions = labels({"not pregnancy", "not bilateral renal artery stenosis",
                                  "renal impairment"});
        auto table = evaluate_conditions(query, conditions, evaluator);
        CHECK(evaluator.calls() == 1);
        CHECK(evaluator.last_batch_size() == 3);
        CHECK(table.query_fingerprint() == fnv1a64(query.raw));
        CHECK(table.lookup(ConditionLabel::parse("not bilateral renal artery stenosis")) ==
              Verdict::False);
    }

    TEST_CASE("empty condition set skips the evaluator entirely") {
        auto query = parse("What treats scurvy?");
        fixtures::CountingEvaluator evaluator;
        auto table = evaluate_conditions(query, {}, evaluator);
        CHECK(evaluator.calls() == 0);
        CHECK(table.size() >= 0);
    }

    TEST_CASE("required and excluded query conditions override the evaluator") {
        struct AllNull final : ConditionEvaluator {
            std::vector<Verdict> evaluate_batch(const ParsedQuery&,
                                                const std::vector<ConditionLabel>& c) override {
                return std::vector<Verdict>(c.size(), Verdict::Null);
            }
        };
        ParsedQuery query;
        query.raw = "scripted";
        query.required_conditions = labels({"pregnancy"});
        query.excluded_conditions = labels({"adults"});
        AllNull evaluator;
        auto table = evaluate_conditions(query, labels({"pregnancy", "adults", "other"}),
                                         evaluator);
        CHECK(table.lookup(ConditionLabel::parse("pregnancy")) == Verdict::True);
        CHECK(table.lookup(ConditionLabel::parse("adults")) == Verdict::False);
        CHECK(table.lookup(ConditionLabel::parse("other")) == Verdict::Null);
    }

    TEST_CASE("a label that is both required and excluded ends up required") {
        struct AllNull final : ConditionEvaluator {
            std::vector<Verdict> evaluate_batch(const ParsedQuery&,
                                                const std::vector<ConditionLabel>& c) override {
                return std::vector<Verdict>(c.size(), Verdict::Null);
            }
        };
        ParsedQuery query;
        query.raw = "scripted";
        query.required_conditions = labels({"shared"});
        query.excluded_conditions = labels({"shared"});
        AllNull evaluator;
        // Overrides apply excluded first, then required; required wins.
        auto table = evaluate_conditions(query, labels({"shared"}), evaluator);
        CHECK(table.lookup(ConditionLabel::parse("shared")) == Verdict::True);
    }

    TEST_CASE("query labels absent from the graph set still enter the table") {
        struct AllNull final : ConditionEvaluator {
            std::vector<Verdict> evaluate_batch(const ParsedQuery&,
                                                const std::vector<ConditionLabel>& c) override {
                return std::vector<Verdict>(c.size(), Verdict::Null);
            }
        };
        ParsedQuery query;
        query.raw = "scripted";
        query.required_conditions = labels({"graph never saw this"});
        AllNull evaluator;
        auto table = evaluate_conditions(query, labels({"unrelated"}), evaluator);
        CHECK(table.lookup(ConditionLabel::parse("graph never saw this")) == Verdict::True);
    }

    TEST_CASE("verdict count mismatch is a schema error") {
        struct Short final : ConditionEvaluator {
            std::vector<Verdict> evaluate_batch(const ParsedQuery&,
                                                const std::vector<ConditionLabel>&) override {
                return {Verdict::True};
            }
        };
        ParsedQuery query;
        query.raw = "scripted";
        Short evaluator;
        CHECK_THROWS_AS(evaluate_conditions(query, labels({"a", "b"}), evaluator), SchemaError);
    }

    TEST_CASE("verdict cache short-circuits repeated evaluation") {
        auto query = parse(fixtures::kStenosisQuestion);
        auto conditions = labels({"not pregnancy", "renal impairment"});
        fixtures::CountingEvaluator evaluator;
        VerdictCache cache;
        auto first = evaluate_conditions(query, conditions, evaluator, &cache);
        auto second = evaluate_conditions(query, conditions, evaluator, &cache);
        CHECK(evaluator.calls() == 1);
        CHECK(first.to_json() == second.to_json());
        // A different condition set is a different cache key.
        evaluate_conditions(query, labels({"liver failure"}), evaluator, &cache);
        CHECK(evaluator.calls() == 2);
    }

    TEST_CASE("unknown labels report null") {
        ConditionVerdictTable table;
        table.set(ConditionLabel::parse("known"), Verdict::True);
        CHECK(table.lookup(ConditionLabel::parse("unknown")) == Verdict::Null);
    }

    TEST_CASE("all_null passes every edge") {
        auto graph = fixtures::stenosis_graph();
        auto table = ConditionVerdictTable::all_null(graph.unique_conditions(), 42);
        CHECK(table.query_fingerprint() == 42);
        for (const auto& [id, edge] : graph.edges()) {
            CHECK(gate(edge, table));
        }
    }

    TEST_CASE("gate blocks only on a false condition") {
        auto edge = make_edge(canonicalize_entity("a"), "r", canonicalize_entity("b"),
                              labels({"c1", "c2"}));
        ConditionVerdictTable table;
        CHECK(gate(edge, table));  // all unknown -> null -> traversable
        table.set(ConditionLabel::parse("c1"), Verdict::True);
        CHECK(gate(edge, table));
        table.set(ConditionLabel::parse("c2"), Verdict::False);
        CHECK_FALSE(gate(edge, table));

        auto bare = make_edge(canonicalize_entity("a"), "r", canonicalize_entity("c"), {});
        CHECK(gate(bare, table));
    }

    TEST_CASE("table json uses sorted serialized labels") {
        ConditionVerdictTable table;
        table.set(ConditionLabel::parse("zeta"), Verdict::True);
        table.set(ConditionLabel::parse("not alpha"), Verdict::False);
        table.set(ConditionLabel::parse("mid"), Verdict::Null);
        CHECK(table.to_json() ==
              "{\"mid\":\"null\",\"not:alpha\":\"false\",\"zeta\":\"true\"}");
    }

    TEST_CASE("verdict names render lowercase") {
        CHECK(to_string(Verdict::True) == "true");
        CHECK(to_string(Verdict::False) == "false");
        CHECK(to_string(Verdict::Null) == "null");
    }
}
