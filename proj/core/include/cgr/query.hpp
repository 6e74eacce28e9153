#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cgr/graph.hpp"
#include "cgr/synonyms.hpp"

namespace cgr {

/// Structured form of a question: keywords drive node retrieval and path
/// ranking, conditions drive edge gating, negated entities are excluded from
/// candidate answers.
struct ParsedQuery {
    std::string raw;
    std::vector<std::string> keywords;
    std::vector<ConditionLabel> required_conditions;
    std::vector<ConditionLabel> excluded_conditions;
    std::vector<EntityId> negated_entities;
    std::optional<std::string> target_entity;
    std::optional<std::string> target_type;
};

class QueryParser {
public:
    virtual ~QueryParser() = default;

    virtual ParsedQuery parse(const std::string& question) = 0;
};

/// Deterministic cue-pattern parser. Prepositional cues ("in/for/during/with
/// <phrase>") and age phrases become required conditions; "but not <phrase>"
/// becomes an excluded condition; "excluding / other than / distinct from /
/// except <phrase>" become negated entities. Keywords are the stopword-filtered
/// content words minus negated-entity tokens; condition words stay in the
/// keyword list because they anchor entry-node selection.
class OfflineQueryParser : public QueryParser {
public:
    OfflineQueryParser();
    explicit OfflineQueryParser(ConditionSynonyms synonyms);

    ParsedQuery parse(const std::string& question) override;

private:
    ConditionSynonyms synonyms_;
};

/// Parses and then enforces the structural invariants: non-empty keywords for
/// a non-empty question (content-word fallback), required/excluded
/// disjointness (overlap dropped from required), and no negated entity among
/// the keywords.
ParsedQuery parse_query(const std::string& question, QueryParser& parser);

bool is_stopword(std::string_view token);

/// Debug dump: {raw, keywords, required, excluded, negated, target_entity,
/// target_type}; negated condition labels use the "not:" prefix.
std::string parsed_query_to_json(const ParsedQuery& query);

}  // namespace cgr
