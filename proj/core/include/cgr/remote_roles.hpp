#pragma once

#include <string>
#include <vector>

#include "cgr/answer.hpp"
#include "cgr/extraction.hpp"
#include "cgr/gating.hpp"
#include "cgr/providers.hpp"
#include "cgr/query.hpp"

namespace cgr {

/// Default system/template prompts for the chat-backed provider roles.
/// Callers may substitute their own template files where noted.
const std::string& default_extraction_prompt();        // contains {{passage}}
const std::string& default_query_parsing_prompt();     // system message
const std::string& default_condition_prompt();         // system message
const std::string& default_answer_system_prompt();     // system message

/// Tuple extractor backed by a chat provider. Renders the template's
/// {{passage}} placeholder with the chunk text, requests a JSON array of
/// {entity1, relation, inverse_relation, entity2, conditions} objects, and
/// keeps the well-formed elements. Elements missing mandatory fields are
/// skipped; a response with no JSON array at all raises SchemaError so the
/// caller can record the chunk as failed.
class ChatTupleExtractor final : public TupleExtractor {
public:
    explicit ChatTupleExtractor(ChatProvider& provider);
    ChatTupleExtractor(ChatProvider& provider, std::string prompt_template);

    std::vector<RawTuple> extract(const DocumentChunk& chunk) override;

private:
    ChatProvider* provider_;
    std::string template_;
};

/// Query parser backed by a chat provider. The reply must be a JSON object
/// with required_conditions, excluded_conditions and negated_entities arrays
/// (target_type/target_entity optional); anything else raises SchemaError.
/// Keywords are always computed locally from the question text so entry-node
/// selection never depends on model output.
class ChatQueryParser final : public QueryParser {
public:
    explicit ChatQueryParser(ChatProvider& provider);
    ChatQueryParser(ChatProvider& provider, std::string system_prompt);

    ParsedQuery parse(const std::string& question) override;

private:
    ChatProvider* provider_;
    std::string system_prompt_;
};

/// Condition evaluator backed by a chat provider. One call evaluates the
/// whole condition set: the prompt lists the serialized labels as a JSON
/// array and the reply must be a JSON object keyed by those exact strings
/// with true/false/null values. A missing key or ill-typed value raises
/// SchemaError; partial tables are never returned.
class ChatConditionEvaluator final : public ConditionEvaluator {
public:
    explicit ChatConditionEvaluator(ChatProvider& provider);
    ChatConditionEvaluator(ChatProvider& provider, std::string system_prompt);

    std::vector<Verdict> evaluate_batch(const ParsedQuery& query,
                                        const std::vector<ConditionLabel>& conditions) override;

private:
    ChatProvider* provider_;
    std::string system_prompt_;
};

/// Answer generator backed by a chat provider. Sends the built prompt and
/// parses the sectioned reply ("REASONING: ... ANSWER: ..."); a reply with no
/// ANSWER section raises SchemaError.
class ChatAnswerGenerator final : public AnswerGenerator {
public:
    explicit ChatAnswerGenerator(ChatProvider& provider);
    ChatAnswerGenerator(ChatProvider& provider, std::string system_prompt);

    std::pair<std::string, std::string> generate(const std::string& prompt,
                                                 const EvidencePackage& package) override;

private:
    ChatProvider* provider_;
    std::string system_prompt_;
};

/// Splits a sectioned reply into (answer, reasoning). The ANSWER section is
/// mandatory; REASONING defaults to empty. Section markers are matched
/// case-insensitively at line starts.
std::pair<std::string, std::string> parse_answer_sections(const std::string& reply);

}  // namespace cgr
