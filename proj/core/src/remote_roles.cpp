#include "cgr/remote_roles.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_set>

#include "cgr/errors.hpp"
#include "cgr/text.hpp"
#include "json.hpp"

namespace cgr {

namespace {

using nlohmann::json;

/// Extracts the first top-level JSON value of the wanted kind from a chat
/// reply that may wrap it in prose or a code fence.
json find_json(const std::string& reply, char open, char close) {
    auto start = reply.find(open);
    while (start != std::string::npos) {
        auto end = reply.rfind(close);
        if (end == std::string::npos || end < start) break;
        auto candidate = json::parse(reply.substr(start, end - start + 1), nullptr, false);
        if (!candidate.is_discarded()) return candidate;
        // The last closer did not match this opener (e.g. prose containing a
        // bracket); try the next opener.
        start = reply.find(open, start + 1);
    }
    return json::value_t::discarded;
}

std::string json_string_or_empty(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return {};
    return it->get<std::string>();
}

}  // namespace

const std::string& default_extraction_prompt() {
    static const std::string prompt =
        "You are a high-precision knowledge extraction engine for biomedical literature. "
        "Extract a dense, exhaustive knowledge graph from the passage as a JSON array of "
        "n-tuples with contextual conditions.\n"
        "\n"
        "Core principles:\n"
        "- Exhaustive recall: capture every factual claim, no matter how small.\n"
        "- Atomicity: each n-tuple has exactly one subject and one object; split conjunctions.\n"
        "- Biomedical anchoring: extract canonical entities; move descriptors "
        "(\"elevated\", \"serum\") to conditions.\n"
        "- Context-independent: extract from exclusions, differentials, and comparisons.\n"
        "\n"
        "JSON schema: entity1 (subject), relation, inverse_relation, entity2 (object), "
        "conditions (list of qualifiers).\n"
        "\n"
        "Example input: \"L-type and T-type calcium channels are both blocked by Compound 99 "
        "in cardiomyocytes.\"\n"
        "Example output:\n"
        "[{\"entity1\": \"L-type calcium channels\", \"relation\": \"blocked_by\", "
        "\"entity2\": \"Compound 99\", \"conditions\": [\"in cardiomyocytes\"]},\n"
        " {\"entity1\": \"T-type calcium channels\", \"relation\": \"blocked_by\", "
        "\"entity2\": \"Compound 99\", \"conditions\": [\"in cardiomyocytes\"]}]\n"
        "\n"
        "Passage:\n"
        "{{passage}}\n"
        "\n"
        "Respond with the JSON array only.";
    return prompt;
}

const std::string& default_query_parsing_prompt() {
    static const std::string prompt =
        "You are a query parser for biomedical knowledge graphs. Parse the question into a "
        "structured intent-aware format.\n"
        "\n"
        "Schema:\n"
        "- target_type: the kind of entity being asked for\n"
        "- target_entity: the main concept being asked about\n"
        "- positive_attributes: properties the answer MUST have (2-5 items)\n"
        "- negated_entities: entities explicitly mentioned as NOT the answer "
        "(e.g. \"distinct from\", \"other than\")\n"
        "- required_conditions: conditions that MUST hold (e.g. \"in males\", "
        "\"during pregnancy\")\n"
        "- excluded_conditions: conditions that must NOT be present\n"
        "\n"
        "Examples:\n"
        "- \"Which gene causes cardiomyopathy in pediatric patients but not in adults?\" -> "
        "required_conditions: [\"pediatric\"], excluded_conditions: [\"in adults\"]\n"
        "- \"What drug treats hypertension in pregnant women, excluding ACE inhibitors?\" -> "
        "negated_entities: [\"ACE inhibitors\"], required_conditions: [\"in pregnancy\"]\n"
        "\n"
        "Respond with a single JSON object with fields: target_type, target_entity, "
        "positive_attributes, negated_entities, required_conditions, excluded_conditions.";
    return prompt;
}

const std::string& default_condition_prompt() {
    static const std::string prompt =
        "You are evaluating medical/clinical conditions against a query.\n"
        "\n"
        "Task: for each condition extracted from the knowledge graph, determine if the "
        "patient/context in the query SATISFIES that condition.\n"
        "\n"
        "Return values:\n"
        "- true: query explicitly or implicitly indicates the condition IS satisfied\n"
        "- false: query explicitly or implicitly indicates the condition is NOT satisfied\n"
        "- null: query does not mention anything relevant (unknown)\n"
        "\n"
        "Guidelines:\n"
        "- Handle synonyms: \"in boys\" = \"male children\" = \"pediatric males\".\n"
        "- Handle numeric reasoning: \"5-year-old\" means \"in adults\" is false and "
        "\"in children\" is true.\n"
        "- Handle implications: \"pregnant woman\" means \"during pregnancy\" is true.\n"
        "- Handle negations: \"no kidney disease\" means \"renal impairment\" is false.\n"
        "- When truly unknown, return null. Do not guess.\n"
        "\n"
        "Respond with a single JSON object mapping each input condition string, verbatim, to "
        "true, false, or null.";
    return prompt;
}

const std::string& default_answer_system_prompt() {
    static const std::string prompt =
        "You are a biomedical question-answering assistant. Provide the BEST AVAILABLE "
        "ANSWER based on the evidence.\n"
        "\n"
        "Core principle, best available choice:\n"
        "- If ONE option has relevant evidence and others don't, choose that option.\n"
        "- Warnings or cautions about a treatment do NOT disqualify it; they show it IS "
        "used.\n"
        "- Contraindications for OTHER options strengthen the case for the remaining "
        "option.\n"
        "- \"Insufficient evidence\" is a LAST RESORT, only when NO option has ANY relevant "
        "connection.\n"
        "\n"
        "Response format:\n"
        "REASONING: 2-4 sentences analyzing the evidence with citations (e.g. [doc1]).\n"
        "ANSWER: single entity name, yes/no, or short phrase. NO full sentences.\n"
        "\n"
        "Answer formatting: use what a clinician would say on rounds (e.g. \"MRI\" not "
        "\"Magnetic Resonance Imaging\"); be maximally concise; prefer clinical acronyms "
        "over spelled-out formal names.";
    return prompt;
}

ChatTupleExtractor::ChatTupleExtractor(ChatProvider& provider)
    : ChatTupleExtractor(provider, default_extraction_prompt()) {}

ChatTupleExtractor::ChatTupleExtractor(ChatProvider& provider, std::string prompt_template)
    : provider_(&provider), template_(std::move(prompt_template)) {
    if (template_.find("{{passage}}") == std::string::npos) {
        throw TemplateError("extraction template lacks the {{passage}} placeholder");
    }
}

std::vector<RawTuple> ChatTupleExtractor::extract(const DocumentChunk& chunk) {
    std::string prompt = template_;
    auto pos = prompt.find("{{passage}}");
    prompt.replace(pos, std::string("{{passage}}").size(), chunk.text);

    auto reply = provider_->chat({{"user", prompt}});
    auto array = find_json(reply, '[', ']');
    if (array.is_discarded() || !array.is_array()) {
        throw SchemaError("extractor reply contains no JSON array");
    }

    std::vector<RawTuple> tuples;
    for (const auto& item : array) {
        if (!item.is_object()) continue;
        RawTuple tuple;
        tuple.entity1 = json_string_or_empty(item, "entity1");
        tuple.relation = json_string_or_empty(item, "relation");
        tuple.inverse_relation = json_string_or_empty(item, "inverse_relation");
        tuple.entity2 = json_string_or_empty(item, "entity2");
        if (auto it = item.find("conditions"); it != item.end() && it->is_array()) {
            for (const auto& cond : *it) {
                if (cond.is_string()) tuple.conditions.push_back(cond.get<std::string>());
            }
        }
        tuple.doc_id = chunk.doc_id;
        tuple.chunk_index = chunk.chunk_index;
        // Field-level validation happens in extract_tuples, which drops and
        // counts invalid tuples; only keep elements that had the keys at all.
        if (tuple.entity1.empty() && tuple.entity2.empty()) continue;
        tuples.push_back(std::move(tuple));
    }
    return tuples;
}

ChatQueryParser::ChatQueryParser(ChatProvider& provider)
    : ChatQueryParser(provider, default_query_parsing_prompt()) {}

ChatQueryParser::ChatQueryParser(ChatProvider& provider, std::string system_prompt)
    : provider_(&provider), system_prompt_(std::move(system_prompt)) {}

ParsedQuery ChatQueryParser::parse(const std::string& question) {
    auto reply = provider_->chat({{"system", system_prompt_}, {"user", question}});
    auto obj = find_json(reply, '{', '}');
    if (obj.is_discarded() || !obj.is_object()) {
        throw SchemaError("query parser reply contains no JSON object");
    }
    for (const char* key : {"required_conditions", "excluded_conditions", "negated_entities"}) {
        auto it = obj.find(key);
        if (it == obj.end() || !it->is_array()) {
            throw SchemaError(std::string("query parser reply misses array field: ") + key);
        }
    }

    ParsedQuery query;
    query.raw = question;
    auto read_labels = [&](const char* key, std::vector<ConditionLabel>& out) {
        for (const auto& item : obj.at(key)) {
            if (!item.is_string()) {
                throw SchemaError(std::string("non-string entry in ") + key);
            }
            auto label = ConditionLabel::parse(item.get<std::string>());
            if (!label.text().empty()) out.push_back(label);
        }
    };
    read_labels("required_conditions", query.required_conditions);
    read_labels("excluded_conditions", query.excluded_conditions);
    // Canonical polarity: a negated label under "required" means the context
    // must not hold, which is what the excluded list expresses (and vice
    // versa). Rerouting keeps both parser implementations on one convention.
    auto reroute = [](std::vector<ConditionLabel>& from, std::vector<ConditionLabel>& to) {
        for (auto it = from.begin(); it != from.end();) {
            if (it->negated()) {
                to.push_back(ConditionLabel::make(it->text(), false));
                it = from.erase(it);
            } else {
                ++it;
            }
        }
    };
    std::vector<ConditionLabel> flipped_to_required;
    reroute(query.required_conditions, query.excluded_conditions);
    reroute(query.excluded_conditions, flipped_to_required);
    query.required_conditions.insert(query.required_conditions.end(),
                                     flipped_to_required.begin(), flipped_to_required.end());
    for (const auto& item : obj.at("negated_entities")) {
        if (!item.is_string()) throw SchemaError("non-string entry in negated_entities");
        auto canon = canonicalize_text(item.get<std::string>());
        if (!canon.empty()) query.negated_entities.push_back(canonicalize_entity(canon));
    }
    if (auto target = json_string_or_empty(obj, "target_entity"); !target.empty()) {
        query.target_entity = canonicalize_text(target);
    }
    if (auto type = json_string_or_empty(obj, "target_type"); !type.empty()) {
        query.target_type = canonicalize_text(type);
    }

    // Keywords stay a local computation: content words of the question minus
    // stopwords. parse_query() then removes negated entities and applies the
    // non-empty fallbacks, exactly as for the offline parser.
    std::unordered_set<std::string> seen;
    for (const auto& raw : split_whitespace(canonicalize_text(question))) {
        auto word = strip_edge_punct(raw);
        if (word.empty() || is_stopword(word)) continue;
        if (seen.insert(word).second) query.keywords.push_back(word);
    }
    return query;
}

ChatConditionEvaluator::ChatConditionEvaluator(ChatProvider& provider)
    : ChatConditionEvaluator(provider, default_condition_prompt()) {}

ChatConditionEvaluator::ChatConditionEvaluator(ChatProvider& provider, std::string system_prompt)
    : provider_(&provider), system_prompt_(std::move(system_prompt)) {}

std::vector<Verdict> ChatConditionEvaluator::evaluate_batch(
    const ParsedQuery& query, const std::vector<ConditionLabel>& conditions) {
    if (conditions.empty()) return {};

    json list = json::array();
    for (const auto& label : conditions) list.push_back(label.serialized());
    std::string user = "Query: " + query.raw + "\n\nConditions: " + list.dump() +
                       "\n\nRespond with the JSON object only.";

    auto reply = provider_->chat({{"system", system_prompt_}, {"user", user}});
    auto obj = find_json(reply, '{', '}');
    if (obj.is_discarded() || !obj.is_object()) {
        throw SchemaError("condition evaluator reply contains no JSON object");
    }

    std::vector<Verdict> verdicts;
    verdicts.reserve(conditions.size());
    for (const auto& label : conditions) {
        auto it = obj.find(label.serialized());
        if (it == obj.end()) {
            throw SchemaError("condition evaluator reply misses key: " + label.serialized());
        }
        if (it->is_null()) {
            verdicts.push_back(Verdict::Null);
        } else if (it->is_boolean()) {
            verdicts.push_back(it->get<bool>() ? Verdict::True : Verdict::False);
        } else if (it->is_string()) {
            auto text = canonicalize_text(it->get<std::string>());
            if (text == "true") {
                verdicts.push_back(Verdict::True);
            } else if (text == "false") {
                verdicts.push_back(Verdict::False);
            } else if (text == "null" || text == "unknown") {
                verdicts.push_back(Verdict::Null);
            } else {
                throw SchemaError("condition evaluator returned unrecognized verdict: " + text);
            }
        } else {
            throw SchemaError("condition evaluator returned ill-typed verdict for: " +
                              label.serialized());
        }
    }
    return verdicts;
}

ChatAnswerGenerator::ChatAnswerGenerator(ChatProvider& provider)
    : ChatAnswerGenerator(provider, default_answer_system_prompt()) {}

ChatAnswerGenerator::ChatAnswerGenerator(ChatProvider& provider, std::string system_prompt)
    : provider_(&provider), system_prompt_(std::move(system_prompt)) {}

std::pair<std::string, std::string> ChatAnswerGenerator::generate(const std::string& prompt,
                                                                  const EvidencePackage&) {
    auto reply = provider_->chat({{"system", system_prompt_}, {"user", prompt}});
    return parse_answer_sections(reply);
}

std::pair<std::string, std::string> parse_answer_sections(const std::string& reply) {
    auto find_marker = [&](const std::string& marker) -> std::optional<std::size_t> {
        // Match the marker at a line start, case-insensitively.
        for (std::size_t pos = 0; pos + marker.size() <= reply.size(); ++pos) {
            if (pos != 0 && reply[pos - 1] != '\n') continue;
            bool hit = true;
            for (std::size_t i = 0; i < marker.size(); ++i) {
                if (std::toupper(static_cast<unsigned char>(reply[pos + i])) != marker[i]) {
                    hit = false;
                    break;
                }
            }
            if (hit) return pos;
        }
        return std::nullopt;
    };

    auto answer_pos = find_marker("ANSWER:");
    if (!answer_pos) throw SchemaError("generator reply has no ANSWER: section");
    auto reasoning_pos = find_marker("REASONING:");

    auto trimmed = [](std::string text) {
        auto begin = text.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return std::string{};
        auto end = text.find_last_not_of(" \t\r\n");
        return text.substr(begin, end - begin + 1);
    };

    std::string reasoning;
    if (reasoning_pos && *reasoning_pos < *answer_pos) {
        reasoning = trimmed(reply.substr(*reasoning_pos + 10, *answer_pos - *reasoning_pos - 10));
    }
    std::string answer = trimmed(reply.substr(*answer_pos + 7));
    // The answer is a single line; trailing commentary goes to reasoning if
    // none was given.
    if (auto nl = answer.find('\n'); nl != std::string::npos) {
        if (reasoning.empty()) reasoning = trimmed(answer.substr(nl + 1));
        answer = trimmed(answer.substr(0, nl));
    }
    return {answer, reasoning};
}

}  // namespace cgr
