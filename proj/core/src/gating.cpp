#include "cgr/gating.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <unordered_set>

#include "cgr/text.hpp"
#include "json.hpp"

namespace cgr {

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::True: return "true";
        case Verdict::False: return "false";
        case Verdict::Null: break;
    }
    return "null";
}

ConditionVerdictTable ConditionVerdictTable::all_null(
    const std::vector<ConditionLabel>& conditions, std::uint64_t query_fingerprint) {
    ConditionVerdictTable table(query_fingerprint);
    for (const auto& label : conditions) table.set(label, Verdict::Null);
    return table;
}

std::string ConditionVerdictTable::to_json() const {
    std::map<std::string, Verdict> sorted;
    for (const auto& [label, verdict] : entries_) sorted[label.serialized()] = verdict;
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [key, verdict] : sorted) j[key] = std::string(to_string(verdict));
    return j.dump();
}

namespace {

enum class StatedSex { Unknown, Male, Female };

/// Everything the rule evaluator needs to know about one question, computed
/// once per batch.
struct QuestionFacts {
    std::unordered_set<std::string> concepts;           // outside negated spans
    std::unordered_set<std::string> negated_concepts;   // inside "no X" spans
    std::unordered_set<std::string> required_concepts;
    std::unordered_set<std::string> excluded_concepts;
    std::optional<int> age;
    StatedSex sex = StatedSex::Unknown;
};

const std::regex& age_regex() {
    static const std::regex kRe(
        R"((\d+)[- ]?year[- ]?olds?|(\d+) years? old|aged? (\d+))", std::regex::icase);
    return kRe;
}

std::optional<int> stated_age(const std::string& text) {
    std::smatch m;
    if (!std::regex_search(text, m, age_regex())) return std::nullopt;
    for (std::size_t g = 1; g < m.size(); ++g) {
        if (m[g].matched) return std::stoi(m[g].str());
    }
    return std::nullopt;
}

/// Synonym-canonical concepts of a token run, with fillers and stopwords
/// removed so prepositions in labels like "in children" never leak into
/// subset checks.
std::vector<std::string> content_concepts(const ConditionSynonyms& synonyms,
                                          const std::vector<std::string>& tokens) {
    std::vector<std::string> cleaned;
    cleaned.reserve(tokens.size());
    for (const auto& raw : tokens) {
        auto word = strip_edge_punct(raw);
        if (word.empty() || is_stopword(word)) continue;
        cleaned.push_back(word);
    }
    return synonyms.concepts_of(cleaned);
}

QuestionFacts build_facts(const ConditionSynonyms& synonyms, const ParsedQuery& query) {
    QuestionFacts facts;
    std::string canonical = canonicalize_text(query.raw);
    auto raw_tokens = split_whitespace(canonical);

    // Split the question into plain and negated token runs. A negation marker
    // ("no", "without", "not") opens a span that a phrase boundary closes.
    std::vector<std::string> plain;
    std::vector<std::string> negated;
    bool in_negated_span = false;
    for (const auto& raw : raw_tokens) {
        auto word = strip_edge_punct(raw);
        bool boundary = !raw.empty() && (raw.back() == ',' || raw.back() == '.' ||
                                         raw.back() == ';' || raw.back() == '?' ||
                                         raw.back() == '!' || raw.back() == ':');
        if (word == "no" || word == "without" || word == "not") {
            in_negated_span = true;
            continue;
        }
        (in_negated_span ? negated : plain).push_back(word);
        if (boundary) in_negated_span = false;
    }
    for (auto& c : content_concepts(synonyms, plain)) facts.concepts.insert(std::move(c));
    for (auto& c : content_concepts(synonyms, negated)) {
        facts.negated_concepts.insert(std::move(c));
    }

    for (const auto& label : query.required_conditions) {
        auto tokens = split_whitespace(label.text());
        auto concepts = content_concepts(synonyms, tokens);
        auto& bucket = label.negated() ? facts.excluded_concepts : facts.required_concepts;
        for (auto& c : concepts) bucket.insert(std::move(c));
    }
    for (const auto& label : query.excluded_conditions) {
        auto tokens = split_whitespace(label.text());
        auto& bucket = label.negated() ? facts.required_concepts : facts.excluded_concepts;
        for (auto& c : content_concepts(synonyms, tokens)) bucket.insert(std::move(c));
    }

    facts.age = stated_age(canonical);
    if (!facts.age) {
        for (const auto& label : query.required_conditions) {
            const std::string& text = label.text();
            if (!label.negated() && text.starts_with("age ")) {
                try {
                    facts.age = std::stoi(text.substr(4));
                } catch (const std::exception&) {
                }
                break;
            }
        }
    }

    bool male = facts.concepts.count("male") > 0;
    bool female = facts.concepts.count("female") > 0 || facts.concepts.count("pregnancy") > 0;
    if (male && !female) facts.sex = StatedSex::Male;
    if (female && !male) facts.sex = StatedSex::Female;
    return facts;
}

bool contains_any(const std::unordered_set<std::string>& set,
                  const std::vector<std::string>& items) {
    return std::any_of(items.begin(), items.end(),
                       [&](const std::string& item) { return set.count(item) > 0; });
}

bool is_age_related(const std::vector<std::string>& concepts) {
    for (const auto& c : concepts) {
        if (c == "pediatric" || c == "adults" || c == "elderly" || c == "age" ||
            c == "aged" || c == "old" || c == "older" || c == "young" || c == "younger") {
            return true;
        }
    }
    return false;
}

/// "children < 3 years" -> (concept part "children", '<', 3).
struct AgeBound {
    std::string left;
    char op;
    int value;
};

std::optional<AgeBound> parse_age_bound(const std::string& text) {
    static const std::regex kRe(R"(^(.*\S)\s*([<>])\s*(\d+)\s*(years?|yrs?)?$)");
    std::smatch m;
    if (!std::regex_match(text, m, kRe)) return std::nullopt;
    return AgeBound{m[1].str(), m[2].str()[0], std::stoi(m[3].str())};
}

/// Verdict for the positive (non-negated) reading of a condition.
Verdict evaluate_positive(const ConditionSynonyms& synonyms, const QuestionFacts& facts,
                          const std::string& text) {
    auto concepts = content_concepts(synonyms, split_whitespace(text));

    // Explicit contradiction: the question negates or excludes this concept.
    if (contains_any(facts.negated_concepts, concepts) ||
        contains_any(facts.excluded_concepts, concepts)) {
        return Verdict::False;
    }

    // Positive presence: every concept of the condition is stated in the
    // question or required outright.
    if (!concepts.empty()) {
        bool all_present = std::all_of(concepts.begin(), concepts.end(),
                                       [&](const std::string& c) {
                                           return facts.concepts.count(c) > 0 ||
                                                  facts.required_concepts.count(c) > 0;
                                       });
        if (all_present) return Verdict::True;
    }

    if (facts.age) {
        if (auto bound = parse_age_bound(text)) {
            auto left_concepts =
                content_concepts(synonyms, split_whitespace(bound->left));
            if (is_age_related(left_concepts)) {
                bool holds = bound->op == '<' ? *facts.age < bound->value
                                              : *facts.age > bound->value;
                return holds ? Verdict::True : Verdict::False;
            }
        }
        bool pediatric = std::find(concepts.begin(), concepts.end(), "pediatric") !=
                         concepts.end();
        bool adults = std::find(concepts.begin(), concepts.end(), "adults") != concepts.end();
        bool elderly = std::find(concepts.begin(), concepts.end(), "elderly") != concepts.end();
        if (pediatric) return *facts.age < 18 ? Verdict::True : Verdict::False;
        if (adults) return *facts.age >= 18 ? Verdict::True : Verdict::False;
        if (elderly) return *facts.age >= 65 ? Verdict::True : Verdict::False;
    }

    if (facts.sex == StatedSex::Male) {
        for (const auto& c : concepts) {
            if (c == "pregnancy" || c == "female") return Verdict::False;
        }
    }
    if (facts.sex == StatedSex::Female) {
        for (const auto& c : concepts) {
            if (c == "male") return Verdict::False;
        }
    }
    return Verdict::Null;
}

Verdict evaluate_label(const ConditionSynonyms& synonyms, const QuestionFacts& facts,
                       const ConditionLabel& label) {
    Verdict inner = evaluate_positive(synonyms, facts, label.text());
    if (!label.negated()) return inner;
    switch (inner) {
        case Verdict::True: return Verdict::False;
        case Verdict::False: return Verdict::True;
        case Verdict::Null: break;
    }
    return Verdict::Null;
}

}  // namespace

OfflineConditionEvaluator::OfflineConditionEvaluator()
    : synonyms_(ConditionSynonyms::builtin()) {}

OfflineConditionEvaluator::OfflineConditionEvaluator(ConditionSynonyms synonyms)
    : synonyms_(std::move(synonyms)) {}

std::vector<Verdict> OfflineConditionEvaluator::evaluate_batch(
    const ParsedQuery& query, const std::vector<ConditionLabel>& conditions) {
    QuestionFacts facts = build_facts(synonyms_, query);
    std::vector<Verdict> verdicts;
    verdicts.reserve(conditions.size());
    for (const auto& label : conditions) {
        verdicts.push_back(evaluate_label(synonyms_, facts, label));
    }
    return verdicts;
}

Verdict offline_evaluate(const ParsedQuery& query, const ConditionLabel& condition) {
    const auto& synonyms = ConditionSynonyms::builtin();
    QuestionFacts facts = build_facts(synonyms, query);
    return evaluate_label(synonyms, facts, condition);
}

std::uint64_t condition_set_hash(const std::vector<ConditionLabel>& conditions) {
    std::vector<std::string> keys;
    keys.reserve(conditions.size());
    for (const auto& label : conditions) keys.push_back(label.serialized());
    std::sort(keys.begin(), keys.end());
    std::string joined;
    for (const auto& key : keys) {
        joined += key;
        joined += '\x1e';
    }
    return fnv1a64(joined);
}

std::optional<ConditionVerdictTable> VerdictCache::find(std::uint64_t query_fingerprint,
                                                        std::uint64_t condition_set_hash) const {
    std::lock_guard lock(mutex_);
    auto it = tables_.find(query_fingerprint ^ (condition_set_hash * 0x9e3779b97f4a7c15ULL));
    if (it == tables_.end()) return std::nullopt;
    return it->second;
}

void VerdictCache::store(std::uint64_t query_fingerprint, std::uint64_t condition_set_hash,
                         ConditionVerdictTable table) {
    std::lock_guard lock(mutex_);
    tables_[query_fingerprint ^ (condition_set_hash * 0x9e3779b97f4a7c15ULL)] =
        std::move(table);
}

ConditionVerdictTable evaluate_conditions(const ParsedQuery& query,
                                          const std::vector<ConditionLabel>& conditions,
                                          ConditionEvaluator& evaluator, VerdictCache* cache) {
    std::uint64_t fingerprint = fnv1a64(query.raw);
    std::uint64_t set_hash = condition_set_hash(conditions);
    if (cache != nullptr) {
        if (auto cached = cache->find(fingerprint, set_hash)) return *cached;
    }

    ConditionVerdictTable table(fingerprint);
    if (!conditions.empty()) {
        auto verdicts = evaluator.evaluate_batch(query, conditions);
        if (verdicts.size() != conditions.size()) {
            throw SchemaError("evaluator returned " + std::to_string(verdicts.size()) +
                              " verdicts for " + std::to_string(conditions.size()) +
                              " conditions");
        }
        for (std::size_t i = 0; i < conditions.size(); ++i) {
            table.set(conditions[i], verdicts[i]);
        }
    }
    for (const auto& label : query.excluded_conditions) table.set(label, Verdict::False);
    for (const auto& label : query.required_conditions) table.set(label, Verdict::True);

    if (cache != nullptr) cache->store(fingerprint, set_hash, table);
    return table;
}

bool gate(const EdgeRecord& edge, const ConditionVerdictTable& table) {
    return std::none_of(edge.conditions.begin(), edge.conditions.end(),
                        [&](const ConditionLabel& label) {
                            return table.lookup(label) == Verdict::False;
                        });
}

}  // namespace cgr
