#include "cgr/query.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <unordered_set>

#include "cgr/errors.hpp"
#include "cgr/text.hpp"
#include "json.hpp"

namespace cgr {

namespace {

const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> kSet = {
        "a",       "an",        "the",     "is",      "are",    "was",    "were",  "be",
        "been",    "being",     "am",      "do",      "does",   "did",    "have",  "has",
        "had",     "what",      "which",   "who",     "whom",   "whose",  "when",  "where",
        "why",     "how",       "can",     "could",   "should", "would",  "will",  "shall",
        "may",     "might",     "must",    "in",      "on",     "at",     "of",    "to",
        "from",    "by",        "with",    "for",     "during", "about",  "as",    "into",
        "over",    "under",     "between", "among",   "and",    "or",     "but",   "not",
        "no",      "nor",       "if",      "then",    "than",   "that",   "this",  "these",
        "those",   "it",        "its",     "their",   "they",   "them",   "he",    "she",
        "his",     "her",       "my",      "your",    "our",    "there",  "here",  "such",
        "other",   "only",      "own",     "same",    "so",     "too",    "very",  "also",
        "after",   "before",    "while",   "excluding", "except", "distinct", "given",
        "versus",  "vs",        "per",     "out",     "up",     "down",
    };
    return kSet;
}

struct Token {
    std::string text;          // edge punctuation stripped
    bool boundary_after;       // trailing , . ; : ? ! ends a phrase
};

std::vector<Token> tokenize(const std::string& canonical) {
    std::vector<Token> tokens;
    for (const auto& raw : split_whitespace(canonical)) {
        Token t;
        t.text = strip_edge_punct(raw);
        char last = raw.empty() ? '\0' : raw.back();
        t.boundary_after = last == ',' || last == '.' || last == ';' || last == ':' ||
                           last == '?' || last == '!';
        if (!t.text.empty()) tokens.push_back(std::move(t));
    }
    return tokens;
}

/// "68-year-old" / "68 year old" / "aged 68" / "age 68" / "68 years old".
const std::regex& age_regex() {
    static const std::regex kRe(
        R"((\d+)[- ]?year[- ]?olds?|(\d+) years? old|aged? (\d+))",
        std::regex::icase);
    return kRe;
}

std::optional<int> find_age(const std::string& text) {
    std::smatch m;
    if (!std::regex_search(text, m, age_regex())) return std::nullopt;
    for (std::size_t g = 1; g < m.size(); ++g) {
        if (m[g].matched) return std::stoi(m[g].str());
    }
    return std::nullopt;
}

enum class CueClass { Required, Excluded, Negated };

struct Cue {
    std::vector<std::string_view> words;
    CueClass cls;
    std::string_view prep;  // preposition carried into emitted labels ("" = none)
};

/// Longest cues first so "but not in" wins over the bare preposition "in".
const std::vector<Cue>& cues() {
    static const std::vector<Cue> kCues = {
        {{"but", "not", "in"}, CueClass::Excluded, "in"},
        {{"but", "not", "during"}, CueClass::Excluded, "during"},
        {{"but", "not", "for"}, CueClass::Excluded, "for"},
        {{"but", "not", "with"}, CueClass::Excluded, "with"},
        {{"but", "not"}, CueClass::Excluded, ""},
        {{"other", "than"}, CueClass::Negated, ""},
        {{"distinct", "from"}, CueClass::Negated, ""},
        {{"excluding"}, CueClass::Negated, ""},
        {{"except", "in"}, CueClass::Excluded, "in"},
        {{"except", "during"}, CueClass::Excluded, "during"},
        {{"except", "for"}, CueClass::Excluded, "for"},
        {{"except"}, CueClass::Negated, ""},
        {{"in"}, CueClass::Required, "in"},
        {{"during"}, CueClass::Required, "during"},
        {{"for"}, CueClass::Required, "for"},
        {{"with"}, CueClass::Required, "with"},
    };
    return kCues;
}

bool cue_matches(const std::vector<Token>& tokens, std::size_t at, const Cue& cue) {
    if (at + cue.words.size() > tokens.size()) return false;
    for (std::size_t i = 0; i < cue.words.size(); ++i) {
        if (tokens[at + i].text != cue.words[i]) return false;
        // A phrase boundary inside the cue words breaks the cue.
        if (i + 1 < cue.words.size() && tokens[at + i].boundary_after) return false;
    }
    return true;
}

bool starts_any_cue(const std::vector<Token>& tokens, std::size_t at) {
    return std::any_of(cues().begin(), cues().end(),
                       [&](const Cue& c) { return cue_matches(tokens, at, c); });
}

struct CueHit {
    CueClass cls;
    std::string_view prep;
    std::string phrase;  // raw token run after the cue
};

std::vector<CueHit> scan_cues(const std::vector<Token>& tokens) {
    std::vector<CueHit> hits;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Cue* matched = nullptr;
        for (const auto& cue : cues()) {
            if (cue_matches(tokens, i, cue)) {
                matched = &cue;
                break;
            }
        }
        if (matched == nullptr) continue;
        std::size_t phrase_start = i + matched->words.size();
        std::string phrase;
        for (std::size_t j = phrase_start; j < tokens.size(); ++j) {
            if (starts_any_cue(tokens, j)) break;
            if (!phrase.empty()) phrase += ' ';
            phrase += tokens[j].text;
            if (tokens[j].boundary_after) break;
        }
        if (!phrase.empty()) {
            hits.push_back({matched->cls, matched->prep, std::move(phrase)});
        }
        i += matched->words.size() - 1;  // inner cues may still fire on the phrase
    }
    return hits;
}

void push_unique(std::vector<ConditionLabel>& list, const ConditionLabel& label) {
    if (std::find(list.begin(), list.end(), label) == list.end()) list.push_back(label);
}

/// Condition labels for one cue phrase: each synonym-canonical concept,
/// plus a "<prep> <concept>" variant for in/during/for cues; phrases with no
/// concept entry fall back to the filler-stripped phrase text. Pure age
/// phrases collapse to a single "age N" label.
std::vector<ConditionLabel> phrase_labels(const ConditionSynonyms& synonyms,
                                          const CueHit& hit) {
    std::vector<ConditionLabel> labels;
    auto add = [&](const std::string& text) {
        if (text.empty()) return;
        auto label = ConditionLabel::parse(text);
        if (label.text().empty()) return;
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
            labels.push_back(std::move(label));
        }
    };

    std::string phrase = hit.phrase;
    if (auto age = find_age(phrase)) {
        add("age " + std::to_string(*age));
        // Only the non-age residue can carry further concepts ("a 68-year-old
        // patient" is pure age; "a 5-year-old boy" still yields "male").
        phrase = std::regex_replace(phrase, age_regex(), " ");
    }
    auto phrase_tokens = split_whitespace(canonicalize_text(phrase));

    auto concepts = synonyms.concepts_of(phrase_tokens);
    if (concepts.empty()) {
        std::string cleaned;
        for (const auto& tok : phrase_tokens) {
            auto word = strip_edge_punct(tok);
            if (is_filler_token(word)) continue;
            if (!cleaned.empty()) cleaned += ' ';
            cleaned += word;
        }
        add(cleaned);
        return labels;
    }
    for (const auto& canon : concepts) {
        add(canon);
        bool prep_variant = hit.prep == "in" || hit.prep == "during" || hit.prep == "for";
        if (prep_variant) add(std::string(hit.prep) + " " + canon);
    }
    return labels;
}

std::optional<std::string> detect_target_type(const std::vector<Token>& tokens) {
    if (tokens.size() < 2) return std::nullopt;
    if (tokens[0].text != "which" && tokens[0].text != "what") return std::nullopt;
    const std::string& next = tokens[1].text;
    if (stopwords().count(next) > 0) return std::nullopt;
    return next;
}

}  // namespace

bool is_stopword(std::string_view token) { return stopwords().count(token) > 0; }

OfflineQueryParser::OfflineQueryParser() : synonyms_(ConditionSynonyms::builtin()) {}

OfflineQueryParser::OfflineQueryParser(ConditionSynonyms synonyms)
    : synonyms_(std::move(synonyms)) {}

ParsedQuery OfflineQueryParser::parse(const std::string& question) {
    ParsedQuery query;
    query.raw = question;

    std::string canonical = canonicalize_text(question);
    if (canonical.empty()) throw EmptyQuery{};
    auto tokens = tokenize(canonical);

    query.target_type = detect_target_type(tokens);

    std::unordered_set<std::string> negated_words;
    for (CueHit hit : scan_cues(tokens)) {
        // A negated phrase under a positive cue ("with no known allergies")
        // is really an exclusion on the inner concept.
        if (hit.cls == CueClass::Required) {
            auto probe = ConditionLabel::parse(hit.phrase);
            if (probe.negated()) {
                hit.cls = CueClass::Excluded;
                hit.phrase = probe.text();
                hit.prep = "";
            }
        }
        switch (hit.cls) {
            case CueClass::Required:
                for (const auto& label : phrase_labels(synonyms_, hit)) {
                    push_unique(query.required_conditions, label);
                }
                break;
            case CueClass::Excluded:
                for (const auto& label : phrase_labels(synonyms_, hit)) {
                    push_unique(query.excluded_conditions, label);
                }
                break;
            case CueClass::Negated: {
                std::string cleaned = canonicalize_text(hit.phrase);
                if (cleaned.empty()) break;
                EntityId entity = EntityId::canonical(cleaned);
                if (std::find(query.negated_entities.begin(), query.negated_entities.end(),
                              entity) == query.negated_entities.end()) {
                    query.negated_entities.push_back(entity);
                }
                for (const auto& word : split_whitespace(cleaned)) {
                    negated_words.insert(strip_edge_punct(word));
                }
                break;
            }
        }
    }

    // Age statements outside any cue phrase ("A 5-year-old boy ...").
    if (auto age = find_age(canonical)) {
        bool have_age = std::any_of(
            query.required_conditions.begin(), query.required_conditions.end(),
            [](const ConditionLabel& l) { return l.text().starts_with("age "); });
        if (!have_age) {
            push_unique(query.required_conditions,
                        ConditionLabel::parse("age " + std::to_string(*age)));
        }
    }

    std::unordered_set<std::string> seen;
    for (const auto& token : tokens) {
        if (stopwords().count(token.text) > 0) continue;
        if (negated_words.count(token.text) > 0) continue;
        if (!seen.insert(token.text).second) continue;
        query.keywords.push_back(token.text);
    }
    return query;
}

ParsedQuery parse_query(const std::string& question, QueryParser& parser) {
    if (canonicalize_text(question).empty()) throw EmptyQuery{};
    ParsedQuery query = parser.parse(question);
    query.raw = question;

    // Overlapping labels stay excluded; the explicit exclusion wins.
    auto& required = query.required_conditions;
    required.erase(std::remove_if(required.begin(), required.end(),
                                  [&](const ConditionLabel& label) {
                                      return std::find(query.excluded_conditions.begin(),
                                                       query.excluded_conditions.end(),
                                                       label) !=
                                             query.excluded_conditions.end();
                                  }),
                   required.end());

    auto& keywords = query.keywords;
    keywords.erase(std::remove_if(keywords.begin(), keywords.end(),
                                  [&](const std::string& kw) {
                                      return std::any_of(
                                          query.negated_entities.begin(),
                                          query.negated_entities.end(),
                                          [&](const EntityId& e) { return e.value() == kw; });
                                  }),
                   keywords.end());

    if (keywords.empty()) {
        std::unordered_set<std::string> seen;
        for (const auto& raw : split_whitespace(canonicalize_text(question))) {
            auto word = strip_edge_punct(raw);
            if (word.empty() || is_stopword(word)) continue;
            if (seen.insert(word).second) keywords.push_back(word);
        }
        // Every token was a stopword; fall back to all of them rather than
        // violating the non-empty invariant.
        if (keywords.empty()) {
            for (const auto& raw : split_whitespace(canonicalize_text(question))) {
                auto word = strip_edge_punct(raw);
                if (!word.empty() && seen.insert(word).second) keywords.push_back(word);
            }
        }
    }
    return query;
}

std::string parsed_query_to_json(const ParsedQuery& query) {
    nlohmann::ordered_json j;
    j["raw"] = query.raw;
    j["keywords"] = query.keywords;
    auto labels = [](const std::vector<ConditionLabel>& list) {
        std::vector<std::string> out;
        out.reserve(list.size());
        for (const auto& label : list) out.push_back(label.serialized());
        return out;
    };
    j["required"] = labels(query.required_conditions);
    j["excluded"] = labels(query.excluded_conditions);
    std::vector<std::string> negated;
    negated.reserve(query.negated_entities.size());
    for (const auto& entity : query.negated_entities) negated.push_back(entity.value());
    j["negated"] = negated;
    j["target_entity"] = query.target_entity ? nlohmann::ordered_json(*query.target_entity)
                                             : nlohmann::ordered_json(nullptr);
    j["target_type"] = query.target_type ? nlohmann::ordered_json(*query.target_type)
                                         : nlohmann::ordered_json(nullptr);
    return j.dump();
}

}  // namespace cgr
