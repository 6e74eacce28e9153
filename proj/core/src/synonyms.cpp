#include "cgr/synonyms.hpp"

#include <fstream>
#include <unordered_set>

#include "cgr/errors.hpp"
#include "cgr/text.hpp"

namespace cgr {

namespace {

const std::unordered_set<std::string>& filler_tokens() {
    static const std::unordered_set<std::string> kFiller = {
        "a",          "an",      "the",     "patient", "patients",    "people",
        "person",     "persons", "case",    "cases",   "individual",  "individuals",
        "subject",    "subjects", "known",
    };
    return kFiller;
}

}  // namespace

bool is_filler_token(std::string_view token) {
    return filler_tokens().count(std::string(token)) > 0;
}

const ConditionSynonyms& ConditionSynonyms::builtin() {
    static const ConditionSynonyms table = [] {
        ConditionSynonyms t;
        t.add_group("pediatric", {"pediatric", "paediatric", "child", "children", "childhood",
                                  "kid", "kids", "infant", "infants"});
        t.add_group("adults", {"adult", "adults"});
        t.add_group("elderly", {"elderly", "geriatric", "older adults", "old age"});
        t.add_group("pregnancy",
                    {"pregnancy", "pregnant", "pregnant women", "pregnant woman",
                     "pregnant patients", "pregnant patient", "during pregnancy", "gestation"});
        t.add_group("male", {"male", "males", "man", "men", "boy", "boys"});
        t.add_group("female", {"female", "females", "woman", "women", "girl", "girls"});
        t.add_group("bras", {"bras", "bilateral renal artery stenosis"});
        t.add_group("renal impairment",
                    {"renal impairment", "kidney impairment", "renal insufficiency",
                     "kidney disease", "renal disease", "renal failure", "kidney failure"});
        t.add_group("allergy", {"allergy", "allergies", "allergic", "hypersensitivity"});
        t.add_group("hypertension", {"hypertension", "high blood pressure"});
        return t;
    }();
    return table;
}

void ConditionSynonyms::add_group(const std::string& canonical,
                                  const std::vector<std::string>& surfaces) {
    std::string canon = canonicalize_text(canonical);
    for (const auto& surface : surfaces) {
        std::string key = canonicalize_text(surface);
        if (key.empty()) continue;
        surface_to_canonical_[key] = canon;
        auto tokens = split_whitespace(key);
        max_phrase_tokens_ = std::max(max_phrase_tokens_, tokens.size());
    }
    surface_to_canonical_[canon] = canon;
}

void ConditionSynonyms::load_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synonym table '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw FormatError("synonym row lacks a tab separator", line_no);
        }
        std::string surface = canonicalize_text(line.substr(0, tab));
        std::string canon = canonicalize_text(line.substr(tab + 1));
        if (surface.empty() || canon.empty()) {
            throw FormatError("synonym row has an empty field", line_no);
        }
        add_group(canon, {surface});
    }
}

std::optional<std::string> ConditionSynonyms::phrase_concept(std::string_view phrase) const {
    auto it = surface_to_canonical_.find(canonicalize_text(phrase));
    if (it == surface_to_canonical_.end()) return std::nullopt;
    return it->second;
}

std::string ConditionSynonyms::token_concept(std::string_view token) const {
    std::string t = canonicalize_text(token);
    auto it = surface_to_canonical_.find(t);
    if (it != surface_to_canonical_.end()) return it->second;
    std::string singular = singularize(t);
    it = surface_to_canonical_.find(singular);
    if (it != surface_to_canonical_.end()) return it->second;
    return singular;
}

std::vector<std::string> ConditionSynonyms::concepts_of(
    const std::vector<std::string>& tokens) const {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        bool matched = false;
        std::size_t longest = std::min(max_phrase_tokens_, tokens.size() - i);
        for (std::size_t n = longest; n >= 2; --n) {
            std::string phrase = tokens[i];
            for (std::size_t k = 1; k < n; ++k) phrase += " " + tokens[i + k];
            auto it = surface_to_canonical_.find(phrase);
            if (it != surface_to_canonical_.end()) {
                out.push_back(it->second);
                i += n;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (!is_filler_token(tokens[i])) {
            out.push_back(token_concept(tokens[i]));
        }
        ++i;
    }
    return out;
}

}  // namespace cgr
