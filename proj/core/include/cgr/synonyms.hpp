#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cgr {

/// Small synonym table mapping surface phrases onto canonical condition
/// concepts ("pregnant women" -> "pregnancy", "bilateral renal artery
/// stenosis" -> "bras"). Shared by the offline query parser and the offline
/// condition evaluator so both sides of a comparison land on the same
/// concept strings.
class ConditionSynonyms {
public:
    ConditionSynonyms() = default;

    /// The table shipped with the engine. Covers age groups, sex, pregnancy
    /// and a handful of common clinical qualifiers.
    static const ConditionSynonyms& builtin();

    void add_group(const std::string& canonical, const std::vector<std::string>& surfaces);

    /// Append entries from a TSV file of "surface<TAB>canonical" rows.
    void load_tsv(const std::filesystem::path& path);

    /// Canonical concept for an exact (canonicalized) phrase, if mapped.
    std::optional<std::string> phrase_concept(std::string_view phrase) const;

    /// Canonical concept for a single token. Falls back to the singular form,
    /// then to the token itself.
    std::string token_concept(std::string_view token) const;

    /// Longest-match scan over a token sequence. Mapped n-grams collapse to
    /// their canonical concept; unmapped tokens map through token_concept;
    /// filler tokens ("patient", articles) are dropped.
    std::vector<std::string> concepts_of(const std::vector<std::string>& tokens) const;

    std::size_t max_phrase_tokens() const { return max_phrase_tokens_; }

private:
    std::map<std::string, std::string, std::less<>> surface_to_canonical_;
    std::size_t max_phrase_tokens_ = 1;
};

/// Generic tokens that carry no condition content ("patients", "cases", …).
bool is_filler_token(std::string_view token);

}  // namespace cgr
