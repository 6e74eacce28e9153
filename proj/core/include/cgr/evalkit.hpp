#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgr/extraction.hpp"
#include "cgr/pipeline.hpp"

namespace cgr {

/// One conditional-QA benchmark item: a question whose correct answer
/// depends on a patient-specific modifier, plus the documents that support
/// both the conditional and the general answer.
struct BenchmarkItem {
    std::string id;
    std::string question;
    std::string conditional_answer;
    std::optional<std::string> general_answer;
    std::optional<std::string> condition;  // the modifier phrase, verbatim from the question
    std::vector<std::string> doc_ids;
    std::optional<std::string> category;
};

enum class ItemViolation {
    ModifierMissing,     // condition text does not occur in the question
    AnswerNotDivergent,  // conditional and general answers normalize equal
    MissingDocuments,    // no doc_ids, or a conditional item with fewer than 2
};

std::string to_string(ItemViolation violation);

/// Structural checks only; semantic validity of the condition is out of scope.
std::vector<ItemViolation> validate_item(const BenchmarkItem& item);

/// Loads a JSON Lines dataset of BenchmarkItems. Throws IoError on
/// unreadable files and FormatError (with line number) on malformed rows.
std::vector<BenchmarkItem> load_dataset(const std::filesystem::path& path);

/// Answer-string normalization used by both metrics: case-fold, strip
/// punctuation characters, drop the articles {a, an, the}, collapse
/// whitespace.
std::string normalize_answer(std::string_view text);

/// 1 iff the normalized strings are equal.
int exact_match(std::string_view prediction, std::string_view gold);

/// Harmonic mean of precision and recall over the multiset overlap of
/// normalized tokens. Both empty -> 1; exactly one empty -> 0.
double token_f1(std::string_view prediction, std::string_view gold);

/// Chance-corrected inter-rater agreement over an items x raters matrix of
/// categorical labels (every row the same width, >= 2 raters). gwet_ac1
/// treats the scale as nominal; gwet_ac2 as ordinal with quadratic weights
/// over the supplied category order. A scale with fewer than two observed
/// categories is degenerate and yields 1.0 by convention; DegenerateScale is
/// thrown only when chance agreement reaches 1 with imperfect observed
/// agreement.
double gwet_ac1(const std::vector<std::vector<std::string>>& ratings);
double gwet_ac2(const std::vector<std::vector<std::string>>& ratings,
                const std::vector<std::string>& ordered_categories);

/// (unanimous item %, mean agreeing-pair %) over the same matrix shape.
std::pair<double, double> percent_agreement(const std::vector<std::vector<std::string>>& ratings);

struct RatingsTable {
    std::vector<std::string> item_ids;
    std::vector<std::vector<std::string>> ratings;  // items x raters
};

/// CSV with header "item_id,rater_1,...,rater_k" (k >= 2), no quoting.
RatingsTable load_ratings_csv(const std::filesystem::path& path);

struct ItemResult {
    std::string id;
    std::string prediction;
    int em = 0;
    double f1 = 0.0;
    std::string error;  // non-empty when the item failed and scored zero
};

struct EvalReport {
    std::vector<ItemResult> items;  // sorted by id
    double em_percent = 0.0;        // mean EM * 100, rounded to 2 decimals
    double f1_percent = 0.0;        // mean F1 * 100, rounded to 2 decimals
    bool gating = true;
    int k_paths = 0;
    int k_nodes = 0;
    std::uint64_t config_hash = 0;
};

std::string eval_report_to_json(const EvalReport& report);

/// Stable hash of the effective pipeline knobs (gating, k_nodes, k_paths,
/// d_max, tau, max_paths); identical configurations hash identically
/// regardless of how they were specified.
std::uint64_t eval_config_hash(const PipelineOptions& options);

struct EvalRunConfig {
    PipelineOptions options;
    std::vector<int> sweep_k_paths;  // each value yields one report (k_nodes fixed)
    std::vector<int> sweep_k_nodes;  // each value yields one report (k_paths fixed)
    int jobs = 1;                    // item-level parallelism bound
    bool materialize_inverse = false;
    TupleExtractor* extractor = nullptr;          // null -> rule-based
    const SynonymDictionary* dictionary = nullptr;  // null -> empty dictionary
};

/// Runs the full pipeline per item over a graph built from that item's
/// documents (texts looked up in `corpus` by doc_id) and scores predictions
/// against the conditional answer. Per-item failures are recorded and score
/// zero; the run never aborts mid-dataset. Without sweep lists the result is
/// one report; each sweep value appends another. Items in every report are
/// sorted by id.
std::vector<EvalReport> run_eval(const std::vector<BenchmarkItem>& items,
                                 const std::map<std::string, std::string>& corpus,
                                 const PipelineProviders& providers,
                                 const EvalRunConfig& config);

}  // namespace cgr
