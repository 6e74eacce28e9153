#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cgr/graph.hpp"
#include "cgr/query.hpp"
#include "cgr/synonyms.hpp"

namespace cgr {

/// Three-valued condition verdict. Null means the query carries no relevant
/// information; Null never blocks traversal.
enum class Verdict { True, False, Null };

std::string_view to_string(Verdict verdict);

/// Lookup table from condition label to verdict for one query. Total: unknown
/// labels report Null instead of failing. Immutable by convention once built.
class ConditionVerdictTable {
public:
    ConditionVerdictTable() = default;
    explicit ConditionVerdictTable(std::uint64_t query_fingerprint)
        : query_fingerprint_(query_fingerprint) {}

    void set(const ConditionLabel& label, Verdict verdict) { entries_[label] = verdict; }

    Verdict lookup(const ConditionLabel& label) const {
        auto it = entries_.find(label);
        return it == entries_.end() ? Verdict::Null : it->second;
    }

    std::uint64_t query_fingerprint() const { return query_fingerprint_; }
    std::size_t size() const { return entries_.size(); }
    const std::unordered_map<ConditionLabel, Verdict, ConditionLabelHash>& entries() const {
        return entries_;
    }

    /// Ablation table: every condition maps to Null, so gating passes
    /// everything. No required/excluded overrides are applied on top.
    static ConditionVerdictTable all_null(const std::vector<ConditionLabel>& conditions,
                                          std::uint64_t query_fingerprint = 0);

    /// {"<label>": "true"|"false"|"null", ...} with keys sorted; negated
    /// labels carry the "not:" prefix.
    std::string to_json() const;

private:
    std::unordered_map<ConditionLabel, Verdict, ConditionLabelHash> entries_;
    std::uint64_t query_fingerprint_ = 0;
};

/// Batch evaluator: one invocation produces verdicts for all conditions, in
/// input order. Implementations must not be called per-condition.
class ConditionEvaluator {
public:
    virtual ~ConditionEvaluator() = default;

    virtual std::vector<Verdict> evaluate_batch(const ParsedQuery& query,
                                                const std::vector<ConditionLabel>& conditions) = 0;
};

/// Deterministic rule evaluator: synonym-level concept matching against the
/// question, numeric and categorical age rules, sex implications, and
/// negation spans ("no known X"). Unmatched conditions are Null; a negated
/// label flips True/False and leaves Null alone.
class OfflineConditionEvaluator : public ConditionEvaluator {
public:
    OfflineConditionEvaluator();
    explicit OfflineConditionEvaluator(ConditionSynonyms synonyms);

    std::vector<Verdict> evaluate_batch(const ParsedQuery& query,
                                        const std::vector<ConditionLabel>& conditions) override;

private:
    ConditionSynonyms synonyms_;
};

/// Single-condition form of the offline rule evaluator (builtin synonyms).
Verdict offline_evaluate(const ParsedQuery& query, const ConditionLabel& condition);

/// Keyed by (query fingerprint, condition-set hash); lets parameter sweeps
/// reuse verdicts instead of re-invoking the evaluator. Thread-safe.
class VerdictCache {
public:
    std::optional<ConditionVerdictTable> find(std::uint64_t query_fingerprint,
                                              std::uint64_t condition_set_hash) const;
    void store(std::uint64_t query_fingerprint, std::uint64_t condition_set_hash,
               ConditionVerdictTable table);

private:
    mutable std::mutex mutex_;
    std::unordered_map<std::uint64_t, ConditionVerdictTable> tables_;
};

std::uint64_t condition_set_hash(const std::vector<ConditionLabel>& conditions);

/// Builds the verdict table with exactly one evaluate_batch call (zero for an
/// empty condition set), then forces excluded conditions to False and
/// required conditions to True. A cache hit skips the evaluator entirely.
ConditionVerdictTable evaluate_conditions(const ParsedQuery& query,
                                          const std::vector<ConditionLabel>& conditions,
                                          ConditionEvaluator& evaluator,
                                          VerdictCache* cache = nullptr);

/// Edge gate: traversable iff no condition on the edge has a False verdict.
/// Condition-free edges always pass.
bool gate(const EdgeRecord& edge, const ConditionVerdictTable& table);

}  // namespace cgr
