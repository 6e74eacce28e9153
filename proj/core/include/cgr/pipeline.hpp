#pragma once

#include <string>
#include <vector>

#include "cgr/answer.hpp"
#include "cgr/gating.hpp"
#include "cgr/graph.hpp"
#include "cgr/providers.hpp"
#include "cgr/query.hpp"
#include "cgr/ranking.hpp"
#include "cgr/traversal.hpp"

namespace cgr {

/// Per-role providers for one pipeline run. Parser, evaluator and generator
/// degrade to their offline counterparts on ProviderError/SchemaError (the
/// run records a degradation flag); the embedder has no fallback because
/// entry selection and ranking must share one embedding space.
struct PipelineProviders {
    QueryParser* parser = nullptr;
    ConditionEvaluator* evaluator = nullptr;
    EmbeddingProvider* embedder = nullptr;
    AnswerGenerator* generator = nullptr;
};

struct PipelineOptions {
    TraversalConfig traversal;
    RankingConfig ranking;
    bool gating = true;              // off substitutes the all-Null verdict table
    std::string prompt_template;     // empty selects the default template
    VerdictCache* verdict_cache = nullptr;

    void validate() const;
};

/// Full trace of one question answered over a frozen graph.
struct PipelineRun {
    ParsedQuery query;
    ConditionVerdictTable verdicts;
    std::vector<std::pair<EntityId, double>> entries;
    TraversalResult traversal;
    std::vector<ScoredPath> ranked;
    EvidencePackage package;
    std::string prompt;
    AnswerResult result;
};

/// Runs parse -> evaluate -> traverse -> rank -> assemble -> answer.
///
/// Role failures degrade instead of aborting: a parser, evaluator or
/// generator that throws ProviderError/SchemaError is replaced by its
/// offline counterpart and a flag ("parser_fallback", "evaluator_fallback",
/// "generator_fallback") is appended to result.degraded, alongside
/// "truncated_traversal" when the path budget was hit. A query whose
/// keywords match no graph node yields the insufficient-evidence answer with
/// zero paths rather than an error. NetworkGuardViolation always propagates.
PipelineRun answer_question(const std::string& question, const KnowledgeGraph& graph,
                            const PipelineProviders& providers,
                            const PipelineOptions& options = {});

/// {question, answer, reasoning, paths, degraded, verdicts, blocked_edges,
/// entry_nodes} - the full machine-readable run report.
std::string pipeline_run_to_json(const PipelineRun& run);

}  // namespace cgr
