#pragma once

#include <string>
#include <vector>

#include "cgr/graph.hpp"
#include "cgr/providers.hpp"
#include "cgr/query.hpp"
#include "cgr/traversal.hpp"

namespace cgr {

struct RankingConfig {
    std::size_t k_paths = 3;  // paths kept as evidence

    void validate() const;
};

struct ScoredPath {
    ReasoningPath path;
    double score = 0.0;
    std::string linearization;
};

/// "a -[r1]-> b -[r2]-> c". Throws InvalidPath for zero-edge paths or edges
/// that do not chain through the graph.
std::string linearize(const ReasoningPath& path, const KnowledgeGraph& graph);

/// Aggregate similarity: sum over keywords of cos(embed(path_text),
/// embed(keyword)). One embed_batch call covers the path text and keywords.
double score_path(const ParsedQuery& query, const std::string& path_text,
                  EmbeddingProvider& embedder);

/// Scores every path (one embed_batch call for all linearizations plus
/// keywords), drops paths terminating at a negated entity, sorts by
/// (-score, linearization) and returns the first k_paths.
std::vector<ScoredPath> rank_and_select(const std::vector<ReasoningPath>& paths,
                                        const ParsedQuery& query, const KnowledgeGraph& graph,
                                        EmbeddingProvider& embedder,
                                        const RankingConfig& config);

/// One JSON object per line: {rank, score, linearization, nodes, conditions}.
std::string ranked_paths_to_jsonl(const std::vector<ScoredPath>& scored);

}  // namespace cgr
