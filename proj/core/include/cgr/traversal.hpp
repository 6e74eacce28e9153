#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cgr/gating.hpp"
#include "cgr/graph.hpp"
#include "cgr/providers.hpp"
#include "cgr/query.hpp"

namespace cgr {

struct TraversalConfig {
    std::size_t k_nodes = 5;     // entry nodes kept per keyword
    double tau = 0.35;           // cosine threshold for entry-node selection
    std::size_t d_max = 4;       // maximum path depth in edges
    std::size_t max_paths = 10000;

    void validate() const;
};

/// A gated simple path: nodes.size() == edges.size() + 1, at least one edge,
/// no node repeated. conditions_along is the sorted-unique union of edge
/// conditions; snippets_along concatenates edge snippets in traversal order.
struct ReasoningPath {
    std::vector<EntityId> nodes;
    std::vector<EdgeId> edges;
    std::vector<ConditionLabel> conditions_along;
    std::vector<EvidenceSnippet> snippets_along;

    const EntityId& terminal() const { return nodes.back(); }
};

/// Entry nodes: for each keyword, up to k_nodes nodes whose label embedding
/// has cosine >= tau with the keyword embedding; the union is deduplicated
/// keeping the best score and sorted by (-score, node id). One embed_batch
/// call covers all keywords and node labels.
std::vector<std::pair<EntityId, double>> select_entry_nodes(const ParsedQuery& query,
                                                            const KnowledgeGraph& graph,
                                                            EmbeddingProvider& embedder,
                                                            const TraversalConfig& config);

struct TraversalResult {
    std::vector<ReasoningPath> paths;
    std::size_t blocked_count = 0;  // distinct edges gated out during the walk
    bool truncated = false;         // max_paths reached
};

/// Deterministic breadth-first walk from the entry nodes. An edge is expanded
/// only when its gate passes; expansion order is depth first-in-first-out,
/// then edge id. Only maximal paths are emitted: depth d_max, or no gated
/// outgoing edge leading to an unvisited node. Zero-edge walks are dropped.
TraversalResult gated_bfs(const KnowledgeGraph& graph, const std::vector<EntityId>& entries,
                          const ConditionVerdictTable& table, const TraversalConfig& config);

/// One JSON object per path: {"nodes": [...], "edges": [...],
/// "blocked_count": n, "truncated": bool}.
std::string paths_to_jsonl(const TraversalResult& result);

}  // namespace cgr
