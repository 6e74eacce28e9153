#include "cgr/traversal.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_set>

#include "cgr/errors.hpp"
#include "json.hpp"

namespace cgr {

void TraversalConfig::validate() const {
    if (k_nodes < 1) throw ConfigError("k_nodes must be at least 1");
    if (d_max < 1) throw ConfigError("d_max must be at least 1");
    if (max_paths < 1) throw ConfigError("max_paths must be at least 1");
    if (tau < -1.0 || tau > 1.0) throw ConfigError("tau must lie in [-1, 1]");
}

std::vector<std::pair<EntityId, double>> select_entry_nodes(const ParsedQuery& query,
                                                            const KnowledgeGraph& graph,
                                                            EmbeddingProvider& embedder,
                                                            const TraversalConfig& config) {
    config.validate();
    if (query.keywords.empty() || graph.nodes().empty()) {
        throw NoEntryNodes{};
    }

    std::vector<std::string> texts;
    texts.reserve(query.keywords.size() + graph.nodes().size());
    for (const auto& keyword : query.keywords) texts.push_back(keyword);
    std::vector<const EntityId*> node_order;
    node_order.reserve(graph.nodes().size());
    for (const auto& node : graph.nodes()) {
        node_order.push_back(&node);
        texts.push_back(node.value());
    }
    auto vectors = embedder.embed_batch(texts);

    std::map<EntityId, double> best;
    for (std::size_t ki = 0; ki < query.keywords.size(); ++ki) {
        const EmbeddingVector& kw_vec = vectors[ki];
        std::vector<std::pair<double, const EntityId*>> candidates;
        for (std::size_t ni = 0; ni < node_order.size(); ++ni) {
            double score = cosine(kw_vec, vectors[query.keywords.size() + ni]);
            if (score >= config.tau) candidates.emplace_back(score, node_order[ni]);
        }
        std::sort(candidates.begin(), candidates.end(),
                  [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return *a.second < *b.second;
                  });
        if (candidates.size() > config.k_nodes) candidates.resize(config.k_nodes);
        for (const auto& [score, node] : candidates) {
            auto [it, inserted] = best.try_emplace(*node, score);
            if (!inserted && score > it->second) it->second = score;
        }
    }
    if (best.empty()) throw NoEntryNodes{};

    std::vector<std::pair<EntityId, double>> entries(best.begin(), best.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return entries;
}

namespace {

struct PartialPath {
    std::vector<EntityId> nodes;
    std::vector<EdgeId> edges;
    std::unordered_set<EntityId, EntityIdHash> on_path;
};

ReasoningPath finish(const KnowledgeGraph& graph, PartialPath&& partial) {
    ReasoningPath path;
    path.nodes = std::move(partial.nodes);
    path.edges = std::move(partial.edges);
    for (const auto& edge_id : path.edges) {
        const EdgeRecord& edge = graph.edge(edge_id);
        for (const auto& label : edge.conditions) path.conditions_along.push_back(label);
        for (const auto& snippet : edge.snippets) path.snippets_along.push_back(snippet);
    }
    std::sort(path.conditions_along.begin(), path.conditions_along.end());
    path.conditions_along.erase(
        std::unique(path.conditions_along.begin(), path.conditions_along.end()),
        path.conditions_along.end());
    return path;
}

}  // namespace

TraversalResult gated_bfs(const KnowledgeGraph& graph, const std::vector<EntityId>& entries,
                          const ConditionVerdictTable& table, const TraversalConfig& config) {
    config.validate();
    TraversalResult result;
    std::unordered_set<std::string> blocked_ids;

    std::deque<PartialPath> frontier;
    std::unordered_set<EntityId, EntityIdHash> seeded;
    for (const auto& entry : entries) {
        if (graph.nodes().count(entry) == 0) continue;
        if (!seeded.insert(entry).second) continue;
        PartialPath start;
        start.nodes.push_back(entry);
        start.on_path.insert(entry);
        frontier.push_back(std::move(start));
    }

    while (!frontier.empty()) {
        PartialPath current = std::move(frontier.front());
        frontier.pop_front();

        std::vector<const EdgeRecord*> expandable;
        if (current.edges.size() < config.d_max) {
            for (const auto& edge_id : graph.out_edges(current.nodes.back())) {
                const EdgeRecord& edge = graph.edge(edge_id);
                if (!gate(edge, table)) {
                    blocked_ids.insert(edge_id);
                    continue;
                }
                if (current.on_path.count(edge.target) > 0) continue;
                expandable.push_back(&edge);
            }
        }

        if (expandable.empty()) {
            if (!current.edges.empty()) {
                if (result.paths.size() >= config.max_paths) {
                    result.truncated = true;
                    break;
                }
                result.paths.push_back(finish(graph, std::move(current)));
            }
            continue;
        }
        for (const EdgeRecord* edge : expandable) {
            PartialPath next = current;
            next.nodes.push_back(edge->target);
            next.edges.push_back(edge->id);
            next.on_path.insert(edge->target);
            frontier.push_back(std::move(next));
        }
    }

    result.blocked_count = blocked_ids.size();
    return result;
}

std::string paths_to_jsonl(const TraversalResult& result) {
    std::string out;
    for (const auto& path : result.paths) {
        nlohmann::ordered_json j;
        std::vector<std::string> nodes;
        nodes.reserve(path.nodes.size());
        for (const auto& node : path.nodes) nodes.push_back(node.value());
        j["nodes"] = nodes;
        j["edges"] = path.edges;
        j["blocked_count"] = result.blocked_count;
        j["truncated"] = result.truncated;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace cgr
