#include "cgr/ranking.hpp"

#include <algorithm>

#include "cgr/errors.hpp"
#include "json.hpp"

namespace cgr {

void RankingConfig::validate() const {
    if (k_paths < 1) throw ConfigError("k_paths must be at least 1");
}

std::string linearize(const ReasoningPath& path, const KnowledgeGraph& graph) {
    if (path.edges.empty() || path.nodes.size() != path.edges.size() + 1) {
        throw InvalidPath("path must contain at least one edge");
    }
    std::string out = path.nodes.front().value();
    for (std::size_t i = 0; i < path.edges.size(); ++i) {
        const EdgeRecord& edge = graph.edge(path.edges[i]);
        if (edge.source != path.nodes[i] || edge.target != path.nodes[i + 1]) {
            throw InvalidPath("edge " + path.edges[i] + " does not connect path nodes");
        }
        out += " -[" + edge.relation + "]-> " + edge.target.value();
    }
    return out;
}

double score_path(const ParsedQuery& query, const std::string& path_text,
                  EmbeddingProvider& embedder) {
    std::vector<std::string> texts;
    texts.reserve(query.keywords.size() + 1);
    texts.push_back(path_text);
    for (const auto& keyword : query.keywords) texts.push_back(keyword);
    auto vectors = embedder.embed_batch(texts);
    double total = 0.0;
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        total += cosine(vectors[0], vectors[i]);
    }
    return total;
}

std::vector<ScoredPath> rank_and_select(const std::vector<ReasoningPath>& paths,
                                        const ParsedQuery& query, const KnowledgeGraph& graph,
                                        EmbeddingProvider& embedder,
                                        const RankingConfig& config) {
    config.validate();

    std::vector<ScoredPath> scored;
    scored.reserve(paths.size());
    for (const auto& path : paths) {
        bool negated = std::any_of(query.negated_entities.begin(), query.negated_entities.end(),
                                   [&](const EntityId& e) { return e == path.terminal(); });
        if (negated) continue;
        ScoredPath sp;
        sp.path = path;
        sp.linearization = linearize(path, graph);
        scored.push_back(std::move(sp));
    }
    if (scored.empty()) return scored;

    std::vector<std::string> texts;
    texts.reserve(scored.size() + query.keywords.size());
    for (const auto& sp : scored) texts.push_back(sp.linearization);
    for (const auto& keyword : query.keywords) texts.push_back(keyword);
    auto vectors = embedder.embed_batch(texts);

    for (std::size_t pi = 0; pi < scored.size(); ++pi) {
        double total = 0.0;
        for (std::size_t ki = 0; ki < query.keywords.size(); ++ki) {
            total += cosine(vectors[pi], vectors[scored.size() + ki]);
        }
        scored[pi].score = total;
    }

    std::sort(scored.begin(), scored.end(), [](const ScoredPath& a, const ScoredPath& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.linearization < b.linearization;
    });
    if (scored.size() > config.k_paths) scored.resize(config.k_paths);
    return scored;
}

std::string ranked_paths_to_jsonl(const std::vector<ScoredPath>& scored) {
    std::string out;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        nlohmann::ordered_json j;
        j["rank"] = i + 1;
        j["score"] = scored[i].score;
        j["linearization"] = scored[i].linearization;
        std::vector<std::string> nodes;
        nodes.reserve(scored[i].path.nodes.size());
        for (const auto& node : scored[i].path.nodes) nodes.push_back(node.value());
        j["nodes"] = nodes;
        std::vector<std::string> conditions;
        conditions.reserve(scored[i].path.conditions_along.size());
        for (const auto& label : scored[i].path.conditions_along) {
            conditions.push_back(label.serialized());
        }
        j["conditions"] = conditions;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace cgr
