#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "cgr/evalkit.hpp"
#include "cgr/extraction.hpp"
#include "cgr/gating.hpp"
#include "cgr/graph.hpp"
#include "cgr/providers.hpp"
#include "cgr/query.hpp"
#include "cgr/ranking.hpp"
#include "cgr/traversal.hpp"

namespace {

/// Layered lattice: `layers` ranks of `width` nodes, every node linked to the
/// whole next rank, a third of the edges carrying a condition. Dense enough
/// to exercise the walk without exploding.
cgr::KnowledgeGraph lattice(int layers, int width) {
    cgr::KnowledgeGraph graph;
    auto name = [](int layer, int slot) {
        return cgr::canonicalize_entity("node " + std::to_string(layer) + " " +
                                        std::to_string(slot));
    };
    int serial = 0;
    for (int layer = 0; layer + 1 < layers; ++layer) {
        for (int from = 0; from < width; ++from) {
            for (int to = 0; to < width; ++to) {
                std::vector<cgr::ConditionLabel> conditions;
                if (++serial % 3 == 0) {
                    conditions.push_back(cgr::ConditionLabel::make(
                        "context " + std::to_string(serial % 7), serial % 2 == 0));
                }
                graph.add_tuple(cgr::make_edge(name(layer, from), "linked_to",
                                               name(layer + 1, to), conditions));
            }
        }
    }
    graph.freeze();
    return graph;
}

cgr::ConditionVerdictTable mixed_verdicts(const cgr::KnowledgeGraph& graph) {
    cgr::ConditionVerdictTable table;
    int i = 0;
    for (const auto& label : graph.unique_conditions()) {
        auto verdict = i % 3 == 0   ? cgr::Verdict::False
                       : i % 3 == 1 ? cgr::Verdict::True
                                    : cgr::Verdict::Null;
        table.set(label, verdict);
        ++i;
    }
    return table;
}

const std::string kSentence =
    "In pregnant women, misoprostol increases uterine tone and is associated with "
    "partial or complete abortions and birth defects.";

void BM_HashEmbed(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(cgr::hash_embed(kSentence));
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * kSentence.size());
}
BENCHMARK(BM_HashEmbed);

void BM_GatedTraversal(benchmark::State& state) {
    auto graph = lattice(static_cast<int>(state.range(0)), 6);
    auto table = mixed_verdicts(graph);
    std::vector<cgr::EntityId> entries = {cgr::canonicalize_entity("node 0 0")};
    cgr::TraversalConfig config;
    config.d_max = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cgr::gated_bfs(graph, entries, table, config));
    }
}
BENCHMARK(BM_GatedTraversal)->Arg(3)->Arg(4)->Arg(5);

void BM_ConditionBatch(benchmark::State& state) {
    auto graph = lattice(4, static_cast<int>(state.range(0)));
    cgr::OfflineQueryParser parser;
    auto query = cgr::parse_query(
        "Which medication treats hypertension in a 68-year-old patient?", parser);
    cgr::OfflineConditionEvaluator evaluator;
    auto conditions = graph.unique_conditions();
    for (auto _ : state) {
        benchmark::DoNotOptimize(cgr::evaluate_conditions(query, conditions, evaluator));
    }
}
BENCHMARK(BM_ConditionBatch)->Arg(6)->Arg(12);

void BM_RankPaths(benchmark::State& state) {
    auto graph = lattice(4, 6);
    auto table = cgr::ConditionVerdictTable::all_null(graph.unique_conditions());
    auto paths =
        cgr::gated_bfs(graph, {cgr::canonicalize_entity("node 0 0")}, table, {}).paths;
    cgr::ParsedQuery query;
    query.raw = "bench";
    query.keywords = {"node", "linked", "context"};
    cgr::HashEmbeddingProvider embedder;
    cgr::RankingConfig config;
    for (auto _ : state) {
        benchmark::DoNotOptimize(cgr::rank_and_select(paths, query, graph, embedder, config));
    }
    state.counters["paths"] = static_cast<double>(paths.size());
}
BENCHMARK(BM_RankPaths);

void BM_RuleBasedExtract(benchmark::State& state) {
    auto chunks = cgr::chunk_document("bench", kSentence + " " + kSentence + " " + kSentence);
    cgr::RuleBasedExtractor extractor;
    for (auto _ : state) {
        for (const auto& chunk : chunks) {
            benchmark::DoNotOptimize(cgr::extract_tuples(chunk, extractor));
        }
    }
}
BENCHMARK(BM_RuleBasedExtract);

void BM_TokenF1(benchmark::State& state) {
    const std::string prediction = "vitamin k deficiency with prolonged prothrombin time";
    const std::string gold = "deficiency of vitamin k";
    for (auto _ : state) {
        benchmark::DoNotOptimize(cgr::token_f1(prediction, gold));
    }
}
BENCHMARK(BM_TokenF1);

void BM_GwetAC1(benchmark::State& state) {
    std::vector<std::vector<std::string>> ratings(50, std::vector<std::string>(4));
    const std::vector<std::string> scale = {"correct", "partial", "wrong"};
    for (std::size_t i = 0; i < ratings.size(); ++i) {
        for (std::size_t j = 0; j < ratings[i].size(); ++j) {
            ratings[i][j] = scale[(i * 7 + j * 3) % scale.size()];
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(cgr::gwet_ac1(ratings));
    }
}
BENCHMARK(BM_GwetAC1);

}  // namespace

BENCHMARK_MAIN();
