#include "cgr/pipeline.hpp"

#include <utility>

#include "cgr/errors.hpp"
#include "cgr/text.hpp"
#include "json.hpp"

namespace cgr {

void PipelineOptions::validate() const {
    traversal.validate();
    ranking.validate();
}

PipelineRun answer_question(const std::string& question, const KnowledgeGraph& graph,
                            const PipelineProviders& providers, const PipelineOptions& options) {
    if (providers.parser == nullptr || providers.embedder == nullptr ||
        providers.generator == nullptr) {
        throw ConfigError("pipeline needs parser, embedder and generator providers");
    }
    if (options.gating && providers.evaluator == nullptr) {
        throw ConfigError("pipeline with gating needs a condition evaluator");
    }
    options.validate();

    PipelineRun run;
    std::vector<std::string> degraded;

    try {
        run.query = parse_query(question, *providers.parser);
    } catch (const EmptyQuery&) {
        throw;  // an empty question is a caller error, not a provider failure
    } catch (const ProviderError&) {
        OfflineQueryParser fallback;
        run.query = parse_query(question, fallback);
        degraded.push_back("parser_fallback");
    } catch (const SchemaError&) {
        OfflineQueryParser fallback;
        run.query = parse_query(question, fallback);
        degraded.push_back("parser_fallback");
    }

    auto conditions = graph.unique_conditions();
    std::uint64_t fingerprint = fnv1a64(run.query.raw);
    if (!options.gating) {
        run.verdicts = ConditionVerdictTable::all_null(conditions, fingerprint);
    } else {
        try {
            run.verdicts = evaluate_conditions(run.query, conditions, *providers.evaluator,
                                               options.verdict_cache);
        } catch (const ProviderError&) {
            OfflineConditionEvaluator fallback;
            run.verdicts = evaluate_conditions(run.query, conditions, fallback,
                                               options.verdict_cache);
            degraded.push_back("evaluator_fallback");
        } catch (const SchemaError&) {
            OfflineConditionEvaluator fallback;
            run.verdicts = evaluate_conditions(run.query, conditions, fallback,
                                               options.verdict_cache);
            degraded.push_back("evaluator_fallback");
        }
    }

    bool no_entries = false;
    try {
        run.entries = select_entry_nodes(run.query, graph, *providers.embedder,
                                         options.traversal);
    } catch (const NoEntryNodes&) {
        no_entries = true;
    }

    if (!no_entries) {
        std::vector<EntityId> entry_ids;
        entry_ids.reserve(run.entries.size());
        for (const auto& [node, score] : run.entries) entry_ids.push_back(node);
        run.traversal = gated_bfs(graph, entry_ids, run.verdicts, options.traversal);
        if (run.traversal.truncated) degraded.push_back("truncated_traversal");
        run.ranked = rank_and_select(run.traversal.paths, run.query, graph,
                                     *providers.embedder, options.ranking);
    }

    run.package = assemble_evidence(run.ranked, graph, run.query);
    const std::string& tpl =
        options.prompt_template.empty() ? default_answer_template() : options.prompt_template;
    run.prompt = build_prompt(run.query, run.package, tpl);

    try {
        run.result = generate_answer(run.prompt, run.package, *providers.generator);
    } catch (const ProviderError&) {
        OfflineAnswerGenerator fallback;
        run.result = generate_answer(run.prompt, run.package, fallback);
        degraded.push_back("generator_fallback");
    } catch (const SchemaError&) {
        OfflineAnswerGenerator fallback;
        run.result = generate_answer(run.prompt, run.package, fallback);
        degraded.push_back("generator_fallback");
    }

    run.result.degraded.insert(run.result.degraded.begin(), degraded.begin(), degraded.end());
    return run;
}

std::string pipeline_run_to_json(const PipelineRun& run) {
    nlohmann::ordered_json j;
    j["question"] = run.query.raw;
    j["answer"] = run.result.answer;
    j["reasoning"] = run.result.reasoning;
    auto paths = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < run.ranked.size(); ++i) {
        paths.push_back({{"rank", i + 1},
                         {"score", run.ranked[i].score},
                         {"linearization", run.ranked[i].linearization}});
    }
    j["paths"] = paths;
    j["degraded"] = run.result.degraded;
    j["verdicts"] = nlohmann::ordered_json::parse(run.verdicts.to_json());
    j["blocked_edges"] = run.traversal.blocked_count;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& [node, score] : run.entries) {
        entries.push_back({{"node", node.value()}, {"score", score}});
    }
    j["entry_nodes"] = entries;
    return j.dump(2);
}

}  // namespace cgr
