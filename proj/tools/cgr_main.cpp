#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgr/commands.hpp"
#include "cgr/errors.hpp"

namespace {

/// Flags shared by every subcommand. Values land in `config` after the
/// config file (if any) has been loaded, so flags override file keys.
struct CommonFlags {
    std::string config_file;

    void attach(CLI::App* cmd, cgr::RunConfig& config) {
        cmd->add_option("--config", config_file, "JSON config file (flags override its keys)");
        cmd->add_option("--k-nodes", config.k_nodes, "entry nodes kept per query keyword");
        cmd->add_option("--k-paths", config.k_paths, "reasoning paths kept after ranking");
        cmd->add_option("--d-max", config.d_max, "maximum path length in edges");
        cmd->add_option("--tau", config.tau, "entry-node similarity threshold");
        cmd->add_option("--max-paths", config.max_paths, "traversal path budget");
        cmd->add_option("--max-chunk-chars", config.max_chunk_chars, "document chunk size");
        cmd->add_option("--jobs", config.jobs, "parallel items in evaluate");
        cmd->add_option("--dictionary", config.dictionary_file, "synonym TSV file");
        cmd->add_flag("--inverse,!--no-inverse", config.materialize_inverse,
                      "materialize inverse edges when the extractor supplies a relation");
        cmd->add_flag("!--no-gating", config.gating, "disable condition gating");

        auto role = [cmd](const std::string& name, bool& remote) {
            cmd->add_flag("--remote-" + name + ",!--offline-" + name, remote,
                          name + " role implementation (default offline)");
        };
        role("extractor", config.remote_extractor);
        role("parser", config.remote_parser);
        role("evaluator", config.remote_evaluator);
        role("embedder", config.remote_embedder);
        role("generator", config.remote_generator);

        cmd->add_option("--chat-endpoint", config.chat.endpoint_url, "chat endpoint URL");
        cmd->add_option("--chat-model", config.chat.model, "chat model name");
        cmd->add_option("--chat-api-key-env", config.chat.api_key_env,
                        "env var holding the chat bearer token");
        cmd->add_option("--embedding-endpoint", config.embedding.endpoint_url,
                        "embedding endpoint URL");
        cmd->add_option("--embedding-model", config.embedding.model, "embedding model name");
        cmd->add_option("--embedding-api-key-env", config.embedding.api_key_env,
                        "env var holding the embedding bearer token");
    }

    /// Re-runs the parse with file values as defaults so that explicit flags
    /// keep their command-line values.
    void merge_config_file(CLI::App* cmd, cgr::RunConfig& config) {
        if (config_file.empty()) return;
        auto from_file = cgr::load_run_config(config_file);
        // Start from the file's values, then overwrite with every flag the
        // user actually passed.
        cgr::RunConfig merged = from_file;
        auto keep = [cmd](const std::string& flag) { return cmd->count(flag) > 0; };
        if (keep("--k-nodes")) merged.k_nodes = config.k_nodes;
        if (keep("--k-paths")) merged.k_paths = config.k_paths;
        if (keep("--d-max")) merged.d_max = config.d_max;
        if (keep("--tau")) merged.tau = config.tau;
        if (keep("--max-paths")) merged.max_paths = config.max_paths;
        if (keep("--max-chunk-chars")) merged.max_chunk_chars = config.max_chunk_chars;
        if (keep("--jobs")) merged.jobs = config.jobs;
        if (keep("--dictionary")) merged.dictionary_file = config.dictionary_file;
        if (keep("--inverse") || keep("--no-inverse")) {
            merged.materialize_inverse = config.materialize_inverse;
        }
        if (keep("--no-gating")) merged.gating = config.gating;
        auto role = [&](const std::string& name, bool value, bool& slot) {
            if (keep("--remote-" + name) || keep("--offline-" + name)) slot = value;
        };
        role("extractor", config.remote_extractor, merged.remote_extractor);
        role("parser", config.remote_parser, merged.remote_parser);
        role("evaluator", config.remote_evaluator, merged.remote_evaluator);
        role("embedder", config.remote_embedder, merged.remote_embedder);
        role("generator", config.remote_generator, merged.remote_generator);
        if (keep("--chat-endpoint")) merged.chat.endpoint_url = config.chat.endpoint_url;
        if (keep("--chat-model")) merged.chat.model = config.chat.model;
        if (keep("--chat-api-key-env")) merged.chat.api_key_env = config.chat.api_key_env;
        if (keep("--embedding-endpoint")) {
            merged.embedding.endpoint_url = config.embedding.endpoint_url;
        }
        if (keep("--embedding-model")) merged.embedding.model = config.embedding.model;
        if (keep("--embedding-api-key-env")) {
            merged.embedding.api_key_env = config.embedding.api_key_env;
        }
        config = merged;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Condition-gated knowledge-graph reasoning engine"};
    app.require_subcommand(1);

    cgr::RunConfig extract_config;
    CommonFlags extract_flags;
    std::string corpus_dir;
    std::string tuples_out;
    auto* extract = app.add_subcommand("extract", "corpus directory -> tuples file");
    extract->add_option("corpus", corpus_dir, "directory of document files")->required();
    extract->add_option("out", tuples_out, "output tuples JSONL")->required();
    extract_flags.attach(extract, extract_config);

    cgr::RunConfig build_config;
    CommonFlags build_flags;
    std::string tuples_in;
    std::string graph_out;
    auto* build = app.add_subcommand("build", "tuples file -> graph file");
    build->add_option("tuples", tuples_in, "tuples JSONL from extract")->required();
    build->add_option("out", graph_out, "output graph JSONL")->required();
    build_flags.attach(build, build_config);

    cgr::RunConfig query_config;
    CommonFlags query_flags;
    std::string graph_in;
    std::string question;
    bool dump_paths = false;
    bool dump_verdicts = false;
    auto* query = app.add_subcommand("query", "answer a question over a graph");
    query->add_option("graph", graph_in, "graph JSONL from build")->required();
    query->add_option("question", question, "natural-language question")->required();
    query->add_flag("--dump-paths", dump_paths, "print surviving paths as JSONL");
    query->add_flag("--dump-verdicts", dump_verdicts, "print the condition verdict table");
    query_flags.attach(query, query_config);

    cgr::RunConfig eval_config;
    CommonFlags eval_flags;
    std::string dataset_in;
    std::string corpus_or_graph;
    std::string report_out;
    std::vector<int> sweep_k_paths;
    std::vector<int> sweep_k_nodes;
    bool ablate_gating = false;
    auto* evaluate = app.add_subcommand("evaluate", "score a dataset");
    evaluate->add_option("dataset", dataset_in, "benchmark JSONL")->required();
    evaluate->add_option("corpus", corpus_or_graph, "corpus directory or graph file")->required();
    evaluate->add_option("report", report_out, "output report JSON")->required();
    evaluate->add_option("--sweep-k-paths", sweep_k_paths, "k_paths values, one report each");
    evaluate->add_option("--sweep-k-nodes", sweep_k_nodes, "k_nodes values, one report each");
    evaluate->add_flag("--ablate-gating", ablate_gating, "add gating-flipped reports");
    eval_flags.attach(evaluate, eval_config);

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            extract_flags.merge_config_file(extract, extract_config);
            return cgr::cmd_extract(corpus_dir, tuples_out, extract_config, std::cout, std::cerr);
        }
        if (build->parsed()) {
            build_flags.merge_config_file(build, build_config);
            return cgr::cmd_build(tuples_in, graph_out, build_config, std::cout, std::cerr);
        }
        if (query->parsed()) {
            query_flags.merge_config_file(query, query_config);
            return cgr::cmd_query(graph_in, question, query_config, dump_paths, dump_verdicts,
                                  std::cout, std::cerr);
        }
        if (evaluate->parsed()) {
            eval_flags.merge_config_file(evaluate, eval_config);
            return cgr::cmd_evaluate(dataset_in, corpus_or_graph, report_out, eval_config,
                                     sweep_k_paths, sweep_k_nodes, ablate_gating, std::cout,
                                     std::cerr);
        }
    } catch (const cgr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
