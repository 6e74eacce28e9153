#include "cgr/commands.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "cgr/evalkit.hpp"
#include "cgr/extraction.hpp"
#include "cgr/jsonl.hpp"
#include "cgr/remote_roles.hpp"
#include "cgr/text.hpp"
#include "json.hpp"

namespace cgr {

namespace {

using nlohmann::ordered_json;

ordered_json provider_json(const ProviderConfig& config) {
    ordered_json j;
    j["endpoint_url"] = config.endpoint_url;
    j["model"] = config.model;
    j["api_key_env"] = config.api_key_env;
    j["timeout_seconds"] = config.timeout_seconds;
    j["max_retries"] = config.max_retries;
    j["backoff_base_seconds"] = config.backoff_base_seconds;
    j["max_concurrency"] = config.max_concurrency;
    j["temperature"] = config.temperature;
    return j;
}

void read_provider(const ordered_json& j, ProviderConfig& config) {
    for (const auto& [key, value] : j.items()) {
        if (key == "endpoint_url") config.endpoint_url = value.get<std::string>();
        else if (key == "model") config.model = value.get<std::string>();
        else if (key == "api_key_env") config.api_key_env = value.get<std::string>();
        else if (key == "timeout_seconds") config.timeout_seconds = value.get<double>();
        else if (key == "max_retries") config.max_retries = value.get<int>();
        else if (key == "backoff_base_seconds") config.backoff_base_seconds = value.get<double>();
        else if (key == "max_concurrency") config.max_concurrency = value.get<int>();
        else if (key == "temperature") config.temperature = value.get<double>();
        else throw ConfigError("unknown provider config key: " + key);
    }
}

/// Owns whichever provider implementations the run configuration selects and
/// exposes them through the pipeline's role pointers.
struct ProviderBundle {
    std::unique_ptr<RemoteChatProvider> chat;
    std::unique_ptr<QueryParser> parser;
    std::unique_ptr<ConditionEvaluator> evaluator;
    std::unique_ptr<EmbeddingProvider> embedder;
    std::unique_ptr<AnswerGenerator> generator;
    std::unique_ptr<TupleExtractor> extractor;

    PipelineProviders pipeline() const {
        return PipelineProviders{parser.get(), evaluator.get(), embedder.get(), generator.get()};
    }
};

ProviderBundle build_providers(const RunConfig& config) {
    ProviderBundle bundle;
    bool needs_chat = config.remote_extractor || config.remote_parser ||
                      config.remote_evaluator || config.remote_generator;
    if (needs_chat) {
        config.chat.validate();
        bundle.chat = std::make_unique<RemoteChatProvider>(config.chat);
    }
    if (config.remote_parser) {
        bundle.parser = std::make_unique<ChatQueryParser>(*bundle.chat);
    } else {
        bundle.parser = std::make_unique<OfflineQueryParser>();
    }
    if (config.remote_evaluator) {
        bundle.evaluator = std::make_unique<ChatConditionEvaluator>(*bundle.chat);
    } else {
        bundle.evaluator = std::make_unique<OfflineConditionEvaluator>();
    }
    if (config.remote_embedder) {
        config.embedding.validate();
        bundle.embedder = std::make_unique<RemoteEmbeddingProvider>(config.embedding);
    } else {
        bundle.embedder = std::make_unique<HashEmbeddingProvider>();
    }
    if (config.remote_generator) {
        bundle.generator = std::make_unique<ChatAnswerGenerator>(*bundle.chat);
    } else {
        bundle.generator = std::make_unique<OfflineAnswerGenerator>();
    }
    if (config.remote_extractor) {
        bundle.extractor = std::make_unique<ChatTupleExtractor>(*bundle.chat);
    } else {
        bundle.extractor = std::make_unique<RuleBasedExtractor>();
    }
    return bundle;
}

SynonymDictionary load_dictionary(const RunConfig& config) {
    if (config.dictionary_file.empty()) return {};
    return SynonymDictionary::load_tsv(config.dictionary_file);
}

void echo_config(const RunConfig& config, std::ostream& err) {
    err << "config " << config.to_json() << " hash=" << to_hex(config.hash()) << "\n";
}

std::string role_name(bool remote) { return remote ? "remote" : "offline"; }

}  // namespace

std::string RunConfig::to_json() const {
    ordered_json j;
    j["k_nodes"] = k_nodes;
    j["k_paths"] = k_paths;
    j["d_max"] = d_max;
    j["tau"] = tau;
    j["max_paths"] = max_paths;
    j["gating"] = gating;
    j["materialize_inverse"] = materialize_inverse;
    j["max_chunk_chars"] = max_chunk_chars;
    j["jobs"] = jobs;
    j["roles"] = {{"extractor", role_name(remote_extractor)},
                  {"parser", role_name(remote_parser)},
                  {"evaluator", role_name(remote_evaluator)},
                  {"embedder", role_name(remote_embedder)},
                  {"generator", role_name(remote_generator)}};
    j["chat"] = provider_json(chat);
    j["embedding"] = provider_json(embedding);
    j["dictionary"] = dictionary_file;
    return j.dump();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_json()); }

PipelineOptions RunConfig::pipeline_options() const {
    PipelineOptions options;
    options.traversal.k_nodes = k_nodes;
    options.traversal.d_max = d_max;
    options.traversal.tau = tau;
    options.traversal.max_paths = max_paths;
    options.ranking.k_paths = k_paths;
    options.gating = gating;
    return options;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("config file is not a JSON object: " + path.string());
    }

    RunConfig config;
    auto read_role = [](const ordered_json& value, const std::string& key) {
        auto mode = value.get<std::string>();
        if (mode == "remote") return true;
        if (mode == "offline") return false;
        throw ConfigError("role " + key + " must be \"offline\" or \"remote\"");
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "k_nodes") config.k_nodes = value.get<int>();
        else if (key == "k_paths") config.k_paths = value.get<int>();
        else if (key == "d_max") config.d_max = value.get<int>();
        else if (key == "tau") config.tau = value.get<double>();
        else if (key == "max_paths") config.max_paths = value.get<std::size_t>();
        else if (key == "gating") config.gating = value.get<bool>();
        else if (key == "materialize_inverse") config.materialize_inverse = value.get<bool>();
        else if (key == "max_chunk_chars") config.max_chunk_chars = value.get<std::size_t>();
        else if (key == "jobs") config.jobs = value.get<int>();
        else if (key == "dictionary") config.dictionary_file = value.get<std::string>();
        else if (key == "chat") read_provider(value, config.chat);
        else if (key == "embedding") read_provider(value, config.embedding);
        else if (key == "roles") {
            for (const auto& [role, mode] : value.items()) {
                if (role == "extractor") config.remote_extractor = read_role(mode, role);
                else if (role == "parser") config.remote_parser = read_role(mode, role);
                else if (role == "evaluator") config.remote_evaluator = read_role(mode, role);
                else if (role == "embedder") config.remote_embedder = read_role(mode, role);
                else if (role == "generator") config.remote_generator = read_role(mode, role);
                else throw ConfigError("unknown role: " + role);
            }
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    return config;
}

std::map<std::string, std::string> load_corpus_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw IoError("not a readable directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    if (ec) throw IoError("cannot list directory: " + dir.string());
    std::sort(files.begin(), files.end());

    std::map<std::string, std::string> corpus;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw IoError("cannot open document: " + file.string());
        std::ostringstream text;
        text << in.rdbuf();
        auto doc_id = file.stem().string();
        if (!corpus.emplace(doc_id, text.str()).second) {
            throw FormatError("duplicate document id (same file stem): " + doc_id);
        }
    }
    return corpus;
}

int cmd_extract(const std::filesystem::path& corpus_dir, const std::filesystem::path& out_tuples,
                const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        echo_config(config, err);
        auto corpus = load_corpus_dir(corpus_dir);
        auto bundle = build_providers(config);

        JsonlWriter writer(out_tuples);
        auto ledger_path = out_tuples;
        ledger_path.replace_extension(".failures.jsonl");
        JsonlWriter ledger(ledger_path);

        std::size_t chunk_count = 0;
        std::size_t tuple_count = 0;
        std::size_t dropped = 0;
        std::size_t failures = 0;
        for (const auto& [doc_id, text] : corpus) {
            ordered_json doc{{"kind", "doc"}, {"doc_id", doc_id}, {"text", text}};
            writer.write_line(doc.dump());
            for (const auto& chunk : chunk_document(doc_id, text, config.max_chunk_chars)) {
                ++chunk_count;
                ordered_json cj{{"kind", "chunk"},
                                {"doc_id", chunk.doc_id},
                                {"chunk_index", chunk.chunk_index},
                                {"char_offset", chunk.char_offset},
                                {"text", chunk.text}};
                writer.write_line(cj.dump());
                try {
                    auto outcome = extract_tuples(chunk, *bundle.extractor);
                    dropped += outcome.dropped;
                    for (const auto& tuple : outcome.tuples) {
                        ordered_json tj{{"kind", "tuple"},
                                        {"entity1", tuple.entity1},
                                        {"relation", tuple.relation},
                                        {"inverse_relation", tuple.inverse_relation},
                                        {"entity2", tuple.entity2},
                                        {"conditions", tuple.conditions},
                                        {"doc_id", tuple.doc_id},
                                        {"chunk_index", tuple.chunk_index}};
                        writer.write_line(tj.dump());
                        ++tuple_count;
                    }
                } catch (const ProviderError& e) {
                    ordered_json fj{{"doc_id", chunk.doc_id},
                                    {"chunk_index", chunk.chunk_index},
                                    {"error", e.what()}};
                    ledger.write_line(fj.dump());
                    ++failures;
                } catch (const SchemaError& e) {
                    ordered_json fj{{"doc_id", chunk.doc_id},
                                    {"chunk_index", chunk.chunk_index},
                                    {"error", e.what()}};
                    ledger.write_line(fj.dump());
                    ++failures;
                }
            }
        }
        out << "documents=" << corpus.size() << " chunks=" << chunk_count
            << " tuples=" << tuple_count << " dropped=" << dropped << " failures=" << failures
            << "\n";
        return failures > 0 ? 2 : 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_build(const std::filesystem::path& tuples_file, const std::filesystem::path& out_graph,
              const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        echo_config(config, err);
        auto dict = load_dictionary(config);

        KnowledgeGraph graph;
        std::map<std::pair<std::string, std::size_t>, DocumentChunk> chunks;
        for_each_jsonl_line(tuples_file, [&](std::size_t line_no, const std::string& line) {
            auto j = ordered_json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                throw FormatError("tuples row is not a JSON object", line_no);
            }
            auto kind_it = j.find("kind");
            if (kind_it == j.end() || !kind_it->is_string()) {
                throw FormatError("tuples row misses \"kind\"", line_no);
            }
            auto kind = kind_it->get<std::string>();
            try {
                if (kind == "doc") {
                    graph.add_document(j.at("doc_id").get<std::string>(),
                                       j.at("text").get<std::string>());
                } else if (kind == "chunk") {
                    DocumentChunk chunk;
                    chunk.doc_id = j.at("doc_id").get<std::string>();
                    chunk.chunk_index = j.at("chunk_index").get<std::size_t>();
                    chunk.char_offset = j.at("char_offset").get<std::size_t>();
                    chunk.text = j.at("text").get<std::string>();
                    chunks[{chunk.doc_id, chunk.chunk_index}] = chunk;
                } else if (kind == "tuple") {
                    RawTuple tuple;
                    tuple.entity1 = j.at("entity1").get<std::string>();
                    tuple.relation = j.at("relation").get<std::string>();
                    if (auto it = j.find("inverse_relation"); it != j.end() && it->is_string()) {
                        tuple.inverse_relation = it->get<std::string>();
                    }
                    tuple.entity2 = j.at("entity2").get<std::string>();
                    if (auto it = j.find("conditions"); it != j.end() && it->is_array()) {
                        for (const auto& c : *it) tuple.conditions.push_back(c.get<std::string>());
                    }
                    tuple.doc_id = j.at("doc_id").get<std::string>();
                    tuple.chunk_index = j.at("chunk_index").get<std::size_t>();

                    auto chunk_it = chunks.find({tuple.doc_id, tuple.chunk_index});
                    if (chunk_it == chunks.end()) {
                        throw FormatError("tuple references unknown chunk " + tuple.doc_id + "#" +
                                              std::to_string(tuple.chunk_index),
                                          line_no);
                    }
                    auto edge = normalize_tuple(tuple, dict, &chunk_it->second);
                    std::optional<std::string> inverse;
                    if (!tuple.inverse_relation.empty()) inverse = tuple.inverse_relation;
                    graph.add_tuple(edge, config.materialize_inverse, inverse);
                } else {
                    throw FormatError("unknown record kind: " + kind, line_no);
                }
            } catch (const ordered_json::exception& e) {
                throw FormatError(std::string("bad tuples record: ") + e.what(), line_no);
            }
        });
        graph.freeze();
        save_graph(graph, out_graph);
        out << "nodes=" << graph.nodes().size() << " edges=" << graph.edges().size()
            << " documents=" << graph.documents().size() << "\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_query(const std::filesystem::path& graph_file, const std::string& question,
              const RunConfig& config, bool dump_paths, bool dump_verdicts, std::ostream& out,
              std::ostream& err) {
    try {
        echo_config(config, err);
        auto graph = load_graph(graph_file);
        auto bundle = build_providers(config);
        auto run = answer_question(question, graph, bundle.pipeline(),
                                   config.pipeline_options());
        if (dump_verdicts) out << run.verdicts.to_json() << "\n";
        if (dump_paths) out << paths_to_jsonl(run.traversal);
        out << answer_result_to_json(question, run.result) << "\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_evaluate(const std::filesystem::path& dataset_file,
                 const std::filesystem::path& corpus_or_graph,
                 const std::filesystem::path& report_out, const RunConfig& config,
                 const std::vector<int>& sweep_k_paths, const std::vector<int>& sweep_k_nodes,
                 bool ablate_gating, std::ostream& out, std::ostream& err) {
    try {
        echo_config(config, err);
        auto items = load_dataset(dataset_file);
        for (const auto& item : items) {
            for (auto violation : validate_item(item)) {
                err << "warning: item " << item.id << ": " << to_string(violation) << "\n";
            }
        }

        std::map<std::string, std::string> corpus;
        if (std::filesystem::is_directory(corpus_or_graph)) {
            corpus = load_corpus_dir(corpus_or_graph);
        } else {
            // A prebuilt graph contributes its stored document texts; items
            // are still evaluated over per-item graphs built from those.
            corpus = load_graph(corpus_or_graph).documents();
        }

        auto bundle = build_providers(config);
        auto dict = load_dictionary(config);

        EvalRunConfig eval_config;
        eval_config.options = config.pipeline_options();
        eval_config.sweep_k_paths = sweep_k_paths;
        eval_config.sweep_k_nodes = sweep_k_nodes;
        eval_config.jobs = config.jobs;
        eval_config.materialize_inverse = config.materialize_inverse;
        eval_config.extractor = bundle.extractor.get();
        eval_config.dictionary = &dict;

        auto reports = run_eval(items, corpus, bundle.pipeline(), eval_config);
        if (ablate_gating) {
            auto ablated = eval_config;
            ablated.options.gating = !config.gating;
            auto extra = run_eval(items, corpus, bundle.pipeline(), ablated);
            reports.insert(reports.end(), std::make_move_iterator(extra.begin()),
                           std::make_move_iterator(extra.end()));
        }

        bool any_item_error = false;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            auto path = report_out;
            if (reports.size() > 1) {
                auto ext = path.extension();
                path.replace_extension();
                path += "-" + to_hex(reports[i].config_hash);
                path += ext;
            }
            std::ofstream file(path);
            if (!file) throw IoError("cannot write report: " + path.string());
            file << eval_report_to_json(reports[i]) << "\n";
            out << "report " << path.string() << " gating=" << (reports[i].gating ? 1 : 0)
                << " k_paths=" << reports[i].k_paths << " k_nodes=" << reports[i].k_nodes
                << " em=" << reports[i].em_percent << " f1=" << reports[i].f1_percent << "\n";
            for (const auto& item : reports[i].items) {
                if (!item.error.empty()) any_item_error = true;
            }
        }
        return any_item_error ? 2 : 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cgr
