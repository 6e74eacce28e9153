#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cgr/pipeline.hpp"
#include "cgr/providers.hpp"

namespace cgr {

/// Effective settings for one CLI invocation, merged from an optional
/// --config JSON file and command-line flags (flags win). Serialization uses
/// a fixed key order, so the hash is stable no matter how the values were
/// supplied.
struct RunConfig {
    int k_nodes = 5;
    int k_paths = 3;
    int d_max = 4;
    double tau = 0.35;
    std::size_t max_paths = 10000;
    bool gating = true;
    bool materialize_inverse = false;
    std::size_t max_chunk_chars = 1500;
    int jobs = 1;

    // Per-role implementation choice; false selects the offline role.
    bool remote_extractor = false;
    bool remote_parser = false;
    bool remote_evaluator = false;
    bool remote_embedder = false;
    bool remote_generator = false;

    ProviderConfig chat;       // shared by the chat-backed roles
    ProviderConfig embedding;  // used by the remote embedder

    std::string dictionary_file;  // synonym TSV; empty = none

    std::string to_json() const;  // fixed key order
    std::uint64_t hash() const;
    PipelineOptions pipeline_options() const;
};

/// Reads a RunConfig from a JSON file holding the same keys as the flags.
/// Unknown keys raise ConfigError; missing keys keep their defaults.
RunConfig load_run_config(const std::filesystem::path& path);

/// Reads every regular file of `dir` (sorted by name) as one document whose
/// id is the file stem. Throws IoError on unreadable paths and FormatError
/// on duplicate stems.
std::map<std::string, std::string> load_corpus_dir(const std::filesystem::path& dir);

/// corpus dir -> kind-tagged JSON Lines ("doc", "chunk", "tuple" records) at
/// `out_tuples`, plus a failure ledger (doc_id, chunk_index, error) next to
/// it with the extension ".failures.jsonl". Exit 0 on success, 2 when the
/// ledger is non-empty, 1 on I/O or config errors.
int cmd_extract(const std::filesystem::path& corpus_dir, const std::filesystem::path& out_tuples,
                const RunConfig& config, std::ostream& out, std::ostream& err);

/// tuples file -> normalized, frozen graph saved at `out_graph`; prints node
/// and edge counts. Exit 0 on success, 1 on format errors (line reported).
int cmd_build(const std::filesystem::path& tuples_file, const std::filesystem::path& out_graph,
              const RunConfig& config, std::ostream& out, std::ostream& err);

/// graph file + question -> AnswerResult JSON on stdout. An unanswerable
/// question ("insufficient evidence") still exits 0; only configuration or
/// I/O problems exit 1. --dump-verdicts and --dump-paths prepend the verdict
/// table and the gated path set.
int cmd_query(const std::filesystem::path& graph_file, const std::string& question,
              const RunConfig& config, bool dump_paths, bool dump_verdicts, std::ostream& out,
              std::ostream& err);

/// dataset + corpus dir (or graph file whose stored documents act as the
/// corpus) -> evaluation report(s) as JSON. One report without sweeps; one
/// per sweep value otherwise; --ablate-gating appends gating-off
/// counterparts. A single report lands exactly at `report_out`; multiple
/// reports insert "-<config_hash>" before the extension. Exit 2 when any
/// item failed (reports still written), 1 on fatal errors.
int cmd_evaluate(const std::filesystem::path& dataset_file,
                 const std::filesystem::path& corpus_or_graph,
                 const std::filesystem::path& report_out, const RunConfig& config,
                 const std::vector<int>& sweep_k_paths, const std::vector<int>& sweep_k_nodes,
                 bool ablate_gating, std::ostream& out, std::ostream& err);

}  // namespace cgr
