#include <fstream>

#include "cgr/graph.hpp"
#include "cgr/jsonl.hpp"
#include "json.hpp"

namespace cgr {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json snippet_to_json(const EvidenceSnippet& snippet) {
    ordered_json j;
    j["doc_id"] = snippet.doc_id;
    j["text"] = snippet.text;
    if (snippet.char_span) {
        j["span"] = {snippet.char_span->first, snippet.char_span->second};
    } else {
        j["span"] = nullptr;
    }
    return j;
}

EvidenceSnippet snippet_from_json(const ordered_json& j, std::size_t line) {
    if (!j.is_object() || !j.contains("doc_id") || !j.contains("text")) {
        throw FormatError("snippet record needs doc_id and text", line);
    }
    EvidenceSnippet snippet;
    snippet.doc_id = j.at("doc_id").get<std::string>();
    snippet.text = j.at("text").get<std::string>();
    if (j.contains("span") && !j.at("span").is_null()) {
        const auto& span = j.at("span");
        if (!span.is_array() || span.size() != 2) {
            throw FormatError("snippet span must be a [start, end] pair", line);
        }
        snippet.char_span = {span[0].get<std::size_t>(), span[1].get<std::size_t>()};
        if (snippet.char_span->second < snippet.char_span->first) {
            throw FormatError("snippet span end precedes start", line);
        }
    }
    return snippet;
}

}  // namespace

void save_graph(const KnowledgeGraph& graph, const std::filesystem::path& path) {
    JsonlWriter out(path);
    for (const auto& [doc_id, text] : graph.documents()) {
        ordered_json j;
        j["kind"] = "doc";
        j["doc_id"] = doc_id;
        j["text"] = text;
        out.write_line(j.dump());
    }
    for (const auto& node : graph.nodes()) {
        ordered_json j;
        j["kind"] = "node";
        j["id"] = node.value();
        out.write_line(j.dump());
    }
    for (const auto& [id, edge] : graph.edges()) {
        ordered_json j;
        j["kind"] = "edge";
        j["id"] = edge.id;
        j["source"] = edge.source.value();
        j["relation"] = edge.relation;
        j["target"] = edge.target.value();
        auto conditions = ordered_json::array();
        for (const auto& c : edge.conditions) conditions.push_back(c.serialized());
        j["conditions"] = std::move(conditions);
        auto snippets = ordered_json::array();
        for (const auto& s : edge.snippets) snippets.push_back(snippet_to_json(s));
        j["snippets"] = std::move(snippets);
        if (edge.inverse_of) {
            j["inverse_of"] = *edge.inverse_of;
        } else {
            j["inverse_of"] = nullptr;
        }
        out.write_line(j.dump());
    }
}

KnowledgeGraph load_graph(const std::filesystem::path& path) {
    KnowledgeGraph graph;
    for_each_jsonl_line(path, [&](std::size_t line, const std::string& raw) {
        ordered_json j = ordered_json::parse(raw, nullptr, false);
        if (j.is_discarded()) throw FormatError("invalid JSON", line);
        if (!j.is_object() || !j.contains("kind")) {
            throw FormatError("record lacks a kind tag", line);
        }
        const std::string kind = j.at("kind").get<std::string>();
        try {
            if (kind == "doc") {
                graph.add_document(j.at("doc_id").get<std::string>(),
                                   j.at("text").get<std::string>());
            } else if (kind == "node") {
                graph.add_node(EntityId::canonical(j.at("id").get<std::string>()));
            } else if (kind == "edge") {
                std::vector<ConditionLabel> conditions;
                for (const auto& c : j.at("conditions")) {
                    conditions.push_back(ConditionLabel::parse(c.get<std::string>()));
                }
                std::vector<EvidenceSnippet> snippets;
                for (const auto& s : j.at("snippets")) {
                    snippets.push_back(snippet_from_json(s, line));
                }
                std::optional<EdgeId> inverse_of;
                if (j.contains("inverse_of") && !j.at("inverse_of").is_null()) {
                    inverse_of = j.at("inverse_of").get<std::string>();
                }
                EdgeRecord edge = make_edge(
                    EntityId::canonical(j.at("source").get<std::string>()),
                    j.at("relation").get<std::string>(),
                    EntityId::canonical(j.at("target").get<std::string>()), std::move(conditions),
                    std::move(snippets), std::move(inverse_of));
                if (edge.id != j.at("id").get<std::string>()) {
                    throw FormatError("edge id does not match its content hash", line);
                }
                graph.add_tuple(edge);
            } else {
                throw FormatError("unknown record kind '" + kind + "'", line);
            }
        } catch (const FormatError&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string("malformed record: ") + e.what(), line);
        } catch (const Error& e) {
            throw FormatError(std::string("invalid record: ") + e.what(), line);
        }
    });
    graph.freeze();
    return graph;
}

}  // namespace cgr
