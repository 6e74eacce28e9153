#include "cgr/answer.hpp"

#include <algorithm>
#include <set>

#include "cgr/errors.hpp"
#include "cgr/text.hpp"
#include "json.hpp"

namespace cgr {

EvidencePackage assemble_evidence(const std::vector<ScoredPath>& scored,
                                  const KnowledgeGraph& graph, const ParsedQuery& query) {
    EvidencePackage package;
    package.query_fingerprint = fnv1a64(query.raw);
    package.paths.reserve(scored.size());

    for (const auto& sp : scored) {
        PathEvidence evidence;
        evidence.scored = sp;
        evidence.nodes = sp.path.nodes;
        evidence.conditions = sp.path.conditions_along;

        for (const auto& edge_id : sp.path.edges) {
            const EdgeRecord& edge = graph.edge(edge_id);
            evidence.edges.push_back({edge.id, edge.source, edge.relation, edge.target});
        }

        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& snippet : sp.path.snippets_along) {
            if (graph.documents().count(snippet.doc_id) == 0) {
                throw DanglingSnippet(snippet.doc_id);
            }
            if (seen.emplace(snippet.doc_id, snippet.text).second) {
                evidence.snippets.push_back(snippet);
            }
        }
        package.paths.push_back(std::move(evidence));
    }
    return package;
}

std::string default_answer_instructions() {
    return "Answer the question using ONLY the reasoning paths and evidence above. "
           "Respect every condition attached to a path. Provide the BEST AVAILABLE "
           "ANSWER based on the evidence; reply \"insufficient evidence\" only as a "
           "LAST RESORT when nothing applies.\n"
           "Reply in exactly this format:\n"
           "REASONING: why the evidence supports the answer, citing document ids\n"
           "ANSWER: Single entity name, yes/no, or short phrase";
}

std::string default_answer_template() {
    return "QUESTION: {{question}}\n\nREASONING PATHS:\n{{paths}}\n\n"
           "EVIDENCE:\n{{evidence}}\n\nINSTRUCTIONS:\n{{instructions}}";
}

namespace {

std::string render_paths(const EvidencePackage& package) {
    std::string out;
    for (std::size_t i = 0; i < package.paths.size(); ++i) {
        const PathEvidence& evidence = package.paths[i];
        out += std::to_string(i + 1) + ". " + evidence.scored.linearization;
        if (!evidence.conditions.empty()) {
            out += " [conditions: ";
            for (std::size_t c = 0; c < evidence.conditions.size(); ++c) {
                if (c > 0) out += "; ";
                out += evidence.conditions[c].serialized();
            }
            out += "]";
        }
        out += '\n';
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string render_evidence(const EvidencePackage& package) {
    std::string out;
    for (std::size_t i = 0; i < package.paths.size(); ++i) {
        out += "Path " + std::to_string(i + 1) + ":\n";
        if (package.paths[i].snippets.empty()) {
            out += "- (no source snippets)\n";
            continue;
        }
        for (const auto& snippet : package.paths[i].snippets) {
            out += "- (" + snippet.doc_id + ") " + snippet.text + '\n';
        }
    }
    if (!out.empty()) out.pop_back();
    return out;
}

}  // namespace

std::string build_prompt(const ParsedQuery& query, const EvidencePackage& package,
                         const std::string& prompt_template) {
    const std::vector<std::pair<std::string, std::string>> fills = {
        {"question", query.raw},
        {"paths", render_paths(package)},
        {"evidence", render_evidence(package)},
        {"instructions", default_answer_instructions()},
    };

    std::string out;
    out.reserve(prompt_template.size() * 2);
    std::vector<bool> used(fills.size(), false);
    std::size_t pos = 0;
    while (pos < prompt_template.size()) {
        auto open = prompt_template.find("{{", pos);
        if (open == std::string::npos) {
            out.append(prompt_template, pos, std::string::npos);
            break;
        }
        out.append(prompt_template, pos, open - pos);
        auto close = prompt_template.find("}}", open);
        if (close == std::string::npos) {
            throw TemplateError("unterminated placeholder in prompt template");
        }
        std::string name = prompt_template.substr(open + 2, close - open - 2);
        bool known = false;
        for (std::size_t i = 0; i < fills.size(); ++i) {
            if (fills[i].first == name) {
                out += fills[i].second;
                used[i] = true;
                known = true;
                break;
            }
        }
        if (!known) throw TemplateError("unknown placeholder {{" + name + "}}");
        pos = close + 2;
    }
    for (std::size_t i = 0; i < fills.size(); ++i) {
        if (!used[i]) {
            throw TemplateError("template never uses {{" + fills[i].first + "}}");
        }
    }
    return out;
}

std::pair<std::string, std::string> OfflineAnswerGenerator::generate(
    const std::string&, const EvidencePackage& package) {
    const PathEvidence& top = package.paths.front();
    return {top.scored.path.terminal().value(), top.scored.linearization};
}

AnswerResult generate_answer(const std::string& prompt, const EvidencePackage& package,
                             AnswerGenerator& generator) {
    AnswerResult result;
    if (package.paths.empty()) {
        result.answer = std::string(kInsufficientEvidence);
        result.reasoning = "no reasoning path survived gating and ranking";
        return result;
    }
    for (const auto& evidence : package.paths) result.used_paths.push_back(evidence.scored);

    auto [answer, reasoning] = generator.generate(prompt, package);
    result.answer = canonicalize_text(answer);
    result.reasoning = reasoning;
    if (result.answer.empty()) {
        result.answer = std::string(kInsufficientEvidence);
        return result;
    }

    bool grounded = false;
    for (const auto& evidence : package.paths) {
        for (const auto& node : evidence.nodes) {
            if (node.value() == result.answer) {
                grounded = true;
                break;
            }
        }
        if (grounded) break;
    }
    if (!grounded && result.answer != kInsufficientEvidence) {
        result.degraded.push_back("ungrounded_answer");
    }
    return result;
}

std::string answer_result_to_json(const std::string& question, const AnswerResult& result) {
    nlohmann::ordered_json j;
    j["question"] = question;
    j["answer"] = result.answer;
    j["reasoning"] = result.reasoning;
    auto paths = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.used_paths.size(); ++i) {
        nlohmann::ordered_json p;
        p["rank"] = i + 1;
        p["linearization"] = result.used_paths[i].linearization;
        p["score"] = result.used_paths[i].score;
        paths.push_back(std::move(p));
    }
    j["paths"] = paths;
    j["degraded"] = result.degraded;
    return j.dump();
}

}  // namespace cgr
