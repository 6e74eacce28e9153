#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgr/graph.hpp"
#include "cgr/query.hpp"
#include "cgr/ranking.hpp"

namespace cgr {

inline constexpr std::string_view kInsufficientEvidence = "insufficient evidence";

/// Evidence bundle for one selected path: the entities, the labeled edges,
/// the supporting snippets (deduplicated by doc and text), and the union of
/// traversed conditions.
struct PathEvidence {
    struct EdgeRef {
        EdgeId id;
        EntityId source;
        std::string relation;
        EntityId target;
    };

    ScoredPath scored;
    std::vector<EntityId> nodes;
    std::vector<EdgeRef> edges;
    std::vector<EvidenceSnippet> snippets;
    std::vector<ConditionLabel> conditions;
};

struct EvidencePackage {
    std::vector<PathEvidence> paths;  // rank order, exactly the ranked selection
    std::uint64_t query_fingerprint = 0;
};

/// Packages the ranked paths. Throws DanglingSnippet when a snippet points at
/// a document the graph does not hold.
EvidencePackage assemble_evidence(const std::vector<ScoredPath>& scored,
                                  const KnowledgeGraph& graph, const ParsedQuery& query);

/// Render points for prompt assembly. The template must use each of
/// {{question}}, {{paths}}, {{evidence}} and {{instructions}} at least once
/// and nothing else in double braces.
std::string default_answer_template();
std::string default_answer_instructions();

std::string build_prompt(const ParsedQuery& query, const EvidencePackage& package,
                         const std::string& prompt_template);

struct AnswerResult {
    std::string answer;
    std::string reasoning;
    std::vector<ScoredPath> used_paths;
    std::vector<std::string> degraded;  // fallback and truncation flags
};

class AnswerGenerator {
public:
    virtual ~AnswerGenerator() = default;

    /// Returns (answer, reasoning) for a non-empty evidence package.
    virtual std::pair<std::string, std::string> generate(const std::string& prompt,
                                                         const EvidencePackage& package) = 0;
};

/// Deterministic generator: the answer is the terminal node of the rank-1
/// path, the reasoning its linearization.
class OfflineAnswerGenerator : public AnswerGenerator {
public:
    std::pair<std::string, std::string> generate(const std::string& prompt,
                                                 const EvidencePackage& package) override;
};

/// Empty package -> "insufficient evidence". Otherwise delegates to the
/// generator, canonicalizes the answer, and flags answers that match no node
/// of the package ("ungrounded_answer") without rejecting them.
AnswerResult generate_answer(const std::string& prompt, const EvidencePackage& package,
                             AnswerGenerator& generator);

/// {question, answer, reasoning, paths:[{rank, linearization, score}],
/// degraded:[...]}.
std::string answer_result_to_json(const std::string& question, const AnswerResult& result);

}  // namespace cgr
