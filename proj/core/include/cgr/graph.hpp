#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cgr/errors.hpp"

namespace cgr {

/// Canonical entity identifier. The stored value is always its own
/// canonicalization (trimmed, case-folded, single-spaced).
class EntityId {
public:
    EntityId() = default;

    /// Canonicalizes `raw`; throws EmptyEntity when nothing remains.
    static EntityId canonical(std::string_view raw);

    const std::string& value() const { return value_; }
    bool empty() const { return value_.empty(); }

    auto operator<=>(const EntityId&) const = default;

private:
    explicit EntityId(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

struct EntityIdHash {
    std::size_t operator()(const EntityId& id) const {
        return std::hash<std::string>{}(id.value());
    }
};

/// Free-text condition attached to an edge. `negated` marks labels written
/// with a leading negation ("not bras"); the stored text never carries the
/// marker itself.
class ConditionLabel {
public:
    ConditionLabel() = default;

    /// Canonicalizes and lifts leading negation markers ("not ", "no ",
    /// "without ", "not:", U+00AC). Each lifted marker toggles polarity.
    static ConditionLabel parse(std::string_view raw);

    /// Builds a label from pre-split parts; `text` is canonicalized.
    static ConditionLabel make(std::string_view text, bool negated);

    const std::string& text() const { return text_; }
    bool negated() const { return negated_; }

    /// Wire form: "not:<text>" when negated, plain text otherwise.
    std::string serialized() const { return negated_ ? "not:" + text_ : text_; }

    auto operator<=>(const ConditionLabel&) const = default;

private:
    std::string text_;
    bool negated_ = false;
};

struct ConditionLabelHash {
    std::size_t operator()(const ConditionLabel& label) const {
        return std::hash<std::string>{}(label.text()) * 2ull + (label.negated() ? 1ull : 0ull);
    }
};

/// Verbatim provenance for an edge. When `char_span` is present it addresses
/// the source document and the spanned substring equals `text` exactly.
struct EvidenceSnippet {
    std::string doc_id;
    std::string text;
    std::optional<std::pair<std::size_t, std::size_t>> char_span;  // [start, end)

    auto operator<=>(const EvidenceSnippet&) const = default;
};

using EdgeId = std::string;

/// Deterministic content hash over (source, relation, target, sorted
/// conditions). Two structurally identical tuples always collide, which is
/// what drives duplicate merging.
EdgeId edge_content_id(const EntityId& source, const std::string& relation,
                       const EntityId& target, const std::vector<ConditionLabel>& conditions);

struct EdgeRecord {
    EdgeId id;
    EntityId source;
    std::string relation;  // snake_case, non-empty
    EntityId target;
    std::vector<ConditionLabel> conditions;  // sorted, unique
    std::vector<EvidenceSnippet> snippets;   // sorted, unique by (doc_id, text)
    std::optional<EdgeId> inverse_of;        // set on materialized inverse edges

    bool operator==(const EdgeRecord&) const = default;
};

/// Normalizes parts into a well-formed EdgeRecord: canonical entities,
/// snake_case relation, sorted/deduplicated conditions and snippets, and the
/// content-hash id. Throws EmptyEntity / FormatError on bad parts.
EdgeRecord make_edge(const EntityId& source, std::string_view relation, const EntityId& target,
                     std::vector<ConditionLabel> conditions,
                     std::vector<EvidenceSnippet> snippets = {},
                     std::optional<EdgeId> inverse_of = std::nullopt);

/// Directed multigraph over canonical entities with condition-annotated
/// edges and a document store for evidence resolution. Mutable while
/// building; freeze() locks it for the read-only query phase.
class KnowledgeGraph {
public:
    /// Inserts a tuple, merging with any structurally identical edge
    /// (snippet union). With `materialize_inverse` a reversed edge using
    /// `inverse_relation` is inserted too, linked via inverse_of. Returns the
    /// ids of the edges touched (forward first).
    std::vector<EdgeId> add_tuple(const EdgeRecord& tuple, bool materialize_inverse = false,
                                  const std::optional<std::string>& inverse_relation = {});

    void add_document(const std::string& doc_id, std::string text);

    /// Registers a node with no edges. Endpoints of added tuples are
    /// registered automatically.
    void add_node(const EntityId& node);

    /// Locks the graph and sorts adjacency lists for deterministic traversal.
    void freeze();
    bool frozen() const { return frozen_; }

    const std::set<EntityId>& nodes() const { return nodes_; }
    const std::map<EdgeId, EdgeRecord>& edges() const { return edges_; }
    const EdgeRecord& edge(const EdgeId& id) const;
    bool has_edge(const EdgeId& id) const { return edges_.count(id) > 0; }

    /// Edge ids whose source is `node`, sorted by id after freeze().
    const std::vector<EdgeId>& out_edges(const EntityId& node) const;

    const std::map<std::string, std::string>& documents() const { return documents_; }

    /// Union of all edge condition sets, sorted by (text, negated).
    std::vector<ConditionLabel> unique_conditions() const;

    /// Node/edge/document equality; adjacency indexes and freeze state are
    /// derived and ignored.
    bool structurally_equal(const KnowledgeGraph& other) const;

private:
    void ensure_mutable() const;

    std::set<EntityId> nodes_;
    std::map<EdgeId, EdgeRecord> edges_;
    std::map<EntityId, std::vector<EdgeId>> out_index_;
    std::map<std::string, std::string> documents_;
    bool frozen_ = false;
};

/// Free-function form of EntityId::canonical.
EntityId canonicalize_entity(std::string_view raw);

/// JSON Lines persistence. Records are tagged {"kind":"node"|"edge"|"doc"}.
void save_graph(const KnowledgeGraph& graph, const std::filesystem::path& path);

/// Loads and freezes a graph. Throws FormatError (with line number) on
/// malformed records, including edge ids that fail content-hash validation.
KnowledgeGraph load_graph(const std::filesystem::path& path);

}  // namespace cgr
