#include "cgr/graph.hpp"

#include <algorithm>
#include <stdexcept>

#include "cgr/text.hpp"

namespace cgr {

EntityId EntityId::canonical(std::string_view raw) {
    std::string value = canonicalize_text(raw);
    if (value.empty()) throw EmptyEntity();
    return EntityId(std::move(value));
}

EntityId canonicalize_entity(std::string_view raw) { return EntityId::canonical(raw); }

ConditionLabel ConditionLabel::parse(std::string_view raw) {
    std::string text = canonicalize_text(raw);
    bool negated = false;
    bool lifted = true;
    while (lifted && !text.empty()) {
        lifted = false;
        for (std::string_view marker : {"not:", "not ", "no ", "without ", "\xc2\xac"}) {
            if (text.starts_with(marker)) {
                text = canonicalize_text(text.substr(marker.size()));
                negated = !negated;
                lifted = true;
                break;
            }
        }
    }
    ConditionLabel label;
    label.text_ = std::move(text);
    label.negated_ = negated;
    return label;
}

ConditionLabel ConditionLabel::make(std::string_view text, bool negated) {
    ConditionLabel label;
    label.text_ = canonicalize_text(text);
    label.negated_ = negated;
    return label;
}

namespace {

std::vector<ConditionLabel> sorted_unique_conditions(std::vector<ConditionLabel> conditions) {
    std::sort(conditions.begin(), conditions.end());
    conditions.erase(std::unique(conditions.begin(), conditions.end()), conditions.end());
    return conditions;
}

std::vector<EvidenceSnippet> sorted_unique_snippets(std::vector<EvidenceSnippet> snippets) {
    std::sort(snippets.begin(), snippets.end());
    // Two snippets quoting the same text from the same document are the same
    // piece of evidence even if their spans were recorded differently.
    auto same = [](const EvidenceSnippet& a, const EvidenceSnippet& b) {
        return a.doc_id == b.doc_id && a.text == b.text;
    };
    snippets.erase(std::unique(snippets.begin(), snippets.end(), same), snippets.end());
    return snippets;
}

}  // namespace

EdgeId edge_content_id(const EntityId& source, const std::string& relation,
                       const EntityId& target, const std::vector<ConditionLabel>& conditions) {
    auto sorted = sorted_unique_conditions(conditions);
    std::string buffer;
    buffer.reserve(source.value().size() + relation.size() + target.value().size() + 16);
    buffer += source.value();
    buffer += '\x1f';
    buffer += relation;
    buffer += '\x1f';
    buffer += target.value();
    for (const auto& c : sorted) {
        buffer += '\x1e';
        buffer += c.serialized();
    }
    return to_hex(fnv1a64(buffer));
}

EdgeRecord make_edge(const EntityId& source, std::string_view relation, const EntityId& target,
                     std::vector<ConditionLabel> conditions,
                     std::vector<EvidenceSnippet> snippets, std::optional<EdgeId> inverse_of) {
    if (source.empty() || target.empty()) throw EmptyEntity("edge endpoint is empty");
    std::string rel = snake_case(relation);
    if (rel.empty()) throw FormatError("edge relation is empty");
    EdgeRecord edge;
    edge.source = source;
    edge.relation = std::move(rel);
    edge.target = target;
    edge.conditions = sorted_unique_conditions(std::move(conditions));
    for (const auto& c : edge.conditions) {
        if (c.text().empty()) throw FormatError("edge condition is empty");
    }
    edge.snippets = sorted_unique_snippets(std::move(snippets));
    edge.inverse_of = std::move(inverse_of);
    edge.id = edge_content_id(edge.source, edge.relation, edge.target, edge.conditions);
    return edge;
}

void KnowledgeGraph::ensure_mutable() const {
    if (frozen_) throw std::logic_error("knowledge graph is frozen");
}

std::vector<EdgeId> KnowledgeGraph::add_tuple(const EdgeRecord& tuple, bool materialize_inverse,
                                              const std::optional<std::string>& inverse_relation) {
    ensure_mutable();
    // Re-normalize through make_edge so hand-built records cannot bypass the
    // id and ordering invariants.
    EdgeRecord forward = make_edge(tuple.source, tuple.relation, tuple.target, tuple.conditions,
                                   tuple.snippets, tuple.inverse_of);
    std::vector<EdgeId> touched;
    auto insert_or_merge = [&](EdgeRecord&& edge) {
        auto [it, inserted] = edges_.try_emplace(edge.id, edge);
        if (inserted) {
            nodes_.insert(edge.source);
            nodes_.insert(edge.target);
            out_index_[edge.source].push_back(edge.id);
        } else {
            auto merged = it->second.snippets;
            merged.insert(merged.end(), edge.snippets.begin(), edge.snippets.end());
            it->second.snippets = sorted_unique_snippets(std::move(merged));
            if (!it->second.inverse_of && edge.inverse_of) {
                it->second.inverse_of = edge.inverse_of;
            }
        }
        touched.push_back(it->first);
    };
    EdgeId forward_id = forward.id;
    insert_or_merge(std::move(forward));
    // The reverse edge exists only when the extractor supplied an inverse
    // relation; tuples without one stay forward-only even under the flag.
    if (materialize_inverse && inverse_relation && !inverse_relation->empty()) {
        EdgeRecord inverse = make_edge(tuple.target, *inverse_relation, tuple.source,
                                       tuple.conditions, tuple.snippets, forward_id);
        insert_or_merge(std::move(inverse));
    }
    return touched;
}

void KnowledgeGraph::add_document(const std::string& doc_id, std::string text) {
    ensure_mutable();
    if (doc_id.empty()) throw FormatError("document id is empty");
    documents_[doc_id] = std::move(text);
}

void KnowledgeGraph::add_node(const EntityId& node) {
    ensure_mutable();
    if (node.empty()) throw EmptyEntity();
    nodes_.insert(node);
}

void KnowledgeGraph::freeze() {
    if (frozen_) return;
    for (auto& [node, ids] : out_index_) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
    frozen_ = true;
}

const EdgeRecord& KnowledgeGraph::edge(const EdgeId& id) const {
    auto it = edges_.find(id);
    if (it == edges_.end()) throw std::out_of_range("unknown edge id '" + id + "'");
    return it->second;
}

const std::vector<EdgeId>& KnowledgeGraph::out_edges(const EntityId& node) const {
    static const std::vector<EdgeId> kEmpty;
    auto it = out_index_.find(node);
    return it == out_index_.end() ? kEmpty : it->second;
}

std::vector<ConditionLabel> KnowledgeGraph::unique_conditions() const {
    std::vector<ConditionLabel> all;
    for (const auto& [id, edge] : edges_) {
        all.insert(all.end(), edge.conditions.begin(), edge.conditions.end());
    }
    return sorted_unique_conditions(std::move(all));
}

bool KnowledgeGraph::structurally_equal(const KnowledgeGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_ && documents_ == other.documents_;
}

}  // namespace cgr
