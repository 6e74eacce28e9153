#pragma once

// Shared fixture builders, test doubles, and independent oracles used by the
// unit suites and the acceptance runner. Everything here is deterministic;
// random builders take the generator by reference so each test pins its own
// seeds.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cgr/evalkit.hpp"
#include "cgr/extraction.hpp"
#include "cgr/gating.hpp"
#include "cgr/graph.hpp"
#include "cgr/providers.hpp"
#include "cgr/query.hpp"
#include "cgr/traversal.hpp"

namespace fixtures {

// ---------------------------------------------------------------------------
// Renal-artery-stenosis scenario: a hypertension treatment subgraph where the
// first-line drugs carry contraindication conditions and only amlodipine is
// safe for the queried patient.

inline constexpr const char* kStenosisQuestion =
    "Which medication should be used for hypertension in a 68-year-old patient with bilateral "
    "renal artery stenosis?";

inline cgr::KnowledgeGraph stenosis_graph() {
    using namespace cgr;
    KnowledgeGraph graph;
    const std::string doc_id = "guideline";
    graph.add_document(
        doc_id,
        "Hypertension is treated by lisinopril unless the patient has bilateral renal artery "
        "stenosis or pregnancy. Hypertension is treated by losartan unless the patient has "
        "bilateral renal artery stenosis. Hypertension is treated by amlodipine. Hypertension is "
        "managed with hypertension medication, but renin-angiotensin agents are excluded in "
        "bilateral renal artery stenosis and pregnancy.");
    auto entity = [](const char* text) { return canonicalize_entity(text); };
    auto labels = [](std::vector<const char*> raw) {
        std::vector<ConditionLabel> out;
        out.reserve(raw.size());
        for (const char* text : raw) out.push_back(ConditionLabel::parse(text));
        return out;
    };
    auto snippet = [&doc_id](const char* text) {
        return std::vector<EvidenceSnippet>{{doc_id, text, std::nullopt}};
    };
    graph.add_tuple(make_edge(
        entity("hypertension"), "treated_by", entity("lisinopril"),
        labels({"not bilateral renal artery stenosis", "not pregnancy"}),
        snippet("Hypertension is treated by lisinopril unless the patient has bilateral renal "
                "artery stenosis or pregnancy.")));
    graph.add_tuple(make_edge(
        entity("hypertension"), "treated_by", entity("losartan"),
        labels({"not bilateral renal artery stenosis"}),
        snippet("Hypertension is treated by losartan unless the patient has bilateral renal "
                "artery stenosis.")));
    graph.add_tuple(make_edge(entity("hypertension"), "treated_by", entity("amlodipine"),
                              labels({}), snippet("Hypertension is treated by amlodipine.")));
    graph.add_tuple(make_edge(
        entity("hypertension"), "managed_with", entity("hypertension medication"),
        labels({"not bilateral renal artery stenosis", "not pregnancy"}),
        snippet("Hypertension is managed with hypertension medication, but renin-angiotensin "
                "agents are excluded in bilateral renal artery stenosis and pregnancy.")));
    graph.add_tuple(make_edge(
        entity("hypertension medication"), "includes", entity("lisinopril"),
        labels({"not bilateral renal artery stenosis"}),
        snippet("Hypertension is managed with hypertension medication, but renin-angiotensin "
                "agents are excluded in bilateral renal artery stenosis and pregnancy.")));
    graph.freeze();
    return graph;
}

// ---------------------------------------------------------------------------
// Three-document clinical corpus exercising the extractor's verb frames:
// regimen comparison, contraindication, and symptom/risk-factor patterns.

inline std::map<std::string, std::string> clinical_corpus() {
    return {
        {"hiv",
         "A large study in Africa and India found that a PI-based regimen was superior to an "
         "NNRTI-based regimen in children less than 3 years who had never been exposed to NNRTIs "
         "in the past. Thus the WHO recommends PI-based regimens for children less than 3. In "
         "pregnant women, viral load is proportional to transmission risk; ART reduces "
         "transmission to mothers and infants before, during, and after delivery."},
        {"misoprostol",
         "Misoprostol should not be taken by pregnant women with wanted pregnancies to reduce "
         "the risk of NSAID-induced gastric ulcers because it increases uterine tone and "
         "contractions in pregnancy, which may cause partial or complete abortions, and because "
         "its use in pregnancy has been associated with birth defects."},
        {"uti",
         "Urinary tract symptoms are frequently lacking in the elderly. The presentations may "
         "be vague and include incontinence, a change in mental status, or fatigue as the only "
         "symptoms. In young healthy women, diagnosis can be made from symptoms alone. "
         "Postmenopausal women may be treated with vaginal estrogen replacement. Risk factors "
         "include sexual activity in young women, chronic prostatitis in males, and "
         "vesico-ureteral reflux in children."}};
}

/// Maps the surface subject of the third document onto its canonical
/// abbreviation, exercising the dictionary step of normalization.
inline cgr::SynonymDictionary clinical_dictionary() {
    cgr::SynonymDictionary dict;
    dict.add("urinary tract symptoms", "uti");
    return dict;
}

// ---------------------------------------------------------------------------
// Ten-item conditional benchmark. Each flip item pairs a default treatment
// (blocked for the asked context by a negated condition) with a safe
// alternative; the safe drug sorts after the default one, so ungated ranking
// ties break toward the wrong answer and gating is what fixes it.

inline std::map<std::string, std::string> ablation_corpus() {
    return {
        {"abl01-default", "Hypertension is treated with captopril except in pregnancy."},
        {"abl01-alt", "Hypertension is treated with methyldopa in pregnancy."},
        {"abl02-default", "Depression is treated with bupropion except in bulimia."},
        {"abl02-alt", "Depression is treated with sertraline in bulimia."},
        {"abl03-default", "Appendicitis is diagnosed by ct except in children."},
        {"abl03-alt", "Appendicitis is diagnosed by ultrasound in children."},
        {"abl04-default",
         "Atrial fibrillation is treated with apixaban except in severe kidney disease."},
        {"abl04-alt", "Atrial fibrillation is treated with warfarin in severe kidney disease."},
        {"abl05-default", "Migraine is treated with ibuprofen except in peptic ulcer disease."},
        {"abl05-alt", "Migraine is treated with paracetamol in peptic ulcer disease."},
        {"abl06-default", "Epilepsy is treated with carbamazepine except in liver failure."},
        {"abl06-alt", "Epilepsy is treated with levetiracetam in liver failure."},
        {"abl07-default",
         "Tuberculosis is treated with rifampin except in patients receiving protease "
         "inhibitors."},
        {"abl07-alt",
         "Tuberculosis is treated with rifabutin in patients receiving protease inhibitors."},
        {"abl08-default",
         "A urinary tract infection is treated with nitrofurantoin except in late pregnancy."},
        {"abl08-alt", "A urinary tract infection is treated with fosfomycin in late pregnancy."},
        {"abl09-default", "Lyme disease is treated with amoxicillin in pregnancy."},
        {"abl09-alt", "Lyme disease is prevented by prompt tick removal."},
        {"abl10-default", "Scurvy is treated with ascorbic acid."}};
}

inline std::vector<cgr::BenchmarkItem> ablation_items() {
    using Item = cgr::BenchmarkItem;
    auto item = [](std::string id, std::string question, std::string conditional,
                   std::optional<std::string> general, std::optional<std::string> condition,
                   std::vector<std::string> docs) {
        Item out;
        out.id = std::move(id);
        out.question = std::move(question);
        out.conditional_answer = std::move(conditional);
        out.general_answer = std::move(general);
        out.condition = std::move(condition);
        out.doc_ids = std::move(docs);
        return out;
    };
    return {
        item("abl01", "Which drug treats hypertension in pregnancy?", "methyldopa", "captopril",
             "in pregnancy", {"abl01-default", "abl01-alt"}),
        item("abl02", "Which antidepressant is recommended for depression in bulimia?",
             "sertraline", "bupropion", "in bulimia", {"abl02-default", "abl02-alt"}),
        item("abl03", "How is appendicitis diagnosed in children?", "ultrasound", "ct",
             "in children", {"abl03-default", "abl03-alt"}),
        item("abl04", "Which anticoagulant treats atrial fibrillation in severe kidney disease?",
             "warfarin", "apixaban", "in severe kidney disease",
             {"abl04-default", "abl04-alt"}),
        item("abl05", "Which analgesic treats migraine in peptic ulcer disease?", "paracetamol",
             "ibuprofen", "in peptic ulcer disease", {"abl05-default", "abl05-alt"}),
        item("abl06", "Which anticonvulsant treats epilepsy in liver failure?", "levetiracetam",
             "carbamazepine", "in liver failure", {"abl06-default", "abl06-alt"}),
        item("abl07", "Which drug treats tuberculosis in patients receiving protease inhibitors?",
             "rifabutin", "rifampin", "in patients receiving protease inhibitors",
             {"abl07-default", "abl07-alt"}),
        item("abl08", "Which antibiotic treats a urinary tract infection in late pregnancy?",
             "fosfomycin", "nitrofurantoin", "in late pregnancy",
             {"abl08-default", "abl08-alt"}),
        item("abl09", "What antibiotic treats lyme disease in pregnancy?", "amoxicillin",
             std::nullopt, "in pregnancy", {"abl09-default", "abl09-alt"}),
        item("abl10", "What treats scurvy?", "ascorbic acid", std::nullopt, std::nullopt,
             {"abl10-default"})};
}

// ---------------------------------------------------------------------------
// Platform-stable random helpers. Standard distributions are
// implementation-defined, so everything below maps raw engine output
// directly.

template <typename Rng>
std::size_t pick(Rng& rng, std::size_t bound) {
    return static_cast<std::size_t>(rng() % bound);
}

struct RandomGraphSpec {
    std::size_t max_nodes = 30;
    std::size_t max_edges = 80;
    std::size_t max_conditions = 6;
};

template <typename Rng>
cgr::KnowledgeGraph random_graph(Rng& rng, const RandomGraphSpec& spec = {}) {
    using namespace cgr;
    KnowledgeGraph graph;
    const std::size_t node_count = 2 + pick(rng, spec.max_nodes - 1);
    const std::size_t edge_count = pick(rng, spec.max_edges + 1);
    const std::size_t condition_count = pick(rng, spec.max_conditions + 1);
    std::vector<EntityId> nodes;
    nodes.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) {
        nodes.push_back(canonicalize_entity("node" + std::to_string(i)));
        graph.add_node(nodes.back());
    }
    std::vector<ConditionLabel> pool;
    for (std::size_t i = 0; i < condition_count; ++i) {
        pool.push_back(ConditionLabel::make("cond" + std::to_string(i), rng() % 4 == 0));
    }
    for (std::size_t i = 0; i < edge_count; ++i) {
        const EntityId& source = nodes[pick(rng, nodes.size())];
        const EntityId& target = nodes[pick(rng, nodes.size())];
        std::string relation = "rel" + std::to_string(pick(rng, 6));
        std::vector<ConditionLabel> conditions;
        if (!pool.empty()) {
            const std::size_t attached = pick(rng, 3);  // 0..2 conditions per edge
            for (std::size_t c = 0; c < attached; ++c) {
                conditions.push_back(pool[pick(rng, pool.size())]);
            }
        }
        graph.add_tuple(make_edge(source, relation, target, std::move(conditions)));
    }
    graph.freeze();
    return graph;
}

template <typename Rng>
cgr::ConditionVerdictTable random_verdicts(Rng& rng, const cgr::KnowledgeGraph& graph) {
    cgr::ConditionVerdictTable table;
    for (const auto& label : graph.unique_conditions()) {
        switch (rng() % 3) {
            case 0: table.set(label, cgr::Verdict::True); break;
            case 1: table.set(label, cgr::Verdict::False); break;
            default: table.set(label, cgr::Verdict::Null); break;
        }
    }
    return table;
}

template <typename Rng>
std::vector<cgr::EntityId> random_entries(Rng& rng, const cgr::KnowledgeGraph& graph) {
    std::vector<cgr::EntityId> all(graph.nodes().begin(), graph.nodes().end());
    std::set<cgr::EntityId> chosen;
    const std::size_t wanted = 1 + pick(rng, 4);
    while (chosen.size() < wanted && chosen.size() < all.size()) {
        chosen.insert(all[pick(rng, all.size())]);
    }
    return {chosen.begin(), chosen.end()};
}

// ---------------------------------------------------------------------------
// Independent traversal oracle: delete every edge carrying a False condition,
// then enumerate all maximal simple paths (at most d_max edges) from the
// entry nodes by plain depth-first search. A path is maximal when it reached
// d_max edges or when no surviving edge leads to a node not already on it.

/// Stable identity of one path: its start node followed by the edge ids.
using PathKey = std::vector<std::string>;

inline std::set<PathKey> oracle_paths(const cgr::KnowledgeGraph& graph,
                                      const std::vector<cgr::EntityId>& entries,
                                      const cgr::ConditionVerdictTable& table,
                                      std::size_t d_max) {
    using namespace cgr;
    auto deleted = [&table](const EdgeRecord& edge) {
        return std::any_of(edge.conditions.begin(), edge.conditions.end(),
                           [&table](const ConditionLabel& label) {
                               return table.lookup(label) == Verdict::False;
                           });
    };
    std::set<PathKey> out;
    std::set<EntityId> seen_entries;
    for (const auto& entry : entries) {
        if (!seen_entries.insert(entry).second) continue;
        if (!graph.nodes().count(entry)) continue;
        std::set<EntityId> visited{entry};
        PathKey key{entry.value()};
        auto walk = [&](auto&& self, const EntityId& node, std::size_t depth) -> void {
            bool extended = false;
            if (depth < d_max) {
                for (const auto& edge_id : graph.out_edges(node)) {
                    const EdgeRecord& edge = graph.edge(edge_id);
                    if (deleted(edge)) continue;
                    if (visited.count(edge.target)) continue;
                    visited.insert(edge.target);
                    key.push_back(edge_id);
                    self(self, edge.target, depth + 1);
                    key.pop_back();
                    visited.erase(edge.target);
                    extended = true;
                }
            }
            if (!extended && depth > 0) out.insert(key);
        };
        walk(walk, entry, 0);
    }
    return out;
}

inline std::set<PathKey> path_keys(const std::vector<cgr::ReasoningPath>& paths) {
    std::set<PathKey> out;
    for (const auto& path : paths) {
        PathKey key{path.nodes.front().value()};
        key.insert(key.end(), path.edges.begin(), path.edges.end());
        out.insert(key);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Test doubles.

/// Delegates to the offline rule evaluator while counting batch invocations.
class CountingEvaluator final : public cgr::ConditionEvaluator {
public:
    std::vector<cgr::Verdict> evaluate_batch(
        const cgr::ParsedQuery& query,
        const std::vector<cgr::ConditionLabel>& conditions) override {
        ++calls_;
        last_batch_size_ = conditions.size();
        return inner_.evaluate_batch(query, conditions);
    }

    int calls() const { return calls_; }
    std::size_t last_batch_size() const { return last_batch_size_; }

private:
    cgr::OfflineConditionEvaluator inner_;
    int calls_ = 0;
    std::size_t last_batch_size_ = 0;
};

/// Replays a scripted sequence of replies and records every request.
class ScriptedChat final : public cgr::ChatProvider {
public:
    explicit ScriptedChat(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    std::string chat(const std::vector<cgr::ChatMessage>& messages) override {
        requests_.push_back(messages);
        if (next_ >= replies_.size()) {
            throw cgr::ProviderError(cgr::ProviderError::Kind::Exhausted,
                                     "scripted provider ran out of replies");
        }
        return replies_[next_++];
    }

    const std::vector<std::vector<cgr::ChatMessage>>& requests() const { return requests_; }

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    std::vector<std::vector<cgr::ChatMessage>> requests_;
};

/// Chat provider that always fails with a transport error.
class FailingChat final : public cgr::ChatProvider {
public:
    std::string chat(const std::vector<cgr::ChatMessage>&) override {
        ++calls_;
        throw cgr::ProviderError(cgr::ProviderError::Kind::Transport, "scripted failure");
    }

    int calls() const { return calls_; }

private:
    int calls_ = 0;
};

/// Hash embedder that counts embed_batch calls.
class CountingEmbedder final : public cgr::EmbeddingProvider {
public:
    explicit CountingEmbedder(std::size_t dim = 256) : inner_(dim) {}

    std::vector<cgr::EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override {
        ++calls_;
        return inner_.embed_batch(texts);
    }
    std::size_t dim() const override { return inner_.dim(); }

    int calls() const { return calls_; }

private:
    cgr::HashEmbeddingProvider inner_;
    int calls_ = 0;
};

// ---------------------------------------------------------------------------
// Random answer strings for metric property tests: short token sequences
// over a tiny vocabulary with occasional punctuation and casing noise.

template <typename Rng>
std::string random_answer(Rng& rng) {
    static const std::vector<std::string> vocabulary = {
        "vitamin", "k", "deficiency", "warfarin", "the", "a",  "scan", "dose",
        "renal",   "b", "therapy",    "acute",    "V/Q", "an", "iron", "x-ray"};
    const std::size_t length = pick(rng, 6);  // empty strings included
    std::string out;
    for (std::size_t i = 0; i < length; ++i) {
        if (!out.empty()) out += ' ';
        std::string word = vocabulary[pick(rng, vocabulary.size())];
        if (rng() % 5 == 0 && !word.empty()) word[0] = static_cast<char>(std::toupper(word[0]));
        out += word;
        if (rng() % 7 == 0) out += '.';
    }
    return out;
}

}  // namespace fixtures
