#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cgr/graph.hpp"

namespace cgr {

/// Contiguous slice of a source document. Chunks partition the document:
/// concatenating them in order reproduces the original text.
struct DocumentChunk {
    std::string doc_id;
    std::size_t chunk_index = 0;
    std::size_t char_offset = 0;  // offset of `text` within the document
    std::string text;
};

/// Splits a document into chunks of at most `max_chunk_chars` characters,
/// preferring sentence boundaries and falling back to a hard cut for
/// oversized sentences. Empty (or whitespace-only) documents yield an empty
/// list. Throws ConfigError when max_chunk_chars < 200.
std::vector<DocumentChunk> chunk_document(const std::string& doc_id, const std::string& text,
                                          std::size_t max_chunk_chars = 1500);

/// Extractor output before normalization. Strings are verbatim surface forms;
/// conditions may still carry leading negation markers ("not X").
struct RawTuple {
    std::string entity1;
    std::string relation;
    std::string inverse_relation;  // empty when the extractor has no inverse
    std::string entity2;
    std::vector<std::string> conditions;
    std::string doc_id;
    std::size_t chunk_index = 0;
};

/// Surface-form to canonical-entity dictionary (the normalization step's
/// stand-in for a full medical vocabulary). Keys and values are canonical
/// text; lookups are exact after canonicalization.
class SynonymDictionary {
public:
    SynonymDictionary() = default;

    /// Loads "surface<TAB>canonical" rows. Throws FormatError on bad rows.
    static SynonymDictionary load_tsv(const std::filesystem::path& path);

    void add(std::string_view surface, std::string_view canonical);

    /// Maps an already-canonical entity; identity when unmapped.
    EntityId apply(const EntityId& entity) const;

    std::size_t size() const { return map_.size(); }

private:
    std::map<std::string, std::string> map_;
};

class TupleExtractor {
public:
    virtual ~TupleExtractor() = default;
    virtual std::vector<RawTuple> extract(const DocumentChunk& chunk) = 0;
};

/// Deterministic pattern-grammar extractor over single sentences. Recognizes
/// a fixed set of verb frames (treats / treated with / treated by,
/// contraindicated in, recommended for, preferred in, causes, associated
/// with, increases, reduces, blocked by, risk factor, and a few clinical
/// extras), lifts prepositional qualifiers into conditions, splits subject
/// conjunctions, and resolves sentence-local pronouns. No cross-sentence
/// reasoning.
class RuleBasedExtractor final : public TupleExtractor {
public:
    std::vector<RawTuple> extract(const DocumentChunk& chunk) override;
};

/// Convenience wrapper over RuleBasedExtractor.
std::vector<RawTuple> rule_based_extract(const DocumentChunk& chunk);

struct ExtractionOutcome {
    std::vector<RawTuple> tuples;
    std::size_t dropped = 0;  // outputs that violated tuple invariants
};

/// Runs an extractor on one chunk. Invalid tuples (empty entities or
/// relation, empty condition entries) are dropped and counted instead of
/// failing the chunk; provider errors propagate to the caller.
ExtractionOutcome extract_tuples(const DocumentChunk& chunk, TupleExtractor& extractor);

/// Normalizes a raw tuple into a graph-ready edge: canonical
/// dictionary-mapped entities, snake_case relation, negation-lifted condition
/// labels, and a provenance snippet (the chunk sentence containing both
/// entities when locatable, else the whole chunk).
EdgeRecord normalize_tuple(const RawTuple& tuple, const SynonymDictionary& dict,
                           const DocumentChunk* chunk = nullptr);

}  // namespace cgr
