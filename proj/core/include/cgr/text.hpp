#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cgr {

/// Trim outer whitespace, fold ASCII letters to lower case, and collapse
/// internal whitespace runs to a single space. Non-ASCII bytes pass through.
std::string canonicalize_text(std::string_view raw);

/// Lower-case and replace every run of non-alphanumeric characters with a
/// single underscore ("treated with" -> "treated_with").
std::string snake_case(std::string_view raw);

std::vector<std::string> split_whitespace(std::string_view text);

/// Strip leading/trailing punctuation from a single token ("stenosis?" ->
/// "stenosis"). Interior punctuation such as hyphens is preserved.
std::string strip_edge_punct(std::string_view token);

/// Naive English singular form used for dictionary lookups ("allergies" ->
/// "allergy", "regimens" -> "regimen"). Returns the input when no rule fits.
std::string singularize(std::string_view token);

struct SentenceSpan {
    std::size_t start = 0;
    std::size_t length = 0;
};

/// Split on sentence-final punctuation followed by whitespace, and on
/// newlines. Spans cover the input exactly, in order, with no overlap.
std::vector<SentenceSpan> split_sentences(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);

/// FNV-1a over the input bytes in reverse order. Used as the independent
/// sign hash of the feature-hashing embedder.
std::uint64_t fnv1a64_reversed(std::string_view bytes);

/// Fixed-width (16 digit) lowercase hex rendering of a 64-bit value.
std::string to_hex(std::uint64_t value);

}  // namespace cgr
