#include "cgr/text.hpp"

#include <algorithm>
#include <cctype>

namespace cgr {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

std::string canonicalize_text(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (is_space(c)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::string snake_case(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_sep = false;
    for (unsigned char c : raw) {
        if (is_alnum(c)) {
            if (pending_sep && !out.empty()) out.push_back('_');
            pending_sep = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_sep = true;
        }
    }
    return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

std::string strip_edge_punct(std::string_view token) {
    std::size_t begin = 0;
    std::size_t end = token.size();
    while (begin < end && std::ispunct(static_cast<unsigned char>(token[begin]))) ++begin;
    while (end > begin && std::ispunct(static_cast<unsigned char>(token[end - 1]))) --end;
    return std::string(token.substr(begin, end - begin));
}

std::string singularize(std::string_view token) {
    std::string t(token);
    if (t.size() > 3 && t.ends_with("ies")) {
        t.resize(t.size() - 3);
        t.push_back('y');
        return t;
    }
    if (t.size() > 3 && (t.ends_with("ses") || t.ends_with("xes") || t.ends_with("ches") ||
                         t.ends_with("shes"))) {
        t.resize(t.size() - 2);
        return t;
    }
    if (t.size() > 3 && t.ends_with('s') && !t.ends_with("ss") && !t.ends_with("us")) {
        t.pop_back();
        return t;
    }
    return t;
}

std::vector<SentenceSpan> split_sentences(std::string_view text) {
    std::vector<SentenceSpan> spans;
    std::size_t start = 0;
    std::size_t i = 0;
    auto flush = [&](std::size_t end) {
        if (end > start) spans.push_back({start, end - start});
        start = end;
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            flush(i + 1);
            ++i;
            continue;
        }
        if (c == '.' || c == '!' || c == '?') {
            // Consume a run of closers (".)", "?!") plus trailing spaces so the
            // following sentence starts at a non-space character.
            std::size_t j = i + 1;
            while (j < text.size() &&
                   (text[j] == '.' || text[j] == '!' || text[j] == '?' || text[j] == ')' ||
                    text[j] == '"' || text[j] == '\'')) {
                ++j;
            }
            if (j >= text.size() || is_space(static_cast<unsigned char>(text[j]))) {
                while (j < text.size() && text[j] != '\n' &&
                       is_space(static_cast<unsigned char>(text[j]))) {
                    ++j;
                }
                flush(j);
                i = j;
                continue;
            }
        }
        ++i;
    }
    flush(text.size());
    return spans;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64_reversed(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (auto it = bytes.rbegin(); it != bytes.rend(); ++it) {
        h ^= static_cast<unsigned char>(*it);
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace cgr
