#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cgr {

/// Base class for recoverable engine errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// An entity string was empty (or whitespace-only) after canonicalization.
class EmptyEntity : public Error {
public:
    EmptyEntity() : Error("entity is empty after canonicalization") {}
    explicit EmptyEntity(const std::string& what_arg) : Error(what_arg) {}
};

/// A question string was empty or whitespace-only.
class EmptyQuery : public Error {
public:
    EmptyQuery() : Error("query is empty") {}
};

/// Filesystem-level failure (open, read, write).
class IoError : public Error {
public:
    explicit IoError(const std::string& what_arg) : Error(what_arg) {}
};

/// Malformed persisted data. Carries the 1-based line number when known.
class FormatError : public Error {
public:
    FormatError(const std::string& what_arg, std::size_t line)
        : Error(what_arg + " (line " + std::to_string(line) + ")"), line_(line) {}
    explicit FormatError(const std::string& what_arg) : Error(what_arg), line_(0) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A provider reply did not match the documented response schema.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what_arg) : Error(what_arg) {}
};

/// A prompt template contained an unknown placeholder or lacked a required one.
class TemplateError : public Error {
public:
    explicit TemplateError(const std::string& what_arg) : Error(what_arg) {}
};

/// A reasoning path violated its structural invariants.
class InvalidPath : public Error {
public:
    explicit InvalidPath(const std::string& what_arg) : Error(what_arg) {}
};

/// No graph node cleared the entry-similarity threshold for any keyword.
class NoEntryNodes : public Error {
public:
    NoEntryNodes() : Error("no entry nodes matched the query keywords") {}
};

/// An evidence snippet referenced a document absent from the graph.
class DanglingSnippet : public Error {
public:
    explicit DanglingSnippet(const std::string& doc_id)
        : Error("snippet references unknown document '" + doc_id + "'") {}
};

/// Agreement coefficient requested on a degenerate rating scale.
class DegenerateScale : public Error {
public:
    explicit DegenerateScale(const std::string& what_arg) : Error(what_arg) {}
};

/// Invalid configuration value (out-of-range knob, bad flag combination).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what_arg) : Error(what_arg) {}
};

/// Remote provider failure. `kind` distinguishes transport-level failures,
/// non-retryable HTTP statuses, and retry exhaustion.
class ProviderError : public Error {
public:
    enum class Kind { Transport, Timeout, Status, Exhausted };

    ProviderError(Kind kind, const std::string& what_arg, int status = 0)
        : Error(what_arg), kind_(kind), status_(status) {}

    Kind kind() const { return kind_; }
    int status() const { return status_; }

private:
    Kind kind_;
    int status_;
};

/// Thrown when the test-time network guard is armed and remote I/O is
/// attempted anyway. Intentionally not derived from Error so that provider
/// fallback paths cannot swallow it.
class NetworkGuardViolation : public std::logic_error {
public:
    NetworkGuardViolation()
        : std::logic_error("network guard is armed: remote I/O attempted in offline mode") {}
};

}  // namespace cgr
