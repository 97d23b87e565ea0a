#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seedforge {

// Base of every error the library throws on purpose. Anything else escaping
// a seedforge call is a bug.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or missing configuration (bad key, out-of-range value, missing
// credential, unsupported language pair).
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    explicit ConfigError(const std::string& message) : Error(message) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Caller broke an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Failure talking to an external service. `retryable` marks transport
// failures, throttling and 5xx responses.
class ProviderError : public Error {
public:
    ProviderError(const std::string& message, bool retryable, int http_status = 0)
        : Error(message), retryable_(retryable), http_status_(http_status) {}

    bool retryable() const noexcept { return retryable_; }
    int http_status() const noexcept { return http_status_; }

private:
    bool retryable_;
    int http_status_;
};

// A provider answered, but the answer violates the protocol contract
// (wrong vector count, dimension drift, short paraphrase list).
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Provider lacks an optional capability (e.g. token-level embeddings).
class CapabilityError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Model output could not be parsed into the expected structure. Carries the
// raw text so callers can log it or retry.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::string raw)
        : Error(message), raw_(std::move(raw)) {}

    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

// Parsed structure violates a content rule (e.g. ordinal references in
// multiple-choice options).
class ValidationError : public ParseError {
public:
    using ParseError::ParseError;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

// Retry budget ran out before the requested amount was produced.
class GenerationExhaustedError : public GenerationError {
public:
    GenerationExhaustedError(const std::string& message, std::size_t collected)
        : GenerationError(message), collected_(collected) {}

    std::size_t collected() const noexcept { return collected_; }

private:
    std::size_t collected_;
};

class UndefinedSimilarityError : public Error {
public:
    using Error::Error;
};

// Dataset build could not reach its target size.
class BuildShortfallError : public Error {
public:
    BuildShortfallError(const std::string& message, std::size_t achieved, std::size_t target)
        : Error(message), achieved_(achieved), target_(target) {}

    std::size_t achieved() const noexcept { return achieved_; }
    std::size_t target() const noexcept { return target_; }

private:
    std::size_t achieved_;
    std::size_t target_;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class DegenerateTestError : public Error {
public:
    using Error::Error;
};

// Malformed record file line.
class FormatError : public Error {
public:
    FormatError(const std::string& path, std::size_t line, const std::string& message)
        : Error(path + ":" + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Wraps a failure inside a pipeline stage with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace seedforge
