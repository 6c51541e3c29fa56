#pragma once

#include <stdexcept>
#include <string>

namespace dscope {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an operation's arguments was violated.
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// renormalize_over was given a support with no token present in the distribution.
class EmptySupportError : public Error {
public:
    using Error::Error;
};

/// Toy LM received a token outside its vocabulary.
class UnknownTokenError : public Error {
public:
    using Error::Error;
};

/// Toy LM has no row for the requested context.
class UnknownContextError : public Error {
public:
    using Error::Error;
};

/// Replay source has no fixture for the requested prompt.
class MissingFixtureError : public Error {
public:
    using Error::Error;
};

/// A fixture with the same prompt hash but different payload already exists.
class FixtureConflictError : public Error {
public:
    using Error::Error;
};

/// HTTP-level failure talking to a remote endpoint. Carries the raw payload.
class TransportError : public Error {
public:
    TransportError(const std::string& what, std::string payload)
        : Error(what), payload_(std::move(payload)) {}
    const std::string& payload() const { return payload_; }

private:
    std::string payload_;
};

/// Remote endpoint answered with a body we cannot interpret. Carries the raw body.
class MalformedResponseError : public Error {
public:
    MalformedResponseError(const std::string& what, std::string payload)
        : Error(what), payload_(std::move(payload)) {}
    const std::string& payload() const { return payload_; }

private:
    std::string payload_;
};

/// Prompt template is missing a required placeholder.
class TemplateError : public Error {
public:
    using Error::Error;
};

/// No answer-label token could be found in a distribution. Carries the top
/// candidates that were seen, for diagnosis.
class ScoringError : public Error {
public:
    ScoringError(const std::string& what, std::string top_candidates)
        : Error(what), top_candidates_(std::move(top_candidates)) {}
    const std::string& top_candidates() const { return top_candidates_; }

private:
    std::string top_candidates_;
};

/// A series is constant (or otherwise unusable) where a correlation is required.
class DegenerateSeriesError : public Error {
public:
    using Error::Error;
};

/// A data file violates its schema. Carries the 1-based line number when known.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what, long line = -1)
        : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_ = -1;
};

}  // namespace dscope
