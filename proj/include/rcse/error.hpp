#pragma once

#include <stdexcept>
#include <string>

namespace rcse {

// All library errors derive from Error and carry a stable machine-parsable
// class tag. The CLI prints `error[<tag>]: <message>` and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string tag, const std::string& msg)
        : std::runtime_error(msg), tag_(std::move(tag)) {}

    const std::string& tag() const noexcept { return tag_; }

private:
    std::string tag_;
};

// Malformed input text (wrong column count, bad numbers, self-loops, ...).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line = -1)
        : Error("parse-error", line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

// A symbol is not present in the vocabulary (strict ingestion, queries, ids).
class UnknownSymbolError : public Error {
public:
    explicit UnknownSymbolError(const std::string& msg) : Error("unknown-symbol", msg) {}
};

// Invalid or infeasible configuration (bad fold counts, pool sizes, ...).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config-error", msg) {}
};

// Negative sampling ran out of attempts (graph too dense to corrupt).
class SamplingExhaustedError : public Error {
public:
    explicit SamplingExhaustedError(const std::string& msg)
        : Error("sampling-exhausted", msg) {}
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& msg) : Error("divergence", msg) {}
};

// A metric was requested over an empty input.
class MetricError : public Error {
public:
    explicit MetricError(const std::string& msg) : Error("undefined-metric", msg) {}
};

// File could not be read/written or failed structural validation (magic,
// version, checksum).
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error("io-error", msg) {}
};

} // namespace rcse
