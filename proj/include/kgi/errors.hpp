#pragma once

#include <stdexcept>
#include <string>

namespace kgi {

// Base for every error raised by the pipeline.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad sizes, out-of-range parameters).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Malformed input data; `field` names the offending key or record when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string field = {})
        : Error(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Transport-level failure. status 0 means the request never got a response.
class HttpError : public Error {
public:
    HttpError(const std::string& what, int status) : Error(what), status_(status) {}
    int status() const noexcept { return status_; }
    bool retriable() const noexcept {
        return status_ == 0 || status_ == 408 || status_ == 429 || status_ >= 500;
    }

private:
    int status_;
};

// LLM output that could not be turned into triples. Carries the raw response.
class ExtractionError : public Error {
public:
    ExtractionError(const std::string& what, std::string raw)
        : Error(what), raw_(std::move(raw)) {}
    const std::string& raw_response() const noexcept { return raw_; }

private:
    std::string raw_;
};

// Non-finite values or degenerate geometry in numeric code.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace kgi
