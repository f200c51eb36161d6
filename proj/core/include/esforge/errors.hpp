// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace esforge {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or record. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " at line " + std::to_string(line) : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Network-level failure or retry budget exhausted.
class TransportError : public Error {
public:
    using Error::Error;
};

/// A scripted fixture ran out of responses for a role tag.
class FixtureUnderrunError : public Error {
public:
    using Error::Error;
};

/// Backend answered, but the answer is unusable (empty, malformed JSON).
class ProtocolError : public Error {
public:
    using Error::Error;
};

class ScenarioTooShortError : public Error {
public:
    using Error::Error;
};

class ProfileParseError : public Error {
public:
    using Error::Error;
};

}  // namespace esforge
