#pragma once

#include <stdexcept>
#include <string>

namespace swr {

// Base of every error thrown by the toolkit. The CLI maps IoError to exit
// code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value violates an operation's mathematical precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

// An input (file content, track, manifest, config) is malformed or inconsistent.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Unsupported audio encoding.
class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Missing, unreadable, truncated or unwritable file.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace swr
