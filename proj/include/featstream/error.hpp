#pragma once

#include <stdexcept>
#include <string>

namespace featstream {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument is outside its documented domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A tensor violates a data-model invariant (non-finite value, bad dims).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Unknown magic, version or enumeration tag in a serialized stream.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A stream is truncated, has inconsistent lengths, or fails to decode.
class CorruptionError : public Error {
public:
    using Error::Error;
};

/// Checksum mismatch.
class IntegrityError : public CorruptionError {
public:
    using CorruptionError::CorruptionError;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace featstream
