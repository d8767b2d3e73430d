#pragma once

#include <stdexcept>
#include <string>

namespace engagelab {

/// Root of every error the library throws. The three branches below map onto
/// the CLI exit codes (config = 1, data = 2, transport = 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

/// Malformed input row. Carries the offending record id when one is known.
class SchemaError : public DataError {
public:
    explicit SchemaError(const std::string& what, std::string record_id = {})
        : DataError(what), record_id_(std::move(record_id)) {}

    const std::string& record_id() const noexcept { return record_id_; }

private:
    std::string record_id_;
};

class InsufficientClass : public DataError {
public:
    using DataError::DataError;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class EmptyCorpus : public DataError {
public:
    using DataError::DataError;
};

class InvalidSpec : public DataError {
public:
    using DataError::DataError;
};

class SplitMismatch : public DataError {
public:
    using DataError::DataError;
};

class DivisionByZeroBaseline : public DataError {
public:
    using DataError::DataError;
};

class ParseFailure : public DataError {
public:
    using DataError::DataError;
};

class CacheMiss : public TransportError {
public:
    using TransportError::TransportError;
};

}  // namespace engagelab
