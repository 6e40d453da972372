#pragma once

#include <stdexcept>
#include <string>

namespace topv {

// Error taxonomy mirrors the CLI exit codes: configuration and contract
// violations exit 1, file problems exit 2, solver breakdowns exit 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller violated a documented precondition (bad shapes, out-of-range args).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Invalid run configuration (file, flag, or field value).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed dump: bad magic, unsupported version, truncated payload.
class FormatError : public IoError {
public:
    explicit FormatError(const std::string& msg) : IoError(msg) {}
};

// Well-formed container, unusable contents (non-finite floats).
class DataError : public IoError {
public:
    explicit DataError(const std::string& msg) : IoError(msg) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

} // namespace topv
