#pragma once

#include <stdexcept>
#include <string>

namespace pcqd {

// Base error for every failure the library raises on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value detected in a numeric pipeline.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Malformed PLY input. Every parse failure maps to this type.
class PlyError : public Error {
public:
    explicit PlyError(const std::string& msg) : Error(msg) {}
};

// Filesystem / serialization failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace pcqd
