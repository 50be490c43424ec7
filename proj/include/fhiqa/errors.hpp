#pragma once

#include <stdexcept>
#include <string>

namespace fhiqa {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input is structurally valid but carries no usable information
// (all-zero weights, empty patch list, constant targets, ...).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row)
        : Error(what), row_(row) {}
    explicit ParseError(const std::string& what) : Error(what) {}

    // 1-based line number in the source file, 0 when not row-addressed.
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_ = 0;
};

class ConstraintError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fhiqa
