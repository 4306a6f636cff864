#pragma once

#include <stdexcept>
#include <string>

namespace sapgm {

/// Raised when a numeric parameter (mu, step, tolerance, ...) is out of range.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised on malformed inputs: dimension mismatches, empty lists, off-simplex weights.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnsupportedAtom : public std::invalid_argument {
public:
    explicit UnsupportedAtom(const std::string& atom)
        : std::invalid_argument("unsupported atom '" + atom + "'"), atom_(atom) {}
    const std::string& atom() const noexcept { return atom_; }

private:
    std::string atom_;
};

/// Backtracking inflated the Lipschitz estimate past its limit.
class DivergingLipschitz : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An artifact could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sapgm
