#pragma once

#include <algorithm>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "sapgm/errors.hpp"

namespace sapgm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box [lower, upper].
struct Box {
    Vector lower;
    Vector upper;

    std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }

    bool contains(const Vector& x) const {
        return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
               (x.array() <= upper.array()).all();
    }

    /// Grows every side by max(width, min_margin).
    Box expanded(double min_margin) const {
        Box out = *this;
        for (Eigen::Index j = 0; j < lower.size(); ++j) {
            const double margin = std::max(upper[j] - lower[j], min_margin);
            out.lower[j] -= margin;
            out.upper[j] += margin;
        }
        return out;
    }
};

inline void require_dim(const Vector& x, std::size_t n, const char* who) {
    if (static_cast<std::size_t>(x.size()) != n) {
        throw InvalidInput(std::string(who) + ": expected dimension " + std::to_string(n) + ", got " +
                           std::to_string(x.size()));
    }
}

} // namespace sapgm
