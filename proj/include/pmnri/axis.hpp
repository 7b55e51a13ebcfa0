#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace pmnri {

/// n evenly spaced samples from first to last inclusive. n == 1 yields {first}.
inline std::vector<double> linspace(double first, double last, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = first;
        return out;
    }
    const double step = (last - first) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = first + step * static_cast<double>(i);
    if (n > 1) out.back() = last;
    return out;
}

inline bool strictly_increasing(std::span<const double> axis) {
    for (std::size_t i = 1; i < axis.size(); ++i)
        if (!(axis[i] > axis[i - 1])) return false;
    return true;
}

inline bool strictly_monotonic(std::span<const double> axis) {
    if (axis.size() < 2) return true;
    const bool up = axis[1] > axis[0];
    for (std::size_t i = 1; i < axis.size(); ++i) {
        if (up ? !(axis[i] > axis[i - 1]) : !(axis[i] < axis[i - 1])) return false;
    }
    return true;
}

inline void require_strictly_increasing(std::span<const double> axis, const std::string& what) {
    for (std::size_t i = 1; i < axis.size(); ++i) {
        if (!(axis[i] > axis[i - 1]))
            throw DataError(what + " is not strictly increasing at index " + std::to_string(i));
    }
}

}  // namespace pmnri
