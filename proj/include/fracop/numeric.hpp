#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fracop {

/// Pairwise (cascade) summation over [begin, end). Deterministic for a fixed
/// element order, which is what makes repeated runs bitwise reproducible.
template <typename F>
double pairwise_sum(std::size_t begin, std::size_t end, F&& term) {
    const std::size_t n = end - begin;
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += term(i);
        return s;
    }
    const std::size_t mid = begin + n / 2;
    return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

}  // namespace fracop
