#pragma once

#include "kornlab/types.hpp"

#include <span>

namespace kornlab {

/// Pairwise (tree) summation. Deterministic and order-stable: the result
/// depends only on the element order, never on chunking done by callers,
/// which keeps quadrature sums reproducible to the last bit.
inline Real pairwise_sum(std::span<const Real> x) {
    if (x.size() <= 16) {
        Real s = 0;
        for (Real v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline Real pairwise_sum(const ArrayX& x) {
    return pairwise_sum(std::span<const Real>(x.data(), static_cast<std::size_t>(x.size())));
}

} // namespace kornlab
