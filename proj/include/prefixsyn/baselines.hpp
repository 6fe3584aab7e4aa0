#pragma once

/// @file baselines.hpp
/// @brief Classical prefix circuit generators: Sklansky, Kogge-Stone and
///        Brent-Kung. Power-of-two widths only.

#include "prefixsyn/circuit.hpp"

namespace prefixsyn {

namespace detail {
inline void require_power_of_two(int n) {
    if (n < 2 || (n & (n - 1)) != 0)
        throw Error(Errc::InvalidWidth,
                    "baseline generators require a power-of-two width, got " + std::to_string(n));
}
} // namespace detail

/// Divide-and-conquer tree: at stage t every position in the upper half of
/// each 2^t block combines with the node spanning the lower half down to the
/// block base. Delay log2(n) + 1, (n/2)*log2(n) prefix nodes.
inline PrefixCircuit sklansky(int n) {
    detail::require_power_of_two(n);
    PrefixCircuit c(n);
    // acc[i] covers [block_base : i] for the current block size
    std::vector<int> acc(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        acc[static_cast<size_t>(i)] = i;
    for (int block = 2; block <= n; block *= 2) {
        int half = block / 2;
        for (int base = 0; base < n; base += block) {
            int mid = base + half;
            for (int i = mid; i < base + block; ++i)
                acc[static_cast<size_t>(i)] =
                    c.add_prefix_node(acc[static_cast<size_t>(mid - 1)], acc[static_cast<size_t>(i)]);
        }
    }
    return c;
}

/// Recursive doubling: at stage t each position i >= 2^(t-1) combines its
/// running span with the span ending at i - 2^(t-1). Delay log2(n) + 1,
/// n*log2(n) - n + 1 prefix nodes.
inline PrefixCircuit kogge_stone(int n) {
    detail::require_power_of_two(n);
    PrefixCircuit c(n);
    std::vector<int> acc(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        acc[static_cast<size_t>(i)] = i;
    for (int stride = 1; stride < n; stride *= 2) {
        // walk downward so acc[i - stride] still holds the previous stage
        for (int i = n - 1; i >= stride; --i)
            acc[static_cast<size_t>(i)] =
                c.add_prefix_node(acc[static_cast<size_t>(i - stride)], acc[static_cast<size_t>(i)]);
    }
    return c;
}

/// Up-sweep tree of block combines followed by a down-sweep fill-in.
/// Delay 2*log2(n) - 1 for n >= 4 (2 for n = 2), 2n - 2 - log2(n) prefix nodes.
inline PrefixCircuit brent_kung(int n) {
    detail::require_power_of_two(n);
    PrefixCircuit c(n);
    std::vector<int> span(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        span[static_cast<size_t>(i)] = i;
    // up-sweep: span[i] ends at i and doubles in extent each stage
    for (int size = 2; size <= n; size *= 2) {
        for (int i = size - 1; i < n; i += size)
            span[static_cast<size_t>(i)] = c.add_prefix_node(span[static_cast<size_t>(i - size / 2)],
                                                             span[static_cast<size_t>(i)]);
    }
    // down-sweep: extend each output [0 : i - size/2] by the half-block above it
    for (int size = n / 2; size >= 2; size /= 2) {
        for (int i = size + size / 2 - 1; i < n; i += size) {
            int out = *c.output_node(i - size / 2);
            c.add_prefix_node(out, span[static_cast<size_t>(i)]);
        }
    }
    return c;
}

} // namespace prefixsyn
