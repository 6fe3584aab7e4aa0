#pragma once

/// @file verify.hpp
/// @brief Functional sign-off for circuits: carries evaluated 64 operand
///        pairs at a time and compared against integer addition. Exhaustive
///        for widths up to 10, random plus corner cases above.

#include "prefixsyn/circuit.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace prefixsyn {

struct Counterexample {
    uint64_t a = 0;
    uint64_t b = 0;
    int bit = 0; // first sum/carry bit that differs
};

struct VerifyResult {
    bool ok = true;
    uint64_t pairs_tested = 0;
    std::optional<Counterexample> counterexample;

    explicit operator bool() const { return ok; }
};

namespace detail {

/// Evaluates up to 64 operand pairs at once: lane j of each mask holds the
/// signal for pair j. Returns false and fills `out` on the first mismatch
/// against integer addition.
class LaneEvaluator {
  public:
    explicit LaneEvaluator(const PrefixCircuit& c) : circuit_(c) {
        p_.resize(c.nodes().size());
        g_.resize(c.nodes().size());
        out_nodes_.reserve(static_cast<size_t>(c.width()));
        for (int i = 0; i < c.width(); ++i)
            out_nodes_.push_back(*c.output_node(i));
    }

    bool check(const uint64_t* a, const uint64_t* b, int lanes, VerifyResult& result) {
        const int n = circuit_.width();
        for (const NodeRecord& node : circuit_.nodes()) {
            size_t id = static_cast<size_t>(node.id);
            if (node.is_input()) {
                uint64_t abits = 0, bbits = 0;
                for (int j = 0; j < lanes; ++j) {
                    abits |= ((a[j] >> node.range.lo) & 1u) << j;
                    bbits |= ((b[j] >> node.range.lo) & 1u) << j;
                }
                p_[id] = abits ^ bbits;
                g_[id] = abits & bbits;
            } else {
                size_t l = static_cast<size_t>(node.left), r = static_cast<size_t>(node.right);
                g_[id] = g_[r] | (p_[r] & g_[l]);
                p_[id] = p_[r] & p_[l];
            }
        }
        for (int j = 0; j < lanes; ++j) {
            uint64_t carries = 0;
            for (int i = 0; i < n; ++i)
                carries |= ((g_[static_cast<size_t>(out_nodes_[static_cast<size_t>(i)])] >> j) & 1u)
                           << i;
            uint64_t mask = n == 64 ? ~uint64_t{0} : (uint64_t{1} << n) - 1;
            uint64_t sum = (a[j] ^ b[j] ^ (carries << 1)) & mask;
            uint64_t cout = (carries >> (n - 1)) & 1u;
            uint64_t expected = a[j] + b[j];
            uint64_t got = sum | (cout << n);
            ++result.pairs_tested;
            if (got != expected) {
                uint64_t diff = got ^ expected;
                int bit = 0;
                while (((diff >> bit) & 1u) == 0)
                    ++bit;
                result.ok = false;
                result.counterexample = Counterexample{a[j], b[j], bit};
                return false;
            }
        }
        return true;
    }

  private:
    const PrefixCircuit& circuit_;
    std::vector<uint64_t> p_, g_;
    std::vector<int> out_nodes_;
};

} // namespace detail

/// Compares the circuit's carry network against integer addition. Exhaustive
/// over all operand pairs for widths up to 10; otherwise `trials` uniform
/// random pairs plus a corner set (zero, one, all-ones, alternating masks).
/// Reports the first counterexample found.
inline VerifyResult verify_adder(const PrefixCircuit& c, uint64_t trials = 100000,
                                 uint64_t seed = 0xC0FFEE) {
    if (!c.is_valid())
        throw Error(Errc::CircuitNotValid, "verify_adder needs a valid circuit");
    const int n = c.width();
    if (n > 63)
        throw Error(Errc::OperandRange, "verify_adder supports widths up to 63");

    VerifyResult result;
    detail::LaneEvaluator eval(c);
    uint64_t a_buf[64], b_buf[64];

    if (n <= 10) {
        uint64_t limit = uint64_t{1} << n;
        for (uint64_t a = 0; a < limit; ++a) {
            uint64_t b = 0;
            while (b < limit) {
                int lanes = 0;
                while (lanes < 64 && b < limit) {
                    a_buf[lanes] = a;
                    b_buf[lanes] = b++;
                    ++lanes;
                }
                if (!eval.check(a_buf, b_buf, lanes, result))
                    return result;
            }
        }
        return result;
    }

    uint64_t mask = (uint64_t{1} << n) - 1;
    std::vector<uint64_t> corners = {0, 1, mask, 0xAAAAAAAAAAAAAAAAull & mask,
                                     0x5555555555555555ull & mask};
    int lanes = 0;
    auto push = [&](uint64_t a, uint64_t b) {
        a_buf[lanes] = a;
        b_buf[lanes] = b;
        if (++lanes == 64) {
            lanes = 0;
            return eval.check(a_buf, b_buf, 64, result);
        }
        return true;
    };
    for (uint64_t ca : corners)
        for (uint64_t cb : corners)
            if (!push(ca, cb))
                return result;
    std::mt19937_64 rng(seed);
    for (uint64_t t = 0; t < trials; ++t)
        if (!push(rng() & mask, rng() & mask))
            return result;
    if (lanes > 0)
        eval.check(a_buf, b_buf, lanes, result);
    return result;
}

} // namespace prefixsyn
