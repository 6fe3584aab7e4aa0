#pragma once

/// @file circuit.hpp
/// @brief Prefix circuit model: nodes over bit ranges, construction rules,
///        validity, metrics and functional (carry) semantics.

#include "prefixsyn/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace prefixsyn {

/// Contiguous range of bit positions, inclusive on both ends. Bit 0 is the
/// least significant bit. An output range is one with lo == 0.
struct BitRange {
    int lo = 0;
    int hi = 0;

    int span() const { return hi - lo + 1; }
    bool is_output() const { return lo == 0; }

    friend bool operator==(const BitRange&, const BitRange&) = default;
    friend auto operator<=>(const BitRange&, const BitRange&) = default;
};

enum class NodeKind { Input, Prefix };

/// One node of a prefix circuit. Input nodes have no predecessors and sit at
/// level 1; a prefix node combines two earlier nodes whose ranges are
/// adjacent (right starts one bit above where left ends).
struct NodeRecord {
    static constexpr int kNone = -1;

    int id = 0;
    NodeKind kind = NodeKind::Input;
    int left = kNone;  // less significant predecessor
    int right = kNone; // more significant predecessor
    BitRange range;
    int level = 1;

    bool is_input() const { return kind == NodeKind::Input; }
};

/// Area and delay of a circuit: area counts every node (inputs included),
/// delay is the maximum logic level with inputs at level 1.
struct Metrics {
    int area = 0;
    int delay = 0;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Number of bits needed to count n distinct values; ceil(log2 n) for n >= 1.
inline int ceil_log2(int n) {
    int bits = 0;
    while ((1 << bits) < n)
        ++bits;
    return bits;
}

/// A prefix circuit over `width` bit positions. Nodes 0..width-1 are always
/// the input nodes; prefix nodes are appended after them and may only
/// reference earlier-indexed nodes, so index order is a topological order.
///
/// Circuits are cheap value types. Mutation is append-only; once construction
/// finishes a circuit can be shared read-only across threads.
class PrefixCircuit {
  public:
    /// Builds the empty partial circuit: width input nodes, no prefix nodes.
    explicit PrefixCircuit(int width) {
        if (width < 2)
            throw Error(Errc::InvalidWidth, "circuit width must be at least 2, got " +
                                                std::to_string(width));
        width_ = width;
        nodes_.reserve(static_cast<size_t>(width));
        for (int i = 0; i < width; ++i)
            nodes_.push_back(NodeRecord{i, NodeKind::Input, NodeRecord::kNone,
                                        NodeRecord::kNone, BitRange{i, i}, 1});
    }

    /// Rebuilds a circuit from a raw node list without checking the prefix
    /// invariants. Test instrumentation for constructing deliberate mutants;
    /// regular construction goes through add_prefix_node.
    static PrefixCircuit from_nodes_unchecked(int width, std::vector<NodeRecord> nodes) {
        PrefixCircuit c(width);
        c.nodes_ = std::move(nodes);
        c.pair_to_node_.clear();
        for (const NodeRecord& n : c.nodes_)
            if (!n.is_input())
                c.pair_to_node_.emplace(std::make_pair(n.left, n.right), n.id);
        return c;
    }

    int width() const { return width_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const std::vector<NodeRecord>& nodes() const { return nodes_; }

    const NodeRecord& node(int idx) const {
        if (idx < 0 || idx >= node_count())
            throw Error(Errc::MissingNode, "no node with index " + std::to_string(idx));
        return nodes_[static_cast<size_t>(idx)];
    }

    /// Index of the node already combining (left, right), if any.
    std::optional<int> find_pair(int left, int right) const {
        auto it = pair_to_node_.find({left, right});
        if (it == pair_to_node_.end())
            return std::nullopt;
        return it->second;
    }

    /// Appends the prefix node combining `left` (lower range) with `right`
    /// (upper range) and returns its index. Re-adding an existing (left,
    /// right) pair is a no-op that returns the existing index.
    int add_prefix_node(int left, int right) {
        const NodeRecord& l = node(left);
        const NodeRecord& r = node(right);
        if (r.range.lo != l.range.hi + 1)
            throw Error(Errc::InvalidPrefixNode,
                        "ranges [" + std::to_string(l.range.lo) + ":" + std::to_string(l.range.hi) +
                            "] and [" + std::to_string(r.range.lo) + ":" +
                            std::to_string(r.range.hi) + "] are not adjacent");
        if (auto existing = find_pair(left, right))
            return *existing;
        NodeRecord n;
        n.id = node_count();
        n.kind = NodeKind::Prefix;
        n.left = left;
        n.right = right;
        n.range = BitRange{l.range.lo, r.range.hi};
        n.level = std::max(l.level, r.level) + 1;
        nodes_.push_back(n);
        pair_to_node_.emplace(std::make_pair(left, right), n.id);
        return n.id;
    }

    /// Level the node combining (left, right) would get, without adding it.
    int level_of_pair(int left, int right) const {
        return std::max(node(left).level, node(right).level) + 1;
    }

    /// Output ranges [0:i] not yet covered by any node, in ascending order of
    /// the upper bit. Empty exactly when the circuit is valid.
    std::vector<BitRange> missing_output_ranges() const {
        std::vector<bool> covered(static_cast<size_t>(width_), false);
        for (const NodeRecord& n : nodes_)
            if (n.range.lo == 0 && n.range.hi < width_)
                covered[static_cast<size_t>(n.range.hi)] = true;
        std::vector<BitRange> missing;
        for (int i = 0; i < width_; ++i)
            if (!covered[static_cast<size_t>(i)])
                missing.push_back(BitRange{0, i});
        return missing;
    }

    bool is_valid() const { return missing_output_ranges().empty(); }

    Metrics metrics() const {
        int delay = 0;
        for (const NodeRecord& n : nodes_)
            delay = std::max(delay, n.level);
        return Metrics{node_count(), delay};
    }

    /// Index of the first node covering [0:hi], if one exists.
    std::optional<int> output_node(int hi) const {
        for (const NodeRecord& n : nodes_)
            if (n.range.lo == 0 && n.range.hi == hi)
                return n.id;
        return std::nullopt;
    }

    /// Computes the carry bits c_0..c_{n-1} for operands a and b: bit i of
    /// the result is the generate signal of the first node covering [0:i].
    /// Per node the generate/propagate pair combines the more significant
    /// predecessor (right) with the less significant one (left) as
    /// g = g_right | (p_right & g_left), p = p_right & p_left.
    uint64_t evaluate_carries(uint64_t a, uint64_t b) const {
        check_operands(a, b);
        if (!is_valid())
            throw Error(Errc::CircuitNotValid, "cannot evaluate carries of a partial circuit");
        std::vector<uint8_t> p(nodes_.size()), g(nodes_.size());
        for (const NodeRecord& n : nodes_) {
            if (n.is_input()) {
                uint8_t ai = (a >> n.range.lo) & 1u;
                uint8_t bi = (b >> n.range.lo) & 1u;
                p[static_cast<size_t>(n.id)] = ai ^ bi;
                g[static_cast<size_t>(n.id)] = ai & bi;
            } else {
                uint8_t pl = p[static_cast<size_t>(n.left)], gl = g[static_cast<size_t>(n.left)];
                uint8_t pr = p[static_cast<size_t>(n.right)], gr = g[static_cast<size_t>(n.right)];
                g[static_cast<size_t>(n.id)] = gr | (pr & gl);
                p[static_cast<size_t>(n.id)] = pr & pl;
            }
        }
        uint64_t carries = 0;
        for (int i = 0; i < width_; ++i) {
            auto out = output_node(i);
            if (!out)
                throw Error(Errc::CircuitNotValid, "no output node for bit " + std::to_string(i));
            carries |= static_cast<uint64_t>(g[static_cast<size_t>(*out)]) << i;
        }
        return carries;
    }

    /// Deterministic structural key, equal for circuits that are identical up
    /// to node renumbering: the sorted multiset of
    /// (range, left child range, right child range, level) tuples.
    std::string canonical_key() const {
        using Tuple = std::tuple<int, int, int, int, int, int, int>;
        std::vector<Tuple> tuples;
        tuples.reserve(nodes_.size());
        for (const NodeRecord& n : nodes_) {
            BitRange lr = n.is_input() ? BitRange{-1, -1} : nodes_[static_cast<size_t>(n.left)].range;
            BitRange rr = n.is_input() ? BitRange{-1, -1} : nodes_[static_cast<size_t>(n.right)].range;
            tuples.emplace_back(n.range.lo, n.range.hi, lr.lo, lr.hi, rr.lo, rr.hi, n.level);
        }
        std::sort(tuples.begin(), tuples.end());
        std::ostringstream key;
        key << "w" << width_;
        for (const Tuple& t : tuples) {
            key << ";" << std::get<0>(t) << "," << std::get<1>(t) << "," << std::get<2>(t) << ","
                << std::get<3>(t) << "," << std::get<4>(t) << "," << std::get<5>(t) << ","
                << std::get<6>(t);
        }
        return key.str();
    }

  private:
    void check_operands(uint64_t a, uint64_t b) const {
        if (width_ > 64)
            throw Error(Errc::OperandRange, "word-level evaluation supports widths up to 64");
        if (width_ < 64) {
            uint64_t limit = uint64_t{1} << width_;
            if (a >= limit || b >= limit)
                throw Error(Errc::OperandRange,
                            "operand does not fit in " + std::to_string(width_) + " bits");
        }
    }

    int width_ = 0;
    std::vector<NodeRecord> nodes_;
    std::map<std::pair<int, int>, int> pair_to_node_;
};

/// Fresh partial circuit holding only the n input nodes.
inline PrefixCircuit new_circuit(int width) { return PrefixCircuit(width); }

/// Ground-truth carries by grade-school ripple propagation:
/// c_{-1} = 0, c_i = majority(a_i, b_i, c_{i-1}).
inline uint64_t ripple_oracle(uint64_t a, uint64_t b, int width) {
    if (width < 1 || width > 64)
        throw Error(Errc::OperandRange, "ripple oracle supports widths 1..64");
    uint64_t carries = 0;
    uint8_t carry = 0;
    for (int i = 0; i < width; ++i) {
        uint8_t ai = (a >> i) & 1u;
        uint8_t bi = (b >> i) & 1u;
        carry = static_cast<uint8_t>((ai & bi) | (ai & carry) | (bi & carry));
        carries |= static_cast<uint64_t>(carry) << i;
    }
    return carries;
}

/// Smallest possible area (node count, inputs included) of any valid prefix
/// circuit of the given width and delay: 3n - 2 - delay.
inline int area_lower_bound(int width, int delay) {
    if (width < 2)
        throw Error(Errc::InvalidWidth, "width must be at least 2");
    int min_delay = ceil_log2(width) + 1;
    if (delay < min_delay)
        throw Error(Errc::InfeasibleDelay, "delay " + std::to_string(delay) + " is below the " +
                                               std::to_string(min_delay) + "-level minimum for width " +
                                               std::to_string(width));
    return 3 * width - 2 - delay;
}

} // namespace prefixsyn
