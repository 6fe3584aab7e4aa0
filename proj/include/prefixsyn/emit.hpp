#pragma once

/// @file emit.hpp
/// @brief Verilog and Graphviz emission for valid prefix circuits.

#include "prefixsyn/circuit.hpp"

#include <set>
#include <sstream>
#include <string>

namespace prefixsyn {

namespace detail {

/// Net naming: g_<lo>_<hi>__<id> / p_<lo>_<hi>__<id>. The node id suffix
/// keeps nets distinct when two nodes cover the same range.
inline std::string net_name(char kind, const NodeRecord& n) {
    return std::string(1, kind) + "_" + std::to_string(n.range.lo) + "_" +
           std::to_string(n.range.hi) + "__" + std::to_string(n.id);
}

} // namespace detail

/// Emits a synthesizable Verilog module for the adder built around the
/// circuit: a pre-stage computing per-bit propagate/generate, one prefix
/// cell instance per prefix node wired along the DAG, and the sum stage
/// sum_i = p_i ^ c_{i-1} with cout = c_{n-1}.
inline std::string emit_verilog(const PrefixCircuit& c, const std::string& module_name = "prefix_adder") {
    if (!c.is_valid())
        throw Error(Errc::CircuitNotValid, "cannot emit RTL for a partial circuit");
    const int n = c.width();
    std::ostringstream v;

    v << "// " << n << "-bit prefix adder, area " << c.metrics().area << ", delay "
      << c.metrics().delay << "\n";
    v << "module " << module_name << " (\n"
      << "  input  wire [" << n - 1 << ":0] a,\n"
      << "  input  wire [" << n - 1 << ":0] b,\n"
      << "  output wire [" << n - 1 << ":0] sum,\n"
      << "  output wire cout\n"
      << ");\n\n";

    for (const NodeRecord& node : c.nodes())
        v << "  wire " << detail::net_name('g', node) << ", " << detail::net_name('p', node)
          << ";\n";
    v << "\n";

    for (const NodeRecord& node : c.nodes()) {
        if (!node.is_input())
            continue;
        int i = node.range.lo;
        v << "  assign " << detail::net_name('g', node) << " = a[" << i << "] & b[" << i << "];\n";
        v << "  assign " << detail::net_name('p', node) << " = a[" << i << "] ^ b[" << i << "];\n";
    }
    v << "\n";

    for (const NodeRecord& node : c.nodes()) {
        if (node.is_input())
            continue;
        const NodeRecord& l = c.node(node.left);
        const NodeRecord& r = c.node(node.right);
        v << "  prefix_cell cell_" << node.id << " (.g_hi(" << detail::net_name('g', r) << "), .p_hi("
          << detail::net_name('p', r) << "), .g_lo(" << detail::net_name('g', l) << "), .p_lo("
          << detail::net_name('p', l) << "), .g_out(" << detail::net_name('g', node) << "), .p_out("
          << detail::net_name('p', node) << "));\n";
    }
    v << "\n";

    // carries come from the output nodes; sum_0 needs no carry-in
    v << "  assign sum[0] = " << detail::net_name('p', c.node(0)) << ";\n";
    for (int i = 1; i < n; ++i) {
        const NodeRecord& carry = c.node(*c.output_node(i - 1));
        v << "  assign sum[" << i << "] = " << detail::net_name('p', c.node(i)) << " ^ "
          << detail::net_name('g', carry) << ";\n";
    }
    v << "  assign cout = " << detail::net_name('g', c.node(*c.output_node(n - 1))) << ";\n";
    v << "endmodule\n\n";

    v << "module prefix_cell (\n"
      << "  input  wire g_hi,\n"
      << "  input  wire p_hi,\n"
      << "  input  wire g_lo,\n"
      << "  input  wire p_lo,\n"
      << "  output wire g_out,\n"
      << "  output wire p_out\n"
      << ");\n"
      << "  assign g_out = g_hi | (p_hi & g_lo);\n"
      << "  assign p_out = p_hi & p_lo;\n"
      << "endmodule\n";
    return v.str();
}

/// Emits a Graphviz digraph: square input nodes, circular prefix nodes,
/// output nodes (range starting at bit 0) in red, one rank per level,
/// labels showing the bit ranges.
inline std::string emit_dot(const PrefixCircuit& c) {
    std::ostringstream d;
    d << "digraph prefix_circuit {\n"
      << "  rankdir=TB;\n"
      << "  node [fontsize=10];\n";
    int max_level = c.metrics().delay;
    for (const NodeRecord& n : c.nodes()) {
        d << "  n" << n.id << " [shape=" << (n.is_input() ? "box" : "circle") << ", label=\"" << n.id
          << "\\n[" << n.range.lo << ":" << n.range.hi << "]\"";
        if (n.range.lo == 0 && n.range.hi < c.width())
            d << ", color=red, fontcolor=red";
        d << "];\n";
    }
    for (int level = 1; level <= max_level; ++level) {
        std::set<int> at_level;
        for (const NodeRecord& n : c.nodes())
            if (n.level == level)
                at_level.insert(n.id);
        if (at_level.empty())
            continue;
        d << "  { rank=same;";
        for (int id : at_level)
            d << " n" << id << ";";
        d << " }\n";
    }
    for (const NodeRecord& n : c.nodes()) {
        if (n.is_input())
            continue;
        d << "  n" << n.left << " -> n" << n.id << ";\n";
        d << "  n" << n.right << " -> n" << n.id << ";\n";
    }
    d << "}\n";
    return d.str();
}

} // namespace prefixsyn
