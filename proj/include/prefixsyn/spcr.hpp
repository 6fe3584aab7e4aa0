#pragma once

/// @file spcr.hpp
/// @brief The SPCR text format: one line per node carrying its index,
///        predecessors, bit range and bounds (plus the node level in the
///        Delay-SPCR variant). Also the tolerant candidate extractor for
///        proposer responses and the pruner that filters them.
///
/// Line grammar (LF line endings, UTF-8):
///   <idx>: connectedNodes=(<l>,<r>), range=[<lo>:<hi>], left_bound=<lo>, right_bound=<hi>
/// with an optional trailing `, level=<k>`. Input nodes serialize their
/// predecessors as (None,None).

#include "prefixsyn/circuit.hpp"

#include <cctype>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace prefixsyn {

enum class SpcrVariant { Plain, WithDelay };

/// Serialized circuit: one line per node in index order.
struct SpcrDocument {
    std::vector<std::string> lines;
    SpcrVariant variant = SpcrVariant::Plain;

    std::string text() const {
        std::string out;
        for (const std::string& line : lines) {
            out += line;
            out += '\n';
        }
        return out;
    }
};

inline std::string spcr_line(const NodeRecord& n, SpcrVariant variant) {
    std::string line = std::to_string(n.id) + ": connectedNodes=";
    if (n.is_input())
        line += "(None,None)";
    else
        line += "(" + std::to_string(n.left) + "," + std::to_string(n.right) + ")";
    line += ", range=[" + std::to_string(n.range.lo) + ":" + std::to_string(n.range.hi) + "]";
    line += ", left_bound=" + std::to_string(n.range.lo);
    line += ", right_bound=" + std::to_string(n.range.hi);
    if (variant == SpcrVariant::WithDelay)
        line += ", level=" + std::to_string(n.level);
    return line;
}

inline SpcrDocument serialize(const PrefixCircuit& c, SpcrVariant variant = SpcrVariant::Plain) {
    SpcrDocument doc;
    doc.variant = variant;
    doc.lines.reserve(c.nodes().size());
    for (const NodeRecord& n : c.nodes())
        doc.lines.push_back(spcr_line(n, variant));
    return doc;
}

inline std::string to_spcr(const PrefixCircuit& c, SpcrVariant variant = SpcrVariant::Plain) {
    return serialize(c, variant).text();
}

struct ParsedSpcr {
    PrefixCircuit circuit;
    SpcrVariant variant = SpcrVariant::Plain;
};

namespace detail {

inline const std::regex& spcr_line_regex() {
    static const std::regex re(
        R"(^\s*(\d+)\s*:\s*connectedNodes\s*=\s*\(\s*(None|\d+)\s*,\s*(None|\d+)\s*\)\s*,)"
        R"(\s*range\s*=\s*\[\s*(\d+)\s*:\s*(\d+)\s*\]\s*,)"
        R"(\s*left_bound\s*=\s*(\d+)\s*,\s*right_bound\s*=\s*(\d+)\s*)"
        R"((?:,\s*level\s*=\s*(\d+)\s*)?$)");
    return re;
}

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string line(text.substr(start, end - start));
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(std::move(line));
        if (end == text.size())
            break;
        start = end + 1;
    }
    return lines;
}

inline bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

} // namespace detail

/// Parses SPCR text back into a circuit. Ranges and levels are recomputed
/// from the predecessors; lines whose claimed values contradict the
/// recomputation are rejected. Node indices must be dense from 0 with all
/// input nodes first.
inline ParsedSpcr parse(const std::string& text) {
    std::vector<std::pair<int, std::smatch>> rows; // line number, match
    auto lines = detail::split_lines(text);
    for (size_t i = 0; i < lines.size(); ++i) {
        if (detail::is_blank(lines[i]))
            continue;
        std::smatch m;
        if (!std::regex_match(lines[i], m, detail::spcr_line_regex()))
            throw Error(Errc::ParseError, "line " + std::to_string(i + 1) + ": not an SPCR line: \"" +
                                              lines[i] + "\"");
        rows.emplace_back(static_cast<int>(i + 1), m);
    }
    if (rows.empty())
        throw Error(Errc::EmptyDocument, "no SPCR lines in document");

    // count leading input lines to learn the width
    int width = 0;
    for (const auto& [lineno, m] : rows) {
        if (m[2] == "None" || m[3] == "None") {
            if ((m[2] == "None") != (m[3] == "None"))
                throw Error(Errc::ParseError,
                            "line " + std::to_string(lineno) + ": half-specified input node");
            ++width;
        } else {
            break;
        }
    }
    if (width < 2)
        throw Error(Errc::InvalidWidth,
                    "document declares " + std::to_string(width) + " input node(s); need at least 2");

    bool any_level = false, all_level = true;
    for (const auto& [lineno, m] : rows) {
        if (m[8].matched)
            any_level = true;
        else
            all_level = false;
    }
    if (any_level && !all_level)
        throw Error(Errc::ParseError, "document mixes plain and level-annotated lines");

    PrefixCircuit circuit(width);
    int expected_index = 0;
    for (const auto& [lineno, m] : rows) {
        const std::string where = "line " + std::to_string(lineno) + ": ";
        int idx = std::stoi(m[1]);
        if (idx != expected_index)
            throw Error(Errc::ParseError, where + "expected node index " +
                                              std::to_string(expected_index) + ", found " +
                                              std::to_string(idx));
        ++expected_index;

        BitRange claimed{std::stoi(m[4]), std::stoi(m[5])};
        int left_bound = std::stoi(m[6]);
        int right_bound = std::stoi(m[7]);
        if (claimed.lo != left_bound || claimed.hi != right_bound)
            throw Error(Errc::ClaimMismatch, where + "range and bounds fields disagree");

        bool is_input_line = (m[2] == "None");
        if (is_input_line) {
            if (idx >= width)
                throw Error(Errc::ParseError, where + "input node after prefix nodes");
            if (claimed != BitRange{idx, idx})
                throw Error(Errc::ClaimMismatch, where + "input node " + std::to_string(idx) +
                                                     " must have range [" + std::to_string(idx) +
                                                     ":" + std::to_string(idx) + "]");
            if (m[8].matched && std::stoi(m[8]) != 1)
                throw Error(Errc::ClaimMismatch, where + "input nodes sit at level 1");
            continue;
        }

        int left = std::stoi(m[2]);
        int right = std::stoi(m[3]);
        if (left >= idx || right >= idx)
            throw Error(Errc::MissingNode,
                        where + "predecessors must be earlier-indexed nodes");
        if (circuit.find_pair(left, right))
            throw Error(Errc::ParseError, where + "duplicate (left,right) pair");
        int got;
        try {
            got = circuit.add_prefix_node(left, right);
        } catch (const Error& e) {
            throw Error(e.code(), where + e.what());
        }
        const NodeRecord& n = circuit.node(got);
        if (n.range != claimed)
            throw Error(Errc::ClaimMismatch,
                        where + "claimed range [" + std::to_string(claimed.lo) + ":" +
                            std::to_string(claimed.hi) + "] but predecessors span [" +
                            std::to_string(n.range.lo) + ":" + std::to_string(n.range.hi) + "]");
        if (m[8].matched && std::stoi(m[8]) != n.level)
            throw Error(Errc::ClaimMismatch, where + "claimed level " + m[8].str() +
                                                 " but recomputed level is " +
                                                 std::to_string(n.level));
    }
    return ParsedSpcr{std::move(circuit), any_level ? SpcrVariant::WithDelay : SpcrVariant::Plain};
}

/// A node addition proposed by some proposer, before validation. Claimed
/// fields are advisory; the pruner recomputes everything it trusts.
struct CandidateNode {
    int left = -1;
    int right = -1;
    std::optional<int> claimed_index;
    std::optional<BitRange> claimed_range;
    std::optional<int> claimed_level;
    std::string source_line;
    bool well_formed = false;
};

enum class RejectReason {
    Eq3Violation,       // predecessor ranges are not adjacent
    UnknownPredecessor, // reference to a node that does not exist
    Duplicate,          // (left,right) pair already present
    DelayBoundExceeded, // recomputed level above the delay bound
    AreaBoundExceeded,  // accepting would push the node count above the bound
    Unparseable,        // SPCR-shaped line that does not parse into a candidate
};

inline const char* reject_reason_name(RejectReason r) {
    switch (r) {
    case RejectReason::Eq3Violation: return "not-adjacent";
    case RejectReason::UnknownPredecessor: return "unknown-predecessor";
    case RejectReason::Duplicate: return "duplicate";
    case RejectReason::DelayBoundExceeded: return "delay-bound-exceeded";
    case RejectReason::AreaBoundExceeded: return "area-bound-exceeded";
    case RejectReason::Unparseable: return "unparseable";
    }
    return "unknown";
}

/// Result of pruning a candidate batch. Accepted candidates carry resolved
/// predecessor indices and recomputed range/level, in an order that applies
/// cleanly through add_prefix_node.
struct PruneReport {
    std::vector<CandidateNode> accepted;
    std::vector<std::pair<CandidateNode, RejectReason>> rejected;
};

/// Scans free-form proposer output for SPCR-shaped lines. Prose, code fences
/// and blank lines are ignored; echoed input-node lines are skipped. Lines
/// that mention connectedNodes but do not carry a usable (int,int) pair come
/// back ill-formed so the pruner can report them as unparseable.
inline std::vector<CandidateNode> extract_candidates(const std::string& response_text) {
    static const std::regex pair_re(R"(connectedNodes\s*=?\s*\(\s*(\d+)\s*,\s*(\d+)\s*\))");
    static const std::regex none_re(R"(connectedNodes\s*=?\s*\(\s*None\s*,\s*None\s*\))");
    static const std::regex index_re(R"(^\s*[`*\->\s]*(\d+)\s*:)");
    static const std::regex range_re(R"(range\s*=\s*\[\s*(\d+)\s*:\s*(\d+)\s*\])");
    static const std::regex level_re(R"(level\s*=\s*(\d+))");

    std::vector<CandidateNode> candidates;
    for (const std::string& line : detail::split_lines(response_text)) {
        if (line.find("connectedNodes") == std::string::npos)
            continue;
        if (std::regex_search(line, none_re))
            continue; // echoed input node, not a proposal
        CandidateNode cand;
        cand.source_line = line;
        std::smatch m;
        if (std::regex_search(line, m, pair_re)) {
            cand.left = std::stoi(m[1]);
            cand.right = std::stoi(m[2]);
            cand.well_formed = cand.left != cand.right;
        }
        if (std::regex_search(line, m, index_re))
            cand.claimed_index = std::stoi(m[1]);
        if (std::regex_search(line, m, range_re))
            cand.claimed_range = BitRange{std::stoi(m[1]), std::stoi(m[2])};
        if (std::regex_search(line, m, level_re))
            cand.claimed_level = std::stoi(m[1]);
        candidates.push_back(std::move(cand));
    }
    return candidates;
}

/// Filters a candidate batch against circuit `c`. Candidates are applied
/// left to right on a scratch copy, so later candidates may reference
/// earlier accepted ones by their claimed index; claimed indices are
/// remapped to the actually assigned ones (the remap wins over a collision
/// with a pre-existing index, since batch-local numbering is what proposers
/// see). Every acceptance decision uses recomputed ranges and levels only.
inline PruneReport prune(const PrefixCircuit& c, const std::vector<CandidateNode>& candidates,
                         std::optional<int> delay_bound = std::nullopt,
                         std::optional<int> area_bound = std::nullopt) {
    PruneReport report;
    PrefixCircuit scratch = c;
    std::map<int, int> claimed_to_actual;

    auto resolve = [&](int ref) -> std::optional<int> {
        if (auto it = claimed_to_actual.find(ref); it != claimed_to_actual.end())
            return it->second;
        if (ref >= 0 && ref < scratch.node_count())
            return ref;
        return std::nullopt;
    };

    for (const CandidateNode& cand : candidates) {
        if (!cand.well_formed) {
            report.rejected.emplace_back(cand, RejectReason::Unparseable);
            continue;
        }
        auto left = resolve(cand.left);
        auto right = resolve(cand.right);
        if (!left || !right) {
            report.rejected.emplace_back(cand, RejectReason::UnknownPredecessor);
            continue;
        }
        CandidateNode resolved = cand;
        resolved.left = *left;
        resolved.right = *right;
        const NodeRecord& l = scratch.node(*left);
        const NodeRecord& r = scratch.node(*right);
        if (r.range.lo != l.range.hi + 1) {
            report.rejected.emplace_back(resolved, RejectReason::Eq3Violation);
            continue;
        }
        if (scratch.find_pair(*left, *right)) {
            report.rejected.emplace_back(resolved, RejectReason::Duplicate);
            continue;
        }
        int level = std::max(l.level, r.level) + 1;
        if (delay_bound && level > *delay_bound) {
            report.rejected.emplace_back(resolved, RejectReason::DelayBoundExceeded);
            continue;
        }
        if (area_bound && scratch.node_count() + 1 > *area_bound) {
            report.rejected.emplace_back(resolved, RejectReason::AreaBoundExceeded);
            continue;
        }
        int assigned = scratch.add_prefix_node(*left, *right);
        if (cand.claimed_index)
            claimed_to_actual[*cand.claimed_index] = assigned;

        resolved.claimed_index = assigned;
        resolved.claimed_range = scratch.node(assigned).range;
        resolved.claimed_level = level;
        report.accepted.push_back(std::move(resolved));
    }
    return report;
}

/// Applies the accepted candidates of a prune report to `c` in order.
inline void apply_accepted(PrefixCircuit& c, const PruneReport& report) {
    for (const CandidateNode& cand : report.accepted)
        c.add_prefix_node(cand.left, cand.right);
}

} // namespace prefixsyn
