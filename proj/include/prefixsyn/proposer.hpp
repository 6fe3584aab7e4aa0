#pragma once

/// @file proposer.hpp
/// @brief Candidate sources for the synthesis loop: the three prompt
///        builders and the deterministic offline proposer used for testing,
///        baselines and fallback.

#include "prefixsyn/circuit.hpp"
#include "prefixsyn/prompts.hpp"
#include "prefixsyn/spcr.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prefixsyn {

enum class ProposerMode { PlainSynthesis, DseAreaMin, DseDelayMin };

/// One pool entry as shown to the proposer: serialized circuit plus metrics.
struct PoolDigestEntry {
    std::string spcr;
    int area = 0;
    int delay = 0;
};

/// Everything a proposer gets to see for one round.
struct ProposerContext {
    PrefixCircuit circuit;
    std::vector<BitRange> missing;
    std::optional<std::vector<PoolDigestEntry>> pool_digest;
    std::optional<int> delay_bound;
    std::optional<int> area_bound;
    ProposerMode mode = ProposerMode::PlainSynthesis;

    static ProposerContext for_circuit(PrefixCircuit c, ProposerMode mode = ProposerMode::PlainSynthesis) {
        ProposerContext ctx{std::move(c), {}, std::nullopt, std::nullopt, std::nullopt, mode};
        ctx.missing = ctx.circuit.missing_output_ranges();
        return ctx;
    }
};

/// A proposer maps a context to free-form response text containing SPCR
/// lines for the nodes it wants added.
using Proposer = std::function<std::string(const ProposerContext&)>;

namespace detail {

inline std::string format_ranges(const std::vector<BitRange>& ranges) {
    std::string out;
    for (const BitRange& r : ranges) {
        if (!out.empty())
            out += ", ";
        out += "[" + std::to_string(r.lo) + ":" + std::to_string(r.hi) + "]";
    }
    return out;
}

inline std::string format_pool_entries(const std::vector<PoolDigestEntry>& entries) {
    std::string out;
    for (size_t i = 0; i < entries.size(); ++i) {
        out += "Circuit " + std::to_string(i + 1) + " (area=" + std::to_string(entries[i].area) +
               ", delay=" + std::to_string(entries[i].delay) + "):\n";
        out += entries[i].spcr;
    }
    return out;
}

inline void check_infeasible_bound(int width, std::optional<int> delay_bound) {
    if (delay_bound && *delay_bound < ceil_log2(width) + 1)
        throw Error(Errc::InfeasibleDelay,
                    "delay bound " + std::to_string(*delay_bound) + " is unreachable for width " +
                        std::to_string(width));
}

} // namespace detail

/// Prompt for plain valid-circuit synthesis: the fixed template around the
/// current partial circuit's SPCR and its missing output ranges.
inline std::string build_spcr_prompt(const ProposerContext& ctx) {
    if (ctx.mode != ProposerMode::PlainSynthesis)
        throw Error(Errc::NothingToPropose, "plain synthesis prompt requested in DSE mode");
    if (ctx.missing.empty())
        throw Error(Errc::NothingToPropose, "circuit is already valid");
    bool with_delay = ctx.delay_bound.has_value();
    detail::check_infeasible_bound(ctx.circuit.width(), ctx.delay_bound);

    std::string prompt(prompts::kFormatRules);
    if (with_delay)
        prompt += prompts::replace_slot(std::string(prompts::kLevelRules), "delay_bound",
                                        std::to_string(*ctx.delay_bound));
    prompt += "\n";
    std::string task(prompts::kSynthesisTask);
    task = prompts::replace_slot(std::move(task), "n", std::to_string(ctx.circuit.width()));
    task = prompts::replace_slot(std::move(task), "spcr",
                                 to_spcr(ctx.circuit, with_delay ? SpcrVariant::WithDelay
                                                                 : SpcrVariant::Plain));
    task = prompts::replace_slot(std::move(task), "missing_ranges",
                                 detail::format_ranges(ctx.missing));
    prompt += task;
    return prompt;
}

/// Delay-limited DSE prompt: pool entries and the partial circuit in
/// Delay-SPCR, the bound stated, level derivation spelled out.
inline std::string build_delay_limited_prompt(const ProposerContext& ctx) {
    if (ctx.mode != ProposerMode::DseAreaMin || !ctx.delay_bound)
        throw Error(Errc::NothingToPropose,
                    "delay-limited prompt requires area-minimization mode with a delay bound");
    if (!ctx.pool_digest || ctx.pool_digest->empty())
        throw Error(Errc::EmptyPool, "DSE prompt requires a seeded circuit pool");
    if (ctx.missing.empty())
        throw Error(Errc::NothingToPropose, "circuit is already valid");
    detail::check_infeasible_bound(ctx.circuit.width(), ctx.delay_bound);

    std::string prompt = prompts::replace_slot(std::string(prompts::kDsePreamble), "n",
                                               std::to_string(ctx.circuit.width()));
    prompt = prompts::replace_slot(std::move(prompt), "pool_entries",
                                   detail::format_pool_entries(*ctx.pool_digest));
    prompt += prompts::replace_slot(std::string(prompts::kDseAreaGoal), "delay_bound",
                                    std::to_string(*ctx.delay_bound));
    prompt += "\n";
    prompt += prompts::kFormatRules;
    prompt += prompts::replace_slot(std::string(prompts::kLevelRules), "delay_bound",
                                    std::to_string(*ctx.delay_bound));
    prompt += "\n";
    std::string task(prompts::kSynthesisTask);
    task = prompts::replace_slot(std::move(task), "n", std::to_string(ctx.circuit.width()));
    task = prompts::replace_slot(std::move(task), "spcr", to_spcr(ctx.circuit, SpcrVariant::WithDelay));
    task = prompts::replace_slot(std::move(task), "missing_ranges",
                                 detail::format_ranges(ctx.missing));
    prompt += task;
    return prompt;
}

/// DSE prompt dispatch: pool entries plus the synthesis prompt of the
/// current partial circuit, in the flavor the mode calls for.
inline std::string build_dse_prompt(const ProposerContext& ctx) {
    if (ctx.mode == ProposerMode::DseAreaMin)
        return build_delay_limited_prompt(ctx);
    if (ctx.mode != ProposerMode::DseDelayMin)
        throw Error(Errc::NothingToPropose, "DSE prompt requested outside a DSE mode");
    if (!ctx.pool_digest || ctx.pool_digest->empty())
        throw Error(Errc::EmptyPool, "DSE prompt requires a seeded circuit pool");
    if (ctx.missing.empty())
        throw Error(Errc::NothingToPropose, "circuit is already valid");

    std::string prompt = prompts::replace_slot(std::string(prompts::kDsePreamble), "n",
                                               std::to_string(ctx.circuit.width()));
    prompt = prompts::replace_slot(std::move(prompt), "pool_entries",
                                   detail::format_pool_entries(*ctx.pool_digest));
    if (ctx.area_bound)
        prompt += prompts::replace_slot(std::string(prompts::kDseDelayGoal), "area_bound",
                                        std::to_string(*ctx.area_bound));
    prompt += "\n";
    prompt += prompts::kFormatRules;
    prompt += "\n";
    std::string task(prompts::kSynthesisTask);
    task = prompts::replace_slot(std::move(task), "n", std::to_string(ctx.circuit.width()));
    task = prompts::replace_slot(std::move(task), "spcr", to_spcr(ctx.circuit, SpcrVariant::Plain));
    task = prompts::replace_slot(std::move(task), "missing_ranges",
                                 detail::format_ranges(ctx.missing));
    prompt += task;
    return prompt;
}

namespace detail {

/// Split planner for the offline proposer: cheapest achievable level for any
/// bit range, using existing nodes where they help and rebuilding where they
/// do not. Memoized over (lo, hi).
class SplitPlanner {
  public:
    explicit SplitPlanner(const PrefixCircuit& c) : circuit_(c) {
        for (const NodeRecord& n : c.nodes()) {
            auto [it, inserted] = best_existing_.try_emplace(key(n.range), n.id);
            if (!inserted && c.node(it->second).level > n.level)
                it->second = n.id;
        }
    }

    int level_needed(BitRange r) { return plan(r).level; }

    /// Emits SPCR lines (into `lines`) materializing a node covering r at the
    /// planned level on `scratch`, and returns its index.
    int materialize(BitRange r, PrefixCircuit& scratch, std::vector<std::string>& lines) {
        const Plan& p = plan(r);
        if (p.existing >= 0 && circuit_.node(p.existing).level == p.level)
            return p.existing;
        int left = materialize(BitRange{r.lo, p.split}, scratch, lines);
        int right = materialize(BitRange{p.split + 1, r.hi}, scratch, lines);
        if (auto existing = scratch.find_pair(left, right))
            return *existing;
        int idx = scratch.add_prefix_node(left, right);
        NodeRecord n = scratch.node(idx);
        lines.push_back(spcr_line(n, SpcrVariant::WithDelay));
        return idx;
    }

  private:
    struct Plan {
        int level = 0;
        int split = -1;    // best split point m: [lo:m] + [m+1:hi]
        int existing = -1; // node index when an existing node already achieves the level
    };

    static long key(BitRange r) { return static_cast<long>(r.lo) * 4096 + r.hi; }

    const Plan& plan(BitRange r) {
        auto it = memo_.find(key(r));
        if (it != memo_.end())
            return it->second;

        Plan best;
        best.level = std::numeric_limits<int>::max();
        if (auto e = best_existing_.find(key(r)); e != best_existing_.end()) {
            best.level = circuit_.node(e->second).level;
            best.existing = e->second;
        }
        if (r.lo < r.hi) {
            for (int m = r.lo; m < r.hi; ++m) {
                int lvl = std::max(plan(BitRange{r.lo, m}).level,
                                   plan(BitRange{m + 1, r.hi}).level) +
                          1;
                if (lvl < best.level) {
                    best.level = lvl;
                    best.split = m;
                    best.existing = -1;
                }
            }
        }
        return memo_.emplace(key(r), best).first->second;
    }

    const PrefixCircuit& circuit_;
    std::map<long, int> best_existing_;
    std::map<long, Plan> memo_;
};

} // namespace detail

/// Deterministic proposer. Targets the smallest missing output range [0:t]
/// each round. Without a delay bound it extends the longest existing output
/// node greedily (serial completion); under a delay bound it picks the split
/// minimizing the resulting level (ties to the smaller split point),
/// rebuilding intermediate ranges as needed. Always reduces the number of
/// missing ranges by at least one per round when the bound is feasible.
inline std::string offline_propose(const ProposerContext& ctx) {
    if (ctx.missing.empty())
        throw Error(Errc::NothingToPropose, "circuit is already valid");
    const PrefixCircuit& c = ctx.circuit;
    std::optional<int> bound = ctx.delay_bound;
    detail::check_infeasible_bound(c.width(), bound);

    int target = ctx.missing.front().hi;
    PrefixCircuit scratch = c;
    std::vector<std::string> lines;

    if (!bound) {
        // serial-style completion: longest existing [0:j], then cover
        // [j+1:target] from the longest existing runs
        int j = -1;
        for (const NodeRecord& n : c.nodes())
            if (n.range.lo == 0 && n.range.hi < target && n.range.hi > j)
                j = n.range.hi;
        int left = *c.output_node(j);
        int lo = j + 1;
        while (true) {
            // longest existing node starting at lo and ending at or below target
            int best = -1;
            for (const NodeRecord& n : scratch.nodes())
                if (n.range.lo == lo && n.range.hi <= target &&
                    (best < 0 || n.range.hi > scratch.node(best).range.hi))
                    best = n.id;
            int idx = scratch.add_prefix_node(left, best);
            if (idx == scratch.node_count() - 1)
                lines.push_back(spcr_line(scratch.node(idx), SpcrVariant::Plain));
            if (scratch.node(idx).range.hi == target)
                break;
            left = idx;
            lo = scratch.node(idx).range.hi + 1;
        }
    } else {
        detail::SplitPlanner planner(c);
        BitRange full{0, target};
        planner.materialize(full, scratch, lines);
    }

    std::string response;
    for (const std::string& line : lines)
        response += line + "\n";
    return response;
}

/// Proposer wrapper for offline use.
inline Proposer offline_proposer() {
    return [](const ProposerContext& ctx) { return offline_propose(ctx); };
}

} // namespace prefixsyn
