#pragma once

/// @file dse.hpp
/// @brief Iterative synthesis and design-space exploration: the checker/
///        pruner loop that drives a proposer to a valid circuit, the sorted
///        circuit pool with non-dominated fronts, and the DSE run loop.

#include "prefixsyn/baselines.hpp"
#include "prefixsyn/circuit.hpp"
#include "prefixsyn/proposer.hpp"
#include "prefixsyn/spcr.hpp"
#include "prefixsyn/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace prefixsyn {

/// Pareto fronts over (area, delay), both minimized. (a1,d1) dominates
/// (a2,d2) iff a1 <= a2, d1 <= d2 and at least one is strict. Front 0 is the
/// non-dominated set; front k is non-dominated once fronts < k are removed.
/// Within a front: ascending area, then ascending delay, then insertion order.
inline std::vector<std::vector<size_t>> non_dominated_sort(const std::vector<Metrics>& items) {
    auto dominates = [](const Metrics& x, const Metrics& y) {
        return x.area <= y.area && x.delay <= y.delay && (x.area < y.area || x.delay < y.delay);
    };
    std::vector<size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (items[a].area != items[b].area)
            return items[a].area < items[b].area;
        return items[a].delay < items[b].delay;
    });

    std::vector<std::vector<size_t>> fronts;
    std::vector<int> front_of(items.size(), -1);
    std::vector<size_t> remaining = order;
    while (!remaining.empty()) {
        std::vector<size_t> front, rest;
        for (size_t i : remaining) {
            bool dominated = std::any_of(remaining.begin(), remaining.end(), [&](size_t j) {
                return j != i && dominates(items[j], items[i]);
            });
            (dominated ? rest : front).push_back(i);
        }
        fronts.push_back(std::move(front));
        remaining = std::move(rest);
    }
    return fronts;
}

enum class PoolOutcome { Inserted, DuplicateSkipped, RejectedConstraint };

inline const char* pool_outcome_name(PoolOutcome o) {
    switch (o) {
    case PoolOutcome::Inserted: return "inserted";
    case PoolOutcome::DuplicateSkipped: return "duplicate-skipped";
    case PoolOutcome::RejectedConstraint: return "rejected-constraint";
    }
    return "unknown";
}

enum class DseMode { DelayLimited, AreaLimited };

/// Deduplicated archive of valid circuits ordered by non-dominated fronts.
/// Inserts re-sort; iteration follows front order.
class CircuitPool {
  public:
    struct Entry {
        PrefixCircuit circuit;
        Metrics metrics;
        std::string key;
        int iteration_found = 0;
    };

    CircuitPool() = default;
    CircuitPool(DseMode mode, int bound) : mode_(mode), bound_(bound) {}

    /// Validates, checks the mode constraint, dedups by canonical key and
    /// inserts. Every inserted circuit also passes a carry spot-check:
    /// exhaustive for widths up to 10, corner-plus-random above.
    PoolOutcome insert(const PrefixCircuit& c, int iteration = 0) {
        if (!c.is_valid())
            return PoolOutcome::RejectedConstraint;
        Metrics m = c.metrics();
        if (mode_ && *mode_ == DseMode::DelayLimited && m.delay > bound_)
            return PoolOutcome::RejectedConstraint;
        if (mode_ && *mode_ == DseMode::AreaLimited && m.area > bound_)
            return PoolOutcome::RejectedConstraint;
        std::string key = c.canonical_key();
        for (const Entry& e : entries_)
            if (e.key == key)
                return PoolOutcome::DuplicateSkipped;
        // carry spot-check; word-level evaluation covers widths up to 63
        if (c.width() <= 63 && !verify_adder(c, c.width() <= 10 ? 0 : 4096).ok)
            return PoolOutcome::RejectedConstraint;
        entries_.push_back(Entry{c, m, std::move(key), iteration});
        resort();
        return PoolOutcome::Inserted;
    }

    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Entries in front order (front 0 first, best area first within a front).
    const std::vector<Entry>& entries() const { return entries_; }

    const std::vector<std::vector<size_t>>& fronts() const { return fronts_; }

    const Entry& best() const {
        if (entries_.empty())
            throw Error(Errc::EmptyPool, "pool has no entries");
        return entries_.front();
    }

    /// The first k entries as prompt digest material. Delay-SPCR text in
    /// delay-limited mode, plain otherwise.
    std::vector<PoolDigestEntry> top_k(size_t k) const {
        if (k < 1)
            throw Error(Errc::InvalidArgument, "top_k needs k >= 1");
        std::vector<PoolDigestEntry> digest;
        SpcrVariant v = (mode_ && *mode_ == DseMode::DelayLimited) ? SpcrVariant::WithDelay
                                                                   : SpcrVariant::Plain;
        for (size_t i = 0; i < entries_.size() && i < k; ++i)
            digest.push_back(PoolDigestEntry{to_spcr(entries_[i].circuit, v),
                                             entries_[i].metrics.area, entries_[i].metrics.delay});
        return digest;
    }

    /// Area-delay hypervolume of front 0 relative to a reference point;
    /// grows monotonically as better circuits arrive.
    double hypervolume(Metrics reference) const {
        if (entries_.empty() || fronts_.empty())
            return 0.0;
        std::vector<Metrics> front;
        for (size_t i : fronts_[0])
            front.push_back(entries_[i].metrics);
        // front is already sorted by ascending area; delays descend along it
        double volume = 0.0;
        int prev_delay = reference.delay;
        for (const Metrics& m : front) {
            if (m.area >= reference.area || m.delay >= prev_delay)
                continue;
            volume += static_cast<double>(reference.area - m.area) *
                      static_cast<double>(prev_delay - m.delay);
            prev_delay = m.delay;
        }
        return volume;
    }

    std::optional<DseMode> mode() const { return mode_; }
    int bound() const { return bound_; }

  private:
    void resort() {
        std::vector<Metrics> metrics;
        metrics.reserve(entries_.size());
        for (const Entry& e : entries_)
            metrics.push_back(e.metrics);
        auto fronts = non_dominated_sort(metrics);
        std::vector<Entry> sorted;
        sorted.reserve(entries_.size());
        fronts_.clear();
        for (const auto& front : fronts) {
            std::vector<size_t> block(front.size());
            std::iota(block.begin(), block.end(), sorted.size());
            for (size_t i : front)
                sorted.push_back(std::move(entries_[i]));
            fronts_.push_back(std::move(block));
        }
        entries_ = std::move(sorted);
    }

    std::optional<DseMode> mode_;
    int bound_ = 0;
    std::vector<Entry> entries_;
    std::vector<std::vector<size_t>> fronts_;
};

/// Options for synthesize_valid beyond the basic signature.
struct SynthesisOptions {
    int max_rounds = 32;
    std::optional<int> delay_bound;
    std::optional<int> area_bound;
    ProposerMode mode = ProposerMode::PlainSynthesis;
    std::optional<std::vector<PoolDigestEntry>> pool_digest;
    int stall_cap = 5;          // consecutive zero-accepted rounds before fallback
    int failure_cap = 3;        // proposer exceptions before fallback
    bool allow_fallback = true; // when false, proposer failures propagate
};

struct SynthesisResult {
    PrefixCircuit circuit;
    int rounds_used = 0;
    bool fallback_used = false;
    int candidates_accepted = 0;
    int candidates_rejected = 0;
};

/// Checker/pruner loop: asks the proposer for nodes until the circuit is
/// valid. When the proposer stalls, keeps failing, or the round budget runs
/// out, the deterministic offline completer finishes the job, so the result
/// is always a valid circuit and new nodes always respect the delay bound.
inline SynthesisResult synthesize_valid_ex(PrefixCircuit start, const Proposer& proposer,
                                           const SynthesisOptions& options) {
    detail::check_infeasible_bound(start.width(), options.delay_bound);

    SynthesisResult result{std::move(start)};
    PrefixCircuit& circuit = result.circuit;
    int stalled = 0;
    int failures = 0;

    while (!circuit.is_valid() && result.rounds_used < options.max_rounds &&
           stalled < options.stall_cap && failures < options.failure_cap) {
        ProposerContext ctx = ProposerContext::for_circuit(circuit, options.mode);
        ctx.delay_bound = options.delay_bound;
        ctx.area_bound = options.area_bound;
        ctx.pool_digest = options.pool_digest;

        ++result.rounds_used;
        std::string response;
        try {
            response = proposer(ctx);
        } catch (const Error&) {
            if (!options.allow_fallback)
                throw;
            ++failures;
            continue;
        }
        PruneReport report =
            prune(circuit, extract_candidates(response), options.delay_bound, options.area_bound);
        apply_accepted(circuit, report);
        result.candidates_accepted += static_cast<int>(report.accepted.size());
        result.candidates_rejected += static_cast<int>(report.rejected.size());
        stalled = report.accepted.empty() ? stalled + 1 : 0;
    }

    // deterministic completion; each round covers at least one missing range
    if (!circuit.is_valid() && !options.allow_fallback)
        throw Error(Errc::EndpointTimeout,
                    "proposer did not complete the circuit and fallback is disabled");
    while (!circuit.is_valid()) {
        result.fallback_used = true;
        ProposerContext ctx = ProposerContext::for_circuit(circuit, options.mode);
        ctx.delay_bound = options.delay_bound;
        ctx.area_bound = options.area_bound;
        PruneReport report = prune(circuit, extract_candidates(offline_propose(ctx)),
                                   options.delay_bound, options.area_bound);
        if (report.accepted.empty())
            throw Error(Errc::InfeasibleArea,
                        "offline completion cannot finish within the bounds");
        apply_accepted(circuit, report);
    }
    return result;
}

/// Spec-shaped convenience wrapper.
inline PrefixCircuit synthesize_valid(const PrefixCircuit& start, const Proposer& proposer,
                                      int max_rounds, std::optional<int> delay_bound = std::nullopt) {
    SynthesisOptions options;
    options.max_rounds = max_rounds;
    options.delay_bound = delay_bound;
    return synthesize_valid_ex(start, proposer, options).circuit;
}

/// Configuration of one DSE run.
struct DseConfig {
    int width = 8;
    DseMode mode = DseMode::DelayLimited;
    int bound = 0;                  // delay bound or area bound, per mode
    int iteration_bound = 20;
    int pool_top_k = 10;
    std::vector<PrefixCircuit> seeds; // default: Kogge-Stone(width)
    Proposer proposer;                // default: offline
    int max_rounds_per_iteration = 32;
    int stall_cap = 5;
    int failure_cap = 3;
    bool allow_fallback = true;
};

struct IterationRecord {
    int iteration = 0;
    std::string key;
    Metrics metrics;
    PoolOutcome outcome = PoolOutcome::RejectedConstraint;
    int rounds_used = 0;
    bool fallback_used = false;
};

struct DseResult {
    CircuitPool pool;
    std::vector<IterationRecord> log;
};

/// The DSE loop: seed the pool, then per iteration grow a fresh partial
/// circuit to validity under the DSE prompt built from the current top-k,
/// evaluate it and insert it into the pool.
inline DseResult dse_run(const DseConfig& cfg) {
    if (cfg.iteration_bound < 1 || cfg.pool_top_k < 1)
        throw Error(Errc::InvalidArgument, "iteration_bound and pool_top_k must be at least 1");
    std::optional<int> delay_bound, area_bound;
    if (cfg.mode == DseMode::DelayLimited) {
        delay_bound = cfg.bound;
        detail::check_infeasible_bound(cfg.width, delay_bound);
    } else {
        area_bound = cfg.bound;
        if (cfg.bound < 2 * cfg.width - 1)
            throw Error(Errc::InfeasibleArea,
                        "area bound " + std::to_string(cfg.bound) + " is below the serial minimum " +
                            std::to_string(2 * cfg.width - 1));
    }

    DseResult result;
    result.pool = CircuitPool(cfg.mode, cfg.bound);
    if (cfg.seeds.empty()) {
        result.pool.insert(kogge_stone(cfg.width));
    } else {
        for (const PrefixCircuit& seed : cfg.seeds)
            result.pool.insert(seed);
    }
    if (result.pool.empty())
        throw Error(Errc::EmptyPool, "no seed circuit satisfies the constraint");

    Proposer proposer = cfg.proposer ? cfg.proposer : offline_proposer();

    for (int iter = 1; iter <= cfg.iteration_bound; ++iter) {
        SynthesisOptions options;
        options.max_rounds = cfg.max_rounds_per_iteration;
        options.delay_bound = delay_bound;
        options.area_bound = area_bound;
        options.mode =
            cfg.mode == DseMode::DelayLimited ? ProposerMode::DseAreaMin : ProposerMode::DseDelayMin;
        options.pool_digest = result.pool.top_k(static_cast<size_t>(cfg.pool_top_k));
        options.stall_cap = cfg.stall_cap;
        options.failure_cap = cfg.failure_cap;
        options.allow_fallback = cfg.allow_fallback;

        IterationRecord record;
        record.iteration = iter;
        try {
            SynthesisResult synth =
                synthesize_valid_ex(PrefixCircuit(cfg.width), proposer, options);
            record.key = synth.circuit.canonical_key();
            record.metrics = synth.circuit.metrics();
            record.rounds_used = synth.rounds_used;
            record.fallback_used = synth.fallback_used;
            record.outcome = result.pool.insert(synth.circuit, iter);
        } catch (const Error& e) {
            if (!cfg.allow_fallback &&
                (e.code() == Errc::AuthFailure || e.code() == Errc::EndpointTimeout ||
                 e.code() == Errc::MalformedReply))
                throw;
            // area-limited completions can be infeasible for one iteration;
            // the iteration still counts against the bound
            record.outcome = PoolOutcome::RejectedConstraint;
        }
        result.log.push_back(std::move(record));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Pool persistence: a directory of .spcr files plus an index.json mapping
// canonical keys to metrics and discovery iteration. Reload reproduces
// identical fronts.

inline void save_pool(const CircuitPool& pool, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error(Errc::IoError, "cannot create pool directory " + dir.string());
    nlohmann::json index = nlohmann::json::array();
    SpcrVariant v = (pool.mode() && *pool.mode() == DseMode::DelayLimited)
                        ? SpcrVariant::WithDelay
                        : SpcrVariant::Plain;
    for (size_t i = 0; i < pool.entries().size(); ++i) {
        const CircuitPool::Entry& e = pool.entries()[i];
        char name[32];
        std::snprintf(name, sizeof name, "entry_%04zu.spcr", i);
        std::ofstream out(dir / name, std::ios::binary);
        if (!out)
            throw Error(Errc::IoError, "cannot write " + (dir / name).string());
        out << to_spcr(e.circuit, v);
        index.push_back({{"file", name},
                         {"key", e.key},
                         {"area", e.metrics.area},
                         {"delay", e.metrics.delay},
                         {"iteration", e.iteration_found}});
    }
    nlohmann::json doc = {{"mode", pool.mode() ? (*pool.mode() == DseMode::DelayLimited
                                                      ? "delay-limited"
                                                      : "area-limited")
                                               : ""},
                          {"bound", pool.bound()},
                          {"entries", std::move(index)}};
    std::ofstream out(dir / "index.json", std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + (dir / "index.json").string());
    out << doc.dump(2) << "\n";
}

inline CircuitPool load_pool(const std::filesystem::path& dir) {
    std::ifstream in(dir / "index.json");
    if (!in)
        throw Error(Errc::MissingFile, "no pool index at " + (dir / "index.json").string());
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, true, true);
    CircuitPool pool;
    std::string mode = doc.value("mode", "");
    if (mode == "delay-limited")
        pool = CircuitPool(DseMode::DelayLimited, doc.at("bound").get<int>());
    else if (mode == "area-limited")
        pool = CircuitPool(DseMode::AreaLimited, doc.at("bound").get<int>());
    for (const auto& entry : doc.at("entries")) {
        std::ifstream spcr_in(dir / entry.at("file").get<std::string>());
        if (!spcr_in)
            throw Error(Errc::MissingFile,
                        "pool file " + entry.at("file").get<std::string>() + " is missing");
        std::string text((std::istreambuf_iterator<char>(spcr_in)),
                         std::istreambuf_iterator<char>());
        ParsedSpcr parsed = parse(text);
        if (parsed.circuit.canonical_key() != entry.at("key").get<std::string>())
            throw Error(Errc::ClaimMismatch,
                        "pool file " + entry.at("file").get<std::string>() +
                            " does not match its indexed canonical key");
        pool.insert(parsed.circuit, entry.value("iteration", 0));
    }
    return pool;
}

} // namespace prefixsyn
