#include "prefixsyn/dse.hpp"

#include "support/builders.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

using namespace prefixsyn;
using namespace prefixsyn::testsupport;

namespace {

// O(m^2) reference: repeatedly peel the non-dominated set
std::vector<std::vector<size_t>> brute_force_fronts(const std::vector<Metrics>& items) {
    auto dominates = [](const Metrics& x, const Metrics& y) {
        return x.area <= y.area && x.delay <= y.delay && (x.area < y.area || x.delay < y.delay);
    };
    std::vector<std::vector<size_t>> fronts;
    std::vector<bool> assigned(items.size(), false);
    size_t left = items.size();
    while (left > 0) {
        std::vector<size_t> front;
        for (size_t i = 0; i < items.size(); ++i) {
            if (assigned[i])
                continue;
            bool dominated = false;
            for (size_t j = 0; j < items.size(); ++j)
                if (!assigned[j] && j != i && dominates(items[j], items[i]))
                    dominated = true;
            if (!dominated)
                front.push_back(i);
        }
        for (size_t i : front)
            assigned[i] = true;
        left -= front.size();
        fronts.push_back(std::move(front));
    }
    return fronts;
}

// proposer that replays a fixed list of response texts, then stalls
Proposer scripted_proposer(std::vector<std::string> responses) {
    auto state = std::make_shared<size_t>(0);
    auto list = std::make_shared<std::vector<std::string>>(std::move(responses));
    return [state, list](const ProposerContext&) -> std::string {
        if (*state >= list->size())
            return "nothing further to suggest";
        return (*list)[(*state)++];
    };
}

} // namespace

TEST_CASE("non_dominated_sort splits the published metric triple") {
    std::vector<Metrics> items = {{20, 4}, {19, 5}, {25, 4}};
    auto fronts = non_dominated_sort(items);
    REQUIRE(fronts.size() == 2);
    REQUIRE(fronts[0] == std::vector<size_t>{1, 0}); // ascending area within the front
    REQUIRE(fronts[1] == std::vector<size_t>{2});

    REQUIRE(non_dominated_sort({{10, 3}}).size() == 1);
    REQUIRE(non_dominated_sort({}).empty());

    // a fully dominated chain: three fronts of one
    auto chain = non_dominated_sort({{20, 4}, {18, 4}, {19, 4}});
    REQUIRE(chain.size() == 3);
    REQUIRE(chain[0] == std::vector<size_t>{1});
    REQUIRE(chain[1] == std::vector<size_t>{2});
    REQUIRE(chain[2] == std::vector<size_t>{0});
}

TEST_CASE("non_dominated_sort agrees with the brute-force oracle") {
    std::mt19937 rng(31337);
    for (int round = 0; round < 500; ++round) {
        size_t m = std::uniform_int_distribution<size_t>(1, 64)(rng);
        std::vector<Metrics> items;
        for (size_t i = 0; i < m; ++i)
            items.push_back(Metrics{std::uniform_int_distribution<int>(8, 40)(rng),
                                    std::uniform_int_distribution<int>(2, 10)(rng)});
        auto got = non_dominated_sort(items);
        auto expected = brute_force_fronts(items);
        REQUIRE(got.size() == expected.size());
        for (size_t f = 0; f < got.size(); ++f) {
            auto a = got[f];
            auto b = expected[f];
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            REQUIRE(a == b);
        }
        // within-front ordering: ascending area, then delay, then insertion
        for (const auto& front : got)
            for (size_t i = 1; i < front.size(); ++i) {
                const Metrics &prev = items[front[i - 1]], &cur = items[front[i]];
                bool ordered = prev.area < cur.area ||
                               (prev.area == cur.area && prev.delay < cur.delay) ||
                               (prev.area == cur.area && prev.delay == cur.delay &&
                                front[i - 1] < front[i]);
                REQUIRE(ordered);
            }
    }
}

TEST_CASE("pool insert validates, dedups and enforces the constraint") {
    CircuitPool pool(DseMode::DelayLimited, 4);

    REQUIRE(pool.insert(kogge_stone(8)) == PoolOutcome::Inserted);
    REQUIRE(pool.size() == 1);
    REQUIRE(pool.fronts().size() == 1);

    SECTION("structural duplicate is skipped") {
        REQUIRE(pool.insert(kogge_stone(8)) == PoolOutcome::DuplicateSkipped);
        REQUIRE(pool.size() == 1);
    }

    SECTION("delay constraint") {
        REQUIRE(pool.insert(brent_kung(8)) == PoolOutcome::RejectedConstraint); // delay 5 > 4
        REQUIRE(pool.insert(sklansky(8)) == PoolOutcome::Inserted);
        REQUIRE(pool.best().metrics.area == 20);
    }

    SECTION("partial circuits are rejected") {
        REQUIRE(pool.insert(PrefixCircuit(8)) == PoolOutcome::RejectedConstraint);
    }

    SECTION("area-limited pool enforces area") {
        CircuitPool area_pool(DseMode::AreaLimited, 20);
        REQUIRE(area_pool.insert(kogge_stone(8)) == PoolOutcome::RejectedConstraint); // 25 > 20
        REQUIRE(area_pool.insert(brent_kung(8)) == PoolOutcome::Inserted);            // 19
    }

    SECTION("functionally broken circuits never enter the pool") {
        PrefixCircuit good = sklansky(8);
        std::vector<NodeRecord> nodes = good.nodes();
        for (NodeRecord& n : nodes)
            if (!n.is_input() && n.range == BitRange{0, 7}) {
                std::swap(n.left, n.right);
                break;
            }
        PrefixCircuit mutant = PrefixCircuit::from_nodes_unchecked(8, std::move(nodes));
        REQUIRE(pool.insert(mutant) == PoolOutcome::RejectedConstraint);
    }
}

TEST_CASE("pool top_k walks fronts in order") {
    CircuitPool pool;
    REQUIRE(pool.insert(kogge_stone(8)) == PoolOutcome::Inserted);  // (25,4)
    REQUIRE(pool.insert(sklansky(8)) == PoolOutcome::Inserted);     // (20,4)
    REQUIRE(pool.insert(brent_kung(8)) == PoolOutcome::Inserted);   // (19,5)

    auto digest = pool.top_k(10);
    REQUIRE(digest.size() == 3); // fewer entries than k
    REQUIRE(digest[0].area == 19);
    REQUIRE(digest[1].area == 20);
    REQUIRE(digest[2].area == 25);

    auto top2 = pool.top_k(2);
    REQUIRE(top2.size() == 2);
    REQUIRE(top2[0].area == 19); // ascending area within front 0
    REQUIRE(top2[1].area == 20);

    auto top1 = pool.top_k(1);
    REQUIRE(top1.size() == 1);
    REQUIRE(top1[0].area == 19);

    REQUIRE_THROWS_AS(pool.top_k(0), Error);

    SECTION("delay-limited pools serialize the digest with levels") {
        CircuitPool bounded(DseMode::DelayLimited, 5);
        bounded.insert(kogge_stone(8));
        REQUIRE(bounded.top_k(1)[0].spcr.find("level=") != std::string::npos);
        REQUIRE(pool.top_k(1)[0].spcr.find("level=") == std::string::npos);
    }
}

TEST_CASE("synthesize_valid completes circuits") {
    SECTION("offline proposer from scratch") {
        PrefixCircuit c = synthesize_valid(PrefixCircuit(4), offline_proposer(), 8);
        REQUIRE(c.is_valid());
    }

    SECTION("already-valid start returns unchanged in zero rounds") {
        SynthesisOptions options;
        SynthesisResult r = synthesize_valid_ex(example_circuit_9(), offline_proposer(), options);
        REQUIRE(r.rounds_used == 0);
        REQUIRE(r.circuit.canonical_key() == example_circuit_9().canonical_key());
    }

    SECTION("pruned bad response, then corrected response") {
        // round 1 proposes the non-adjacent (4,3); round 2 fixes it
        Proposer proposer = scripted_proposer({
            "6: connectedNodes=(4,3), range=[0:3], left_bound=0, right_bound=3\n",
            "6: connectedNodes=(4,2), range=[0:2], left_bound=0, right_bound=2\n"
            "7: connectedNodes=(6,3), range=[0:3], left_bound=0, right_bound=3\n",
        });
        SynthesisOptions options;
        SynthesisResult r = synthesize_valid_ex(partial_circuit_fig3(), proposer, options);
        REQUIRE(r.circuit.is_valid());
        REQUIRE_FALSE(r.fallback_used);
        REQUIRE(r.candidates_rejected == 1);
        // the pruned pair must not be in the circuit
        for (const NodeRecord& n : r.circuit.nodes())
            REQUIRE_FALSE((n.left == 4 && n.right == 3));
    }

    SECTION("stalling proposer falls back to offline completion") {
        Proposer stall = scripted_proposer({});
        SynthesisOptions options;
        options.stall_cap = 3;
        SynthesisResult r = synthesize_valid_ex(PrefixCircuit(8), stall, options);
        REQUIRE(r.circuit.is_valid());
        REQUIRE(r.fallback_used);
        REQUIRE(r.rounds_used == 3);
    }

    SECTION("throwing proposer falls back after the failure cap") {
        Proposer broken = [](const ProposerContext&) -> std::string {
            throw Error(Errc::EndpointTimeout, "down");
        };
        SynthesisOptions options;
        options.failure_cap = 2;
        options.delay_bound = 4;
        options.mode = ProposerMode::DseAreaMin;
        SynthesisResult r = synthesize_valid_ex(PrefixCircuit(8), broken, options);
        REQUIRE(r.circuit.is_valid());
        REQUIRE(r.circuit.metrics().delay <= 4);
        REQUIRE(r.fallback_used);
    }

    SECTION("infeasible delay bound fails upfront") {
        SynthesisOptions options;
        options.delay_bound = 3;
        REQUIRE_THROWS_MATCHES(synthesize_valid_ex(PrefixCircuit(8), offline_proposer(), options),
                               Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                                   return e.code() == Errc::InfeasibleDelay;
                               }));
    }
}

TEST_CASE("dse_run explores under a delay bound") {
    DseConfig cfg;
    cfg.width = 8;
    cfg.mode = DseMode::DelayLimited;
    cfg.bound = 4;
    cfg.iteration_bound = 20;

    DseResult result = dse_run(cfg);
    REQUIRE(result.log.size() == 20);
    REQUIRE_FALSE(result.pool.empty());
    for (const CircuitPool::Entry& e : result.pool.entries()) {
        REQUIRE(e.circuit.is_valid());
        REQUIRE(e.metrics.delay <= 4);
        REQUIRE(e.metrics.area >= area_lower_bound(8, 4));
        REQUIRE(e.metrics.area <= 25); // never worse than the seed
    }

    SECTION("deterministic across runs") {
        DseResult again = dse_run(cfg);
        REQUIRE(again.pool.size() == result.pool.size());
        for (size_t i = 0; i < result.pool.size(); ++i)
            REQUIRE(again.pool.entries()[i].key == result.pool.entries()[i].key);
        REQUIRE(again.log.size() == result.log.size());
        for (size_t i = 0; i < result.log.size(); ++i) {
            REQUIRE(again.log[i].key == result.log[i].key);
            REQUIRE(again.log[i].outcome == result.log[i].outcome);
        }
    }
}

TEST_CASE("dse_run single iteration logs exactly once") {
    DseConfig cfg;
    cfg.width = 8;
    cfg.mode = DseMode::DelayLimited;
    cfg.bound = 4;
    cfg.iteration_bound = 1;
    DseResult result = dse_run(cfg);
    REQUIRE(result.log.size() == 1);
    REQUIRE(result.pool.size() >= 1);
}

TEST_CASE("dse_run hypervolume never decreases") {
    // replay a sequence of hand-built circuits of varying quality
    std::vector<std::string> responses;
    auto as_response = [](const PrefixCircuit& c) {
        std::string lines;
        for (const NodeRecord& n : c.nodes())
            if (!n.is_input())
                lines += spcr_line(n, SpcrVariant::WithDelay) + "\n";
        return lines;
    };
    responses.push_back(as_response(sklansky(8)));    // improves on the seed
    responses.push_back(as_response(kogge_stone(8))); // duplicate of seed
    responses.push_back(as_response(sklansky(8)));    // duplicate

    DseConfig cfg;
    cfg.width = 8;
    cfg.mode = DseMode::DelayLimited;
    cfg.bound = 4;
    cfg.iteration_bound = 4;
    cfg.proposer = scripted_proposer(responses);

    Metrics seed = kogge_stone(8).metrics();
    Metrics reference{seed.area + 1, seed.delay + 1};

    // rebuild the run step by step to watch the hypervolume
    CircuitPool pool(DseMode::DelayLimited, 4);
    pool.insert(kogge_stone(8));
    double volume = pool.hypervolume(reference);
    DseResult result = dse_run(cfg);
    for (const IterationRecord& record : result.log) {
        (void)record;
    }
    // final pool dominates the seed-only pool
    REQUIRE(result.pool.hypervolume(reference) >= volume);
    REQUIRE(result.pool.best().metrics.area == 20);

    // front-0 entries are never dominated by any pool entry
    for (size_t i : result.pool.fronts()[0]) {
        const Metrics& m = result.pool.entries()[i].metrics;
        for (const CircuitPool::Entry& e : result.pool.entries()) {
            bool dominates = e.metrics.area <= m.area && e.metrics.delay <= m.delay &&
                             (e.metrics.area < m.area || e.metrics.delay < m.delay);
            REQUIRE_FALSE(dominates);
        }
    }
}

TEST_CASE("dse_run in area-limited mode") {
    DseConfig cfg;
    cfg.width = 8;
    cfg.mode = DseMode::AreaLimited;
    cfg.bound = 25;
    cfg.iteration_bound = 5;
    DseResult result = dse_run(cfg);
    for (const CircuitPool::Entry& e : result.pool.entries())
        REQUIRE(e.metrics.area <= 25);
    REQUIRE_FALSE(result.pool.empty());

    SECTION("bound below the serial minimum is infeasible") {
        cfg.bound = 2 * 8 - 2;
        REQUIRE_THROWS_MATCHES(dse_run(cfg), Error,
                               Catch::Matchers::Predicate<Error>([](const Error& e) {
                                   return e.code() == Errc::InfeasibleArea;
                               }));
    }
}

TEST_CASE("pool persistence reproduces identical fronts") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "prefixsyn_pool_test";
    fs::remove_all(dir);

    DseConfig cfg;
    cfg.width = 8;
    cfg.mode = DseMode::DelayLimited;
    cfg.bound = 4;
    cfg.iteration_bound = 6;
    DseResult result = dse_run(cfg);
    save_pool(result.pool, dir);

    CircuitPool reloaded = load_pool(dir);
    REQUIRE(reloaded.size() == result.pool.size());
    REQUIRE(reloaded.fronts() == result.pool.fronts());
    for (size_t i = 0; i < reloaded.size(); ++i) {
        REQUIRE(reloaded.entries()[i].key == result.pool.entries()[i].key);
        REQUIRE(reloaded.entries()[i].metrics == result.pool.entries()[i].metrics);
        REQUIRE(reloaded.entries()[i].iteration_found == result.pool.entries()[i].iteration_found);
    }

    SECTION("missing directory") {
        REQUIRE_THROWS_MATCHES(load_pool(dir / "nope"), Error,
                               Catch::Matchers::Predicate<Error>([](const Error& e) {
                                   return e.code() == Errc::MissingFile;
                               }));
    }

    fs::remove_all(dir);
}
