// prefixsyn: generate, synthesize, explore, check and export prefix circuits.

#define PREFIXSYN_ENABLE_LIVE_TRANSPORT

#include "prefixsyn/baselines.hpp"
#include "prefixsyn/dse.hpp"
#include "prefixsyn/emit.hpp"
#include "prefixsyn/llm_client.hpp"
#include "prefixsyn/report.hpp"
#include "prefixsyn/spcr.hpp"
#include "prefixsyn/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace prefixsyn;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitEndpoint = 3;

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case Errc::InfeasibleDelay:
    case Errc::InfeasibleArea:
        return kExitInfeasible;
    case Errc::AuthFailure:
    case Errc::EndpointTimeout:
    case Errc::MalformedReply:
        return kExitEndpoint;
    default:
        return kExitValidation;
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::MissingFile, "cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::IoError, "cannot write " + path);
    out << content;
}

PrefixCircuit generate_baseline(const std::string& name, int n) {
    if (name == "sklansky")
        return sklansky(n);
    if (name == "kogge-stone")
        return kogge_stone(n);
    if (name == "brent-kung")
        return brent_kung(n);
    throw Error(Errc::InvalidArgument, "unknown topology " + name);
}

// Endpoint/proposer options shared by `synth` and `dse`.
struct ProposerCli {
    bool use_llm = false;
    bool use_offline = false;
    std::string config_file;
    std::string base_url;
    std::string model;
    std::string api_key_env;
    double temperature = -1.0;
    int timeout_seconds = -1;
    int max_retries = -1;
    std::string record_file;
    std::string replay_file;
    bool no_fallback = false;

    void attach(CLI::App* cmd) {
        cmd->add_flag("--llm", use_llm, "propose nodes via the configured LLM endpoint");
        cmd->add_flag("--offline", use_offline, "use the deterministic offline proposer (default)");
        cmd->add_option("--config", config_file, "JSON file with endpoint settings");
        cmd->add_option("--base-url", base_url, "endpoint base URL");
        cmd->add_option("--model", model, "model name");
        cmd->add_option("--api-key-env", api_key_env,
                        "environment variable holding the API key (default PREFIXLLM_API_KEY)");
        cmd->add_option("--temperature", temperature, "sampling temperature");
        cmd->add_option("--timeout", timeout_seconds, "request timeout in seconds");
        cmd->add_option("--max-retries", max_retries, "transport retries per request");
        cmd->add_option("--record", record_file, "record endpoint exchanges to this fixture file");
        cmd->add_option("--replay", replay_file, "serve responses from this fixture file");
        cmd->add_flag("--no-fallback", no_fallback,
                      "fail instead of completing offline when the endpoint fails");
    }

    LlmEndpointConfig endpoint_config() const {
        LlmEndpointConfig cfg;
        if (!config_file.empty()) {
            nlohmann::json doc = nlohmann::json::parse(read_file(config_file), nullptr, true, true);
            cfg.base_url = doc.value("base_url", cfg.base_url);
            cfg.path = doc.value("path", cfg.path);
            cfg.model = doc.value("model", cfg.model);
            cfg.api_key_env = doc.value("api_key_env", cfg.api_key_env);
            cfg.temperature = doc.value("temperature", cfg.temperature);
            cfg.timeout_seconds = doc.value("timeout_seconds", cfg.timeout_seconds);
            cfg.max_retries = doc.value("max_retries", cfg.max_retries);
        }
        if (!base_url.empty())
            cfg.base_url = base_url;
        if (!model.empty())
            cfg.model = model;
        if (!api_key_env.empty())
            cfg.api_key_env = api_key_env;
        if (temperature >= 0)
            cfg.temperature = temperature;
        if (timeout_seconds > 0)
            cfg.timeout_seconds = timeout_seconds;
        if (max_retries >= 0)
            cfg.max_retries = max_retries;
        return cfg;
    }

    Proposer make_proposer() const {
        if (!use_llm)
            return offline_proposer();
        LlmEndpointConfig cfg = endpoint_config();
        std::shared_ptr<HttpTransport> transport;
        if (!replay_file.empty()) {
            transport = std::make_shared<ReplayTransport>(replay_file);
            // replayed responses never touch the network; a placeholder key
            // keeps the client happy when none is configured
            if (!std::getenv(cfg.api_key_env.c_str()))
                setenv(cfg.api_key_env.c_str(), "replay", 0);
        } else {
            transport = make_live_transport();
        }
        if (!record_file.empty())
            transport = std::make_shared<RecordingTransport>(transport, record_file);
        return llm_proposer(std::move(cfg), std::move(transport));
    }
};

int cmd_gen(const std::string& topology, int n, const std::string& out, bool with_delay) {
    PrefixCircuit c = generate_baseline(topology, n);
    Metrics m = c.metrics();
    write_output(out, to_spcr(c, with_delay ? SpcrVariant::WithDelay : SpcrVariant::Plain));
    std::cerr << topology << " n=" << n << ": area " << m.area << ", delay " << m.delay << "\n";
    return kExitOk;
}

int cmd_synth(int n, const ProposerCli& prop, int max_rounds, std::optional<int> delay,
              const std::string& out) {
    SynthesisOptions options;
    options.max_rounds = max_rounds;
    options.delay_bound = delay;
    options.allow_fallback = !prop.no_fallback;
    SynthesisResult result = synthesize_valid_ex(PrefixCircuit(n), prop.make_proposer(), options);
    Metrics m = result.circuit.metrics();
    write_output(out, to_spcr(result.circuit,
                              delay ? SpcrVariant::WithDelay : SpcrVariant::Plain));
    std::cerr << "valid circuit after " << result.rounds_used << " round(s)"
              << (result.fallback_used ? " (offline completion used)" : "") << ": area " << m.area
              << ", delay " << m.delay << "\n";
    return kExitOk;
}

int cmd_dse(int n, const std::string& mode, std::optional<int> delay, std::optional<int> area,
            int iters, int top_k, const std::string& seed, const std::string& pool_dir,
            const ProposerCli& prop) {
    DseConfig cfg;
    cfg.width = n;
    if (mode == "delay-limited") {
        if (!delay)
            throw Error(Errc::InvalidArgument, "--mode delay-limited needs --delay");
        cfg.mode = DseMode::DelayLimited;
        cfg.bound = *delay;
    } else if (mode == "area-limited") {
        if (!area)
            throw Error(Errc::InvalidArgument, "--mode area-limited needs --area");
        cfg.mode = DseMode::AreaLimited;
        cfg.bound = *area;
    } else {
        throw Error(Errc::InvalidArgument, "unknown mode " + mode);
    }
    cfg.iteration_bound = iters;
    cfg.pool_top_k = top_k;
    cfg.seeds.push_back(generate_baseline(seed, n));
    cfg.proposer = prop.make_proposer();
    cfg.allow_fallback = !prop.no_fallback;

    DseResult result = dse_run(cfg);
    for (const IterationRecord& rec : result.log)
        std::cerr << "iteration " << rec.iteration << ": " << pool_outcome_name(rec.outcome)
                  << (rec.key.empty() ? "" : " (area " + std::to_string(rec.metrics.area) +
                                                 ", delay " + std::to_string(rec.metrics.delay) +
                                                 ")")
                  << (rec.fallback_used ? " [offline completion]" : "") << "\n";

    const CircuitPool::Entry& best = result.pool.best();
    std::cout << "pool size " << result.pool.size() << ", best area " << best.metrics.area
              << ", delay " << best.metrics.delay << " (theoretical bound "
              << area_lower_bound(n, best.metrics.delay) << ")\n";
    if (!pool_dir.empty()) {
        save_pool(result.pool, pool_dir);
        std::cerr << "pool saved to " << pool_dir << "\n";
    }
    return kExitOk;
}

int cmd_validate(const std::string& path) {
    ParsedSpcr parsed = parse(read_file(path));
    Metrics m = parsed.circuit.metrics();
    auto missing = parsed.circuit.missing_output_ranges();
    if (!missing.empty()) {
        std::cout << path << ": parses as a partial circuit (width " << parsed.circuit.width()
                  << ", area " << m.area << "), missing";
        for (const BitRange& r : missing)
            std::cout << " [" << r.lo << ":" << r.hi << "]";
        std::cout << "\n";
        return kExitValidation;
    }
    std::cout << path << ": valid prefix circuit, width " << parsed.circuit.width() << ", area "
              << m.area << ", delay " << m.delay << "\n";
    return kExitOk;
}

int cmd_emit(const std::string& path, bool verilog, bool dot, const std::string& module_name,
             const std::string& out) {
    ParsedSpcr parsed = parse(read_file(path));
    if (verilog)
        write_output(out, emit_verilog(parsed.circuit, module_name));
    else if (dot)
        write_output(out, emit_dot(parsed.circuit));
    return kExitOk;
}

int cmd_verify(const std::string& path, uint64_t trials) {
    ParsedSpcr parsed = parse(read_file(path));
    VerifyResult result = verify_adder(parsed.circuit, trials);
    if (result.ok) {
        std::cout << path << ": PASS (" << result.pairs_tested << " operand pairs)\n";
        return kExitOk;
    }
    std::cout << path << ": FAIL at a=" << result.counterexample->a
              << " b=" << result.counterexample->b << " bit " << result.counterexample->bit << "\n";
    return kExitValidation;
}

int cmd_report(const std::vector<int>& widths, const std::vector<int>& delays,
               const std::vector<std::string>& pool_dirs, const std::string& csv_out) {
    std::vector<CircuitPool> pools;
    for (const std::string& dir : pool_dirs)
        pools.push_back(load_pool(dir));
    auto rows = build_report(widths, delays, pools);
    std::cout << render_report(rows);
    if (!csv_out.empty())
        write_output(csv_out, render_report_csv(rows));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prefix circuit synthesis toolkit"};
    app.require_subcommand(1);

    // gen
    std::string gen_topology;
    int gen_n = 8;
    std::string gen_out;
    bool gen_with_delay = false;
    CLI::App* gen = app.add_subcommand("gen", "generate a classical prefix circuit");
    gen->add_option("topology", gen_topology, "sklansky | kogge-stone | brent-kung")->required();
    gen->add_option("--n", gen_n, "bit width (power of two)")->required();
    gen->add_option("-o,--out", gen_out, "output file (default stdout)");
    gen->add_flag("--with-delay", gen_with_delay, "emit Delay-SPCR (level fields)");

    // synth
    int synth_n = 8;
    int synth_max_rounds = 32;
    int synth_delay = -1;
    std::string synth_out;
    ProposerCli synth_prop;
    CLI::App* synth = app.add_subcommand("synth", "synthesize a valid prefix circuit");
    synth->add_option("--n", synth_n, "bit width")->required();
    synth->add_option("--max-rounds", synth_max_rounds, "proposer rounds before offline completion");
    synth->add_option("--delay", synth_delay, "optional delay bound (levels)");
    synth->add_option("-o,--out", synth_out, "output file (default stdout)");
    synth_prop.attach(synth);

    // dse
    int dse_n = 8;
    std::string dse_mode = "delay-limited";
    int dse_delay = -1, dse_area = -1;
    int dse_iters = 20, dse_top_k = 10;
    std::string dse_seed = "kogge-stone";
    std::string dse_pool_dir;
    ProposerCli dse_prop;
    CLI::App* dse = app.add_subcommand("dse", "explore the area/delay design space");
    dse->add_option("--n", dse_n, "bit width")->required();
    dse->add_option("--mode", dse_mode, "delay-limited | area-limited");
    dse->add_option("--delay", dse_delay, "delay bound (delay-limited mode)");
    dse->add_option("--area", dse_area, "area bound (area-limited mode)");
    dse->add_option("--iters", dse_iters, "iteration bound");
    dse->add_option("--top-k", dse_top_k, "pool entries shown to the proposer");
    dse->add_option("--seed", dse_seed, "seed topology (default kogge-stone)");
    dse->add_option("--pool-dir", dse_pool_dir, "directory to save the final pool");
    dse_prop.attach(dse);

    // validate
    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "check an SPCR file");
    validate->add_option("file", validate_path, "SPCR file")->required();

    // emit
    std::string emit_path, emit_out, emit_module = "prefix_adder";
    bool emit_verilog_flag = false, emit_dot_flag = false;
    CLI::App* emit = app.add_subcommand("emit", "export a circuit as Verilog or Graphviz");
    emit->add_option("file", emit_path, "SPCR file")->required();
    emit->add_flag("--verilog", emit_verilog_flag, "emit a Verilog adder module");
    emit->add_flag("--dot", emit_dot_flag, "emit a Graphviz digraph");
    emit->add_option("--module", emit_module, "Verilog module name");
    emit->add_option("-o,--out", emit_out, "output file (default stdout)");

    // verify
    std::string verify_path;
    uint64_t verify_trials = 100000;
    CLI::App* verify = app.add_subcommand("verify", "compare a circuit against integer addition");
    verify->add_option("file", verify_path, "SPCR file")->required();
    verify->add_option("--trials", verify_trials, "random pairs when exhaustion is too wide");

    // report
    std::vector<int> report_widths, report_delays;
    std::vector<std::string> report_pools;
    std::string report_csv;
    CLI::App* report = app.add_subcommand("report", "area/delay comparison table");
    report->add_option("--widths", report_widths, "bit widths")->required()->delimiter(',');
    report->add_option("--delays", report_delays, "delay bounds")->required()->delimiter(',');
    report->add_option("--pools", report_pools, "pool directories for the tool column")
        ->delimiter(',');
    report->add_option("--csv", report_csv, "also write the table as CSV to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen(gen_topology, gen_n, gen_out, gen_with_delay);
        if (synth->parsed())
            return cmd_synth(synth_n, synth_prop, synth_max_rounds,
                             synth_delay > 0 ? std::optional<int>(synth_delay) : std::nullopt,
                             synth_out);
        if (dse->parsed())
            return cmd_dse(dse_n, dse_mode,
                           dse_delay > 0 ? std::optional<int>(dse_delay) : std::nullopt,
                           dse_area > 0 ? std::optional<int>(dse_area) : std::nullopt, dse_iters,
                           dse_top_k, dse_seed, dse_pool_dir, dse_prop);
        if (validate->parsed())
            return cmd_validate(validate_path);
        if (emit->parsed()) {
            if (emit_verilog_flag == emit_dot_flag)
                throw Error(Errc::InvalidArgument, "pick exactly one of --verilog or --dot");
            return cmd_emit(emit_path, emit_verilog_flag, emit_dot_flag, emit_module, emit_out);
        }
        if (verify->parsed())
            return cmd_verify(verify_path, verify_trials);
        if (report->parsed())
            return cmd_report(report_widths, report_delays, report_pools, report_csv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
