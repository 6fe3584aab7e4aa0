#pragma once

/// @file llm_client.hpp
/// @brief Chat-completions client for the LLM proposer: a pluggable HTTP
///        transport (real, recording, replaying), retry with exponential
///        backoff, and the LlmProposer adaptor for the synthesis loop.

#include "prefixsyn/errors.hpp"
#include "prefixsyn/proposer.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace prefixsyn {

/// Connection settings for a chat-completions-compatible endpoint. The API
/// key is never stored in config files; it is read from the named
/// environment variable at call time.
struct LlmEndpointConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "o1-mini";
    std::string api_key_env = "PREFIXLLM_API_KEY";
    double temperature = 1.0;
    int max_retries = 3;
    int timeout_seconds = 120;
    int backoff_base_ms = 500; // doubled per retry; 0 in tests
};

struct HttpRequest {
    std::string url; // base_url + path
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
    int timeout_seconds = 120;
};

struct HttpResult {
    int status = 0;            // 0 means the transport itself failed
    std::string body;
    std::string transport_error;
};

/// Anything that can carry one POST. Implementations: live HTTP, a
/// fixture-backed replay, a recording wrapper, and test mocks.
class HttpTransport {
  public:
    virtual ~HttpTransport() = default;
    virtual HttpResult post(const HttpRequest& request) = 0;
};

/// Replays responses from a fixture file. Fixture format: a JSON array of
/// entries {"request": <string or null>, "status": <int>, "body": <string>}.
/// A null request matches anything; a non-null one must be a prefix of the
/// outgoing body (useful to pin recorded conversations).
class ReplayTransport : public HttpTransport {
  public:
    explicit ReplayTransport(const std::string& fixture_path) {
        std::ifstream in(fixture_path);
        if (!in)
            throw Error(Errc::MissingFile, "cannot open replay fixture " + fixture_path);
        nlohmann::json doc = nlohmann::json::parse(in, nullptr, true, true);
        for (const auto& entry : doc) {
            Exchange e;
            if (entry.contains("request") && !entry["request"].is_null())
                e.request = entry["request"].get<std::string>();
            e.status = entry.value("status", 200);
            e.body = entry["body"].get<std::string>();
            exchanges_.push_back(std::move(e));
        }
    }

    HttpResult post(const HttpRequest& request) override {
        if (next_ >= exchanges_.size())
            return HttpResult{0, "", "replay fixture exhausted"};
        const Exchange& e = exchanges_[next_++];
        if (e.request && request.body.rfind(*e.request, 0) != 0)
            return HttpResult{0, "", "request does not match recorded fixture"};
        return HttpResult{e.status, e.body, ""};
    }

    size_t remaining() const { return exchanges_.size() - next_; }

  private:
    struct Exchange {
        std::optional<std::string> request;
        int status = 200;
        std::string body;
    };
    std::vector<Exchange> exchanges_;
    size_t next_ = 0;
};

/// Wraps another transport and appends every exchange to a fixture file
/// compatible with ReplayTransport.
class RecordingTransport : public HttpTransport {
  public:
    RecordingTransport(std::shared_ptr<HttpTransport> inner, std::string fixture_path)
        : inner_(std::move(inner)), fixture_path_(std::move(fixture_path)) {}

    HttpResult post(const HttpRequest& request) override {
        HttpResult result = inner_->post(request);
        nlohmann::json entry = {
            {"request", request.body}, {"status", result.status}, {"body", result.body}};
        recorded_.push_back(std::move(entry));
        std::ofstream out(fixture_path_);
        if (!out)
            throw Error(Errc::IoError, "cannot write fixture " + fixture_path_);
        out << recorded_.dump(2) << "\n";
        return result;
    }

  private:
    std::shared_ptr<HttpTransport> inner_;
    std::string fixture_path_;
    nlohmann::json recorded_ = nlohmann::json::array();
};

/// Live transport factory; available in translation units compiled with
/// PREFIXSYN_ENABLE_LIVE_TRANSPORT (pulls in cpp-httplib).
std::shared_ptr<HttpTransport> make_live_transport();

/// Sends one chat request and returns the assistant text. Transport
/// failures, HTTP 429 and 5xx are retried with exponential backoff up to
/// max_retries; auth failures and malformed replies are not retryable.
inline std::string llm_propose(const LlmEndpointConfig& cfg, const std::string& prompt,
                               HttpTransport& transport) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (!key || !*key)
        throw Error(Errc::AuthFailure,
                    "environment variable " + cfg.api_key_env + " is not set");

    nlohmann::json body = {
        {"model", cfg.model},
        {"temperature", cfg.temperature},
        {"messages", nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", prompt}}})},
    };
    HttpRequest request;
    request.url = cfg.base_url + cfg.path;
    request.headers = {{"Authorization", std::string("Bearer ") + key},
                       {"Content-Type", "application/json"}};
    request.body = body.dump();
    request.timeout_seconds = cfg.timeout_seconds;

    std::string last_failure;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0 && cfg.backoff_base_ms > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(cfg.backoff_base_ms << (attempt - 1)));

        HttpResult result = transport.post(request);
        if (result.status == 401 || result.status == 403)
            throw Error(Errc::AuthFailure, "endpoint rejected the API key (HTTP " +
                                               std::to_string(result.status) + ")");
        bool retryable = result.status == 0 || result.status == 429 || result.status >= 500;
        if (retryable) {
            last_failure = result.status == 0 ? result.transport_error
                                              : "HTTP " + std::to_string(result.status);
            continue;
        }
        if (result.status < 200 || result.status >= 300)
            throw Error(Errc::MalformedReply,
                        "unexpected HTTP status " + std::to_string(result.status));
        try {
            nlohmann::json reply = nlohmann::json::parse(result.body);
            const auto& message = reply.at("choices").at(0).at("message");
            if (message.at("content").is_null())
                return "";
            return message.at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::MalformedReply,
                        std::string("endpoint reply is not a chat completion: ") + e.what());
        }
    }
    throw Error(Errc::EndpointTimeout, "gave up after " + std::to_string(cfg.max_retries + 1) +
                                           " attempts; last failure: " + last_failure);
}

/// Proposer backed by an endpoint: builds the prompt matching the context
/// mode, sends it, returns the raw assistant text.
inline Proposer llm_proposer(LlmEndpointConfig cfg, std::shared_ptr<HttpTransport> transport) {
    return [cfg = std::move(cfg), transport = std::move(transport)](const ProposerContext& ctx) {
        std::string prompt;
        switch (ctx.mode) {
        case ProposerMode::PlainSynthesis: prompt = build_spcr_prompt(ctx); break;
        case ProposerMode::DseAreaMin: prompt = build_delay_limited_prompt(ctx); break;
        case ProposerMode::DseDelayMin: prompt = build_dse_prompt(ctx); break;
        }
        return llm_propose(cfg, prompt, *transport);
    };
}

} // namespace prefixsyn

// The live transport is compiled only where requested, so translation units
// that stick to fixtures and mocks never pull in the httplib header.
#if defined(PREFIXSYN_ENABLE_LIVE_TRANSPORT)
#include <httplib.h>

namespace prefixsyn {

/// Live transport over cpp-httplib. Splits the URL into scheme://host and
/// path and issues one POST per call.
class HttplibTransport : public HttpTransport {
  public:
    HttpResult post(const HttpRequest& request) override {
        const std::string& url = request.url;
        size_t scheme_end = url.find("://");
        size_t path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        std::string host = path_start == std::string::npos ? url : url.substr(0, path_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(host);
        client.set_connection_timeout(request.timeout_seconds, 0);
        client.set_read_timeout(request.timeout_seconds, 0);

        httplib::Headers headers;
        std::string content_type = "application/json";
        for (const auto& [name, value] : request.headers) {
            if (name == "Content-Type")
                content_type = value;
            else
                headers.emplace(name, value);
        }
        auto result = client.Post(path, headers, request.body, content_type);
        if (!result)
            return HttpResult{0, "", httplib::to_string(result.error())};
        return HttpResult{result->status, result->body, ""};
    }
};

inline std::shared_ptr<HttpTransport> make_live_transport() {
    return std::make_shared<HttplibTransport>();
}

} // namespace prefixsyn
#endif
