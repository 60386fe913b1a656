#pragma once

#include "json.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace driftscope {

// What a provider sees for one call. document_id and document let the mock and
// echo providers answer without parsing the prompt back apart.
struct LlmRequest {
    std::string prompt;
    std::string document_id;
    std::string document;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    // Throws Error(ProviderError) once the provider gives up.
    virtual std::string complete(const LlmRequest& request) = 0;
    virtual std::string name() const = 0;
    // Model and sampling settings, recorded in the audit header.
    virtual nlohmann::json settings() const = 0;
};

// Answers from a fixture table: document id -> answers, rendered as "1. YES"
// lines. Ids missing from the table fall back to the "*" entry when present.
class MockProvider final : public LlmProvider {
public:
    explicit MockProvider(std::map<std::string, std::vector<std::string>> fixture);
    static MockProvider from_json(const nlohmann::json& fixture);
    static MockProvider load(const std::filesystem::path& path);

    std::string complete(const LlmRequest& request) override;
    std::string name() const override { return "mock"; }
    nlohmann::json settings() const override;

private:
    std::map<std::string, std::vector<std::string>> fixture_;
};

// Returns the document unchanged. Stands in for the rewrite pass offline.
class EchoProvider final : public LlmProvider {
public:
    std::string complete(const LlmRequest& request) override { return request.document; }
    std::string name() const override { return "echo"; }
    nlohmann::json settings() const override { return nlohmann::json::object(); }
};

struct RetryPolicy {
    std::size_t max_retries = 3;                   // attempts after the first
    std::chrono::milliseconds base_delay{500};     // doubled after every failure
    std::chrono::milliseconds max_delay{8000};
};

struct HttpProviderConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-3.5-turbo";
    std::string api_key_env = "OPENAI_API_KEY";    // empty: no Authorization header
    double temperature = 0.0;
    std::chrono::seconds timeout{60};
    RetryPolicy retry;
};

// JSON chat-completion client. Transport failures, 429 and 5xx responses are
// retried with exponential backoff; other statuses fail at once. Safe to call
// from several threads.
class HttpChatProvider final : public LlmProvider {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    // Throws ConfigError when the endpoint is malformed or the key variable is unset.
    explicit HttpChatProvider(HttpProviderConfig config, Sleeper sleeper = {});

    std::string complete(const LlmRequest& request) override;
    std::string name() const override { return "http"; }
    nlohmann::json settings() const override;

    std::size_t attempts_made() const noexcept { return attempts_.load(); }

private:
    HttpProviderConfig config_;
    Sleeper sleep_;
    std::string origin_;   // scheme://host[:port]
    std::string path_;
    std::string api_key_;
    std::atomic<std::size_t> attempts_{0};
};

nlohmann::json chat_request_body(const std::string& model, double temperature, const std::string& prompt);

// Content of the first choice; throws ProviderError on any other shape.
std::string parse_chat_response(const std::string& body);

// kind is "mock", "echo" or "http". options holds the fixture path for mock
// and HttpProviderConfig fields for http.
std::unique_ptr<LlmProvider> make_provider(const std::string& kind, const nlohmann::json& options);

} // namespace driftscope
