#ifdef DRIFTSCOPE_HAS_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include "driftscope/llm.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

namespace driftscope {

MockProvider::MockProvider(std::map<std::string, std::vector<std::string>> fixture) : fixture_(std::move(fixture)) {}

MockProvider MockProvider::from_json(const nlohmann::json& fixture) {
    if (!fixture.is_object()) fail(ErrorKind::ConfigError, "mock fixture must be a JSON object of id -> answers");
    std::map<std::string, std::vector<std::string>> table;
    for (const auto& [id, answers] : fixture.items()) {
        if (!answers.is_array()) fail(ErrorKind::ConfigError, fmt::format("mock fixture entry '{}' is not an array", id));
        auto& row = table[id];
        for (const auto& a : answers) {
            if (a.is_boolean()) row.push_back(a.get<bool>() ? "YES" : "NO");
            else if (a.is_string()) row.push_back(a.get<std::string>());
            else fail(ErrorKind::ConfigError, fmt::format("mock fixture entry '{}' holds a non-string answer", id));
        }
    }
    return MockProvider(std::move(table));
}

MockProvider MockProvider::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ConfigError, fmt::format("cannot open mock fixture {}", path.string()));
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ConfigError, fmt::format("mock fixture {}: {}", path.string(), e.what()));
    }
}

std::string MockProvider::complete(const LlmRequest& request) {
    auto it = fixture_.find(request.document_id);
    if (it == fixture_.end()) it = fixture_.find("*");
    if (it == fixture_.end()) fail(ErrorKind::ProviderError, fmt::format("no fixture entry for document '{}'", request.document_id));
    std::string out;
    for (std::size_t k = 0; k < it->second.size(); ++k) out += fmt::format("{}. {}\n", k + 1, it->second[k]);
    return out;
}

nlohmann::json MockProvider::settings() const {
    return {{"fixture_entries", fixture_.size()}};
}

nlohmann::json chat_request_body(const std::string& model, double temperature, const std::string& prompt) {
    return {{"model", model},
            {"temperature", temperature},
            {"n", 1},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
}

std::string parse_chat_response(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ProviderError, fmt::format("unexpected chat-completion response: {}", e.what()));
    }
}

HttpChatProvider::HttpChatProvider(HttpProviderConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleep_(std::move(sleeper)) {
    if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    static const std::regex url(R"(^(https?://[^/:]+(:[0-9]+)?)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url)) fail(ErrorKind::ConfigError, fmt::format("bad endpoint '{}'", config_.endpoint));
    origin_ = m[1];
    path_ = m[3].matched ? std::string(m[3]) : "/";
#ifndef DRIFTSCOPE_HAS_OPENSSL
    if (origin_.rfind("https", 0) == 0) fail(ErrorKind::ConfigError, "built without OpenSSL; https endpoints are unavailable");
#endif
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key) fail(ErrorKind::ConfigError, fmt::format("environment variable {} is not set", config_.api_key_env));
        api_key_ = key;
    }
}

nlohmann::json HttpChatProvider::settings() const {
    return {{"endpoint", config_.endpoint},
            {"model", config_.model},
            {"temperature", config_.temperature},
            {"timeout_s", config_.timeout.count()},
            {"max_retries", config_.retry.max_retries}};
}

std::string HttpChatProvider::complete(const LlmRequest& request) {
    httplib::Client client(origin_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const std::string body = chat_request_body(config_.model, config_.temperature, request.prompt).dump();

    std::string last;
    for (std::size_t attempt = 0;; ++attempt) {
        ++attempts_;
        auto res = client.Post(path_, headers, body, "application/json");
        std::chrono::milliseconds wait{0};
        if (!res) {
            last = fmt::format("transport error: {}", httplib::to_string(res.error()));
        } else if (res->status == 200) {
            return parse_chat_response(res->body);
        } else if (res->status == 429 || res->status >= 500) {
            last = fmt::format("HTTP {}", res->status);
            if (res->has_header("Retry-After")) {
                const std::string ra = res->get_header_value("Retry-After");
                if (!ra.empty() && std::all_of(ra.begin(), ra.end(), ::isdigit)) wait = std::chrono::seconds(std::stoll(ra));
            }
        } else {
            fail(ErrorKind::ProviderError, fmt::format("document '{}': HTTP {} is not retryable: {}", request.document_id,
                                                       res->status, res->body.substr(0, 200)));
        }
        if (attempt >= config_.retry.max_retries) break;
        auto backoff = config_.retry.base_delay * (std::int64_t{1} << std::min<std::size_t>(attempt, 30));
        sleep_(std::min(std::max(backoff, wait), config_.retry.max_delay));
    }
    fail(ErrorKind::ProviderError,
         fmt::format("document '{}': gave up after {} attempts, last: {}", request.document_id, config_.retry.max_retries + 1, last));
}

std::unique_ptr<LlmProvider> make_provider(const std::string& kind, const nlohmann::json& options) {
    if (kind == "echo") return std::make_unique<EchoProvider>();
    if (kind == "mock") {
        if (options.contains("fixture") && options["fixture"].is_string())
            return std::make_unique<MockProvider>(MockProvider::load(options["fixture"].get<std::string>()));
        if (options.contains("answers")) return std::make_unique<MockProvider>(MockProvider::from_json(options["answers"]));
        fail(ErrorKind::ConfigError, "mock provider needs 'fixture' (a path) or inline 'answers'");
    }
    if (kind == "http") {
        HttpProviderConfig c;
        try {
            c.endpoint = options.value("endpoint", c.endpoint);
            c.model = options.value("model", c.model);
            c.api_key_env = options.value("api_key_env", c.api_key_env);
            c.temperature = options.value("temperature", c.temperature);
            c.timeout = std::chrono::seconds(options.value("timeout_s", static_cast<std::int64_t>(c.timeout.count())));
            c.retry.max_retries = options.value("max_retries", c.retry.max_retries);
            c.retry.base_delay = std::chrono::milliseconds(options.value("backoff_ms", static_cast<std::int64_t>(c.retry.base_delay.count())));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::ConfigError, fmt::format("provider options: {}", e.what()));
        }
        return std::make_unique<HttpChatProvider>(std::move(c));
    }
    fail(ErrorKind::ConfigError, fmt::format("unknown provider '{}' (expected mock, echo or http)", kind));
}

} // namespace driftscope
