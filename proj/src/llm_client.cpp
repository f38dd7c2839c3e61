#include <thread>

#include <json.hpp>

#include "kgi/errors.hpp"
#include "kgi/kgx.hpp"

namespace kgi {

using nlohmann::json;

LlmClient::LlmClient(LlmConfig config)
    : config_(std::move(config)), transport_(http::make_transport(config_.base_url, config_.timeout_seconds)) {}

LlmClient::LlmClient(LlmConfig config, std::unique_ptr<http::Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

void LlmClient::wait_for_slot() {
    std::chrono::steady_clock::time_point until;
    {
        std::lock_guard lock(rate_mutex_);
        until = not_before_;
    }
    if (until > std::chrono::steady_clock::now()) std::this_thread::sleep_until(until);
}

void LlmClient::note_rate_limited(int attempt) {
    std::lock_guard lock(rate_mutex_);
    const auto pause = std::chrono::milliseconds(config_.backoff_base_ms) * (1LL << attempt);
    const std::chrono::steady_clock::time_point until = std::chrono::steady_clock::now() + pause;
    if (until > not_before_) not_before_ = until;
}

std::string LlmClient::complete(const std::string& prompt) {
    json body;
    body["contents"] = json::array({{{"role", "user"}, {"parts", json::array({{{"text", prompt}}})}}});
    body["generationConfig"] = {{"temperature", 0.0}, {"responseMimeType", "application/json"}};
    const std::string payload = body.dump();
    const std::string target = "/models/" + http::url_encode(config_.model) + ":generateContent";
    http::Headers headers;
    if (auto key = http::env_value(config_.api_key_env)) headers.emplace_back("x-goog-api-key", *key);

    int attempt = 0;
    const auto response = http::with_retries({config_.max_retries, config_.backoff_base_ms}, "LLM request", [&] {
        wait_for_slot();
        auto r = transport_->post(target, payload, "application/json", headers);
        if (r.status == 429) note_rate_limited(attempt);
        ++attempt;
        return r;
    });

    json j;
    try {
        j = json::parse(response.body);
    } catch (const json::parse_error&) {
        throw ExtractionError("LLM endpoint returned non-JSON envelope", response.body);
    }
    if (!j.contains("candidates") || !j["candidates"].is_array() || j["candidates"].empty()) {
        throw ExtractionError("LLM envelope has no candidates", response.body);
    }
    std::string text;
    try {
        for (const auto& part : j["candidates"][0].at("content").at("parts")) {
            if (part.contains("text")) text += part["text"].get<std::string>();
        }
    } catch (const json::exception&) {
        throw ExtractionError("LLM envelope has no content parts", response.body);
    }
    return text;
}

}  // namespace kgi
