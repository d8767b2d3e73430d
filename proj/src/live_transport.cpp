#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>

#include "engagelab/errors.hpp"
#include "engagelab/gateway.hpp"

namespace engagelab {

namespace {

const char* env_or_null(const char* name) {
    const char* v = std::getenv(name);
    return v && *v ? v : nullptr;
}

}  // namespace

LiveTransport::LiveTransport(Options options) : options_(std::move(options)) {
    if (options_.api_key.empty()) throw ConfigError("live transport: ENGAGELAB_API_KEY is not set");
    if (options_.attempts < 1) throw ConfigError("live transport: attempts must be >= 1");
    auto url = options_.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("live transport: base URL needs a scheme: '" + url + "'");
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https")
        throw ConfigError("live transport: unsupported scheme '" + scheme + "'");
    const auto path_start = url.find('/', scheme_end + 3);
    host_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::shared_ptr<LiveTransport> LiveTransport::from_environment(const LlmConfig& config) {
    Options o;
    if (const char* key = env_or_null("ENGAGELAB_API_KEY")) o.api_key = key;
    o.base_url = config.base_url;
    if (o.base_url.empty()) {
        const char* base = env_or_null("ENGAGELAB_BASE_URL");
        if (!base) throw ConfigError("live transport: no base URL (set ENGAGELAB_BASE_URL or llm.base_url)");
        o.base_url = base;
    }
    return std::make_shared<LiveTransport>(std::move(o));
}

Completion LiveTransport::complete(const CompletionRequest& request) {
    nlohmann::ordered_json body;
    body["model"] = request.config.model_name;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.config.temperature;
    body["top_p"] = request.config.top_p;
    body["max_tokens"] = request.config.max_output_tokens;
    const auto payload = body.dump();
    const auto path = path_prefix_ + "/v1/chat/completions";

    const auto timeout = request.config.request_timeout;
    const auto secs = static_cast<time_t>(timeout.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);

    auto backoff = options_.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
        if (attempt > 1) {
            options_.sleep(backoff);
            backoff *= 2;
        }
        httplib::Client client(host_);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        client.set_bearer_token_auth(options_.api_key);
        ++sent_;
        auto res = client.Post(path, payload, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw TransportError("completion service returned HTTP " + std::to_string(res->status) + ": " +
                                 res->body.substr(0, 200));
        try {
            auto j = nlohmann::json::parse(res->body);
            return {j.at("choices").at(0).at("message").at("content").get<std::string>(), TransportKind::Live};
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("malformed completion response: ") + e.what());
        }
    }
    throw TransportError("completion service unreachable after " + std::to_string(options_.attempts) +
                         " attempts (" + last_error + ")");
}

}  // namespace engagelab
