#include "explearn/remote_oracle.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace explearn {
namespace {

using nlohmann::json;

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

}  // namespace

RemoteConfig RemoteConfig::from_environment() {
    RemoteConfig c;
    c.base_url = env_or("ORACLE_URL", "");
    c.api_key = env_or("ORACLE_KEY", "");
    c.model = env_or("ORACLE_MODEL", "gpt-4");
    c.embed_model = env_or("EMBED_MODEL", "text-embedding-ada-002");
    return c;
}

RemoteOracle::RemoteOracle(RemoteConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.base_url.find("://");
    if (config_.base_url.empty() || scheme_end == std::string::npos) {
        throw std::invalid_argument("remote oracle needs ORACLE_URL like http://host:port/v1, got '" +
                                    config_.base_url + "'");
    }
    const auto path_start = config_.base_url.find('/', scheme_end + 3);
    scheme_host_ = config_.base_url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
        path_prefix_.pop_back();
    }
}

std::string RemoteOracle::post(const std::string& endpoint, const std::string& body) {
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, config_.max_attempts); ++attempt) {
        auto res = client.Post(path_prefix_ + endpoint, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
        } else if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw OracleTransportError("remote oracle " + endpoint + " answered HTTP " + std::to_string(res->status) +
                                       ": " + res->body);
        } else {
            return res->body;
        }
        spdlog::warn("remote oracle {} attempt {} failed: {}", endpoint, attempt, last_error);
    }
    throw OracleTransportError("remote oracle " + endpoint + " unreachable: " + last_error);
}

Embedding RemoteOracle::embed(std::string_view text) {
    const std::string key(text);
    {
        std::lock_guard lock(cache_mutex_);
        if (const auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
        if (text.empty() && dimension_) {
            return Embedding{std::vector<double>(*dimension_, 0.0)};
        }
    }
    const json request{{"model", config_.embed_model}, {"input", json::array({key})}};
    const auto body = post("/embeddings", request.dump());
    Embedding e;
    try {
        e.values = json::parse(body).at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& ex) {
        throw OracleFormatError(std::string("embedding response malformed: ") + ex.what());
    }
    if (e.values.empty()) {
        throw OracleFormatError("embedding response has no values");
    }
    std::lock_guard lock(cache_mutex_);
    if (dimension_ && *dimension_ != e.dimension()) {
        throw DimensionMismatch(*dimension_, e.dimension());
    }
    dimension_ = e.dimension();
    if (text.empty()) {
        e.values.assign(e.values.size(), 0.0);
    }
    cache_.emplace(key, e);
    return e;
}

std::string RemoteOracle::answer(const Query& query) {
    const json request{{"model", config_.model},
                       {"messages", json::array({json{{"role", "user"}, {"content", query.prompt}}})},
                       {"temperature", 0}};
    const auto body = post("/chat/completions", request.dump());
    try {
        return json::parse(body).at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& ex) {
        throw OracleFormatError(std::string("completion response malformed: ") + ex.what());
    }
}

}  // namespace explearn
