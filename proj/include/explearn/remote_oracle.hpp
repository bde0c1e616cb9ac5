#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "explearn/oracle.hpp"

namespace explearn {

struct RemoteConfig {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string api_key;
    std::string model;
    std::string embed_model;
    int timeout_seconds = 60;
    int max_attempts = 3;

    /// Reads ORACLE_URL, ORACLE_KEY, ORACLE_MODEL and EMBED_MODEL.
    static RemoteConfig from_environment();
};

/// JSON-over-HTTP provider: POST {base}/chat/completions and
/// POST {base}/embeddings.
class RemoteOracle : public Oracle {
public:
    explicit RemoteOracle(RemoteConfig config);

    Embedding embed(std::string_view text) override;
    std::string answer(const Query& query) override;

private:
    std::string post(const std::string& endpoint, const std::string& body);

    RemoteConfig config_;
    std::string scheme_host_;
    std::string path_prefix_;
    std::mutex cache_mutex_;
    std::map<std::string, Embedding> cache_;
    std::optional<std::size_t> dimension_;
};

}  // namespace explearn
