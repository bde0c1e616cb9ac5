#include "explearn/transcript_oracle.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace explearn {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "explearn-transcript";
constexpr int kVersion = 1;

}  // namespace

void save_transcript(const std::vector<TranscriptRecord>& records, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw TranscriptError("cannot write " + tmp);
        }
        out << json{{"format", kFormat}, {"version", kVersion}}.dump() << '\n';
        for (const auto& r : records) {
            json j{{"kind", r.kind}, {"digest", r.digest}};
            if (r.kind == "embed") {
                j["embedding"] = r.embedding;
            } else {
                j["payload"] = r.payload;
            }
            out << j.dump() << '\n';
        }
        if (!out) {
            throw TranscriptError("failed writing " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

std::vector<TranscriptRecord> load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw TranscriptError("cannot open " + path.string());
    }
    std::vector<TranscriptRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw TranscriptError(where + e.what());
        }
        if (line_no == 1) {
            if (j.value("format", "") != kFormat || j.value("version", 0) != kVersion) {
                throw TranscriptError(where + "not a version 1 transcript");
            }
            continue;
        }
        try {
            TranscriptRecord r;
            r.kind = j.at("kind").get<std::string>();
            r.digest = j.at("digest").get<std::string>();
            if (r.kind == "embed") {
                r.embedding = j.at("embedding").get<std::vector<double>>();
            } else {
                if (!parse_query_kind(r.kind)) {
                    throw TranscriptError(where + "unknown record kind '" + r.kind + "'");
                }
                r.payload = j.at("payload").get<std::string>();
            }
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw TranscriptError(where + e.what());
        }
    }
    if (line_no == 0) {
        throw TranscriptError(path.string() + ": empty transcript");
    }
    return records;
}

Embedding RecordingOracle::embed(std::string_view text) {
    auto e = inner_.embed(text);
    std::lock_guard lock(mutex_);
    const auto digest = prompt_digest(text);
    if (embedded_.emplace(digest, true).second) {
        records_.push_back({"embed", digest, {}, e.values});
    }
    return e;
}

std::string RecordingOracle::answer(const Query& query) {
    auto payload = inner_.answer(query);
    std::lock_guard lock(mutex_);
    records_.push_back({std::string(query_kind_name(query.kind)), prompt_digest(query.prompt), payload, {}});
    return payload;
}

std::vector<TranscriptRecord> RecordingOracle::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

TranscriptOracle::TranscriptOracle(std::vector<TranscriptRecord> records) {
    for (auto& r : records) {
        if (r.kind == "embed") {
            embeddings_.emplace(r.digest, std::move(r.embedding));
        } else {
            completions_.push_back(std::move(r));
        }
    }
}

Embedding TranscriptOracle::embed(std::string_view text) {
    std::lock_guard lock(mutex_);
    const auto it = embeddings_.find(prompt_digest(text));
    if (it == embeddings_.end()) {
        throw TranscriptError("no recorded embedding for \"" + std::string(text) + "\"");
    }
    return Embedding{it->second};
}

std::string TranscriptOracle::answer(const Query& query) {
    std::lock_guard lock(mutex_);
    if (cursor_ >= completions_.size()) {
        throw TranscriptError("transcript exhausted at query " + std::to_string(cursor_ + 1));
    }
    const auto& r = completions_[cursor_];
    const auto kind = std::string(query_kind_name(query.kind));
    const auto digest = prompt_digest(query.prompt);
    if (r.kind != kind || r.digest != digest) {
        throw TranscriptError("query " + std::to_string(cursor_ + 1) + " diverges from the transcript: expected " +
                              r.kind + " " + r.digest + ", got " + kind + " " + digest);
    }
    ++cursor_;
    return r.payload;
}

std::size_t TranscriptOracle::remaining() const {
    std::lock_guard lock(mutex_);
    return completions_.size() - cursor_;
}

}  // namespace explearn
