#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "explearn/oracle.hpp"

namespace explearn {

/// One recorded oracle exchange. Completions carry the raw answer text;
/// embeddings carry the vector and are looked up by digest, not position.
struct TranscriptRecord {
    std::string kind;  // query_kind_name() or "embed"
    std::string digest;
    std::string payload;
    std::vector<double> embedding;

    bool operator==(const TranscriptRecord&) const = default;
};

class TranscriptError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void save_transcript(const std::vector<TranscriptRecord>& records, const std::filesystem::path& path);
std::vector<TranscriptRecord> load_transcript(const std::filesystem::path& path);

/// Passes every call through to `inner` and keeps a transcript of it.
class RecordingOracle : public Oracle {
public:
    explicit RecordingOracle(Oracle& inner) : inner_(inner) {}

    Embedding embed(std::string_view text) override;
    std::string answer(const Query& query) override;
    void set_completion_cue(std::string cue) override { inner_.set_completion_cue(std::move(cue)); }

    std::vector<TranscriptRecord> records() const;

private:
    Oracle& inner_;
    mutable std::mutex mutex_;
    std::vector<TranscriptRecord> records_;
    std::map<std::string, bool> embedded_;
};

/// Answers from a transcript. Completion queries must arrive in recorded
/// order with matching kind and prompt digest; anything else throws
/// TranscriptError.
class TranscriptOracle : public Oracle {
public:
    explicit TranscriptOracle(std::vector<TranscriptRecord> records);

    Embedding embed(std::string_view text) override;
    std::string answer(const Query& query) override;

    std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::vector<TranscriptRecord> completions_;
    std::size_t cursor_ = 0;
    std::map<std::string, std::vector<double>> embeddings_;
};

}  // namespace explearn
