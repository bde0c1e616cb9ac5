#pragma once

#include <string>
#include <utility>
#include <string_view>
#include <vector>

#include "explearn/oracle.hpp"

namespace explearn {

/// 256-bucket hashed bag of words over text::tokenize tokens.
class HashedEmbedder : public Embedder {
public:
    static constexpr std::size_t kDimension = 256;
    Embedding embed(std::string_view text) override;
};

/// Fixed breakpoints from a similarity to a 1..7 score.
int likert_from_similarity(double similarity);

/// Rule-based understanding: aligns with the first example whose command
/// shape matches, otherwise extracts entities (file names, numbers,
/// capitalized names, quoted text).
CommandUnderstanding heuristic_understanding(std::string_view command, const std::vector<TaskExample>& examples);

/// True when a lesson quotes `label` next to a negation ("not", "only", ...).
bool lesson_rules_out(std::string_view lesson, std::string_view label);

/// Deterministic stand-in for a language model.
class HeuristicOracle : public Oracle {
public:
    explicit HeuristicOracle(double relevance_floor = 0.25, double tolerance_floor = 9.0)
        : relevance_floor_(relevance_floor), tolerance_floor_(tolerance_floor) {}

    Embedding embed(std::string_view text) override { return embedder_.embed(text); }
    std::string answer(const Query& query) override;

    /// Text whose appearance on a page means the task is done.
    void set_completion_cue(std::string cue) override { cue_ = std::move(cue); }
    const std::string& completion_cue() const { return cue_; }

private:
    std::string answer_likert(const Query& q);
    std::string answer_text_parameter(const Query& q);
    std::string answer_completeness(const Query& q);
    std::string answer_correctness(const Query& q);
    std::string answer_lesson(const Query& q);

    HashedEmbedder embedder_;
    double relevance_floor_;
    double tolerance_floor_;
    std::string cue_;
};

}  // namespace explearn
