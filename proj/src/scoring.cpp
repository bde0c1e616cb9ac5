#include "explearn/scoring.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace explearn {

ScoreBreakdown ScoreBreakdown::compute(int likert, double tiebreak, double repetition, double backtracking) {
    if (likert < kLikertMin || likert > kLikertMax) {
        throw std::invalid_argument("likert score " + std::to_string(likert) + " outside 1..7");
    }
    if (!(tiebreak >= 0.0 && tiebreak <= 1.0)) {
        throw std::invalid_argument("tiebreak outside [0, 1]");
    }
    if (!(repetition >= 0.0) || !(backtracking >= 0.0)) {
        throw std::invalid_argument("penalties must be non-negative");
    }
    ScoreBreakdown s;
    s.likert = likert;
    s.tiebreak = tiebreak;
    s.basic = static_cast<double>(likert) + tiebreak;
    s.repetition = repetition;
    s.backtracking = backtracking;
    s.final_score = s.basic / (1.0 + repetition + backtracking);
    return s;
}

double tiebreak_from_cosine(double cosine) {
    return std::clamp((std::clamp(cosine, -1.0, 1.0) + 1.0) / 2.0, 0.0, 1.0);
}

}  // namespace explearn
