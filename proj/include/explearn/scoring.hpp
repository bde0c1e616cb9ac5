#pragma once

#include <optional>

namespace explearn {

inline constexpr int kLikertMin = 1;
inline constexpr int kLikertMax = 7;
inline constexpr int kPenaltyMax = 9;

/// basic = likert + tiebreak; final = basic / (1 + repetition + backtracking).
struct ScoreBreakdown {
    int likert = kLikertMin;
    double tiebreak = 0.0;
    double basic = 1.0;
    double repetition = 0.0;
    double backtracking = 0.0;
    double final_score = 1.0;

    /// Throws std::invalid_argument on a likert outside 1..7, a tiebreak
    /// outside [0, 1] or a negative penalty.
    static ScoreBreakdown compute(int likert, double tiebreak, double repetition, double backtracking);

    bool operator==(const ScoreBreakdown&) const = default;
};

/// Maps a cosine in [-1, 1] onto [0, 1].
double tiebreak_from_cosine(double cosine);

/// `penalty` is present exactly when `correct` is false.
struct CheckVerdict {
    bool completed = false;
    std::optional<bool> correct;
    std::optional<int> penalty;

    static CheckVerdict complete() { return {true, std::nullopt, std::nullopt}; }
    static CheckVerdict ok() { return {false, true, std::nullopt}; }
    static CheckVerdict incorrect(int penalty) { return {false, false, penalty}; }
    static CheckVerdict unchecked() { return {false, std::nullopt, std::nullopt}; }

    bool operator==(const CheckVerdict&) const = default;
};

}  // namespace explearn
