#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "explearn/environment.hpp"
#include "explearn/gui.hpp"

namespace explearn {

/// What the metrics compare: action, element text and parameter.
struct StepKey {
    ActionKind action = ActionKind::click;
    std::string text;
    std::optional<std::string> parameter;

    static StepKey of(const Operation& op);
    static StepKey of(const OpDescriptor& op);
    bool operator==(const StepKey&) const = default;
};

/// Largest k such that golden[0..k) is a subsequence of executed; |golden|
/// when completed.
std::size_t correct_steps(const std::vector<StepKey>& golden, const std::vector<StepKey>& executed, bool completed);
double step_accuracy(const std::vector<StepKey>& golden, const std::vector<StepKey>& executed, bool completed);
/// 0 for an empty execution.
double step_redundancy(const std::vector<StepKey>& golden, const std::vector<StepKey>& executed, bool completed);

enum class TaskType { type1, type2, type3 };
std::string_view task_type_name(TaskType t);
TaskType classify(bool success, std::size_t executed, std::size_t golden);

}  // namespace explearn
