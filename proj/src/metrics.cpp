#include "explearn/metrics.hpp"

namespace explearn {

StepKey StepKey::of(const Operation& op) {
    return {op.action, op.label, op.parameter};
}

StepKey StepKey::of(const OpDescriptor& op) {
    return {op.action, op.element_text, op.parameter};
}

std::size_t correct_steps(const std::vector<StepKey>& golden, const std::vector<StepKey>& executed, bool completed) {
    if (completed) {
        return golden.size();
    }
    // Greedy matching finds the longest embeddable prefix in one pass.
    std::size_t k = 0;
    for (const auto& e : executed) {
        if (k < golden.size() && golden[k] == e) {
            ++k;
        }
    }
    return k;
}

double step_accuracy(const std::vector<StepKey>& golden, const std::vector<StepKey>& executed, bool completed) {
    if (golden.empty()) {
        return completed ? 1.0 : 0.0;
    }
    return static_cast<double>(correct_steps(golden, executed, completed)) / static_cast<double>(golden.size());
}

double step_redundancy(const std::vector<StepKey>& golden, const std::vector<StepKey>& executed, bool completed) {
    if (executed.empty()) {
        return 0.0;
    }
    const auto correct = correct_steps(golden, executed, completed);
    if (correct >= executed.size()) {
        return 0.0;
    }
    return static_cast<double>(executed.size() - correct) / static_cast<double>(executed.size());
}

std::string_view task_type_name(TaskType t) {
    switch (t) {
    case TaskType::type1:
        return "Type-1";
    case TaskType::type2:
        return "Type-2";
    case TaskType::type3:
        return "Type-3";
    }
    return "";
}

TaskType classify(bool success, std::size_t executed, std::size_t golden) {
    if (!success) {
        return TaskType::type3;
    }
    return executed > golden ? TaskType::type2 : TaskType::type1;
}

}  // namespace explearn
