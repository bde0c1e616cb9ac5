#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "explearn/agent.hpp"
#include "explearn/environment.hpp"
#include "explearn/knowledge.hpp"
#include "explearn/metrics.hpp"

namespace explearn {

struct SuiteTask {
    std::shared_ptr<const AppDefinition> app;
    const TaskDefinition* task = nullptr;  // owned by `app`
};

/// Apps plus an ordered task list. The order is shuffled once with `seed`
/// unless `shuffle` is false.
struct SuiteDefinition {
    std::vector<std::shared_ptr<const AppDefinition>> apps;
    std::vector<SuiteTask> tasks;
    std::uint64_t seed = 0;
    bool shuffle = true;
    AgentConfig config;
    ConfirmationPolicy policy = ConfirmationPolicy::confirm;
    /// Carry knowledge from task to task. Off by default: every task starts
    /// from an empty knowledge base and only leaves its own behind.
    bool accumulate = false;

    void validate() const;
};

/// Loads a suite file: {"apps": [paths], "tasks": ["task_id" | {"app", "task"}], "seed", "shuffle", "config"}.
/// Relative app paths resolve against the suite file's directory, then the
/// fixture directory. An absent or "*" task list selects every task.
SuiteDefinition load_suite_file(const std::filesystem::path& path, AgentConfig base);

/// Suite over the given app files; `task_ids` empty selects every task.
SuiteDefinition make_suite(const std::vector<std::filesystem::path>& app_files, const std::vector<std::string>& task_ids,
                           AgentConfig config);

std::filesystem::path resolve_fixture(const std::filesystem::path& path);

struct TaskResult {
    std::string task_id;
    std::string app_id;
    std::string command;
    std::string status;
    bool success = false;  // environment predicate
    std::size_t executed_steps = 0;
    std::size_t golden_steps = 0;
    std::size_t correct_steps = 0;
    double step_accuracy = 0.0;
    double step_redundancy = 0.0;
    std::size_t backtrack_count = 0;
    bool via_replay = false;
    TaskType type = TaskType::type3;
    std::vector<std::string> executed;  // operation descriptions
    std::optional<std::string> error;
    std::string trace;  // exported experience graph
};

struct Aggregates {
    std::size_t tasks = 0;
    double success_rate = 0.0;
    double step_accuracy = 0.0;
    double step_redundancy = 0.0;
    double non_redundant_completion_rate = 0.0;
    std::map<std::string, std::size_t> types;

    static Aggregates of(const std::vector<TaskResult>& rows);
    bool operator==(const Aggregates&) const = default;
};

struct RunReport {
    std::uint64_t seed = 0;
    bool baseline = false;
    std::vector<TaskResult> results;
    Aggregates aggregates;
    /// Knowledge left behind by each task, keyed by task id.
    std::map<std::string, KnowledgeBase> knowledge;
    KnowledgeBase merged;
};

/// Shuffled execution order of the suite's tasks.
std::vector<SuiteTask> ordered_tasks(const SuiteDefinition& suite);

TaskResult run_task(const SuiteTask& task, KnowledgeBase& kb, Oracle& oracle, const AgentConfig& config,
                    const RunOptions& options);

/// Tasks run sequentially in shuffled order; a failing task is recorded,
/// never fatal.
RunReport run_suite(const SuiteDefinition& suite, Oracle& oracle,
                    const std::function<ConfirmationPolicy(const std::string&)>& confirm = {});

enum class ReportFormat { structured, table };
std::string emit_report(const RunReport& report, ReportFormat format);

struct Spread {
    double mean = 0.0;
    double sd = 0.0;
    static Spread of(const std::vector<double>& values);
};

struct SweepPoint {
    double fraction = 0.0;
    std::size_t selected = 0;  // Type-A tasks drawn per repetition
    Spread success;
    Spread step_accuracy;
    Spread step_redundancy;
    Spread non_redundant_completion;
};

struct SweepCurve {
    std::string task_id;
    TaskType phase1_type = TaskType::type3;
    std::vector<SweepPoint> points;  // fraction 0 first
};

struct SweepReport {
    std::uint64_t seed = 0;
    std::size_t repetitions = 0;
    std::vector<double> fractions;
    std::vector<std::string> type_a;
    std::vector<std::string> type_b;
    std::vector<SweepCurve> per_task;
    std::vector<SweepPoint> overall;  // over all Type-B tasks and repetitions
    std::optional<std::string> notice;
};

using OracleFactory = std::function<std::unique_ptr<Oracle>()>;

/// For each Type-B task of `phase1`, draws nested random prefixes of the
/// other Type-A tasks, merges their knowledge into a fresh base and reruns
/// the task. Cells are independent and run in parallel.
SweepReport knowledge_accumulation_experiment(const SuiteDefinition& suite, const RunReport& phase1,
                                              const OracleFactory& make_oracle,
                                              std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8, 1.0},
                                              std::size_t repetitions = 10, std::uint64_t seed = 0);

std::string emit_sweep(const SweepReport& report, ReportFormat format);

}  // namespace explearn
