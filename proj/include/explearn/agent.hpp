#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "explearn/environment.hpp"
#include "explearn/experience.hpp"
#include "explearn/knowledge.hpp"
#include "explearn/oracle.hpp"
#include "explearn/scoring.hpp"

namespace explearn {

struct AgentConfig {
    int step_limit = 20;
    double repetition_penalty = 10.0;
    double target_similarity_threshold = 0.55;
    double example_similarity_threshold = 0.60;
    double lesson_similarity_threshold = 0.50;
    double replay_intent_threshold = 0.90;
    double tolerance_penalty_floor = 9.0;
    bool enable_checking = true;
    bool enable_backtracking = true;
    bool enable_knowledge = true;

    static AgentConfig heuristic_defaults() { return {}; }
    static AgentConfig remote_defaults();
    /// Same thresholds with checking, backtracking and knowledge switched off.
    AgentConfig as_baseline() const;

    /// Throws std::invalid_argument on a step limit below 1 or a threshold
    /// outside [-1, 1].
    void validate() const;

    bool operator==(const AgentConfig&) const = default;
};

/// Overrides fields from a JSON object whose keys are the field names.
AgentConfig config_from_json(std::string_view text, AgentConfig base);
std::string config_to_json(const AgentConfig& config);

enum class ConfirmationPolicy { confirm, not_completed, force_terminate, ignore };
std::string_view policy_name(ConfirmationPolicy p);
std::optional<ConfirmationPolicy> parse_policy(std::string_view name);
/// Terminal answer letters: y, n, q, i.
std::optional<ConfirmationPolicy> policy_from_key(char key);

/// Accumulated backtracking penalties keyed by (page, action, element label).
/// Once the tolerance floor lets an operation through, the amount seen so
/// far is forgiven for the correctness check, never for scoring.
class PenaltyLedger {
public:
    using Key = std::tuple<PageFingerprint, ActionKind, std::string>;
    static Key key(PageFingerprint fp, const Operation& op) { return {fp, op.action, op.label}; }

    double total(PageFingerprint fp, const Operation& op) const;
    double unforgiven(PageFingerprint fp, const Operation& op) const;
    void add(PageFingerprint fp, const Operation& op, double penalty);
    void forgive(PageFingerprint fp, const Operation& op);
    const std::map<Key, double>& entries() const { return totals_; }

private:
    std::map<Key, double> totals_;
    std::map<Key, double> forgiven_;
};

enum class OutcomeStatus { completed, step_limit_exceeded, force_terminated };
std::string_view status_name(OutcomeStatus s);

struct Outcome {
    OutcomeStatus status = OutcomeStatus::step_limit_exceeded;
    std::vector<Operation> executed_ops;  // forward and undo, in order
    ExperienceGraph trace;
    bool via_replay = false;
    std::size_t backtrack_count = 0;
    std::optional<CommandUnderstanding> understanding;
    bool summarized = false;
    std::optional<SummaryReport> summary;
    EnvState final_state;
};

struct RunOptions {
    ConfirmationPolicy policy = ConfirmationPolicy::ignore;
    /// When set, asked instead of `policy`; receives the rendered path.
    std::function<ConfirmationPolicy(const std::string& rendering)> confirm;
    std::string task_id;
};

/// Raised for environment or oracle failures; carries the partial trace.
class AgentError : public std::runtime_error {
public:
    AgentError(const std::string& what, ExperienceGraph trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const ExperienceGraph& trace() const { return trace_; }

private:
    ExperienceGraph trace_;
};

struct Decision {
    Operation op;
    ScoreBreakdown score;
    std::vector<std::pair<Operation, ScoreBreakdown>> candidates;
};

/// Same element, action and, except for text input, parameter.
bool repeats(const Operation& candidate, const std::vector<Operation>& executed);

GuiPage understand_gui(const GuiPage& page, const KnowledgeBase& kb, const std::string& command, Oracle& oracle,
                       const AgentConfig& config);

CommandUnderstanding understand_command_step(const AgentContext& context, const KnowledgeBase& kb,
                                             std::string_view app_id, Oracle& oracle, const AgentConfig& config);

/// `page` is the annotated current page the candidates were enumerated from.
Decision decide_next(const AgentContext& context, const std::vector<Operation>& candidates, const GuiPage& page,
                     const KnowledgeBase& kb, Oracle& oracle, const PenaltyLedger& ledger,
                     const std::vector<Operation>& executed_forward, const AgentConfig& config);

std::optional<Outcome> try_replay(const std::string& command, const KnowledgeBase& kb, KnowledgeBase& sink,
                                  const EnvState& state, Oracle& oracle, const AgentConfig& config,
                                  const std::string& task_id = {});

/// Replay fast path, then explore-learn. Knowledge (triplets during the run,
/// summaries at the end) is written to `kb`.
Outcome run_command(const std::string& command, const EnvState& state, KnowledgeBase& kb, Oracle& oracle,
                    const AgentConfig& config, const RunOptions& options = {});

/// Text rendering of a path for confirmation: one line per step.
std::string render_confirmation(const ExperienceGraph& graph, const CommandUnderstanding& understanding);

}  // namespace explearn
