#include "explearn/agent.hpp"

#include <algorithm>
#include <array>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace explearn {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<ConfirmationPolicy, std::string_view>, 4> kPolicyNames{{
    {ConfirmationPolicy::confirm, "confirm"},
    {ConfirmationPolicy::not_completed, "not_completed"},
    {ConfirmationPolicy::force_terminate, "force_terminate"},
    {ConfirmationPolicy::ignore, "ignore"},
}};

struct ForwardFrame {
    std::size_t edge = 0;
    Operation op;
    PageFingerprint source_fp;
    std::string pre_page_text;
};

std::set<std::string> params_used_by(const Operation& op, const CommandUnderstanding* u) {
    std::set<std::string> used;
    if (u == nullptr) {
        return used;
    }
    for (const auto& [name, value] : u->parameters) {
        if (value.empty()) {
            continue;
        }
        if ((op.action == ActionKind::text_input && op.parameter == value) ||
            (op.action == ActionKind::click && op.label == value)) {
            used.insert(name);
        }
    }
    return used;
}

std::string command_context(const std::string& command, const std::optional<CommandUnderstanding>& u) {
    return u ? command + " " + u->intent : command;
}

void record_triplet(KnowledgeBase& kb, const GuiPage& source, const Operation& op, const GuiPage& dest,
                    const std::string& task_id) {
    EnvTriplet t;
    t.app_id = source.app_id;
    const auto s = strip_annotations(source);
    const auto d = strip_annotations(dest);
    t.source_fp = fingerprint_page(s);
    t.dest_fp = fingerprint_page(d);
    t.source_page_text = serialize_page(s);
    t.dest_page_text = serialize_page(d);
    t.op = op;
    t.op_description = describe(op);
    t.provenance = {task_id, 0};
    if (kb.triplets().end() == std::find_if(kb.triplets().begin(), kb.triplets().end(), [&](const EnvTriplet& x) {
            return x.app_id == t.app_id && x.source_fp == t.source_fp && x.dest_fp == t.dest_fp && x.op == t.op;
        })) {
        t.provenance.sequence = kb.next_sequence();
        kb.record_triplet(std::move(t));
    }
}

}  // namespace

// ---- configuration ---------------------------------------------------------

AgentConfig AgentConfig::remote_defaults() {
    AgentConfig c;
    c.target_similarity_threshold = 0.80;
    c.example_similarity_threshold = 0.82;
    c.lesson_similarity_threshold = 0.78;
    c.replay_intent_threshold = 0.90;
    return c;
}

AgentConfig AgentConfig::as_baseline() const {
    AgentConfig c = *this;
    c.enable_checking = false;
    c.enable_backtracking = false;
    c.enable_knowledge = false;
    return c;
}

void AgentConfig::validate() const {
    if (step_limit < 1) {
        throw std::invalid_argument("step_limit must be at least 1");
    }
    for (const double t : {target_similarity_threshold, example_similarity_threshold, lesson_similarity_threshold,
                           replay_intent_threshold}) {
        if (!(t >= -1.0 && t <= 1.0)) {
            throw std::invalid_argument("similarity thresholds must lie in [-1, 1]");
        }
    }
    if (repetition_penalty < 0.0 || tolerance_penalty_floor < 0.0) {
        throw std::invalid_argument("penalties must be non-negative");
    }
}

AgentConfig config_from_json(std::string_view text, AgentConfig c) {
    const auto j = json::parse(text);
    if (!j.is_object()) {
        throw std::invalid_argument("agent configuration must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "step_limit") {
            c.step_limit = value.get<int>();
        } else if (key == "repetition_penalty") {
            c.repetition_penalty = value.get<double>();
        } else if (key == "target_similarity_threshold") {
            c.target_similarity_threshold = value.get<double>();
        } else if (key == "example_similarity_threshold") {
            c.example_similarity_threshold = value.get<double>();
        } else if (key == "lesson_similarity_threshold") {
            c.lesson_similarity_threshold = value.get<double>();
        } else if (key == "replay_intent_threshold") {
            c.replay_intent_threshold = value.get<double>();
        } else if (key == "tolerance_penalty_floor") {
            c.tolerance_penalty_floor = value.get<double>();
        } else if (key == "enable_checking") {
            c.enable_checking = value.get<bool>();
        } else if (key == "enable_backtracking") {
            c.enable_backtracking = value.get<bool>();
        } else if (key == "enable_knowledge") {
            c.enable_knowledge = value.get<bool>();
        } else if (key == "likert_range" || key == "tiebreak_range") {
            // Fixed by the scoring formula; accepted for completeness only.
        } else {
            throw std::invalid_argument("unknown configuration key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

std::string config_to_json(const AgentConfig& c) {
    return json{{"step_limit", c.step_limit},
                {"repetition_penalty", c.repetition_penalty},
                {"likert_range", {kLikertMin, kLikertMax}},
                {"tiebreak_range", {0, 1}},
                {"target_similarity_threshold", c.target_similarity_threshold},
                {"example_similarity_threshold", c.example_similarity_threshold},
                {"lesson_similarity_threshold", c.lesson_similarity_threshold},
                {"replay_intent_threshold", c.replay_intent_threshold},
                {"tolerance_penalty_floor", c.tolerance_penalty_floor},
                {"enable_checking", c.enable_checking},
                {"enable_backtracking", c.enable_backtracking},
                {"enable_knowledge", c.enable_knowledge}}
        .dump(2);
}

std::string_view policy_name(ConfirmationPolicy p) {
    for (const auto& [k, name] : kPolicyNames) {
        if (k == p) {
            return name;
        }
    }
    return "ignore";
}

std::optional<ConfirmationPolicy> parse_policy(std::string_view name) {
    for (const auto& [k, n] : kPolicyNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<ConfirmationPolicy> policy_from_key(char key) {
    switch (key) {
    case 'y':
    case 'Y':
        return ConfirmationPolicy::confirm;
    case 'n':
    case 'N':
        return ConfirmationPolicy::not_completed;
    case 'q':
    case 'Q':
        return ConfirmationPolicy::force_terminate;
    case 'i':
    case 'I':
        return ConfirmationPolicy::ignore;
    default:
        return std::nullopt;
    }
}

std::string_view status_name(OutcomeStatus s) {
    switch (s) {
    case OutcomeStatus::completed:
        return "completed";
    case OutcomeStatus::step_limit_exceeded:
        return "step_limit_exceeded";
    case OutcomeStatus::force_terminated:
        return "force_terminated";
    }
    return "";
}

// ---- ledger ----------------------------------------------------------------

double PenaltyLedger::total(PageFingerprint fp, const Operation& op) const {
    const auto it = totals_.find(key(fp, op));
    return it == totals_.end() ? 0.0 : it->second;
}

double PenaltyLedger::unforgiven(PageFingerprint fp, const Operation& op) const {
    const auto it = forgiven_.find(key(fp, op));
    return total(fp, op) - (it == forgiven_.end() ? 0.0 : it->second);
}

void PenaltyLedger::add(PageFingerprint fp, const Operation& op, double penalty) {
    if (penalty < 0.0) {
        throw std::invalid_argument("backtracking penalties are non-negative");
    }
    totals_[key(fp, op)] += penalty;
}

void PenaltyLedger::forgive(PageFingerprint fp, const Operation& op) {
    forgiven_[key(fp, op)] = total(fp, op);
}

// ---- modules ---------------------------------------------------------------

bool repeats(const Operation& candidate, const std::vector<Operation>& executed) {
    return std::any_of(executed.begin(), executed.end(), [&](const Operation& e) {
        if (e.action != candidate.action || e.label != candidate.label) {
            return false;
        }
        // A text input's value is only chosen after scoring.
        return candidate.action == ActionKind::text_input || e.parameter == candidate.parameter;
    });
}

GuiPage understand_gui(const GuiPage& page, const KnowledgeBase& kb, const std::string& command, Oracle& oracle,
                       const AgentConfig& config) {
    GuiPage out = page;
    if (!config.enable_knowledge || kb.triplets().empty()) {
        return out;
    }
    const auto targets =
        kb.reachable_relevant_elements(strip_annotations(page), oracle.embed(command), config.target_similarity_threshold,
                                       oracle);
    for (const auto& [id, list] : targets) {
        if (auto* e = find_element(out, id)) {
            e->targets = list;
        }
    }
    return out;
}

CommandUnderstanding understand_command_step(const AgentContext& context, const KnowledgeBase& kb,
                                             std::string_view app_id, Oracle& oracle, const AgentConfig& config) {
    std::vector<TaskExample> examples;
    if (config.enable_knowledge) {
        for (const auto& item :
             kb.similar_task_examples(app_id, oracle.embed(context.command), config.example_similarity_threshold)) {
            examples.push_back(item.example());
        }
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            return oracle.understand_command(context, examples);
        } catch (const OracleFormatError& e) {
            spdlog::warn("command understanding attempt {} unusable: {}", attempt + 1, e.what());
        }
    }
    return CommandUnderstanding{context.command, {}};
}

Decision decide_next(const AgentContext& context, const std::vector<Operation>& candidates, const GuiPage& page,
                     const KnowledgeBase& kb, Oracle& oracle, const PenaltyLedger& ledger,
                     const std::vector<Operation>& executed_forward, const AgentConfig& config) {
    if (candidates.empty()) {
        throw std::invalid_argument("decide_next needs at least one candidate");
    }
    const auto fp = fingerprint_page(page);
    const auto ctx_text = command_context(context.command, context.understanding);
    const auto ctx_embedding = oracle.embed(ctx_text);
    std::vector<std::string> lessons;
    if (config.enable_knowledge) {
        lessons = kb.relevant_lessons(page.app_id, ctx_embedding, config.lesson_similarity_threshold);
    }
    Decision d;
    std::optional<std::size_t> best;
    for (const auto& c : candidates) {
        const GuiElement* e = c.target ? find_element(page, *c.target) : nullptr;
        CandidateInfo info;
        info.op = c;
        info.description = describe(c);
        if (e != nullptr) {
            info.element_text = e->text;
            info.element_desc = e->description;
            info.surrounding = surrounding_description(page, e->id);
            info.targets = e->targets;
        }
        const int likert = oracle.likert_score(context, info, lessons);
        const double tiebreak = tiebreak_from_cosine(similarity(oracle.embed(info.surrounding), ctx_embedding));
        const double repetition = repeats(c, executed_forward) ? config.repetition_penalty : 0.0;
        const double backtracking = config.enable_backtracking ? ledger.total(fp, c) : 0.0;
        const auto score = ScoreBreakdown::compute(likert, tiebreak, repetition, backtracking);
        d.candidates.emplace_back(c, score);
        if (!best || score.final_score > d.candidates[*best].second.final_score) {
            best = d.candidates.size() - 1;
        }
    }
    d.op = d.candidates[*best].first;
    d.score = d.candidates[*best].second;
    if (d.op.action == ActionKind::text_input) {
        const auto* e = find_element(page, *d.op.target);
        d.op.parameter = oracle.text_parameter(context, e != nullptr ? e->label() : d.op.label);
    }
    return d;
}

std::string render_confirmation(const ExperienceGraph& graph, const CommandUnderstanding& understanding) {
    std::vector<ExperienceEdge> steps;
    const auto names = understanding.parameter_names();
    try {
        steps = shortest_correct_path(graph, {names.begin(), names.end()});
    } catch (const PathExtractionError&) {
        for (const auto& e : graph.edges()) {
            if (e.kind == EdgeKind::forward) {
                steps.push_back(e);
            }
        }
    }
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out += std::to_string(i + 1) + ". " + steps[i].op_description;
        if (!steps[i].op.label.empty()) {
            out += "  [element: " + steps[i].op.label + "]";
        }
        out += '\n';
    }
    return out;
}

// ---- replay ----------------------------------------------------------------

std::optional<Outcome> try_replay(const std::string& command, const KnowledgeBase& kb, KnowledgeBase& sink,
                                  const EnvState& state, Oracle& oracle, const AgentConfig& config,
                                  const std::string& task_id) {
    auto page = current_page(state);
    AgentContext context;
    context.command = command;
    context.current_page_text = serialize_page(page);
    const auto understanding = understand_command_step(context, kb, page.app_id, oracle, config);
    const auto sequences =
        kb.matching_sequences(page.app_id, oracle.embed(understanding.intent), config.replay_intent_threshold);
    if (sequences.empty()) {
        return std::nullopt;
    }
    const auto steps = instantiate_sequence(sequences.front(), understanding.parameter_map());
    if (!steps) {
        spdlog::info("replay of '{}' skipped: a placeholder has no value", sequences.front().intent_name);
        return std::nullopt;
    }
    Outcome out;
    out.via_replay = true;
    out.understanding = understanding;
    out.trace = ExperienceGraph(page);
    EnvState current = state;
    std::vector<std::tuple<GuiPage, Operation, GuiPage>> observed;
    for (const auto& step : *steps) {
        auto op = find_operation(current, step.action, step.element_text);
        if (!op) {
            spdlog::info("replay of '{}' aborted: no '{}' on page '{}'", sequences.front().intent_name,
                         step.element_text, current.current_page_id());
            return std::nullopt;
        }
        op->parameter = step.parameter;
        auto next = apply_operation(current, *op);
        auto dest = mark_new_elements(page, current_page(next));
        out.trace.record_step(page, *op, dest, std::nullopt, std::nullopt, EdgeKind::forward,
                              params_used_by(*op, &understanding));
        observed.emplace_back(page, *op, dest);
        out.executed_ops.push_back(*op);
        current = std::move(next);
        page = std::move(dest);
    }
    // Only a replay that went through leaves knowledge behind.
    for (const auto& [s, op, d] : observed) {
        record_triplet(sink, s, op, d, task_id);
    }
    out.trace.set_endpoint(fingerprint_page(page));
    out.status = OutcomeStatus::completed;
    out.final_state = std::move(current);
    return out;
}

// ---- controller ------------------------------------------------------------

Outcome run_command(const std::string& command, const EnvState& initial, KnowledgeBase& kb, Oracle& oracle,
                    const AgentConfig& config, const RunOptions& options) {
    config.validate();
    if (config.enable_knowledge) {
        if (auto replayed = try_replay(command, kb, kb, initial, oracle, config, options.task_id)) {
            return std::move(*replayed);
        }
    }

    Outcome out;
    EnvState state = initial;
    GuiPage previous = current_page(state);
    const std::string app_id = previous.app_id;
    out.trace = ExperienceGraph(previous);

    std::vector<ForwardFrame> live;           // forward steps not undone, oldest first
    std::vector<Operation> executed_forward;  // every forward step, undone or not
    std::vector<std::pair<Operation, std::string>> executed_described;
    std::set<PageFingerprint> barred;
    PenaltyLedger ledger;
    std::optional<CommandUnderstanding> understanding;
    int steps = 0;
    bool backtracking = false;

    const auto make_context = [&](const GuiPage& page) {
        AgentContext c;
        c.command = command;
        c.executed = executed_described;
        c.current_page_text = serialize_page(page);
        c.understanding = understanding;
        return c;
    };
    const auto knowledge_for_checks = [&]() {
        if (!config.enable_knowledge) {
            return std::vector<std::string>{};
        }
        return kb.relevant_lessons(app_id, oracle.embed(command_context(command, understanding)),
                                   config.lesson_similarity_threshold);
    };
    const auto summarize = [&]() {
        if (!config.enable_knowledge || !understanding) {
            return;
        }
        out.summary = summarize_after_completion(kb, out.trace, command, *understanding, oracle, app_id,
                                                 options.task_id);
        out.summarized = !out.summary->skipped_reason;
    };

    try {
        while (true) {
            std::string step_pre_page;
            std::size_t step_edge = 0;
            GuiPage annotated;

            if (!backtracking) {
                annotated = understand_gui(mark_new_elements(previous, current_page(state)), kb, command, oracle,
                                           config);
                auto context = make_context(annotated);
                understanding = understand_command_step(context, kb, app_id, oracle, config);
                context.understanding = understanding;
                const auto candidates = enumerate_operations(state);
                if (candidates.empty()) {
                    if (config.enable_backtracking && !live.empty()) {
                        backtracking = true;
                        continue;
                    }
                    spdlog::info("no operation available on page '{}'; stopping", state.current_page_id());
                    out.status = OutcomeStatus::step_limit_exceeded;
                    break;
                }
                const auto decision =
                    decide_next(context, candidates, annotated, kb, oracle, ledger, executed_forward, config);
                auto next = apply_operation(state, decision.op);
                ++steps;
                const auto dest = current_page(next);
                const auto marked = mark_new_elements(strip_annotations(annotated), dest);
                step_edge = out.trace.record_step(annotated, decision.op, marked, decision.score, std::nullopt,
                                                  EdgeKind::forward, params_used_by(decision.op, &*understanding));
                if (config.enable_knowledge) {
                    record_triplet(kb, annotated, decision.op, dest, options.task_id);
                }
                step_pre_page = serialize_page(annotated);
                live.push_back({step_edge, decision.op, fingerprint_page(annotated), step_pre_page});
                executed_forward.push_back(decision.op);
                executed_described.emplace_back(decision.op, describe(decision.op));
                out.executed_ops.push_back(decision.op);
                state = std::move(next);
                previous = marked;
            } else {
                if (live.empty()) {
                    backtracking = false;  // cannot go behind the start
                    continue;
                }
                const auto frame = live.back();
                const auto before = mark_new_elements(previous, current_page(state));
                auto [next, undo] = undo_operation(state, frame.op);
                ++steps;
                ++out.backtrack_count;
                const auto dest = mark_new_elements(before, current_page(next));
                step_edge = out.trace.record_step(before, undo, dest, std::nullopt, std::nullopt, EdgeKind::undo, {},
                                                  frame.edge);
                step_pre_page = serialize_page(before);
                live.pop_back();
                executed_described.emplace_back(undo, describe(undo));
                out.executed_ops.push_back(undo);
                state = std::move(next);
                previous = dest;
            }

            // ---- check ----
            const auto context = make_context(previous);
            const auto knowledge = knowledge_for_checks();
            const bool said_complete = oracle.completeness_verdict(context, step_pre_page, knowledge);
            const auto here = fingerprint_page(previous);
            const bool at_limit = steps >= config.step_limit;
            const bool complete = said_complete && !barred.count(here);
            if (complete || at_limit) {
                out.trace.attach_check(step_edge, CheckVerdict::complete());
                if (complete) {
                    out.trace.set_endpoint(here);
                }
                auto policy = options.policy;
                if (options.confirm && complete) {
                    policy = options.confirm(render_confirmation(out.trace, understanding.value_or(CommandUnderstanding{})));
                }
                if (policy == ConfirmationPolicy::not_completed && complete && !at_limit) {
                    barred.insert(here);
                    out.trace.clear_endpoint();
                    backtracking = false;
                    continue;
                }
                if (policy == ConfirmationPolicy::force_terminate) {
                    out.status = OutcomeStatus::force_terminated;
                } else if (complete && policy != ConfirmationPolicy::not_completed) {
                    out.status = OutcomeStatus::completed;
                    summarize();
                } else {
                    out.status = OutcomeStatus::step_limit_exceeded;
                }
                break;
            }

            if (!config.enable_checking || live.empty()) {
                out.trace.attach_check(step_edge, live.empty() ? CheckVerdict::ok() : CheckVerdict::unchecked());
                backtracking = false;
                continue;
            }
            const auto& last = live.back();
            const double seen = ledger.unforgiven(last.source_fp, last.op);
            const auto result =
                oracle.correctness_verdict(context, last.pre_page_text, last.op, seen, knowledge);
            if (result.correct) {
                if (seen >= config.tolerance_penalty_floor) {
                    ledger.forgive(last.source_fp, last.op);
                }
                out.trace.attach_check(step_edge, CheckVerdict::ok());
                backtracking = false;
            } else {
                ledger.add(last.source_fp, last.op, result.penalty);
                out.trace.attach_check(step_edge, CheckVerdict::incorrect(result.penalty));
                backtracking = config.enable_backtracking;
            }
        }
    } catch (const InvalidOperation& e) {
        throw AgentError(e.what(), out.trace);
    } catch (const UndoError& e) {
        throw AgentError(e.what(), out.trace);
    } catch (const OracleTransportError& e) {
        throw AgentError(e.what(), out.trace);
    }
    out.understanding = understanding;
    out.final_state = std::move(state);
    return out;
}

}  // namespace explearn
