#include "explearn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "explearn/kernels.hpp"

namespace explearn {
namespace {

using nlohmann::ordered_json;

// Portable Fisher-Yates: std::shuffle's use of the engine differs between
// standard libraries, which would break cross-platform reproducibility.
template <typename T>
void shuffle_with(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    std::uint64_t out = 0;
    std::vector<std::uint32_t> words(2);
    seq.generate(words.begin(), words.end());
    out = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    return out;
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

double round_ratio(double v) {
    // Keeps the structured dump stable against last-bit noise in printing.
    return std::round(v * 1e12) / 1e12;
}

ordered_json spread_json(const Spread& s) {
    return {{"mean", round_ratio(s.mean)}, {"sd", round_ratio(s.sd)}};
}

ordered_json point_json(const SweepPoint& p) {
    return {{"fraction", p.fraction},
            {"selected", p.selected},
            {"success_rate", spread_json(p.success)},
            {"step_accuracy", spread_json(p.step_accuracy)},
            {"step_redundancy", spread_json(p.step_redundancy)},
            {"non_redundant_completion_rate", spread_json(p.non_redundant_completion)}};
}

const TaskDefinition& task_of(const SuiteTask& t) {
    return *t.task;
}

}  // namespace

// ---- suite definition ------------------------------------------------------

void SuiteDefinition::validate() const {
    config.validate();
    std::set<std::string> seen;
    for (const auto& t : tasks) {
        if (!t.app || t.task == nullptr) {
            throw std::invalid_argument("suite task without app or definition");
        }
        if (!seen.insert(t.task->task_id).second) {
            throw std::invalid_argument("task id '" + t.task->task_id + "' appears twice in the suite");
        }
    }
}

std::filesystem::path resolve_fixture(const std::filesystem::path& path) {
    if (std::filesystem::exists(path) || path.is_absolute()) {
        return path;
    }
    const auto in_fixtures = std::filesystem::path(EXPLEARN_FIXTURE_DIR) / path;
    if (std::filesystem::exists(in_fixtures)) {
        return in_fixtures;
    }
    return path;
}

SuiteDefinition make_suite(const std::vector<std::filesystem::path>& app_files, const std::vector<std::string>& task_ids,
                           AgentConfig config) {
    SuiteDefinition suite;
    suite.config = config;
    for (const auto& f : app_files) {
        suite.apps.push_back(std::make_shared<const AppDefinition>(load_app_file(resolve_fixture(f))));
    }
    const auto select = [&](const std::string& id) {
        for (const auto& app : suite.apps) {
            if (const auto* t = app->find_task(id)) {
                suite.tasks.push_back({app, t});
                return;
            }
        }
        throw std::invalid_argument("no task '" + id + "' in the given apps");
    };
    if (task_ids.empty() || (task_ids.size() == 1 && task_ids[0] == "*")) {
        for (const auto& app : suite.apps) {
            for (const auto& t : app->tasks) {
                suite.tasks.push_back({app, &t});
            }
        }
    } else {
        for (const auto& id : task_ids) {
            select(id);
        }
    }
    suite.validate();
    return suite;
}

SuiteDefinition load_suite_file(const std::filesystem::path& path, AgentConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read suite file " + path.string());
    }
    const auto j = ordered_json::parse(in);
    std::vector<std::filesystem::path> apps;
    for (const auto& a : j.at("apps")) {
        std::filesystem::path p = a.get<std::string>();
        if (p.is_relative() && std::filesystem::exists(path.parent_path() / p)) {
            p = path.parent_path() / p;
        }
        apps.push_back(p);
    }
    std::vector<std::string> ids;
    if (j.contains("tasks") && j.at("tasks").is_array()) {
        for (const auto& t : j.at("tasks")) {
            ids.push_back(t.is_string() ? t.get<std::string>() : t.at("task").get<std::string>());
        }
    }
    if (j.contains("config")) {
        base = config_from_json(j.at("config").dump(), base);
    }
    auto suite = make_suite(apps, ids, base);
    suite.seed = j.value("seed", std::uint64_t{0});
    suite.shuffle = j.value("shuffle", true);
    if (j.contains("accumulate")) {
        suite.accumulate = j.at("accumulate").get<bool>();
    }
    return suite;
}

std::vector<SuiteTask> ordered_tasks(const SuiteDefinition& suite) {
    auto order = suite.tasks;
    if (suite.shuffle) {
        std::mt19937_64 rng(suite.seed);
        shuffle_with(order, rng);
    }
    return order;
}

// ---- running ---------------------------------------------------------------

TaskResult run_task(const SuiteTask& st, KnowledgeBase& kb, Oracle& oracle, const AgentConfig& config,
                    const RunOptions& options) {
    const auto& task = task_of(st);
    TaskResult r;
    r.task_id = task.task_id;
    r.app_id = st.app->app_id;
    r.command = task.command;
    std::vector<StepKey> golden;
    for (const auto& g : task.resolved_golden()) {
        golden.push_back(StepKey::of(g));
    }
    r.golden_steps = golden.size();
    std::vector<Operation> executed;
    oracle.set_completion_cue(task.resolved_cue());
    try {
        auto outcome = run_command(task.command, reset(st.app, task.parameters), kb, oracle, config, options);
        r.status = std::string(status_name(outcome.status));
        r.success = check_success(outcome.final_state, task);
        r.backtrack_count = outcome.backtrack_count;
        r.via_replay = outcome.via_replay;
        r.trace = export_graph(outcome.trace);
        executed = std::move(outcome.executed_ops);
    } catch (const AgentError& e) {
        spdlog::error("task {} failed: {}", task.task_id, e.what());
        r.status = "error";
        r.error = e.what();
        r.trace = export_graph(e.trace());
        for (const auto& edge : e.trace().edges()) {
            executed.push_back(edge.op);
        }
    } catch (const std::exception& e) {
        spdlog::error("task {} failed: {}", task.task_id, e.what());
        r.status = "error";
        r.error = e.what();
    }
    std::vector<StepKey> done;
    for (const auto& op : executed) {
        done.push_back(StepKey::of(op));
        r.executed.push_back(describe(op));
    }
    r.executed_steps = done.size();
    r.correct_steps = correct_steps(golden, done, r.success);
    r.step_accuracy = step_accuracy(golden, done, r.success);
    r.step_redundancy = step_redundancy(golden, done, r.success);
    r.type = classify(r.success, r.executed_steps, r.golden_steps);
    return r;
}

Aggregates Aggregates::of(const std::vector<TaskResult>& rows) {
    Aggregates a;
    a.tasks = rows.size();
    for (const auto t : {TaskType::type1, TaskType::type2, TaskType::type3}) {
        a.types[std::string(task_type_name(t))] = 0;
    }
    if (rows.empty()) {
        return a;
    }
    for (const auto& r : rows) {
        a.success_rate += r.success ? 1.0 : 0.0;
        a.step_accuracy += r.step_accuracy;
        a.step_redundancy += r.step_redundancy;
        a.non_redundant_completion_rate += r.type == TaskType::type1 ? 1.0 : 0.0;
        ++a.types[std::string(task_type_name(r.type))];
    }
    const auto n = static_cast<double>(rows.size());
    a.success_rate /= n;
    a.step_accuracy /= n;
    a.step_redundancy /= n;
    a.non_redundant_completion_rate /= n;
    return a;
}

RunReport run_suite(const SuiteDefinition& suite, Oracle& oracle,
                    const std::function<ConfirmationPolicy(const std::string&)>& confirm) {
    suite.validate();
    RunReport report;
    report.seed = suite.seed;
    report.baseline = !suite.config.enable_checking && !suite.config.enable_backtracking &&
                      !suite.config.enable_knowledge;
    for (const auto& st : ordered_tasks(suite)) {
        RunOptions options;
        options.policy = suite.policy;
        options.confirm = confirm;
        options.task_id = st.task->task_id;
        KnowledgeBase local = suite.accumulate ? report.merged : KnowledgeBase{};
        const auto before = local;
        report.results.push_back(run_task(st, local, oracle, suite.config, options));
        // The delta is what this task alone contributed.
        KnowledgeBase delta;
        for (const auto& t : local.triplets()) {
            if (std::find(before.triplets().begin(), before.triplets().end(), t) == before.triplets().end()) {
                delta.record_triplet(t);
            }
        }
        for (const auto& l : local.env_lessons()) {
            if (std::find(before.env_lessons().begin(), before.env_lessons().end(), l) == before.env_lessons().end()) {
                delta.add_env_lesson(l);
            }
        }
        for (const auto& i : local.task_items()) {
            if (std::find(before.task_items().begin(), before.task_items().end(), i) == before.task_items().end()) {
                delta.add_task_item(i);
            }
        }
        for (const auto& s : local.exec_sequences()) {
            if (std::find(before.exec_sequences().begin(), before.exec_sequences().end(), s) ==
                before.exec_sequences().end()) {
                delta.add_exec_sequence(s);
            }
        }
        for (const auto& l : local.exec_lessons()) {
            if (std::find(before.exec_lessons().begin(), before.exec_lessons().end(), l) ==
                before.exec_lessons().end()) {
                delta.add_exec_lesson(l);
            }
        }
        report.merged.merge(delta);
        report.knowledge.emplace(st.task->task_id, std::move(delta));
    }
    report.aggregates = Aggregates::of(report.results);
    return report;
}

// ---- reports ---------------------------------------------------------------

std::string emit_report(const RunReport& report, ReportFormat format) {
    const auto& a = report.aggregates;
    if (format == ReportFormat::structured) {
        ordered_json rows = ordered_json::array();
        for (const auto& r : report.results) {
            ordered_json row{{"task_id", r.task_id},
                             {"app_id", r.app_id},
                             {"command", r.command},
                             {"status", r.status},
                             {"success", r.success},
                             {"executed_steps", r.executed_steps},
                             {"golden_steps", r.golden_steps},
                             {"correct_steps", r.correct_steps},
                             {"step_accuracy", round_ratio(r.step_accuracy)},
                             {"step_redundancy", round_ratio(r.step_redundancy)},
                             {"backtrack_count", r.backtrack_count},
                             {"via_replay", r.via_replay},
                             {"type", task_type_name(r.type)},
                             {"executed", r.executed}};
            if (r.error) {
                row["error"] = *r.error;
            }
            rows.push_back(std::move(row));
        }
        ordered_json types = ordered_json::object();
        for (const auto& [k, v] : a.types) {
            types[k] = v;
        }
        ordered_json j{{"format", "explearn-report"},
                       {"version", 1},
                       {"seed", report.seed},
                       {"baseline", report.baseline},
                       {"aggregates",
                        {{"tasks", a.tasks},
                         {"success_rate", round_ratio(a.success_rate)},
                         {"step_accuracy", round_ratio(a.step_accuracy)},
                         {"step_redundancy", round_ratio(a.step_redundancy)},
                         {"non_redundant_completion_rate", round_ratio(a.non_redundant_completion_rate)},
                         {"types", types}}},
                       {"results", rows}};
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << std::left << std::setw(28) << "Task" << std::setw(14) << "Success Rate" << std::setw(15) << "Step Accuracy"
       << std::setw(22) << "Step Redundancy Rate" << "Non-redundant Completion Rate\n";
    for (const auto& r : report.results) {
        os << std::setw(28) << r.task_id << std::setw(14) << (r.success ? "1" : "0") << std::setw(15)
           << fixed(r.step_accuracy) << std::setw(22) << fixed(r.step_redundancy)
           << (r.type == TaskType::type1 ? "1" : "0") << '\n';
    }
    if (!report.results.empty()) {
        os << std::setw(28) << "Overall" << std::setw(14) << fixed(a.success_rate) << std::setw(15)
           << fixed(a.step_accuracy) << std::setw(22) << fixed(a.step_redundancy)
           << fixed(a.non_redundant_completion_rate) << '\n';
        os << "Types:";
        for (const auto& [k, v] : a.types) {
            os << ' ' << k << '=' << v;
        }
        os << '\n';
    }
    return os.str();
}

// ---- knowledge accumulation ------------------------------------------------

Spread Spread::of(const std::vector<double>& values) {
    Spread s;
    if (values.empty()) {
        return s;
    }
    for (const double v : values) {
        s.mean += v;
    }
    s.mean /= static_cast<double>(values.size());
    for (const double v : values) {
        s.sd += (v - s.mean) * (v - s.mean);
    }
    s.sd = std::sqrt(s.sd / static_cast<double>(values.size()));
    return s;
}

SweepReport knowledge_accumulation_experiment(const SuiteDefinition& suite, const RunReport& phase1,
                                              const OracleFactory& make_oracle, std::vector<double> fractions,
                                              std::size_t repetitions, std::uint64_t seed) {
    SweepReport out;
    out.seed = seed;
    out.repetitions = repetitions;
    out.fractions = fractions;
    std::map<std::string, TaskType> types;
    for (const auto& r : phase1.results) {
        types[r.task_id] = r.type;
        if (r.type != TaskType::type3) {
            out.type_a.push_back(r.task_id);
        }
        if (r.type != TaskType::type1) {
            out.type_b.push_back(r.task_id);
        }
    }
    if (out.type_b.empty()) {
        out.notice = "no Type-B tasks; nothing to improve";
        spdlog::info("sweep skipped: {}", *out.notice);
        return out;
    }
    if (out.type_a.empty()) {
        out.notice = "empty Type-A pool; experiment skipped";
        spdlog::info("sweep skipped: {}", *out.notice);
        return out;
    }
    const auto find = [&](const std::string& id) -> const SuiteTask& {
        for (const auto& t : suite.tasks) {
            if (t.task->task_id == id) {
                return t;
            }
        }
        throw std::invalid_argument("phase-1 task '" + id + "' is not in the suite");
    };
    const auto phase1_row = [&](const std::string& id) -> const TaskResult& {
        for (const auto& r : phase1.results) {
            if (r.task_id == id) {
                return r;
            }
        }
        throw std::invalid_argument("no phase-1 result for '" + id + "'");
    };

    struct Cell {
        std::size_t task = 0;
        std::size_t rep = 0;
        std::size_t fraction = 0;
        std::vector<std::string> selected;
        TaskResult result;
    };
    std::vector<Cell> cells;
    for (std::size_t ti = 0; ti < out.type_b.size(); ++ti) {
        std::vector<std::string> pool;
        for (const auto& a : out.type_a) {
            if (a != out.type_b[ti]) {
                pool.push_back(a);
            }
        }
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
            std::mt19937_64 rng(mix(seed, ti, rep));
            auto perm = pool;
            shuffle_with(perm, rng);
            for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
                const auto k = static_cast<std::size_t>(std::lround(fractions[fi] * static_cast<double>(pool.size())));
                cells.push_back({ti, rep, fi, {perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(std::min(k, perm.size()))}, {}});
            }
        }
    }

    auto config = suite.config;
    config.enable_knowledge = true;
    kernels::parallel_for(cells.size(), [&](std::size_t i) {
        auto& cell = cells[i];
        KnowledgeBase kb;
        for (const auto& id : cell.selected) {
            const auto it = phase1.knowledge.find(id);
            if (it != phase1.knowledge.end()) {
                kb.merge(it->second);
            }
        }
        auto oracle = make_oracle();
        RunOptions options;
        options.policy = suite.policy;
        options.task_id = out.type_b[cell.task];
        cell.result = run_task(find(out.type_b[cell.task]), kb, *oracle, config, options);
    });

    const auto summarize = [](const std::vector<const TaskResult*>& rows, double fraction, std::size_t selected) {
        std::vector<double> s, acc, red, nrc;
        for (const auto* r : rows) {
            s.push_back(r->success ? 1.0 : 0.0);
            acc.push_back(r->step_accuracy);
            red.push_back(r->step_redundancy);
            nrc.push_back(r->type == TaskType::type1 ? 1.0 : 0.0);
        }
        return SweepPoint{fraction, selected, Spread::of(s), Spread::of(acc), Spread::of(red), Spread::of(nrc)};
    };

    for (std::size_t ti = 0; ti < out.type_b.size(); ++ti) {
        SweepCurve curve;
        curve.task_id = out.type_b[ti];
        curve.phase1_type = types[curve.task_id];
        curve.points.push_back(summarize({&phase1_row(curve.task_id)}, 0.0, 0));
        for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
            std::vector<const TaskResult*> rows;
            std::size_t selected = 0;
            for (const auto& c : cells) {
                if (c.task == ti && c.fraction == fi) {
                    rows.push_back(&c.result);
                    selected = c.selected.size();
                }
            }
            curve.points.push_back(summarize(rows, fractions[fi], selected));
        }
        out.per_task.push_back(std::move(curve));
    }
    {
        std::vector<const TaskResult*> base;
        for (const auto& id : out.type_b) {
            base.push_back(&phase1_row(id));
        }
        out.overall.push_back(summarize(base, 0.0, 0));
    }
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        std::vector<const TaskResult*> rows;
        for (const auto& c : cells) {
            if (c.fraction == fi) {
                rows.push_back(&c.result);
            }
        }
        out.overall.push_back(summarize(rows, fractions[fi], 0));
    }
    return out;
}

std::string emit_sweep(const SweepReport& report, ReportFormat format) {
    if (format == ReportFormat::structured) {
        ordered_json curves = ordered_json::array();
        for (const auto& c : report.per_task) {
            ordered_json pts = ordered_json::array();
            for (const auto& p : c.points) {
                pts.push_back(point_json(p));
            }
            curves.push_back({{"task_id", c.task_id}, {"phase1_type", task_type_name(c.phase1_type)}, {"points", pts}});
        }
        ordered_json overall = ordered_json::array();
        for (const auto& p : report.overall) {
            overall.push_back(point_json(p));
        }
        ordered_json j{{"format", "explearn-sweep"},
                       {"version", 1},
                       {"seed", report.seed},
                       {"repetitions", report.repetitions},
                       {"fractions", report.fractions},
                       {"type_a", report.type_a},
                       {"type_b", report.type_b},
                       {"overall", overall},
                       {"per_task", curves}};
        if (report.notice) {
            j["notice"] = *report.notice;
        }
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    if (report.notice) {
        os << "notice: " << *report.notice << '\n';
    }
    os << std::left << std::setw(10) << "Fraction" << std::setw(20) << "Success Rate" << std::setw(20)
       << "Step Accuracy" << std::setw(22) << "Step Redundancy Rate" << "Non-redundant Completion Rate\n";
    const auto cell = [](const Spread& s) { return fixed(s.mean, 3) + " +- " + fixed(s.sd, 3); };
    for (const auto& p : report.overall) {
        os << std::setw(10) << fixed(p.fraction, 1) << std::setw(20) << cell(p.success) << std::setw(20)
           << cell(p.step_accuracy) << std::setw(22) << cell(p.step_redundancy) << cell(p.non_redundant_completion)
           << '\n';
    }
    return os.str();
}

}  // namespace explearn
