// Command-line front end: single runs, suites, the accumulation sweep and
// inspection of traces and knowledge bases.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "explearn/agent.hpp"
#include "explearn/harness.hpp"
#include "explearn/heuristic_oracle.hpp"
#include "explearn/remote_oracle.hpp"
#include "explearn/transcript_oracle.hpp"

namespace {

using namespace explearn;

struct Common {
    std::vector<std::string> apps;
    std::string tasks;
    std::string oracle = "heuristic";
    std::string transcript;
    std::uint64_t seed = 0;
    bool baseline = false;
    std::string config;
    std::string out;
    bool interactive_confirm = false;
    std::string policy = "confirm";
    bool table = false;
    std::string verbosity = "warn";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--app", c.apps, "App definition file(s); optional when --tasks names a suite file");
    cmd->add_option("--tasks", c.tasks, "Suite file (.json), or comma-separated task ids");
    cmd->add_option("--oracle", c.oracle, "Oracle provider")
        ->check(CLI::IsMember({"heuristic", "transcript", "remote"}));
    cmd->add_option("--transcript", c.transcript, "Transcript file for --oracle transcript");
    cmd->add_option("--seed", c.seed, "Shuffle seed");
    cmd->add_flag("--baseline", c.baseline, "Disable checking, backtracking and knowledge");
    cmd->add_option("--config", c.config, "JSON file overriding agent configuration fields");
    cmd->add_option("--out", c.out, "Write the machine-readable report here");
    cmd->add_flag("--interactive-confirm", c.interactive_confirm, "Ask on the terminal when a task looks complete");
    cmd->add_option("--policy", c.policy, "Confirmation policy when not interactive")
        ->check(CLI::IsMember({"confirm", "not_completed", "force_terminate", "ignore"}));
    cmd->add_flag("--table", c.table, "Print the table layout to stderr (always on with --out)");
    cmd->add_option("--log-level", c.verbosity, "trace, debug, info, warn, error or off");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << text;
}

AgentConfig agent_config(const Common& c) {
    AgentConfig config = c.oracle == "remote" ? AgentConfig::remote_defaults() : AgentConfig::heuristic_defaults();
    if (!c.config.empty()) {
        config = config_from_json(read_file(c.config), config);
    }
    if (c.baseline) {
        config = config.as_baseline();
    }
    return config;
}

std::unique_ptr<Oracle> make_oracle(const Common& c) {
    if (c.oracle == "remote") {
        return std::make_unique<RemoteOracle>(RemoteConfig::from_environment());
    }
    if (c.oracle == "transcript") {
        if (c.transcript.empty()) {
            throw std::runtime_error("--oracle transcript needs --transcript FILE");
        }
        return std::make_unique<TranscriptOracle>(load_transcript(c.transcript));
    }
    return std::make_unique<HeuristicOracle>();
}

SuiteDefinition build_suite(const Common& c) {
    const auto config = agent_config(c);
    SuiteDefinition suite;
    const bool suite_file = c.tasks.size() > 5 && c.tasks.substr(c.tasks.size() - 5) == ".json";
    if (suite_file) {
        suite = load_suite_file(resolve_fixture(c.tasks), config);
        if (c.baseline) {
            suite.config = suite.config.as_baseline();
        }
    } else {
        if (c.apps.empty()) {
            throw std::runtime_error("--app is required unless --tasks names a suite file");
        }
        std::vector<std::string> ids;
        std::stringstream ss(c.tasks);
        for (std::string id; std::getline(ss, id, ',');) {
            if (!id.empty()) {
                ids.push_back(id);
            }
        }
        std::vector<std::filesystem::path> files(c.apps.begin(), c.apps.end());
        suite = make_suite(files, ids, config);
    }
    suite.seed = c.seed;
    suite.policy = *parse_policy(c.policy);
    return suite;
}

std::function<ConfirmationPolicy(const std::string&)> terminal_confirm(const Common& c) {
    if (!c.interactive_confirm) {
        return {};
    }
    return [](const std::string& rendering) {
        std::cerr << "The task looks complete. Path taken:\n" << rendering;
        while (true) {
            std::cerr << "[y] confirm  [n] not completed  [q] terminate  [i] ignore > " << std::flush;
            std::string line;
            if (!std::getline(std::cin, line)) {
                return ConfirmationPolicy::ignore;
            }
            if (!line.empty()) {
                if (const auto p = policy_from_key(line[0])) {
                    return *p;
                }
            }
        }
    };
}

void set_log_level(const std::string& level) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("explearn"));
    spdlog::set_level(spdlog::level::from_str(level));
}

int cmd_run(const Common& c, const std::string& command_text, const std::string& task_id, const std::string& kb_dir,
            const std::string& trace_out) {
    const auto app =
        std::make_shared<const AppDefinition>(load_app_file(resolve_fixture(c.apps.at(0))));
    const TaskDefinition* task = nullptr;
    if (!task_id.empty()) {
        task = app->find_task(task_id);
        if (task == nullptr) {
            throw std::runtime_error("no task '" + task_id + "' in " + c.apps.at(0));
        }
    }
    const std::string command = task != nullptr ? task->command : command_text;
    if (command.empty()) {
        throw std::runtime_error("run needs --command or --task");
    }
    KnowledgeBase kb;
    if (!kb_dir.empty() && std::filesystem::exists(kb_dir)) {
        kb = KnowledgeBase::load(kb_dir);
    }
    auto oracle = make_oracle(c);
    if (task != nullptr) {
        oracle->set_completion_cue(task->resolved_cue());
    }
    RunOptions options;
    options.policy = *parse_policy(c.policy);
    options.confirm = terminal_confirm(c);
    options.task_id = task != nullptr ? task->task_id : "adhoc";
    const auto outcome = run_command(command, reset(app, task != nullptr ? task->parameters : std::map<std::string, std::string>{}),
                                     kb, *oracle, agent_config(c), options);
    nlohmann::ordered_json j{{"command", command},
                             {"status", status_name(outcome.status)},
                             {"via_replay", outcome.via_replay},
                             {"backtrack_count", outcome.backtrack_count},
                             {"summarized", outcome.summarized}};
    nlohmann::ordered_json ops = nlohmann::ordered_json::array();
    for (const auto& op : outcome.executed_ops) {
        ops.push_back(describe(op));
    }
    j["executed"] = ops;
    if (task != nullptr) {
        j["success"] = check_success(outcome.final_state, *task);
    }
    write_output(c.out, j.dump(2) + "\n");
    if (!trace_out.empty()) {
        write_output(trace_out, export_graph(outcome.trace));
    }
    if (!kb_dir.empty()) {
        kb.save(kb_dir);
    }
    return 0;
}

int cmd_suite(const Common& c, const std::string& kb_out) {
    const auto suite = build_suite(c);
    auto oracle = make_oracle(c);
    const auto report = run_suite(suite, *oracle, terminal_confirm(c));
    write_output(c.out, emit_report(report, ReportFormat::structured));
    if (c.table || !c.out.empty()) {
        std::cerr << emit_report(report, ReportFormat::table);
    }
    if (!kb_out.empty()) {
        report.merged.save(kb_out);
    }
    return 0;
}

int cmd_sweep(const Common& c, const std::vector<double>& fractions, std::size_t repetitions) {
    if (c.oracle == "transcript") {
        throw std::runtime_error("the sweep runs cells in parallel and cannot use a sequential transcript");
    }
    auto suite = build_suite(c);
    suite.policy = ConfirmationPolicy::confirm;
    auto oracle = make_oracle(c);
    const auto phase1 = run_suite(suite, *oracle);
    const auto sweep = knowledge_accumulation_experiment(
        suite, phase1, [&c] { return make_oracle(c); }, fractions, repetitions, c.seed);
    write_output(c.out, emit_sweep(sweep, ReportFormat::structured));
    if (c.table || !c.out.empty()) {
        std::cerr << emit_sweep(sweep, ReportFormat::table);
    }
    return 0;
}

int cmd_record(Common c) {
    if (c.transcript.empty()) {
        throw std::runtime_error("record needs --transcript FILE");
    }
    const auto suite = build_suite(c);
    auto inner = c.oracle == "remote" ? make_oracle(c) : std::make_unique<HeuristicOracle>();
    RecordingOracle recorder(*inner);
    const auto report = run_suite(suite, recorder, terminal_confirm(c));
    save_transcript(recorder.records(), c.transcript);
    write_output(c.out, emit_report(report, ReportFormat::structured));
    return 0;
}

int cmd_replay(Common c) {
    c.oracle = "transcript";
    const auto suite = build_suite(c);
    auto oracle = make_oracle(c);
    const auto report = run_suite(suite, *oracle);
    write_output(c.out, emit_report(report, ReportFormat::structured));
    if (const auto* t = dynamic_cast<TranscriptOracle*>(oracle.get()); t != nullptr && t->remaining() != 0) {
        spdlog::warn("{} transcript answers were not consumed", t->remaining());
    }
    return 0;
}

int cmd_trace_show(const std::string& path) {
    const auto graph = import_graph(read_file(path));
    std::cout << "start " << graph.start_fp().hex() << "\n";
    std::cout << "endpoint " << (graph.endpoint_fp() ? graph.endpoint_fp()->hex() : std::string("none")) << "\n";
    for (const auto& e : graph.edges()) {
        std::cout << "(" << e.step_index << ") " << (e.kind == EdgeKind::forward ? "fwd " : "undo") << ' '
                  << e.source_fp.hex() << " -> " << e.dest_fp.hex() << "  " << e.op_description;
        if (e.score) {
            std::cout << "  score=" << e.score->final_score;
        }
        if (e.check) {
            std::cout << "  check=" << (e.check->completed ? "complete"
                                        : !e.check->correct ? "unchecked"
                                        : *e.check->correct ? "correct"
                                                            : "incorrect(" + std::to_string(e.check->penalty.value_or(0)) + ")");
        }
        std::cout << '\n';
    }
    return 0;
}

int cmd_kb_show(const std::string& dir) {
    const auto kb = KnowledgeBase::load(dir);
    std::cout << "triplets: " << kb.triplets().size() << "\n";
    for (const auto& t : kb.triplets()) {
        std::cout << "  [" << t.app_id << "] " << t.source_fp.hex() << " --" << t.op_description << "--> "
                  << t.dest_fp.hex() << "\n";
    }
    std::cout << "environmental lessons: " << kb.env_lessons().size() << "\n";
    for (const auto& l : kb.env_lessons()) {
        std::cout << "  [" << l.app_id << "] " << l.text << "\n";
    }
    std::cout << "task knowledge: " << kb.task_items().size() << "\n";
    for (const auto& i : kb.task_items()) {
        std::cout << "  [" << i.app_id << "] " << i.intent_name << " <- \"" << i.command << "\"";
        for (const auto& [k, v] : i.parameter_values) {
            std::cout << " {" << k << ": " << v << "}";
        }
        std::cout << "\n";
    }
    std::cout << "execution sequences: " << kb.exec_sequences().size() << "\n";
    for (const auto& s : kb.exec_sequences()) {
        std::cout << "  [" << s.app_id << "] " << s.intent_name << ": " << s.render() << "\n";
    }
    std::cout << "execution lessons: " << kb.exec_lessons().size() << "\n";
    for (const auto& l : kb.exec_lessons()) {
        std::cout << "  [" << l.app_id << "] " << l.text << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explore-and-learn GUI task automation over simulated apps"};
    app.require_subcommand(1);

    Common run_c, suite_c, sweep_c, record_c, replay_c;
    std::string command_text, task_id, kb_dir, trace_out, kb_out;
    std::vector<double> fractions{0.2, 0.4, 0.6, 0.8, 1.0};
    std::size_t repetitions = 10;
    std::string trace_path, kb_path;

    auto* run = app.add_subcommand("run", "Run one command");
    add_common(run, run_c);
    run->get_option("--app")->required();
    run->add_option("--command", command_text, "Natural-language command");
    run->add_option("--task", task_id, "Take command and parameters from this task");
    run->add_option("--kb", kb_dir, "Knowledge directory to load from and save to");
    run->add_option("--trace-out", trace_out, "Write the experience graph here");

    auto* suite = app.add_subcommand("suite", "Run a batch of tasks");
    add_common(suite, suite_c);
    suite->add_option("--kb-out", kb_out, "Save the merged knowledge here");

    auto* sweep = app.add_subcommand("sweep", "Knowledge-accumulation experiment");
    add_common(sweep, sweep_c);
    sweep->add_option("--fractions", fractions, "Fractions of Type-A tasks")->delimiter(',');
    sweep->add_option("--repetitions", repetitions, "Random draws per fraction");

    auto* trace = app.add_subcommand("trace", "Experience traces");
    trace->require_subcommand(1);
    auto* trace_show = trace->add_subcommand("show", "Print an exported trace");
    trace_show->add_option("file", trace_path)->required();

    auto* kb = app.add_subcommand("kb", "Knowledge bases");
    kb->require_subcommand(1);
    auto* kb_show = kb->add_subcommand("show", "Print a saved knowledge base");
    kb_show->add_option("dir", kb_path)->required();

    auto* record = app.add_subcommand("record", "Run a suite and save every oracle answer");
    add_common(record, record_c);

    auto* replay = app.add_subcommand("replay-transcript", "Run a suite against a saved transcript");
    add_common(replay, replay_c);

    CLI11_PARSE(app, argc, argv);

    const Common* active = *run ? &run_c : *suite ? &suite_c : *sweep ? &sweep_c : *record ? &record_c : &replay_c;
    set_log_level(active->verbosity);

    try {
        if (*run) {
            return cmd_run(run_c, command_text, task_id, kb_dir, trace_out);
        }
        if (*suite) {
            return cmd_suite(suite_c, kb_out);
        }
        if (*sweep) {
            return cmd_sweep(sweep_c, fractions, repetitions);
        }
        if (*trace_show) {
            return cmd_trace_show(trace_path);
        }
        if (*kb_show) {
            return cmd_kb_show(kb_path);
        }
        if (*record) {
            return cmd_record(record_c);
        }
        if (*replay) {
            return cmd_replay(replay_c);
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
