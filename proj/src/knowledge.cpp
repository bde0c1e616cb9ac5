#include "explearn/knowledge.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "explearn/json_io.hpp"
#include "explearn/kernels.hpp"

namespace explearn {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "explearn-kb";
constexpr int kVersion = 1;

std::string quote_or_placeholder(const std::string& s) {
    if (s.size() >= 2 && s.front() == '<' && s.back() == '>') {
        return s;
    }
    return "'" + s + "'";
}

// ---- persistence -----------------------------------------------------------

json provenance_json(const Provenance& p) {
    return json{{"task_id", p.task_id}, {"sequence", p.sequence}};
}

Provenance provenance_from(const json& j) {
    return {j.at("task_id").get<std::string>(), j.at("sequence").get<std::uint64_t>()};
}

json to_record(const EnvTriplet& t) {
    return json{{"app_id", t.app_id},
                {"source_fp", t.source_fp.hex()},
                {"dest_fp", t.dest_fp.hex()},
                {"source_page", t.source_page_text},
                {"dest_page", t.dest_page_text},
                {"operation", t.op},
                {"description", t.op_description},
                {"provenance", provenance_json(t.provenance)}};
}

PageFingerprint fp_from(const json& j) {
    const auto fp = PageFingerprint::from_hex(j.get<std::string>());
    if (!fp) {
        throw std::invalid_argument("bad fingerprint");
    }
    return *fp;
}

EnvTriplet triplet_from(const json& j) {
    EnvTriplet t;
    t.app_id = j.at("app_id").get<std::string>();
    t.source_fp = fp_from(j.at("source_fp"));
    t.dest_fp = fp_from(j.at("dest_fp"));
    t.source_page_text = j.at("source_page").get<std::string>();
    t.dest_page_text = j.at("dest_page").get<std::string>();
    t.op = j.at("operation").get<Operation>();
    t.op_description = j.at("description").get<std::string>();
    t.provenance = provenance_from(j.at("provenance"));
    return t;
}

template <class Lesson>
json lesson_record(const Lesson& l) {
    return json{{"app_id", l.app_id},
                {"text", l.text},
                {"embedding", l.embedding.values},
                {"provenance", provenance_json(l.provenance)}};
}

template <class Lesson>
Lesson lesson_from(const json& j) {
    Lesson l;
    l.app_id = j.at("app_id").get<std::string>();
    l.text = j.at("text").get<std::string>();
    if (l.text.empty()) {
        throw std::invalid_argument("empty lesson text");
    }
    l.embedding.values = j.at("embedding").get<std::vector<double>>();
    l.provenance = provenance_from(j.at("provenance"));
    return l;
}

json to_record(const TaskKnowledgeItem& t) {
    return json{{"app_id", t.app_id},
                {"intent_name", t.intent_name},
                {"parameter_names", t.parameter_names},
                {"command", t.command},
                {"parameter_values", t.parameter_values},
                {"embedding", t.embedding.values},
                {"provenance", provenance_json(t.provenance)}};
}

TaskKnowledgeItem task_item_from(const json& j) {
    TaskKnowledgeItem t;
    t.app_id = j.at("app_id").get<std::string>();
    t.intent_name = j.at("intent_name").get<std::string>();
    t.parameter_names = j.at("parameter_names").get<std::vector<std::string>>();
    t.command = j.at("command").get<std::string>();
    t.parameter_values = j.at("parameter_values").get<std::map<std::string, std::string>>();
    t.embedding.values = j.at("embedding").get<std::vector<double>>();
    t.provenance = provenance_from(j.at("provenance"));
    std::set<std::string> names(t.parameter_names.begin(), t.parameter_names.end());
    std::set<std::string> keys;
    for (const auto& [k, v] : t.parameter_values) {
        keys.insert(k);
    }
    if (names != keys) {
        throw std::invalid_argument("parameter_values keys differ from parameter_names");
    }
    return t;
}

json to_record(const ExecSequence& s) {
    json steps = json::array();
    for (const auto& step : s.steps) {
        json js{{"action", action_name(step.action)}, {"element_text", step.element_text}};
        if (step.parameter) {
            js["parameter"] = *step.parameter;
        }
        steps.push_back(std::move(js));
    }
    return json{{"app_id", s.app_id},
                {"intent_name", s.intent_name},
                {"steps", steps},
                {"embedding", s.embedding.values},
                {"provenance", provenance_json(s.provenance)}};
}

ExecSequence sequence_from(const json& j) {
    ExecSequence s;
    s.app_id = j.at("app_id").get<std::string>();
    s.intent_name = j.at("intent_name").get<std::string>();
    for (const auto& js : j.at("steps")) {
        ExecStep step;
        const auto name = js.at("action").get<std::string>();
        const auto action = parse_action(name);
        if (!action) {
            throw std::invalid_argument("unknown action '" + name + "'");
        }
        step.action = *action;
        step.element_text = js.at("element_text").get<std::string>();
        if (js.contains("parameter")) {
            step.parameter = js.at("parameter").get<std::string>();
        }
        s.steps.push_back(std::move(step));
    }
    s.embedding.values = j.at("embedding").get<std::vector<double>>();
    s.provenance = provenance_from(j.at("provenance"));
    return s;
}

template <class T, class ToJson>
void write_store(const std::filesystem::path& dir, const char* store, const std::vector<T>& items,
                 std::uint64_t clock, ToJson to_json_fn) {
    const auto path = dir / (std::string(store) + ".jsonl");
    const auto tmp = dir / (std::string(store) + ".jsonl.tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << json{{"format", kFormat}, {"version", kVersion}, {"store", store}, {"count", items.size()},
                    {"clock", clock}}
                   .dump()
            << '\n';
        for (const auto& item : items) {
            out << to_json_fn(item).dump() << '\n';
        }
        out.flush();
        if (!out) {
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

template <class T, class FromJson>
std::vector<T> read_store(const std::filesystem::path& dir, const char* store, std::uint64_t& clock,
                          FromJson from_json_fn) {
    const auto path = dir / (std::string(store) + ".jsonl");
    const auto name = path.string();
    std::ifstream in(path);
    if (!in) {
        throw KnowledgeLoadError(name, 0, "cannot open file");
    }
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected = 0;
    std::vector<T> items;
    while (std::getline(in, line)) {
        ++line_no;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw KnowledgeLoadError(name, line_no, std::string("corrupt record: ") + e.what());
        }
        if (line_no == 1) {
            if (j.value("format", "") != kFormat || j.value("version", 0) != kVersion ||
                j.value("store", "") != store) {
                throw KnowledgeLoadError(name, 1, std::string("header is not a version 1 '") + store + "' store");
            }
            expected = j.value("count", std::size_t{0});
            clock = std::max(clock, j.value("clock", std::uint64_t{0}));
            continue;
        }
        try {
            items.push_back(from_json_fn(j));
        } catch (const std::exception& e) {
            throw KnowledgeLoadError(name, line_no, std::string("corrupt record: ") + e.what());
        }
    }
    if (line_no == 0) {
        throw KnowledgeLoadError(name, 1, "missing header");
    }
    if (items.size() != expected) {
        throw KnowledgeLoadError(name, line_no + 1,
                                 "truncated: header promises " + std::to_string(expected) + " records, found " +
                                     std::to_string(items.size()));
    }
    return items;
}

bool same_triplet(const EnvTriplet& a, const EnvTriplet& b) {
    return a.app_id == b.app_id && a.source_fp == b.source_fp && a.dest_fp == b.dest_fp && a.op == b.op;
}

template <class T>
std::vector<Embedding> embeddings_of(const std::vector<const T*>& items) {
    std::vector<Embedding> out;
    out.reserve(items.size());
    for (const auto* item : items) {
        out.push_back(item->embedding);
    }
    return out;
}

template <class T>
std::vector<const T*> in_app(const std::vector<T>& items, std::string_view app_id) {
    std::vector<const T*> out;
    for (const auto& item : items) {
        if (item.app_id == app_id) {
            out.push_back(&item);
        }
    }
    return out;
}

std::string step_text(ActionKind action, const std::string& element, const std::optional<std::string>& parameter) {
    switch (action) {
    case ActionKind::text_input:
        return "text input " + quote_or_placeholder(parameter.value_or("")) + " into " +
               quote_or_placeholder(element);
    case ActionKind::scroll_forward:
        return "scroll forward " + quote_or_placeholder(element);
    default:
        return std::string(action_name(action)) + " " + quote_or_placeholder(element);
    }
}

}  // namespace

TaskExample TaskKnowledgeItem::example() const {
    return TaskExample{intent_name, parameter_names, command, parameter_values};
}

std::string ExecSequence::render() const {
    std::string out;
    for (const auto& step : steps) {
        if (!out.empty()) {
            out += ", ";
        }
        out += step_text(step.action, step.element_text, step.parameter);
    }
    return out;
}

bool KnowledgeBase::record_triplet(EnvTriplet triplet) {
    for (const auto& t : triplets_) {
        if (same_triplet(t, triplet)) {
            return false;
        }
    }
    triplets_.push_back(std::move(triplet));
    return true;
}

bool KnowledgeBase::add_env_lesson(EnvLesson lesson) {
    for (const auto& l : env_lessons_) {
        if (l.app_id == lesson.app_id && l.text == lesson.text) {
            return false;
        }
    }
    env_lessons_.push_back(std::move(lesson));
    return true;
}

bool KnowledgeBase::add_task_item(TaskKnowledgeItem item) {
    for (const auto& t : task_items_) {
        if (t.app_id == item.app_id && t.command == item.command) {
            return false;
        }
    }
    task_items_.push_back(std::move(item));
    return true;
}

bool KnowledgeBase::add_exec_sequence(ExecSequence sequence) {
    for (const auto& s : exec_sequences_) {
        if (s.app_id == sequence.app_id && s.intent_name == sequence.intent_name && s.steps == sequence.steps) {
            return false;
        }
    }
    exec_sequences_.push_back(std::move(sequence));
    return true;
}

bool KnowledgeBase::add_exec_lesson(ExecLesson lesson) {
    for (const auto& l : exec_lessons_) {
        if (l.app_id == lesson.app_id && l.text == lesson.text) {
            return false;
        }
    }
    exec_lessons_.push_back(std::move(lesson));
    return true;
}

void KnowledgeBase::merge(const KnowledgeBase& other) {
    for (const auto& t : other.triplets_) {
        record_triplet(t);
    }
    for (const auto& l : other.env_lessons_) {
        add_env_lesson(l);
    }
    for (const auto& t : other.task_items_) {
        add_task_item(t);
    }
    for (const auto& s : other.exec_sequences_) {
        add_exec_sequence(s);
    }
    for (const auto& l : other.exec_lessons_) {
        add_exec_lesson(l);
    }
    clock_ = std::max(clock_, other.clock_);
}

bool KnowledgeBase::empty() const {
    return size() == 0;
}

std::size_t KnowledgeBase::size() const {
    return triplets_.size() + env_lessons_.size() + task_items_.size() + exec_sequences_.size() +
           exec_lessons_.size();
}

std::map<std::string, std::vector<std::string>> KnowledgeBase::reachable_relevant_elements(
    const GuiPage& page, const Embedding& command_embedding, double threshold, Embedder& embedder,
    std::size_t max_depth) const {
    std::map<std::string, std::vector<std::string>> out;
    if (triplets_.empty() || max_depth == 0) {
        return out;
    }
    const auto current = fingerprint_page(page);
    std::multimap<PageFingerprint, const EnvTriplet*> outgoing;
    std::map<PageFingerprint, const std::string*> page_texts;
    for (const auto& t : triplets_) {
        if (t.app_id != page.app_id) {
            continue;
        }
        outgoing.emplace(t.source_fp, &t);
        page_texts.emplace(t.dest_fp, &t.dest_page_text);
    }

    // Relevance of every element on a page, computed once per page.
    std::map<PageFingerprint, std::vector<std::pair<std::string, double>>> relevance_cache;
    const auto relevant_on = [&](PageFingerprint fp) -> const std::vector<std::pair<std::string, double>>& {
        auto it = relevance_cache.find(fp);
        if (it != relevance_cache.end()) {
            return it->second;
        }
        std::vector<std::pair<std::string, double>> scored;
        GuiPage reached;
        try {
            reached = parse_page_text(*page_texts.at(fp));
        } catch (const PageParseError&) {
            return relevance_cache.emplace(fp, std::move(scored)).first->second;
        }
        std::vector<std::string> labels;
        std::vector<Embedding> own;
        std::vector<Embedding> around;
        for_each_element(reached, [&](const GuiElement& e, const GuiElement*) {
            if (e.label().empty()) {
                return;
            }
            labels.push_back(e.label());
            own.push_back(embedder.embed(e.text + " " + e.description));
            around.push_back(embedder.embed(surrounding_description(reached, e.id)));
        });
        const auto s_own = kernels::cosine_scores(command_embedding, own);
        const auto s_around = kernels::cosine_scores(command_embedding, around);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            scored.emplace_back(labels[i], std::max(s_own[i], s_around[i]));
        }
        return relevance_cache.emplace(fp, std::move(scored)).first->second;
    };

    std::set<std::string> current_labels;
    for_each_element(page, [&](const GuiElement& e, const GuiElement*) { current_labels.insert(e.label()); });

    for_each_element(page, [&](const GuiElement& e, const GuiElement*) {
        if (!e.interactive()) {
            return;
        }
        std::vector<std::string> targets;
        std::set<PageFingerprint> visited{current};
        std::deque<std::pair<PageFingerprint, std::size_t>> frontier;
        const auto range = outgoing.equal_range(current);
        for (auto it = range.first; it != range.second; ++it) {
            const auto& t = *it->second;
            if (t.op.target == e.id && t.op.label == e.label() && visited.insert(t.dest_fp).second) {
                frontier.emplace_back(t.dest_fp, 1);
            }
        }
        while (!frontier.empty()) {
            const auto [fp, depth] = frontier.front();
            frontier.pop_front();
            for (const auto& [label, score] : relevant_on(fp)) {
                if (score > threshold && !current_labels.count(label) &&
                    std::find(targets.begin(), targets.end(), label) == targets.end()) {
                    targets.push_back(label);
                }
            }
            if (depth >= max_depth) {
                continue;
            }
            const auto next = outgoing.equal_range(fp);
            for (auto it = next.first; it != next.second; ++it) {
                if (visited.insert(it->second->dest_fp).second) {
                    frontier.emplace_back(it->second->dest_fp, depth + 1);
                }
            }
        }
        if (!targets.empty()) {
            out.emplace(e.id, std::move(targets));
        }
    });
    return out;
}

std::vector<std::string> KnowledgeBase::relevant_lessons(std::string_view app_id, const Embedding& context_embedding,
                                                         double threshold) const {
    std::vector<std::string> texts;
    std::vector<Embedding> embeddings;
    for (const auto* l : in_app(env_lessons_, app_id)) {
        texts.push_back(l->text);
        embeddings.push_back(l->embedding);
    }
    for (const auto* l : in_app(exec_lessons_, app_id)) {
        texts.push_back(l->text);
        embeddings.push_back(l->embedding);
    }
    for (const auto* s : in_app(exec_sequences_, app_id)) {
        texts.push_back("To " + s->intent_name + ": " + s->render());
        embeddings.push_back(s->embedding);
    }
    const auto scores = kernels::cosine_scores(context_embedding, embeddings);
    std::vector<std::string> out;
    for (const auto& [index, score] : kernels::rank_above(scores, threshold)) {
        out.push_back(texts[index]);
    }
    return out;
}

std::vector<TaskKnowledgeItem> KnowledgeBase::similar_task_examples(std::string_view app_id,
                                                                    const Embedding& command_embedding,
                                                                    double threshold) const {
    const auto items = in_app(task_items_, app_id);
    const auto scores = kernels::cosine_scores(command_embedding, embeddings_of(items));
    std::vector<TaskKnowledgeItem> out;
    for (const auto& [index, score] : kernels::rank_above(scores, threshold)) {
        out.push_back(*items[index]);
    }
    return out;
}

std::vector<ExecSequence> KnowledgeBase::matching_sequences(std::string_view app_id, const Embedding& intent_embedding,
                                                            double threshold) const {
    const auto items = in_app(exec_sequences_, app_id);
    const auto scores = kernels::cosine_scores(intent_embedding, embeddings_of(items));
    std::vector<ExecSequence> out;
    // rank_above is strict; the replay threshold is inclusive.
    std::vector<std::pair<std::size_t, double>> ranked;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] >= threshold) {
            ranked.emplace_back(i, scores[i]);
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [index, score] : ranked) {
        out.push_back(*items[index]);
    }
    return out;
}

void KnowledgeBase::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_store(dir, "triplets", triplets_, clock_, [](const EnvTriplet& t) { return to_record(t); });
    write_store(dir, "env_lessons", env_lessons_, clock_, [](const EnvLesson& l) { return lesson_record(l); });
    write_store(dir, "task_items", task_items_, clock_, [](const TaskKnowledgeItem& t) { return to_record(t); });
    write_store(dir, "exec_sequences", exec_sequences_, clock_, [](const ExecSequence& s) { return to_record(s); });
    write_store(dir, "exec_lessons", exec_lessons_, clock_, [](const ExecLesson& l) { return lesson_record(l); });
}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& dir) {
    KnowledgeBase kb;
    kb.triplets_ = read_store<EnvTriplet>(dir, "triplets", kb.clock_, triplet_from);
    kb.env_lessons_ = read_store<EnvLesson>(dir, "env_lessons", kb.clock_, lesson_from<EnvLesson>);
    kb.task_items_ = read_store<TaskKnowledgeItem>(dir, "task_items", kb.clock_, task_item_from);
    kb.exec_sequences_ = read_store<ExecSequence>(dir, "exec_sequences", kb.clock_, sequence_from);
    kb.exec_lessons_ = read_store<ExecLesson>(dir, "exec_lessons", kb.clock_, lesson_from<ExecLesson>);
    return kb;
}

ExecSequence templatize_sequence(const std::vector<ExperienceEdge>& path, const CommandUnderstanding& understanding,
                                 std::string_view app_id, Embedder& embedder) {
    if (path.empty()) {
        throw std::invalid_argument("cannot templatize an empty path");
    }
    auto params = understanding.parameters;
    std::stable_sort(params.begin(), params.end(),
                     [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
    // Values are swapped for private markers first so a shorter value never
    // matches inside an already placed placeholder.
    const auto templ = [&](const std::string& s) {
        std::string out = s;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const auto& value = params[i].second;
            if (value.empty()) {
                continue;
            }
            const std::string marker = std::string("\x01") + std::to_string(i) + "\x02";
            for (auto pos = out.find(value); pos != std::string::npos; pos = out.find(value, pos + marker.size())) {
                out.replace(pos, value.size(), marker);
            }
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            const std::string marker = std::string("\x01") + std::to_string(i) + "\x02";
            const std::string placeholder = "<" + params[i].first + ">";
            for (auto pos = out.find(marker); pos != std::string::npos; pos = out.find(marker, pos)) {
                out.replace(pos, marker.size(), placeholder);
            }
        }
        return out;
    };
    ExecSequence seq;
    seq.app_id = std::string(app_id);
    seq.intent_name = understanding.intent;
    for (const auto& edge : path) {
        ExecStep step;
        step.action = edge.op.action;
        step.element_text = templ(edge.op.label);
        if (edge.op.parameter) {
            step.parameter = templ(*edge.op.parameter);
        }
        seq.steps.push_back(std::move(step));
    }
    seq.embedding = embedder.embed(seq.intent_name);
    return seq;
}

std::optional<std::vector<ExecStep>> instantiate_sequence(const ExecSequence& sequence,
                                                          const std::map<std::string, std::string>& parameters) {
    const auto fill = [&](const std::string& s) -> std::optional<std::string> {
        std::string out;
        std::size_t i = 0;
        while (i < s.size()) {
            const auto open = s.find('<', i);
            if (open == std::string::npos) {
                out += s.substr(i);
                break;
            }
            const auto close = s.find('>', open);
            if (close == std::string::npos) {
                out += s.substr(i);
                break;
            }
            out += s.substr(i, open - i);
            const auto name = s.substr(open + 1, close - open - 1);
            const auto it = parameters.find(name);
            if (it == parameters.end() || it->second.empty()) {
                return std::nullopt;
            }
            out += it->second;
            i = close + 1;
        }
        return out;
    };
    std::vector<ExecStep> steps;
    for (const auto& step : sequence.steps) {
        ExecStep s;
        s.action = step.action;
        auto element = fill(step.element_text);
        if (!element) {
            return std::nullopt;
        }
        s.element_text = *element;
        if (step.parameter) {
            auto p = fill(*step.parameter);
            if (!p) {
                return std::nullopt;
            }
            s.parameter = *p;
        }
        steps.push_back(std::move(s));
    }
    return steps;
}

SummaryReport summarize_after_completion(KnowledgeBase& kb, const ExperienceGraph& graph, const std::string& command,
                                         const CommandUnderstanding& understanding, Oracle& oracle,
                                         std::string_view app_id, std::string_view task_id) {
    SummaryReport report;
    const auto names = understanding.parameter_names();
    try {
        report.correct_path = shortest_correct_path(graph, std::set<std::string>(names.begin(), names.end()));
    } catch (const PathExtractionError& e) {
        spdlog::warn("knowledge summarization skipped: {}", e.what());
        report.skipped_reason = e.what();
        return report;
    }
    report.erroneous = erroneous_steps(graph, report.correct_path);

    auto seq = templatize_sequence(report.correct_path, understanding, app_id, oracle);
    seq.provenance = {std::string(task_id), kb.next_sequence()};
    report.sequence_added = kb.add_exec_sequence(std::move(seq));

    TaskKnowledgeItem item;
    item.app_id = std::string(app_id);
    item.intent_name = understanding.intent;
    item.parameter_names = names;
    item.command = command;
    item.parameter_values = understanding.parameter_map();
    item.embedding = oracle.embed(command);
    item.provenance = {std::string(task_id), kb.next_sequence()};
    report.task_item_added = kb.add_task_item(std::move(item));

    std::string experiences;
    for (const auto& e : graph.edges()) {
        experiences += std::to_string(e.step_index) + ". " + e.op_description +
                       (e.kind == EdgeKind::undo ? " (undo)" : "") + "\n";
    }
    std::string truth;
    std::vector<Operation> truth_ops;
    for (std::size_t i = 0; i < report.correct_path.size(); ++i) {
        truth += std::to_string(i + 1) + ". " + report.correct_path[i].op_description + "\n";
        truth_ops.push_back(report.correct_path[i].op);
    }
    for (const auto& wrong : report.erroneous) {
        LessonRequest request;
        request.intent = understanding.intent;
        request.experiences = experiences;
        request.erroneous_step = wrong.op_description;
        request.ground_truth = truth;
        request.erroneous_op = wrong.op;
        request.ground_truth_ops = truth_ops;
        if (const auto* text = graph.page_text(wrong.dest_fp); text != nullptr && wrong.dest_fp != wrong.source_fp) {
            request.erroneous_dest_page = *text;
        }
        const auto lesson = oracle.summarize_lesson(request);
        const auto embedding = oracle.embed(lesson.text);
        if (lesson.category == LessonCategory::environmental) {
            if (kb.add_env_lesson({std::string(app_id), lesson.text, embedding, {std::string(task_id), kb.next_sequence()}})) {
                ++report.env_lessons_added;
            }
        } else if (kb.add_exec_lesson(
                       {std::string(app_id), lesson.text, embedding, {std::string(task_id), kb.next_sequence()}})) {
            ++report.exec_lessons_added;
        }
    }
    return report;
}

}  // namespace explearn
