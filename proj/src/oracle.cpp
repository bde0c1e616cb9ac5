#include "explearn/oracle.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "explearn/text.hpp"

namespace explearn {
namespace {

using ojson = nlohmann::ordered_json;

ojson parse_object(std::string_view text) {
    // Models like to wrap answers in code fences; take the outermost object.
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw OracleFormatError("answer is not a JSON object");
    }
    ojson j;
    try {
        j = ojson::parse(text.substr(open, close - open + 1));
    } catch (const ojson::parse_error& e) {
        throw OracleFormatError(std::string("answer is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw OracleFormatError("answer is not a JSON object");
    }
    return j;
}

const ojson& field(const ojson& j, const char* key) {
    if (!j.contains(key)) {
        throw OracleFormatError(std::string("answer lacks '") + key + "'");
    }
    return j.at(key);
}

long long integer_field(const ojson& j, const char* key) {
    const auto& v = field(j, key);
    if (v.is_number_integer()) {
        return v.get<long long>();
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == static_cast<double>(static_cast<long long>(d))) {
            return static_cast<long long>(d);
        }
    }
    throw OracleFormatError(std::string("'") + key + "' is not an integer");
}

int clamp_logged(long long value, int lo, int hi, const char* what) {
    if (value < lo || value > hi) {
        spdlog::warn("oracle {} {} out of range [{}, {}], clamped", what, value, lo, hi);
    }
    return static_cast<int>(std::clamp<long long>(value, lo, hi));
}

std::string render_example(const TaskExample& e) {
    ojson params = ojson::object();
    for (const auto& name : e.parameter_names) {
        const auto it = e.parameter_values.find(name);
        params[name] = it == e.parameter_values.end() ? "" : it->second;
    }
    return "Command: \"" + e.command + "\" -> intent: \"" + e.intent + "\", parameters: " + params.dump();
}

}  // namespace

std::map<std::string, std::string> CommandUnderstanding::parameter_map() const {
    return {parameters.begin(), parameters.end()};
}

std::vector<std::string> CommandUnderstanding::parameter_names() const {
    std::vector<std::string> names;
    for (const auto& [name, value] : parameters) {
        names.push_back(name);
    }
    return names;
}

std::string_view lesson_category_name(LessonCategory c) {
    return c == LessonCategory::execution ? "execution" : "environmental";
}

CommandUnderstanding parse_understanding(std::string_view text) {
    const auto j = parse_object(text);
    const auto& intent = field(j, "intent");
    if (!intent.is_string() || intent.get<std::string>().empty()) {
        throw OracleFormatError("'intent' must be a non-empty string");
    }
    const auto& params = field(j, "parameters");
    if (!params.is_object()) {
        throw OracleFormatError("'parameters' must be an object");
    }
    CommandUnderstanding u;
    u.intent = intent.get<std::string>();
    for (const auto& [name, value] : params.items()) {
        if (!value.is_string()) {
            throw OracleFormatError("parameter '" + name + "' is not a string");
        }
        u.parameters.emplace_back(name, value.get<std::string>());
    }
    return u;
}

int parse_likert(std::string_view text) {
    return clamp_logged(integer_field(parse_object(text), "score"), 1, 7, "likert score");
}

std::string parse_text_parameter(std::string_view text) {
    const auto j = parse_object(text);
    const auto& v = field(j, "text");
    if (!v.is_string()) {
        throw OracleFormatError("'text' must be a string");
    }
    return v.get<std::string>();
}

bool parse_completeness(std::string_view text) {
    const auto j = parse_object(text);
    const auto& v = field(j, "completed");
    if (!v.is_boolean()) {
        throw OracleFormatError("'completed' must be true or false");
    }
    return v.get<bool>();
}

CorrectnessResult parse_correctness(std::string_view text) {
    const auto j = parse_object(text);
    const auto& correct = field(j, "correct");
    if (!correct.is_boolean()) {
        throw OracleFormatError("'correct' must be true or false");
    }
    CorrectnessResult r;
    r.correct = correct.get<bool>();
    if (!r.correct) {
        r.penalty = clamp_logged(integer_field(j, "penalty"), 0, 9, "penalty");
    }
    return r;
}

LessonResult parse_lesson(std::string_view text) {
    const auto j = parse_object(text);
    const auto& category = field(j, "category");
    const auto& lesson = field(j, "lesson");
    if (!category.is_string() || !lesson.is_string()) {
        throw OracleFormatError("'category' and 'lesson' must be strings");
    }
    LessonResult r;
    const auto c = category.get<std::string>();
    if (c == "environmental") {
        r.category = LessonCategory::environmental;
    } else if (c == "execution") {
        r.category = LessonCategory::execution;
    } else {
        throw OracleFormatError("unknown lesson category '" + c + "'");
    }
    r.text = lesson.get<std::string>();
    if (r.text.empty()) {
        throw OracleFormatError("'lesson' is empty");
    }
    return r;
}

CommandUnderstanding Oracle::understand_command(const AgentContext& context,
                                                const std::vector<TaskExample>& examples) {
    std::vector<std::string> knowledge;
    for (const auto& e : examples) {
        knowledge.push_back(render_example(e));
    }
    Query q;
    q.kind = QueryKind::understand;
    q.prompt = assemble_prompt(q.kind, knowledge, context, {});
    q.context = &context;
    q.examples = &examples;
    q.knowledge = &knowledge;
    auto u = parse_understanding(answer(q));
    for (auto& [name, value] : u.parameters) {
        value = text::trim_punctuation(value);
        if (value.empty() || context.command.find(value) == std::string::npos) {
            throw OracleFormatError("parameter '" + name + "' is not taken from the command");
        }
    }
    return u;
}

int Oracle::likert_score(const AgentContext& context, const CandidateInfo& candidate,
                         const std::vector<std::string>& lessons) {
    PromptExtras extras;
    extras.candidate = candidate.description;
    if (!candidate.targets.empty()) {
        extras.candidate += " (leads toward: " + text::join(candidate.targets, "; ") + ")";
    }
    Query q;
    q.kind = QueryKind::likert;
    q.prompt = assemble_prompt(q.kind, lessons, context, extras);
    q.context = &context;
    q.candidate = &candidate;
    q.knowledge = &lessons;
    try {
        return parse_likert(answer(q));
    } catch (const OracleFormatError& e) {
        spdlog::warn("likert answer unusable ({}), scoring 1", e.what());
        return 1;
    }
}

std::string Oracle::text_parameter(const AgentContext& context, const std::string& textbox_description) {
    PromptExtras extras;
    extras.textbox = textbox_description;
    Query q;
    q.kind = QueryKind::text_parameter;
    q.prompt = assemble_prompt(q.kind, {}, context, extras);
    q.context = &context;
    q.textbox = textbox_description;
    try {
        return parse_text_parameter(answer(q));
    } catch (const OracleFormatError& e) {
        spdlog::warn("text parameter answer unusable ({}), typing nothing", e.what());
        return {};
    }
}

bool Oracle::completeness_verdict(const AgentContext& context, const std::string& pre_op_page_text,
                                  const std::vector<std::string>& knowledge) {
    PromptExtras extras;
    extras.pre_op_page = pre_op_page_text;
    Query q;
    q.kind = QueryKind::completeness;
    q.prompt = assemble_prompt(q.kind, knowledge, context, extras);
    q.context = &context;
    q.knowledge = &knowledge;
    q.pre_op_page = pre_op_page_text;
    try {
        return parse_completeness(answer(q));
    } catch (const OracleFormatError& e) {
        spdlog::warn("completeness answer unusable ({}), assuming incomplete", e.what());
        return false;
    }
}

CorrectnessResult Oracle::correctness_verdict(const AgentContext& context, const std::string& pre_op_page_text,
                                              const Operation& last_op, double accumulated_penalty,
                                              const std::vector<std::string>& knowledge) {
    PromptExtras extras;
    extras.pre_op_page = pre_op_page_text;
    extras.last_operation = describe(last_op);
    extras.accumulated_penalty = accumulated_penalty;
    Query q;
    q.kind = QueryKind::correctness;
    q.prompt = assemble_prompt(q.kind, knowledge, context, extras);
    q.context = &context;
    q.knowledge = &knowledge;
    q.pre_op_page = pre_op_page_text;
    q.last_op = &last_op;
    q.accumulated_penalty = accumulated_penalty;
    try {
        return parse_correctness(answer(q));
    } catch (const OracleFormatError& e) {
        spdlog::warn("correctness answer unusable ({}), accepting the step", e.what());
        return {true, 0};
    }
}

LessonResult Oracle::summarize_lesson(const LessonRequest& request) {
    PromptExtras extras;
    extras.experiences = request.experiences;
    extras.erroneous_step = request.erroneous_step;
    extras.ground_truth = request.ground_truth;
    Query q;
    q.kind = QueryKind::lesson;
    q.prompt = assemble_prompt(q.kind, {}, AgentContext{}, extras);
    q.lesson = &request;
    try {
        return parse_lesson(answer(q));
    } catch (const OracleFormatError& e) {
        spdlog::warn("lesson answer unusable ({}), using a generic lesson", e.what());
        return {LessonCategory::environmental, "Avoid " + request.erroneous_step + " for " + request.intent};
    }
}

}  // namespace explearn
