#include "explearn/json_io.hpp"

#include <stdexcept>

namespace explearn {

using nlohmann::json;

void to_json(json& j, const Operation& op) {
    j = json{{"action", action_name(op.action)}, {"label", op.label}};
    if (op.target) {
        j["target"] = *op.target;
    }
    if (op.parameter) {
        j["parameter"] = *op.parameter;
    }
}

void from_json(const json& j, Operation& op) {
    const auto name = j.at("action").get<std::string>();
    const auto action = parse_action(name);
    if (!action) {
        throw std::invalid_argument("unknown action '" + name + "'");
    }
    op.action = *action;
    op.label = j.value("label", "");
    op.target = j.contains("target") ? std::optional<std::string>(j.at("target").get<std::string>()) : std::nullopt;
    op.parameter =
        j.contains("parameter") ? std::optional<std::string>(j.at("parameter").get<std::string>()) : std::nullopt;
}

void to_json(json& j, const ScoreBreakdown& s) {
    j = json{{"likert", s.likert},         {"tiebreak", s.tiebreak},         {"basic", s.basic},
             {"repetition", s.repetition}, {"backtracking", s.backtracking}, {"final", s.final_score}};
}

void from_json(const json& j, ScoreBreakdown& s) {
    s.likert = j.at("likert").get<int>();
    s.tiebreak = j.at("tiebreak").get<double>();
    s.basic = j.at("basic").get<double>();
    s.repetition = j.at("repetition").get<double>();
    s.backtracking = j.at("backtracking").get<double>();
    s.final_score = j.at("final").get<double>();
}

void to_json(json& j, const CheckVerdict& v) {
    j = json{{"completed", v.completed}};
    if (v.correct) {
        j["correct"] = *v.correct;
    }
    if (v.penalty) {
        j["penalty"] = *v.penalty;
    }
}

void from_json(const json& j, CheckVerdict& v) {
    v.completed = j.at("completed").get<bool>();
    v.correct = j.contains("correct") ? std::optional<bool>(j.at("correct").get<bool>()) : std::nullopt;
    v.penalty = j.contains("penalty") ? std::optional<int>(j.at("penalty").get<int>()) : std::nullopt;
}

void to_json(json& j, const CommandUnderstanding& u) {
    json params = json::array();
    for (const auto& [name, value] : u.parameters) {
        params.push_back(json::array({name, value}));
    }
    j = json{{"intent", u.intent}, {"parameters", params}};
}

void from_json(const json& j, CommandUnderstanding& u) {
    u.intent = j.at("intent").get<std::string>();
    u.parameters.clear();
    for (const auto& p : j.at("parameters")) {
        u.parameters.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
    }
}

}  // namespace explearn
