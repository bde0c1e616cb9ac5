#pragma once

// nlohmann::json conversions for the value types that get persisted or
// exported.

#include <nlohmann/json.hpp>

#include "explearn/gui.hpp"
#include "explearn/oracle.hpp"
#include "explearn/scoring.hpp"

namespace explearn {

void to_json(nlohmann::json& j, const Operation& op);
void from_json(const nlohmann::json& j, Operation& op);

void to_json(nlohmann::json& j, const ScoreBreakdown& s);
void from_json(const nlohmann::json& j, ScoreBreakdown& s);

void to_json(nlohmann::json& j, const CheckVerdict& v);
void from_json(const nlohmann::json& j, CheckVerdict& v);

void to_json(nlohmann::json& j, const CommandUnderstanding& u);
void from_json(const nlohmann::json& j, CommandUnderstanding& u);

}  // namespace explearn
