#include <array>
#include <cstdio>

#include "explearn/oracle.hpp"
#include "explearn/text.hpp"

namespace explearn {
namespace {

constexpr std::array<std::pair<QueryKind, std::string_view>, 6> kKindNames{{
    {QueryKind::understand, "understand_command"},
    {QueryKind::likert, "likert_score"},
    {QueryKind::text_parameter, "text_parameter"},
    {QueryKind::completeness, "completeness_verdict"},
    {QueryKind::correctness, "correctness_verdict"},
    {QueryKind::lesson, "summarize_lesson"},
}};

std::string_view purpose(QueryKind kind) {
    switch (kind) {
    case QueryKind::understand:
        return "Work out what the user's command asks for. Give the intent as a short phrase in which every "
               "parameter value is replaced by a generic name, and list the parameter values taken verbatim "
               "from the command.";
    case QueryKind::likert:
        return "Rate how relevant the candidate operation is to completing the user's command on a 7-point "
               "scale, where 1 means extremely low relevance and 7 means very high relevance.";
    case QueryKind::text_parameter:
        return "Decide what text to type into the textbox below so that the user's command moves forward. "
               "Answer with an empty string if the command supplies no value for it.";
    case QueryKind::completeness:
        return "Decide whether the user's command has already been completed in the current GUI.";
    case QueryKind::correctness:
        return "Decide whether the last operation was a correct step toward the user's command. If not, rate "
               "the severity from 0 to 9: 0 means the error comes from earlier steps, 9 means a serious error "
               "in the last operation itself. An operation that was executed despite a high backtracking "
               "penalty deserves tolerance.";
    case QueryKind::lesson:
        return "One step in the experiences below was a mistake. Say whether it came from missing knowledge "
               "of the app's GUI (environmental) or of how the task must be carried out (execution), and "
               "write one lesson that prevents it next time.";
    }
    return "";
}

std::string_view output_template(QueryKind kind) {
    switch (kind) {
    case QueryKind::understand:
        return R"({"intent": "<phrase>", "parameters": {"<name>": "<value>"}})";
    case QueryKind::likert:
        return R"({"score": <integer 1-7>})";
    case QueryKind::text_parameter:
        return R"({"text": "<text to type>"})";
    case QueryKind::completeness:
        return R"({"completed": <true|false>})";
    case QueryKind::correctness:
        return R"({"correct": <true|false>, "penalty": <integer 0-9>})";
    case QueryKind::lesson:
        return R"({"category": "environmental|execution", "lesson": "<text>"})";
    }
    return "";
}

std::string knowledge_block(const std::vector<std::string>& knowledge) {
    if (knowledge.empty()) {
        return "none";
    }
    std::string out;
    for (const auto& k : knowledge) {
        if (!out.empty()) {
            out += '\n';
        }
        out += "- " + k;
    }
    return out;
}

std::string context_block(const AgentContext& context) {
    std::string out = "Command: " + context.command + "\nExecuted operations:";
    if (context.executed.empty()) {
        out += " none";
    }
    for (std::size_t i = 0; i < context.executed.size(); ++i) {
        out += "\n" + std::to_string(i + 1) + ". " + context.executed[i].second;
    }
    if (context.understanding) {
        out += "\nCurrent understanding: " + context.understanding->intent;
        for (const auto& [name, value] : context.understanding->parameters) {
            out += "; " + name + " = " + value;
        }
    }
    out += "\nCurrent GUI:\n" + context.current_page_text;
    if (!out.empty() && out.back() == '\n') {
        out.pop_back();
    }
    return out;
}

std::string format_penalty(double penalty) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", penalty);
    return buf;
}

void section(std::string& out, std::string_view header, std::string_view body) {
    if (!out.empty()) {
        out += "\n\n";
    }
    out += "### ";
    out += header;
    out += '\n';
    out += body;
}

}  // namespace

std::string_view query_kind_name(QueryKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "";
}

std::optional<QueryKind> parse_query_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

std::vector<std::string> prompt_sections(QueryKind kind) {
    switch (kind) {
    case QueryKind::understand:
        return {"Purpose", "Task knowledge", "Context", "Output template"};
    case QueryKind::likert:
        return {"Purpose", "Execution knowledge", "Context", "Output template"};
    case QueryKind::text_parameter:
        return {"Purpose", "Context", "Textbox to be edited", "Output template"};
    case QueryKind::completeness:
    case QueryKind::correctness:
        return {"Purpose", "Execution knowledge", "GUI before last operation", "Context", "Output template"};
    case QueryKind::lesson:
        return {"Purpose", "Experiences", "Erroneous step", "Ground truth", "Output template"};
    }
    return {};
}

std::string assemble_prompt(QueryKind kind, const std::vector<std::string>& knowledge, const AgentContext& context,
                            const PromptExtras& extras) {
    std::string out;
    for (const auto& header : prompt_sections(kind)) {
        if (header == "Purpose") {
            section(out, header, purpose(kind));
        } else if (header == "Task knowledge" || header == "Execution knowledge") {
            section(out, header, knowledge_block(knowledge));
        } else if (header == "Context") {
            auto body = context_block(context);
            if (kind == QueryKind::likert) {
                body += "\nCandidate operation: " + extras.candidate;
            } else if (kind == QueryKind::correctness) {
                body += "\nLast operation: " + extras.last_operation +
                        "\nAccumulated backtracking penalty of the last operation: " +
                        format_penalty(extras.accumulated_penalty);
            }
            section(out, header, body);
        } else if (header == "Textbox to be edited") {
            section(out, header, extras.textbox);
        } else if (header == "GUI before last operation") {
            auto page = extras.pre_op_page;
            if (!page.empty() && page.back() == '\n') {
                page.pop_back();
            }
            section(out, header, page.empty() ? "none" : page);
        } else if (header == "Experiences") {
            section(out, header, extras.experiences.empty() ? "none" : extras.experiences);
        } else if (header == "Erroneous step") {
            section(out, header, extras.erroneous_step);
        } else if (header == "Ground truth") {
            section(out, header, extras.ground_truth.empty() ? "none" : extras.ground_truth);
        } else if (header == "Output template") {
            section(out, header, output_template(kind));
        }
    }
    out += '\n';
    return out;
}

std::string prompt_digest(std::string_view prompt) {
    return PageFingerprint{text::fnv1a64(prompt)}.hex();
}

}  // namespace explearn
