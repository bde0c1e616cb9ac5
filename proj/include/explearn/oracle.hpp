#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "explearn/embedding.hpp"
#include "explearn/gui.hpp"

namespace explearn {

struct CommandUnderstanding {
    std::string intent;
    /// Insertion-ordered name/value pairs.
    std::vector<std::pair<std::string, std::string>> parameters;

    std::map<std::string, std::string> parameter_map() const;
    std::vector<std::string> parameter_names() const;
    bool operator==(const CommandUnderstanding&) const = default;
};

struct AgentContext {
    std::string command;
    std::vector<std::pair<Operation, std::string>> executed;  // op and its one-line description
    std::string current_page_text;
    std::optional<CommandUnderstanding> understanding;
};

/// A historical command offered as an understanding example.
struct TaskExample {
    std::string intent;
    std::vector<std::string> parameter_names;
    std::string command;
    std::map<std::string, std::string> parameter_values;
};

/// Everything the scorer sees about one candidate operation.
struct CandidateInfo {
    Operation op;
    std::string description;  // describe(op)
    std::string element_text;
    std::string element_desc;
    std::string surrounding;
    std::vector<std::string> targets;
};

struct CorrectnessResult {
    bool correct = true;
    int penalty = 0;
    bool operator==(const CorrectnessResult&) const = default;
};

enum class LessonCategory { environmental, execution };
std::string_view lesson_category_name(LessonCategory c);

struct LessonResult {
    LessonCategory category = LessonCategory::environmental;
    std::string text;
    bool operator==(const LessonResult&) const = default;
};

struct LessonRequest {
    std::string intent;
    std::string experiences;      // all forward steps, one per line
    std::string erroneous_step;   // describe() of the wrong step
    std::string ground_truth;     // the correct path, one step per line
    Operation erroneous_op;
    std::vector<Operation> ground_truth_ops;
    std::string erroneous_dest_page;  // serialized page the wrong step led to
};

enum class QueryKind { understand, likert, text_parameter, completeness, correctness, lesson };

std::string_view query_kind_name(QueryKind kind);
std::optional<QueryKind> parse_query_kind(std::string_view name);

class OracleFormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Transport-level failure of a remote provider; callers may retry.
class OracleTransportError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Embedding embed(std::string_view text) = 0;
};

/// One structured completion request: the assembled prompt plus the typed
/// inputs it was built from, so a local provider can answer without parsing
/// its own prompt back.
struct Query {
    QueryKind kind = QueryKind::understand;
    std::string prompt;
    const AgentContext* context = nullptr;
    const std::vector<TaskExample>* examples = nullptr;
    const CandidateInfo* candidate = nullptr;
    const std::vector<std::string>* knowledge = nullptr;
    std::string textbox;
    std::string pre_op_page;
    const Operation* last_op = nullptr;
    double accumulated_penalty = 0.0;
    const LessonRequest* lesson = nullptr;
};

/// Model-mediated judgments. Subclasses only answer raw queries; prompt
/// assembly, parsing, range checks and fallbacks live here.
class Oracle : public Embedder {
public:
    /// Throws OracleFormatError when the answer does not fit the template.
    CommandUnderstanding understand_command(const AgentContext& context, const std::vector<TaskExample>& examples);
    int likert_score(const AgentContext& context, const CandidateInfo& candidate,
                     const std::vector<std::string>& lessons);
    std::string text_parameter(const AgentContext& context, const std::string& textbox_description);
    bool completeness_verdict(const AgentContext& context, const std::string& pre_op_page_text,
                              const std::vector<std::string>& knowledge);
    CorrectnessResult correctness_verdict(const AgentContext& context, const std::string& pre_op_page_text,
                                          const Operation& last_op, double accumulated_penalty,
                                          const std::vector<std::string>& knowledge);
    LessonResult summarize_lesson(const LessonRequest& request);

    /// Raw JSON text answering the query's output template.
    virtual std::string answer(const Query& query) = 0;

    /// Visible text that marks the current task as done. Only providers
    /// without language understanding use it; others ignore it.
    virtual void set_completion_cue(std::string cue) { (void)cue; }
};

// Strict parsers for each output template. Out-of-range integers are clamped.
CommandUnderstanding parse_understanding(std::string_view text);
int parse_likert(std::string_view text);
std::string parse_text_parameter(std::string_view text);
bool parse_completeness(std::string_view text);
CorrectnessResult parse_correctness(std::string_view text);
LessonResult parse_lesson(std::string_view text);

/// Section headers, in order, used for a query kind.
std::vector<std::string> prompt_sections(QueryKind kind);

struct PromptExtras {
    std::string candidate;              // likert
    std::string textbox;                // text_parameter
    std::string pre_op_page;            // completeness / correctness
    std::string last_operation;         // correctness
    double accumulated_penalty = 0.0;   // correctness
    std::string experiences;            // lesson
    std::string erroneous_step;         // lesson
    std::string ground_truth;           // lesson
};

std::string assemble_prompt(QueryKind kind, const std::vector<std::string>& knowledge, const AgentContext& context,
                            const PromptExtras& extras);

/// Hex digest used to match transcript records to prompts.
std::string prompt_digest(std::string_view prompt);

}  // namespace explearn
