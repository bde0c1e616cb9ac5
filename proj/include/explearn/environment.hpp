#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "explearn/gui.hpp"

namespace explearn {

/// Equality conjunction over the variable store. A required value of ""
/// means "unset or empty" and "*" means "set to anything non-empty". Values
/// may carry `{param}` slots filled from task parameters.
using Condition = std::vector<std::pair<std::string, std::string>>;

struct ElementTemplate {
    std::string id;
    Role role = Role::container;
    std::string text;
    std::string description;
    bool clickable = false;
    bool editable = false;
    bool scrollable = false;
    std::string binding;  // text boxes: variable set by text input
    Condition visible_when;
    std::vector<ElementTemplate> children;
};

struct ListWindow {
    std::size_t window_size = 1;
    std::vector<ElementTemplate> items;
};

inline constexpr std::string_view kStay = "stay";

struct Transition {
    std::string source_element;
    ActionKind action = ActionKind::click;
    Condition guard;
    std::vector<std::pair<std::string, std::string>> effects;
    std::string destination;  // page id or kStay
};

struct PageTemplate {
    std::string page_id;
    ElementTemplate root;
    std::vector<Transition> transitions;
    std::map<std::string, ListWindow> list_windows;
};

struct OpDescriptor {
    ActionKind action = ActionKind::click;
    std::string element_text;
    std::optional<std::string> parameter;
};

struct SuccessPredicate {
    std::optional<std::string> page;
    Condition variables;
};

struct TaskDefinition {
    std::string task_id;
    std::string command;
    std::vector<OpDescriptor> golden_sequence;
    std::map<std::string, std::string> parameters;
    SuccessPredicate success_predicate;
    std::string completion_cue;
    std::vector<std::string> tags;

    /// Golden steps with slots resolved against the task parameters.
    std::vector<OpDescriptor> resolved_golden() const;
    std::string resolved_cue() const;
    bool has_tag(std::string_view tag) const;
};

struct AppDefinition {
    std::string app_id;
    std::string start_page;
    std::map<std::string, PageTemplate> pages;
    std::vector<TaskDefinition> tasks;

    const TaskDefinition* find_task(std::string_view task_id) const;
    const TaskDefinition* find_task_by_command(std::string_view command) const;
};

class LoadError : public std::runtime_error {
public:
    LoadError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class InvalidOperation : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class UndoError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses and validates an app document, including replay of every task's
/// golden sequence.
AppDefinition load_app_text(std::string_view document);
AppDefinition load_app_file(const std::filesystem::path& path);

using FieldKey = std::pair<std::string, std::string>;  // (page id, element id)

struct JournalEntry {
    Operation op;
    bool pushed = false;
    std::vector<std::pair<std::string, std::optional<std::string>>> prior_variables;
    std::optional<FieldKey> field;
    std::optional<std::string> prior_field_text;
    std::optional<FieldKey> scroll;
    std::optional<std::size_t> prior_offset;
};

/// Value-semantics simulator state. Copies are cheap enough to keep one per
/// step; the app definition is shared and immutable.
struct EnvState {
    std::shared_ptr<const AppDefinition> app;
    std::vector<std::string> back_stack;
    std::map<std::string, std::string> variables;
    std::map<FieldKey, std::string> field_text;
    std::map<FieldKey, std::size_t> scroll_offset;
    std::map<std::string, std::string> parameters;
    std::vector<JournalEntry> journal;

    const std::string& current_page_id() const { return back_stack.back(); }
    bool can_undo() const { return !journal.empty(); }

    bool operator==(const EnvState& other) const;
};

EnvState reset(std::shared_ptr<const AppDefinition> app, std::map<std::string, std::string> parameters = {});
GuiPage current_page(const EnvState& state);
std::vector<Operation> enumerate_operations(const EnvState& state);
EnvState apply_operation(const EnvState& state, const Operation& op);

/// Reverts `forward_op`, which must be the latest un-undone forward
/// operation. Returns the new state and the undo operation that was used.
std::pair<EnvState, Operation> undo_operation(const EnvState& state, const Operation& forward_op);

bool check_success(const EnvState& state, const TaskDefinition& task);

/// First enumerated operation with this action and label, or nothing.
std::optional<Operation> find_operation(const EnvState& state, ActionKind action, std::string_view label);

}  // namespace explearn
