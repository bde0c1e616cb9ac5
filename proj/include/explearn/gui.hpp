#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace explearn {

enum class Role { button, textbox, list, switch_, container, label };

std::string_view role_name(Role role);
std::optional<Role> parse_role(std::string_view name);

/// One node of a pruned interaction tree.
///
/// `targets` and `new_flag` are annotations added by the agent; they never
/// take part in fingerprinting.
struct GuiElement {
    std::string id;
    Role role = Role::container;
    std::string text;
    std::string description;
    bool clickable = false;
    bool editable = false;
    bool scrollable = false;
    bool new_flag = false;
    std::vector<std::string> targets;
    std::vector<GuiElement> children;

    bool interactive() const { return clickable || editable || scrollable; }
    bool has_content() const { return !text.empty() || !description.empty(); }

    /// Human-facing name used for operation identity. Text boxes are named by
    /// their description because their text is the user's input.
    std::string label() const;

    bool operator==(const GuiElement&) const = default;
};

struct GuiPage {
    std::string page_id;
    std::string app_id;
    GuiElement root;

    bool operator==(const GuiPage&) const = default;
};

enum class ActionKind { click, text_input, scroll_forward, navigate_up, clear_text, scroll_backward };

std::string_view action_name(ActionKind action);
std::optional<ActionKind> parse_action(std::string_view name);
bool is_forward(ActionKind action);
ActionKind undo_action_for(ActionKind forward);

/// An (element, action, parameter) triple. `label` caches the element's
/// label at enumeration time so that operations stay comparable after the
/// page they came from is gone.
struct Operation {
    ActionKind action = ActionKind::click;
    std::optional<std::string> target;
    std::optional<std::string> parameter;
    std::string label;

    bool operator==(const Operation&) const = default;
};

/// Identity used for repetition and metrics: action, element label, parameter.
bool same_operation(const Operation& a, const Operation& b);

/// One-line description, e.g. `Click 'Add'` or `Text input 'Alice' into 'Name'`.
std::string describe(const Operation& op);

struct PageFingerprint {
    std::uint64_t value = 0;

    std::string hex() const;
    static std::optional<PageFingerprint> from_hex(std::string_view hex);

    auto operator<=>(const PageFingerprint&) const = default;
};

GuiPage prune_page(GuiPage page);
GuiPage mark_new_elements(const GuiPage& before, GuiPage after);
std::string serialize_page(const GuiPage& page);
PageFingerprint fingerprint_page(const GuiPage& page);

class PageParseError : public std::runtime_error {
public:
    PageParseError(std::size_t line, const std::string& what)
        : std::runtime_error("page text line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Inverse of serialize_page. Interactivity flags are recovered from the role
/// since the canonical text does not carry them.
GuiPage parse_page_text(std::string_view text);

/// Copy of the page with every new flag and targets list removed.
GuiPage strip_annotations(GuiPage page);

const GuiElement* find_element(const GuiPage& page, std::string_view id);
GuiElement* find_element(GuiPage& page, std::string_view id);

/// Pre-order traversal; `parent` is null for the root.
void for_each_element(const GuiPage& page,
                      const std::function<void(const GuiElement& element, const GuiElement* parent)>& visit);

/// Element text plus description plus parent text plus sibling texts.
std::string surrounding_description(const GuiPage& page, std::string_view id);

}  // namespace explearn
