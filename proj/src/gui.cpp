#include "explearn/gui.hpp"

#include "explearn/text.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace explearn {
namespace {

constexpr std::array<std::pair<Role, std::string_view>, 6> kRoleNames{{
    {Role::button, "button"},
    {Role::textbox, "textbox"},
    {Role::list, "list"},
    {Role::switch_, "switch"},
    {Role::container, "container"},
    {Role::label, "label"},
}};

constexpr std::array<std::pair<ActionKind, std::string_view>, 6> kActionNames{{
    {ActionKind::click, "click"},
    {ActionKind::text_input, "text_input"},
    {ActionKind::scroll_forward, "scroll_forward"},
    {ActionKind::navigate_up, "navigate_up"},
    {ActionKind::clear_text, "clear_text"},
    {ActionKind::scroll_backward, "scroll_backward"},
}};

bool low_interaction(const GuiElement& e) {
    if (e.interactive() || e.has_content()) {
        return false;
    }
    return std::all_of(e.children.begin(), e.children.end(), low_interaction);
}

void prune_children(GuiElement& e) {
    // A low-interaction child goes only when every sibling is low-interaction
    // too, so either all children go or none do.
    const bool all_low = std::all_of(e.children.begin(), e.children.end(), low_interaction);
    if (all_low) {
        e.children.clear();
        return;
    }
    for (auto& child : e.children) {
        prune_children(child);
    }
}

bool same_triple(const GuiElement& a, const GuiElement& b) {
    return a.role == b.role && a.text == b.text && a.description == b.description;
}

void mark_against(const GuiElement* before, GuiElement& after) {
    if (before == nullptr) {
        after.new_flag = true;
        for (auto& child : after.children) {
            mark_against(nullptr, child);
        }
        return;
    }
    std::vector<bool> used(before->children.size(), false);
    for (std::size_t i = 0; i < after.children.size(); ++i) {
        auto& child = after.children[i];
        const GuiElement* match = nullptr;
        if (i < before->children.size() && !used[i] && same_triple(before->children[i], child)) {
            used[i] = true;
            match = &before->children[i];
        } else {
            for (std::size_t j = 0; j < before->children.size(); ++j) {
                if (!used[j] && same_triple(before->children[j], child)) {
                    used[j] = true;
                    match = &before->children[j];
                    break;
                }
            }
        }
        mark_against(match, child);
    }
}

void escape_into(std::string& out, std::string_view value) {
    for (char c : value) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '\n': out += "&#10;"; break;
            default: out += c;
        }
    }
}

std::string unescape(std::string_view value) {
    static constexpr std::array<std::pair<std::string_view, char>, 5> kEntities{{
        {"&amp;", '&'}, {"&quot;", '"'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&#10;", '\n'},
    }};
    std::string out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size();) {
        bool replaced = false;
        if (value[i] == '&') {
            for (const auto& [entity, ch] : kEntities) {
                if (value.substr(i, entity.size()) == entity) {
                    out += ch;
                    i += entity.size();
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) {
            out += value[i++];
        }
    }
    return out;
}

void attribute(std::string& out, std::string_view name, std::string_view value) {
    out += ' ';
    out += name;
    out += "=\"";
    escape_into(out, value);
    out += '"';
}

void serialize_element(std::string& out, const GuiElement& e, std::size_t depth) {
    const std::string indent(depth * 2, ' ');
    const auto tag = role_name(e.role);
    out += indent;
    out += '<';
    out += tag;
    attribute(out, "id", e.id);
    if (!e.text.empty()) {
        attribute(out, "text", e.text);
    }
    if (!e.description.empty()) {
        attribute(out, "desc", e.description);
    }
    if (e.new_flag) {
        attribute(out, "new", "true");
    }
    if (!e.targets.empty()) {
        std::string joined;
        for (std::size_t i = 0; i < e.targets.size(); ++i) {
            if (i > 0) {
                joined += "; ";
            }
            joined += e.targets[i];
        }
        attribute(out, "targets", joined);
    }
    out += '>';
    if (e.children.empty()) {
        out += "</";
        out += tag;
        out += ">\n";
        return;
    }
    out += '\n';
    for (const auto& child : e.children) {
        serialize_element(out, child, depth + 1);
    }
    out += indent;
    out += "</";
    out += tag;
    out += ">\n";
}

void strip_element(GuiElement& e) {
    e.new_flag = false;
    e.targets.clear();
    for (auto& child : e.children) {
        strip_element(child);
    }
}

template <typename Element>
Element* find_in(Element& e, std::string_view id) {
    if (e.id == id) {
        return &e;
    }
    for (auto& child : e.children) {
        if (auto* found = find_in(child, id)) {
            return found;
        }
    }
    return nullptr;
}

void visit_element(const GuiElement& e, const GuiElement* parent,
                   const std::function<void(const GuiElement&, const GuiElement*)>& visit) {
    visit(e, parent);
    for (const auto& child : e.children) {
        visit_element(child, &e, visit);
    }
}

void append_word(std::string& out, std::string_view word) {
    if (word.empty()) {
        return;
    }
    if (!out.empty()) {
        out += ' ';
    }
    out += word;
}

// Minimal line parser for the canonical page text.
struct ParsedTag {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    bool self_closed = false;
};

ParsedTag parse_open_tag(std::string_view line, std::size_t line_no) {
    ParsedTag tag;
    std::size_t i = 1;
    while (i < line.size() && line[i] != ' ' && line[i] != '>') {
        tag.name += line[i++];
    }
    while (i < line.size()) {
        if (line[i] == ' ') {
            ++i;
            continue;
        }
        if (line[i] == '>') {
            ++i;
            break;
        }
        const auto eq = line.find("=\"", i);
        if (eq == std::string_view::npos) {
            throw PageParseError(line_no, "malformed attribute");
        }
        std::string name(line.substr(i, eq - i));
        const auto close = line.find('"', eq + 2);
        if (close == std::string_view::npos) {
            throw PageParseError(line_no, "unterminated attribute value");
        }
        tag.attributes.emplace_back(std::move(name), unescape(line.substr(eq + 2, close - eq - 2)));
        i = close + 1;
    }
    const auto rest = line.substr(std::min(i, line.size()));
    if (!rest.empty()) {
        if (rest != "</" + tag.name + ">") {
            throw PageParseError(line_no, "unexpected trailing text");
        }
        tag.self_closed = true;
    }
    return tag;
}

void apply_role_flags(GuiElement& e) {
    e.clickable = e.role == Role::button || e.role == Role::switch_;
    e.editable = e.role == Role::textbox;
    e.scrollable = e.role == Role::list;
}

}  // namespace

std::string_view role_name(Role role) {
    for (const auto& [r, name] : kRoleNames) {
        if (r == role) {
            return name;
        }
    }
    return "container";
}

std::optional<Role> parse_role(std::string_view name) {
    for (const auto& [r, n] : kRoleNames) {
        if (n == name) {
            return r;
        }
    }
    return std::nullopt;
}

std::string GuiElement::label() const {
    if (role == Role::textbox) {
        return description.empty() ? text : description;
    }
    return text.empty() ? description : text;
}

std::string_view action_name(ActionKind action) {
    for (const auto& [a, name] : kActionNames) {
        if (a == action) {
            return name;
        }
    }
    return "click";
}

std::optional<ActionKind> parse_action(std::string_view name) {
    for (const auto& [a, n] : kActionNames) {
        if (n == name) {
            return a;
        }
    }
    return std::nullopt;
}

bool is_forward(ActionKind action) {
    return action == ActionKind::click || action == ActionKind::text_input ||
           action == ActionKind::scroll_forward;
}

ActionKind undo_action_for(ActionKind forward) {
    switch (forward) {
        case ActionKind::click: return ActionKind::navigate_up;
        case ActionKind::text_input: return ActionKind::clear_text;
        case ActionKind::scroll_forward: return ActionKind::scroll_backward;
        default: throw std::invalid_argument("undo requested for a non-forward action");
    }
}

bool same_operation(const Operation& a, const Operation& b) {
    return a.action == b.action && a.label == b.label && a.parameter == b.parameter;
}

std::string describe(const Operation& op) {
    const auto quoted = [](const std::string& s) { return "'" + s + "'"; };
    switch (op.action) {
        case ActionKind::click: return "Click " + quoted(op.label);
        case ActionKind::text_input:
            return "Text input " + quoted(op.parameter.value_or("")) + " into " + quoted(op.label);
        case ActionKind::scroll_forward: return "Scroll forward " + quoted(op.label);
        case ActionKind::navigate_up: return "Navigate up";
        case ActionKind::clear_text: return "Clear text " + quoted(op.label);
        case ActionKind::scroll_backward: return "Scroll backward " + quoted(op.label);
    }
    return "Unknown operation";
}

std::string PageFingerprint::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::optional<PageFingerprint> PageFingerprint::from_hex(std::string_view hex) {
    if (hex.size() != 16) {
        return std::nullopt;
    }
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
    if (ec != std::errc{} || ptr != hex.data() + hex.size()) {
        return std::nullopt;
    }
    return PageFingerprint{v};
}

GuiPage prune_page(GuiPage page) {
    prune_children(page.root);
    return page;
}

GuiPage mark_new_elements(const GuiPage& before, GuiPage after) {
    mark_against(same_triple(before.root, after.root) ? &before.root : nullptr, after.root);
    return after;
}

std::string serialize_page(const GuiPage& page) {
    std::string out;
    serialize_element(out, page.root, 0);
    return out;
}

PageFingerprint fingerprint_page(const GuiPage& page) {
    return PageFingerprint{text::fnv1a64(serialize_page(strip_annotations(page)))};
}

GuiPage parse_page_text(std::string_view text) {
    GuiPage page;
    std::vector<GuiElement> stack;
    bool have_root = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const auto first = line.find_first_not_of(' ');
        if (first == std::string_view::npos) {
            continue;
        }
        line = line.substr(first);
        if (line.substr(0, 2) == "</") {
            if (stack.empty()) {
                throw PageParseError(line_no, "unbalanced closing tag");
            }
            GuiElement done = std::move(stack.back());
            stack.pop_back();
            if (stack.empty()) {
                page.root = std::move(done);
                have_root = true;
            } else {
                stack.back().children.push_back(std::move(done));
            }
            continue;
        }
        if (line.front() != '<') {
            throw PageParseError(line_no, "expected a tag");
        }
        if (have_root) {
            throw PageParseError(line_no, "content after the root element");
        }
        auto tag = parse_open_tag(line, line_no);
        GuiElement e;
        const auto role = parse_role(tag.name);
        if (!role) {
            throw PageParseError(line_no, "unknown role '" + tag.name + "'");
        }
        e.role = *role;
        apply_role_flags(e);
        for (auto& [name, value] : tag.attributes) {
            if (name == "id") {
                e.id = std::move(value);
            } else if (name == "text") {
                e.text = std::move(value);
            } else if (name == "desc") {
                e.description = std::move(value);
            } else if (name == "new") {
                e.new_flag = value == "true";
            } else if (name == "targets") {
                std::size_t start = 0;
                while (start <= value.size()) {
                    const auto sep = value.find("; ", start);
                    const auto piece = value.substr(start, sep == std::string::npos ? std::string::npos : sep - start);
                    if (!piece.empty()) {
                        e.targets.push_back(piece);
                    }
                    if (sep == std::string::npos) {
                        break;
                    }
                    start = sep + 2;
                }
            }
        }
        if (tag.self_closed) {
            if (stack.empty()) {
                page.root = std::move(e);
                have_root = true;
            } else {
                stack.back().children.push_back(std::move(e));
            }
        } else {
            stack.push_back(std::move(e));
        }
    }
    if (!stack.empty() || !have_root) {
        throw PageParseError(line_no, "unterminated page");
    }
    return page;
}

GuiPage strip_annotations(GuiPage page) {
    strip_element(page.root);
    return page;
}

const GuiElement* find_element(const GuiPage& page, std::string_view id) {
    return find_in(page.root, id);
}

GuiElement* find_element(GuiPage& page, std::string_view id) {
    return find_in(page.root, id);
}

void for_each_element(const GuiPage& page,
                      const std::function<void(const GuiElement&, const GuiElement*)>& visit) {
    visit_element(page.root, nullptr, visit);
}

std::string surrounding_description(const GuiPage& page, std::string_view id) {
    std::string out;
    for_each_element(page, [&](const GuiElement& e, const GuiElement* parent) {
        if (e.id != id) {
            return;
        }
        append_word(out, e.text);
        append_word(out, e.description);
        if (parent != nullptr) {
            append_word(out, parent->text);
            for (const auto& sibling : parent->children) {
                if (&sibling != &e) {
                    append_word(out, sibling.text);
                }
            }
        }
    });
    return out;
}

}  // namespace explearn
