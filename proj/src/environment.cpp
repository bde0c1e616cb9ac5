#include "explearn/environment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "explearn/text.hpp"

namespace explearn {
namespace {

using nlohmann::json;
using Vars = std::map<std::string, std::string>;

std::string lookup(const Vars& vars, const std::string& name) {
    const auto it = vars.find(name);
    return it == vars.end() ? std::string{} : it->second;
}

bool condition_holds(const Condition& condition, const Vars& vars, const Vars& params) {
    for (const auto& [name, required] : condition) {
        const auto actual = lookup(vars, name);
        if (required == "*") {
            if (actual.empty()) {
                return false;
            }
        } else if (actual != text::fill_slots(required, params)) {
            return false;
        }
    }
    return true;
}

// ---- loading ---------------------------------------------------------------

const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) {
        throw LoadError(path, std::string("missing key '") + key + "'");
    }
    return j.at(key);
}

std::string require_string(const json& j, const char* key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_string()) {
        throw LoadError(path + "." + key, "expected a string");
    }
    return v.get<std::string>();
}

std::string optional_string(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) {
        return {};
    }
    if (!j.at(key).is_string()) {
        throw LoadError(path + "." + key, "expected a string");
    }
    return j.at(key).get<std::string>();
}

std::optional<bool> optional_bool(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) {
        return std::nullopt;
    }
    if (!j.at(key).is_boolean()) {
        throw LoadError(path + "." + key, "expected true or false");
    }
    return j.at(key).get<bool>();
}

std::vector<std::pair<std::string, std::string>> string_pairs(const json& j, const std::string& path) {
    if (!j.is_object()) {
        throw LoadError(path, "expected an object of strings");
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) {
            throw LoadError(path + "." + k, "expected a string");
        }
        out.emplace_back(k, v.get<std::string>());
    }
    return out;
}

ElementTemplate parse_element(const json& j, const std::string& path) {
    if (!j.is_object()) {
        throw LoadError(path, "expected an element object");
    }
    ElementTemplate e;
    e.id = require_string(j, "id", path);
    const auto role_text = require_string(j, "role", path);
    const auto role = parse_role(role_text);
    if (!role) {
        throw LoadError(path + ".role", "unknown role '" + role_text + "'");
    }
    e.role = *role;
    e.text = optional_string(j, "text", path);
    e.description = optional_string(j, "desc", path);
    e.binding = optional_string(j, "binding", path);
    e.clickable = optional_bool(j, "clickable", path).value_or(e.role == Role::button || e.role == Role::switch_);
    e.editable = optional_bool(j, "editable", path).value_or(e.role == Role::textbox);
    e.scrollable = optional_bool(j, "scrollable", path).value_or(e.role == Role::list);
    if (e.editable && e.role != Role::textbox) {
        throw LoadError(path, "only text boxes may be editable");
    }
    if (e.scrollable && e.role != Role::list) {
        throw LoadError(path, "only lists may be scrollable");
    }
    if (!e.binding.empty() && e.role != Role::textbox) {
        throw LoadError(path + ".binding", "only text boxes take a binding");
    }
    if (j.contains("visible_when")) {
        e.visible_when = string_pairs(j.at("visible_when"), path + ".visible_when");
    }
    if (j.contains("children")) {
        const auto& children = j.at("children");
        if (!children.is_array()) {
            throw LoadError(path + ".children", "expected an array");
        }
        for (std::size_t i = 0; i < children.size(); ++i) {
            e.children.push_back(parse_element(children[i], path + ".children[" + std::to_string(i) + "]"));
        }
    }
    return e;
}

void collect_ids(const ElementTemplate& e, std::map<std::string, const ElementTemplate*>& ids,
                 const std::string& path) {
    if (!ids.emplace(e.id, &e).second) {
        throw LoadError(path, "duplicate element id '" + e.id + "'");
    }
    for (const auto& child : e.children) {
        collect_ids(child, ids, path);
    }
}

void collect_bindings(const ElementTemplate& e, std::set<std::string>& declared) {
    if (!e.binding.empty()) {
        declared.insert(e.binding);
    }
    for (const auto& child : e.children) {
        collect_bindings(child, declared);
    }
}

template <class F>
void visit_templates(const ElementTemplate& e, const std::string& path, F&& f) {
    f(e, path);
    for (std::size_t i = 0; i < e.children.size(); ++i) {
        visit_templates(e.children[i], path + ".children[" + std::to_string(i) + "]", f);
    }
}

PageTemplate parse_page(const std::string& page_id, const json& j, const std::string& path) {
    PageTemplate page;
    page.page_id = page_id;
    page.root = parse_element(require(j, "root", path), path + ".root");
    if (j.contains("list_windows")) {
        const auto& windows = j.at("list_windows");
        if (!windows.is_object()) {
            throw LoadError(path + ".list_windows", "expected an object");
        }
        for (const auto& [list_id, w] : windows.items()) {
            const auto wpath = path + ".list_windows." + list_id;
            ListWindow window;
            const auto& size = require(w, "window_size", wpath);
            if (!size.is_number_integer() || size.get<long long>() < 1) {
                throw LoadError(wpath + ".window_size", "window_size must be an integer >= 1");
            }
            window.window_size = size.get<std::size_t>();
            const auto& items = require(w, "items", wpath);
            if (!items.is_array()) {
                throw LoadError(wpath + ".items", "expected an array");
            }
            for (std::size_t i = 0; i < items.size(); ++i) {
                window.items.push_back(parse_element(items[i], wpath + ".items[" + std::to_string(i) + "]"));
            }
            page.list_windows.emplace(list_id, std::move(window));
        }
    }
    if (j.contains("transitions")) {
        const auto& transitions = j.at("transitions");
        if (!transitions.is_array()) {
            throw LoadError(path + ".transitions", "expected an array");
        }
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            const auto tpath = path + ".transitions[" + std::to_string(i) + "]";
            const auto& tj = transitions[i];
            Transition t;
            t.source_element = require_string(tj, "source", tpath);
            const auto action = optional_string(tj, "action", tpath);
            if (!action.empty() && action != "click") {
                throw LoadError(tpath + ".action", "transitions fire on click only");
            }
            if (tj.contains("guard")) {
                t.guard = string_pairs(tj.at("guard"), tpath + ".guard");
            }
            if (tj.contains("effects")) {
                t.effects = string_pairs(tj.at("effects"), tpath + ".effects");
            }
            t.destination = require_string(tj, "destination", tpath);
            page.transitions.push_back(std::move(t));
        }
    }
    return page;
}

OpDescriptor parse_descriptor(const json& j, const std::string& path) {
    OpDescriptor d;
    const auto action_text = require_string(j, "action", path);
    const auto action = parse_action(action_text);
    if (!action || !is_forward(*action)) {
        throw LoadError(path + ".action", "golden steps must use a forward action, got '" + action_text + "'");
    }
    d.action = *action;
    d.element_text = require_string(j, "element_text", path);
    if (j.contains("parameter")) {
        d.parameter = require_string(j, "parameter", path);
    }
    if (d.action == ActionKind::text_input && !d.parameter) {
        throw LoadError(path, "text_input steps need a parameter");
    }
    return d;
}

TaskDefinition parse_task(const json& j, const std::string& path) {
    TaskDefinition task;
    task.task_id = require_string(j, "task_id", path);
    task.command = require_string(j, "command", path);
    if (j.contains("parameters")) {
        for (auto& [k, v] : string_pairs(j.at("parameters"), path + ".parameters")) {
            task.parameters.emplace(k, v);
        }
    }
    const auto& golden = require(j, "golden_sequence", path);
    if (!golden.is_array() || golden.empty()) {
        throw LoadError(path + ".golden_sequence", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < golden.size(); ++i) {
        task.golden_sequence.push_back(
            parse_descriptor(golden[i], path + ".golden_sequence[" + std::to_string(i) + "]"));
    }
    const auto spath = path + ".success_predicate";
    const auto& success = require(j, "success_predicate", path);
    if (success.contains("page")) {
        task.success_predicate.page = require_string(success, "page", spath);
    }
    if (success.contains("variables")) {
        task.success_predicate.variables = string_pairs(success.at("variables"), spath + ".variables");
    }
    task.completion_cue = optional_string(j, "completion_cue", path);
    if (j.contains("tags")) {
        const auto& tags = j.at("tags");
        if (!tags.is_array()) {
            throw LoadError(path + ".tags", "expected an array");
        }
        for (const auto& t : tags) {
            if (!t.is_string()) {
                throw LoadError(path + ".tags", "expected strings");
            }
            task.tags.push_back(t.get<std::string>());
        }
    }
    return task;
}

void check_references(const Condition& condition, const std::set<std::string>& declared, const std::string& path) {
    for (const auto& [name, value] : condition) {
        (void)value;
        if (!declared.count(name)) {
            throw LoadError(path + "." + name, "undeclared variable '" + name + "'");
        }
    }
}

void validate(const AppDefinition& app) {
    if (!app.pages.count(app.start_page)) {
        throw LoadError("start_page", "unknown page '" + app.start_page + "'");
    }
    std::set<std::string> declared;
    for (const auto& [id, page] : app.pages) {
        collect_bindings(page.root, declared);
        for (const auto& [list_id, window] : page.list_windows) {
            for (const auto& item : window.items) {
                collect_bindings(item, declared);
            }
        }
        for (const auto& t : page.transitions) {
            for (const auto& [name, value] : t.effects) {
                declared.insert(name);
            }
        }
    }

    for (const auto& [page_id, page] : app.pages) {
        const auto path = "pages." + page_id;
        std::map<std::string, const ElementTemplate*> ids;
        collect_ids(page.root, ids, path + ".root");
        for (const auto& [list_id, window] : page.list_windows) {
            const auto it = ids.find(list_id);
            if (it == ids.end() || it->second->role != Role::list) {
                throw LoadError(path + ".list_windows." + list_id, "no list element with this id");
            }
            if (!it->second->children.empty()) {
                throw LoadError(path + ".list_windows." + list_id, "windowed lists take items, not children");
            }
        }
        for (const auto& [list_id, window] : page.list_windows) {
            for (const auto& item : window.items) {
                collect_ids(item, ids, path + ".list_windows." + list_id);
            }
        }
        visit_templates(page.root, path + ".root", [&](const ElementTemplate& e, const std::string& epath) {
            check_references(e.visible_when, declared, epath + ".visible_when");
        });
        for (std::size_t i = 0; i < page.transitions.size(); ++i) {
            const auto& t = page.transitions[i];
            const auto tpath = path + ".transitions[" + std::to_string(i) + "]";
            const auto it = ids.find(t.source_element);
            if (it == ids.end()) {
                throw LoadError(tpath + ".source", "no element '" + t.source_element + "' on this page");
            }
            if (!it->second->clickable) {
                throw LoadError(tpath + ".source", "element '" + t.source_element + "' is not clickable");
            }
            if (t.destination != kStay && !app.pages.count(t.destination)) {
                throw LoadError(tpath + ".destination", "unknown page '" + t.destination + "'");
            }
            check_references(t.guard, declared, tpath + ".guard");
        }
    }

    for (std::size_t i = 0; i < app.tasks.size(); ++i) {
        const auto& task = app.tasks[i];
        const auto path = "tasks[" + std::to_string(i) + "]";
        if (task.success_predicate.page && !app.pages.count(*task.success_predicate.page)) {
            throw LoadError(path + ".success_predicate.page", "unknown page '" + *task.success_predicate.page + "'");
        }
        check_references(task.success_predicate.variables, declared, path + ".success_predicate.variables");
    }
}

void validate_golden(const std::shared_ptr<const AppDefinition>& app) {
    for (std::size_t i = 0; i < app->tasks.size(); ++i) {
        const auto& task = app->tasks[i];
        const auto path = "tasks[" + std::to_string(i) + "].golden_sequence";
        auto state = reset(app, task.parameters);
        const auto golden = task.resolved_golden();
        for (std::size_t s = 0; s < golden.size(); ++s) {
            auto op = find_operation(state, golden[s].action, golden[s].element_text);
            if (!op) {
                throw LoadError(path + "[" + std::to_string(s) + "]",
                                "no '" + std::string(action_name(golden[s].action)) + "' on '" +
                                    golden[s].element_text + "' at page '" + state.current_page_id() + "'");
            }
            op->parameter = golden[s].parameter;
            state = apply_operation(state, *op);
        }
        if (!check_success(state, task)) {
            throw LoadError(path, "golden sequence of '" + task.task_id + "' does not satisfy its success predicate");
        }
        if (check_success(reset(app, task.parameters), task)) {
            throw LoadError(path, "task '" + task.task_id + "' already holds at the start page");
        }
    }
}

// ---- instantiation ---------------------------------------------------------

void instantiate(const ElementTemplate& t, const PageTemplate& page, const EnvState& state,
                 std::vector<GuiElement>& out) {
    if (!condition_holds(t.visible_when, state.variables, state.parameters)) {
        return;
    }
    GuiElement e;
    e.id = t.id;
    e.role = t.role;
    e.text = text::fill_slots(t.text, state.variables, state.parameters);
    e.description = text::fill_slots(t.description, state.variables, state.parameters);
    e.clickable = t.clickable;
    e.editable = t.editable;
    e.scrollable = t.scrollable;
    if (t.role == Role::textbox) {
        const auto it = state.field_text.find({page.page_id, t.id});
        if (it != state.field_text.end()) {
            e.text = it->second;
        }
    }
    const auto window = page.list_windows.find(t.id);
    if (window != page.list_windows.end()) {
        const auto& items = window->second.items;
        const auto off_it = state.scroll_offset.find({page.page_id, t.id});
        const std::size_t offset = off_it == state.scroll_offset.end() ? 0 : off_it->second;
        const auto end = std::min(items.size(), offset + window->second.window_size);
        for (std::size_t i = offset; i < end; ++i) {
            instantiate(items[i], page, state, e.children);
        }
    } else {
        for (const auto& child : t.children) {
            instantiate(child, page, state, e.children);
        }
    }
    out.push_back(std::move(e));
}

std::size_t max_offset(const PageTemplate& page, const std::string& list_id) {
    const auto it = page.list_windows.find(list_id);
    if (it == page.list_windows.end() || it->second.items.size() <= it->second.window_size) {
        return 0;
    }
    return it->second.items.size() - it->second.window_size;
}

const PageTemplate& page_template(const EnvState& state) {
    return state.app->pages.at(state.current_page_id());
}

}  // namespace

// ---- task helpers ----------------------------------------------------------

std::vector<OpDescriptor> TaskDefinition::resolved_golden() const {
    std::vector<OpDescriptor> out = golden_sequence;
    for (auto& d : out) {
        d.element_text = text::fill_slots(d.element_text, parameters);
        if (d.parameter) {
            d.parameter = text::fill_slots(*d.parameter, parameters);
        }
    }
    return out;
}

std::string TaskDefinition::resolved_cue() const {
    return text::fill_slots(completion_cue, parameters);
}

bool TaskDefinition::has_tag(std::string_view tag) const {
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

const TaskDefinition* AppDefinition::find_task(std::string_view task_id) const {
    for (const auto& t : tasks) {
        if (t.task_id == task_id) {
            return &t;
        }
    }
    return nullptr;
}

const TaskDefinition* AppDefinition::find_task_by_command(std::string_view command) const {
    for (const auto& t : tasks) {
        if (t.command == command) {
            return &t;
        }
    }
    return nullptr;
}

// ---- loading ---------------------------------------------------------------

AppDefinition load_app_text(std::string_view document) {
    json j;
    try {
        j = json::parse(document);
    } catch (const json::parse_error& e) {
        throw LoadError("$", e.what());
    }
    AppDefinition app;
    app.app_id = require_string(j, "app_id", "$");
    app.start_page = require_string(j, "start_page", "$");
    const auto& pages = require(j, "pages", "$");
    if (!pages.is_object() || pages.empty()) {
        throw LoadError("pages", "expected a non-empty object");
    }
    for (const auto& [id, p] : pages.items()) {
        app.pages.emplace(id, parse_page(id, p, "pages." + id));
    }
    if (j.contains("tasks")) {
        const auto& tasks = j.at("tasks");
        if (!tasks.is_array()) {
            throw LoadError("tasks", "expected an array");
        }
        std::set<std::string> seen;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            auto task = parse_task(tasks[i], "tasks[" + std::to_string(i) + "]");
            if (!seen.insert(task.task_id).second) {
                throw LoadError("tasks[" + std::to_string(i) + "].task_id", "duplicate task id '" + task.task_id + "'");
            }
            app.tasks.push_back(std::move(task));
        }
    }
    validate(app);
    auto shared = std::make_shared<const AppDefinition>(app);
    validate_golden(shared);
    return app;
}

AppDefinition load_app_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError(path.string(), "cannot open file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return load_app_text(buffer.str());
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.path(), std::string(e.what()).substr(e.path().size() + 2));
    }
}

// ---- state -----------------------------------------------------------------

bool EnvState::operator==(const EnvState& other) const {
    const auto journal_equal = [&] {
        if (journal.size() != other.journal.size()) {
            return false;
        }
        for (std::size_t i = 0; i < journal.size(); ++i) {
            const auto& a = journal[i];
            const auto& b = other.journal[i];
            if (!(a.op == b.op) || a.pushed != b.pushed || a.prior_variables != b.prior_variables ||
                a.field != b.field || a.prior_field_text != b.prior_field_text || a.scroll != b.scroll ||
                a.prior_offset != b.prior_offset) {
                return false;
            }
        }
        return true;
    };
    return app == other.app && back_stack == other.back_stack && variables == other.variables &&
           field_text == other.field_text && scroll_offset == other.scroll_offset &&
           parameters == other.parameters && journal_equal();
}

EnvState reset(std::shared_ptr<const AppDefinition> app, std::map<std::string, std::string> parameters) {
    EnvState state;
    state.back_stack.push_back(app->start_page);
    state.app = std::move(app);
    state.parameters = std::move(parameters);
    return state;
}

GuiPage current_page(const EnvState& state) {
    const auto& tmpl = page_template(state);
    std::vector<GuiElement> roots;
    instantiate(tmpl.root, tmpl, state, roots);
    GuiPage page;
    page.page_id = tmpl.page_id;
    page.app_id = state.app->app_id;
    if (roots.empty()) {
        page.root.id = tmpl.root.id;
        page.root.role = Role::container;
    } else {
        page.root = std::move(roots.front());
    }
    return prune_page(std::move(page));
}

std::vector<Operation> enumerate_operations(const EnvState& state) {
    const auto page = current_page(state);
    const auto& tmpl = page_template(state);
    std::vector<Operation> ops;
    for_each_element(page, [&](const GuiElement& e, const GuiElement*) {
        if (e.clickable) {
            ops.push_back(Operation{ActionKind::click, e.id, std::nullopt, e.label()});
        }
        if (e.editable) {
            ops.push_back(Operation{ActionKind::text_input, e.id, std::nullopt, e.label()});
        }
        if (e.scrollable) {
            const auto it = state.scroll_offset.find({tmpl.page_id, e.id});
            const std::size_t offset = it == state.scroll_offset.end() ? 0 : it->second;
            if (offset < max_offset(tmpl, e.id)) {
                ops.push_back(Operation{ActionKind::scroll_forward, e.id, std::nullopt, e.label()});
            }
        }
    });
    return ops;
}

std::optional<Operation> find_operation(const EnvState& state, ActionKind action, std::string_view label) {
    for (auto& op : enumerate_operations(state)) {
        if (op.action == action && op.label == label) {
            return op;
        }
    }
    return std::nullopt;
}

EnvState apply_operation(const EnvState& state, const Operation& op) {
    if (!is_forward(op.action)) {
        throw InvalidOperation("apply_operation takes forward actions; use undo_operation for '" +
                               std::string(action_name(op.action)) + "'");
    }
    const auto available = enumerate_operations(state);
    const auto found = std::find_if(available.begin(), available.end(), [&](const Operation& a) {
        return a.action == op.action && a.target == op.target;
    });
    if (found == available.end()) {
        throw InvalidOperation("operation " + describe(op) + " is not available on page '" +
                               state.current_page_id() + "'");
    }

    const auto& tmpl = page_template(state);
    const std::string element_id = *op.target;
    EnvState next = state;
    JournalEntry entry;
    entry.op = op;
    entry.op.label = found->label;

    switch (op.action) {
    case ActionKind::click: {
        const Transition* match = nullptr;
        for (const auto& t : tmpl.transitions) {
            if (t.source_element == element_id && condition_holds(t.guard, state.variables, state.parameters)) {
                if (match != nullptr) {
                    throw InvalidOperation("more than one transition matches '" + element_id + "' on page '" +
                                           tmpl.page_id + "'");
                }
                match = &t;
            }
        }
        if (match == nullptr) {
            break;  // dead button
        }
        for (const auto& [name, value] : match->effects) {
            const auto it = next.variables.find(name);
            entry.prior_variables.emplace_back(
                name, it == next.variables.end() ? std::nullopt : std::optional<std::string>(it->second));
        }
        for (const auto& [name, value] : match->effects) {
            next.variables[name] = text::fill_slots(value, state.variables, state.parameters);
        }
        if (match->destination != kStay && match->destination != state.current_page_id()) {
            next.back_stack.push_back(match->destination);
            entry.pushed = true;
        }
        break;
    }
    case ActionKind::text_input: {
        const FieldKey key{tmpl.page_id, element_id};
        const auto it = next.field_text.find(key);
        entry.field = key;
        entry.prior_field_text = it == next.field_text.end() ? std::nullopt : std::optional<std::string>(it->second);
        next.field_text[key] = op.parameter.value_or("");
        std::function<const ElementTemplate*(const ElementTemplate&)> find_tmpl =
            [&](const ElementTemplate& e) -> const ElementTemplate* {
            if (e.id == element_id) {
                return &e;
            }
            for (const auto& c : e.children) {
                if (const auto* r = find_tmpl(c)) {
                    return r;
                }
            }
            return nullptr;
        };
        const ElementTemplate* et = find_tmpl(tmpl.root);
        for (const auto& [lid, window] : tmpl.list_windows) {
            for (const auto& item : window.items) {
                if (et == nullptr) {
                    et = find_tmpl(item);
                }
            }
        }
        if (et != nullptr && !et->binding.empty()) {
            const auto vit = next.variables.find(et->binding);
            entry.prior_variables.emplace_back(
                et->binding, vit == next.variables.end() ? std::nullopt : std::optional<std::string>(vit->second));
            next.variables[et->binding] = op.parameter.value_or("");
        }
        break;
    }
    case ActionKind::scroll_forward: {
        const FieldKey key{tmpl.page_id, element_id};
        const auto it = next.scroll_offset.find(key);
        entry.scroll = key;
        entry.prior_offset = it == next.scroll_offset.end() ? std::nullopt : std::optional<std::size_t>(it->second);
        const std::size_t offset = it == next.scroll_offset.end() ? 0 : it->second;
        next.scroll_offset[key] = std::min(offset + 1, max_offset(tmpl, element_id));
        break;
    }
    default:
        break;
    }
    next.journal.push_back(std::move(entry));
    return next;
}

std::pair<EnvState, Operation> undo_operation(const EnvState& state, const Operation& forward_op) {
    if (state.journal.empty()) {
        throw UndoError("nothing to undo");
    }
    const auto& entry = state.journal.back();
    if (entry.op.action != forward_op.action || entry.op.target != forward_op.target) {
        throw UndoError("undo of " + describe(forward_op) + " does not match the latest operation " +
                        describe(entry.op));
    }
    EnvState next = state;
    if (entry.pushed) {
        if (next.back_stack.size() < 2) {
            throw UndoError("back stack would underflow");
        }
        next.back_stack.pop_back();
    }
    for (auto it = entry.prior_variables.rbegin(); it != entry.prior_variables.rend(); ++it) {
        if (it->second) {
            next.variables[it->first] = *it->second;
        } else {
            next.variables.erase(it->first);
        }
    }
    if (entry.field) {
        if (entry.prior_field_text) {
            next.field_text[*entry.field] = *entry.prior_field_text;
        } else {
            next.field_text.erase(*entry.field);
        }
    }
    if (entry.scroll) {
        if (entry.prior_offset) {
            next.scroll_offset[*entry.scroll] = *entry.prior_offset;
        } else {
            next.scroll_offset.erase(*entry.scroll);
        }
    }
    Operation undo;
    undo.action = undo_action_for(entry.op.action);
    if (undo.action != ActionKind::navigate_up) {
        undo.target = entry.op.target;
    }
    undo.label = undo.action == ActionKind::navigate_up ? std::string{} : entry.op.label;
    next.journal.pop_back();
    return {std::move(next), std::move(undo)};
}

bool check_success(const EnvState& state, const TaskDefinition& task) {
    if (task.success_predicate.page && state.current_page_id() != *task.success_predicate.page) {
        return false;
    }
    return condition_holds(task.success_predicate.variables, state.variables, task.parameters);
}

}  // namespace explearn
