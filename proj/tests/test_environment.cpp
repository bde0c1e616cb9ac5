#include <doctest.h>

#include "support.hpp"

using namespace explearn;
using testsupport::fixture;

namespace {

const char* kMini = R"({
  "app_id": "mini",
  "start_page": "p",
  "pages": {
    "p": {"root": {"id": "r", "role": "container", "children": [
      {"id": "go", "role": "button", "text": "Go"},
      {"id": "dead", "role": "button", "text": "Decoy"},
      {"id": "box", "role": "textbox", "desc": "Query", "binding": "query"},
      {"id": "items", "role": "list"}
    ]},
     "transitions": [{"source": "go", "action": "click", "destination": "q", "effects": {"went": "yes"}}],
     "list_windows": {"items": {"window_size": 3, "items": [
        {"id": "i1", "role": "label", "text": "one"}, {"id": "i2", "role": "label", "text": "two"},
        {"id": "i3", "role": "label", "text": "three"}, {"id": "i4", "role": "label", "text": "four"},
        {"id": "i5", "role": "label", "text": "five"}]}}},
    "q": {"root": {"id": "r2", "role": "container", "children": [{"id": "t", "role": "label", "text": "Done"}]}}
  }
})";

std::vector<std::string> texts(const GuiPage& p) {
    std::vector<std::string> out;
    for_each_element(p, [&](const GuiElement& e, const GuiElement*) {
        if (!e.text.empty()) {
            out.push_back(e.text);
        }
    });
    return out;
}

bool has_text(const GuiPage& p, const std::string& t) {
    const auto all = texts(p);
    return std::find(all.begin(), all.end(), t) != all.end();
}

Operation op_for(const EnvState& s, ActionKind a, const std::string& label) {
    const auto op = find_operation(s, a, label);
    REQUIRE(op.has_value());
    return *op;
}

}  // namespace

TEST_CASE("loading validates structure") {
    const auto app = load_app_text(kMini);
    CHECK(app.pages.size() == 2);
    CHECK(app.start_page == "p");

    std::string ghost = kMini;
    ghost.replace(ghost.find("\"destination\": \"q\""), 18, "\"destination\": \"ghost\"");
    try {
        load_app_text(ghost);
        FAIL("expected a load error");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
    CHECK_THROWS_AS(load_app_text("{\"app_id\": \"x\"}"), LoadError);
    CHECK_THROWS_AS(load_app_text("not json"), LoadError);
    CHECK_THROWS_AS(load_app_file("/nonexistent/app.json"), LoadError);
}

TEST_CASE("every bundled fixture loads and its golden sequences hold") {
    for (const auto& name : testsupport::fixture_files()) {
        const auto app = fixture(name);
        for (const auto& task : app->tasks) {
            auto s = reset(app, task.parameters);
            CHECK_FALSE(check_success(s, task));
            const auto golden = task.resolved_golden();
            for (std::size_t i = 0; i < golden.size(); ++i) {
                if (i + 1 == golden.size()) {
                    CHECK_MESSAGE(!check_success(s, task), task.task_id);
                }
                auto op = op_for(s, golden[i].action, golden[i].element_text);
                op.parameter = golden[i].parameter;
                s = apply_operation(s, op);
            }
            CHECK_MESSAGE(check_success(s, task), task.task_id);
        }
    }
}

TEST_CASE("contacts fixture mirrors the import walk-through") {
    const auto app = fixture("contacts.json");
    for (const auto* page : {"home", "add_contact", "fix_manage", "import_file"}) {
        CHECK(app->pages.count(page) == 1);
    }
    auto s = reset(app);
    const auto home = current_page(s);
    CHECK(has_text(home, "Add"));
    CHECK(has_text(home, "Fix & Manage"));

    s = apply_operation(s, op_for(s, ActionKind::click, "Fix & Manage"));
    CHECK(s.current_page_id() == "fix_manage");
    CHECK(has_text(current_page(s), "Import from file"));
}

TEST_CASE("reset is pure and deterministic") {
    const auto app = fixture("contacts.json");
    const auto a = reset(app);
    CHECK(a == reset(app));
    auto moved = apply_operation(a, op_for(a, ActionKind::click, "Add"));
    CHECK_FALSE(moved == a);
    CHECK(reset(app) == a);
    CHECK(a.current_page_id() == app->start_page);
}

TEST_CASE("text input, guards and windows") {
    const auto app = fixture("contacts.json");
    auto s = reset(app);
    s = apply_operation(s, op_for(s, ActionKind::click, "Add"));

    // Save without a name stays put and changes nothing.
    const auto premature = apply_operation(s, op_for(s, ActionKind::click, "Save"));
    CHECK(premature.current_page_id() == "add_contact");
    CHECK(premature.variables == s.variables);

    auto name = op_for(s, ActionKind::text_input, "Name");
    name.parameter = "Alice";
    const auto typed = apply_operation(s, name);
    CHECK(typed.current_page_id() == s.current_page_id());
    CHECK(has_text(current_page(typed), "Alice"));
    auto phone = op_for(typed, ActionKind::text_input, "Phone");
    phone.parameter = "2122000000";
    const auto both = apply_operation(typed, phone);
    CHECK(has_text(current_page(both), "2122000000"));

    const auto [cleared, undo] = undo_operation(typed, name);
    CHECK(undo.action == ActionKind::clear_text);
    CHECK_FALSE(has_text(current_page(cleared), "Alice"));

    auto mini = std::make_shared<const AppDefinition>(load_app_text(kMini));
    auto m = reset(mini);
    CHECK(enumerate_operations(m).size() == 4);  // 2 buttons, 1 text box, 1 scroll
    const auto scroll = op_for(m, ActionKind::scroll_forward, "");
    const auto m1 = apply_operation(m, scroll);
    const auto visible = texts(current_page(m1));
    CHECK(std::find(visible.begin(), visible.end(), "one") == visible.end());
    for (const auto* t : {"two", "three", "four"}) {
        CHECK(std::find(visible.begin(), visible.end(), t) != visible.end());
    }
    const auto m2 = apply_operation(m1, op_for(m1, ActionKind::scroll_forward, ""));
    CHECK_FALSE(find_operation(m2, ActionKind::scroll_forward, "").has_value());
    const auto [back, undo_scroll] = undo_operation(m1, scroll);
    CHECK(undo_scroll.action == ActionKind::scroll_backward);
    CHECK(back.scroll_offset == m.scroll_offset);

    const auto dead = apply_operation(m, op_for(m, ActionKind::click, "Decoy"));
    CHECK(dead.current_page_id() == "p");
    CHECK(dead.variables == m.variables);
}

TEST_CASE("undo of a click returns to the previous page") {
    const auto app = fixture("contacts.json");
    const auto s = reset(app);
    const auto add = op_for(s, ActionKind::click, "Add");
    const auto after = apply_operation(s, add);
    CHECK(after.current_page_id() == "add_contact");
    const auto [back, undo] = undo_operation(after, add);
    CHECK(undo.action == ActionKind::navigate_up);
    CHECK(back == s);
    CHECK(fingerprint_page(current_page(back)) == fingerprint_page(current_page(s)));
}

TEST_CASE("invalid operations and undo misuse are rejected") {
    const auto app = fixture("contacts.json");
    const auto s = reset(app);
    CHECK_THROWS_AS(apply_operation(s, Operation{ActionKind::click, "nope", std::nullopt, "nope"}), InvalidOperation);
    CHECK_THROWS_AS(apply_operation(s, Operation{ActionKind::navigate_up, std::nullopt, std::nullopt, ""}),
                    InvalidOperation);
    const auto add = op_for(s, ActionKind::click, "Add");
    CHECK_THROWS_AS(undo_operation(s, add), UndoError);
    const auto a1 = apply_operation(s, add);
    const auto fm = op_for(s, ActionKind::click, "Fix & Manage");
    CHECK_THROWS_AS(undo_operation(a1, fm), UndoError);
}

TEST_CASE("identical operation sequences give identical states") {
    const auto app = fixture("settings.json");
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = reset(app);
        auto b = reset(app);
        for (int i = 0; i < 6; ++i) {
            const auto ops = enumerate_operations(a);
            if (ops.empty()) {
                break;
            }
            auto op = ops[rng() % ops.size()];
            if (op.action == ActionKind::text_input) {
                op.parameter = "x";
            }
            a = apply_operation(a, op);
            b = apply_operation(b, op);
            CHECK(a == b);
            CHECK(serialize_page(current_page(a)) == serialize_page(current_page(b)));
        }
    }
}

TEST_CASE("undo round trip on a sample of reachable states") {
    const auto app = fixture("clock.json");
    const auto vocabulary = testsupport::typing_vocabulary(*app);
    for (const auto& s : testsupport::reachable_states(app, {}, 3)) {
        for (const auto& op : testsupport::forward_moves(s, vocabulary)) {
            const auto [back, undo] = undo_operation(apply_operation(s, op), op);
            CHECK(back == s);
        }
    }
}
