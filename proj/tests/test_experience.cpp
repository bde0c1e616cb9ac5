#include <doctest.h>

#include "support.hpp"

using namespace explearn;
using testsupport::edge;
using testsupport::undo_edge;

namespace {

std::vector<std::size_t> steps_of(const std::vector<ExperienceEdge>& path) {
    std::vector<std::size_t> out;
    for (const auto& e : path) {
        out.push_back(e.step_index);
    }
    return out;
}

GuiPage single_button(const std::string& text) {
    GuiPage p;
    p.root.id = "root";
    GuiElement b;
    b.id = "b";
    b.role = Role::button;
    b.text = text;
    b.clickable = true;
    p.root.children.push_back(b);
    return p;
}

}  // namespace

TEST_CASE("recording steps upserts pages by fingerprint") {
    const auto a = single_button("A");
    const auto b = single_button("B");
    const Operation click{ActionKind::click, "b", std::nullopt, "A"};
    ExperienceGraph g(a);
    g.record_step(a, click, b, std::nullopt, std::nullopt, EdgeKind::forward);
    CHECK(g.nodes().size() == 2);
    CHECK(g.edges().size() == 1);
    CHECK(g.edges()[0].step_index == 1);

    ExperienceGraph loop(a);
    loop.record_step(a, click, a, std::nullopt, std::nullopt, EdgeKind::forward);
    CHECK(loop.nodes().size() == 1);
    CHECK(loop.edges()[0].source_fp == loop.edges()[0].dest_fp);

    const Operation up{ActionKind::navigate_up, std::nullopt, std::nullopt, ""};
    g.record_step(b, up, a, std::nullopt, std::nullopt, EdgeKind::undo, {}, 0);
    CHECK(g.edges()[1].kind == EdgeKind::undo);
    CHECK(g.edges()[1].reverts == 0u);
    CHECK(g.undo_count() == 1);
    CHECK_THROWS_AS(g.record_step(b, up, a, std::nullopt, std::nullopt, EdgeKind::undo, {}, 1),
                    std::invalid_argument);
}

TEST_CASE("the import walk-through extracts steps 3, 4, 5 and blames step 1") {
    const auto c = testsupport::import_walkthrough_graph();
    const auto path = shortest_correct_path(c.graph, c.required);
    CHECK(steps_of(path) == std::vector<std::size_t>{3, 4, 5});
    const auto wrong = erroneous_steps(c.graph, path);
    REQUIRE(wrong.size() == 1);
    CHECK(wrong[0].op.label == "Add");
}

TEST_CASE("linear runs and parameter coverage") {
    ExperienceGraph line;
    line.set_start(PageFingerprint{1});
    for (std::uint64_t i = 1; i <= 4; ++i) {
        line.add_edge(edge(i, i + 1, "s" + std::to_string(i)));
    }
    line.set_endpoint(PageFingerprint{5});
    CHECK(shortest_correct_path(line, {}).size() == 4);
    CHECK(erroneous_steps(line, shortest_correct_path(line, {})).empty());

    // 1 -> 3 directly skips the parameter; 1 -> 2 -> 4 -> 3 covers it.
    ExperienceGraph g;
    g.set_start(PageFingerprint{1});
    g.add_edge(edge(1, 3, "shortcut"));
    g.add_edge(edge(1, 2, "a"));
    g.add_edge(edge(2, 4, "b", {"file name"}));
    g.add_edge(edge(4, 3, "c"));
    g.set_endpoint(PageFingerprint{3});
    CHECK(steps_of(shortest_correct_path(g, {})) == std::vector<std::size_t>{1});
    CHECK(steps_of(shortest_correct_path(g, {"file name"})) == std::vector<std::size_t>{2, 3, 4});
    CHECK_THROWS_AS(shortest_correct_path(g, {"missing"}), PathExtractionError);

    ExperienceGraph no_end;
    no_end.add_edge(edge(0, 1, "x"));
    CHECK_THROWS_AS(shortest_correct_path(no_end, {}), PathExtractionError);
}

TEST_CASE("two wrong branches are both erroneous, in order") {
    ExperienceGraph g;
    g.set_start(PageFingerprint{1});
    g.add_edge(edge(1, 2, "wrong1"));
    g.add_edge(undo_edge(2, 1, 0));
    g.add_edge(edge(1, 3, "wrong2"));
    g.add_edge(undo_edge(3, 1, 2));
    g.add_edge(edge(1, 4, "right"));
    g.set_endpoint(PageFingerprint{4});
    const auto path = shortest_correct_path(g, {});
    const auto wrong = erroneous_steps(g, path);
    REQUIRE(wrong.size() == 2);
    CHECK(wrong[0].op.label == "wrong1");
    CHECK(wrong[1].op.label == "wrong2");
}

TEST_CASE("path and erroneous steps partition the forward edges") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 300; ++i) {
        const auto c = testsupport::random_graph(rng);
        const auto expect = testsupport::brute_shortest_path(c);
        if (!expect) {
            CHECK_THROWS_AS(shortest_correct_path(c.graph, c.required), PathExtractionError);
            continue;
        }
        const auto path = shortest_correct_path(c.graph, c.required);
        CHECK(steps_of(path) == *expect);
        CHECK(path.size() + erroneous_steps(c.graph, path).size() == c.graph.forward_count());
    }
}

TEST_CASE("graphs survive export and import") {
    auto c = testsupport::import_walkthrough_graph();
    auto& g = c.graph;
    const auto& e = g.edges();
    REQUIRE(e.size() == 5);
    g.attach_check(0, CheckVerdict::incorrect(9));
    const auto text = export_graph(g);
    const auto back = import_graph(text);
    CHECK(back.edges().size() == g.edges().size());
    CHECK(back.endpoint_fp() == g.endpoint_fp());
    CHECK(back.edges()[0].check == CheckVerdict::incorrect(9));
    CHECK(export_graph(back) == text);
}
