#include <doctest.h>

#include "support.hpp"

using namespace explearn;
using testsupport::fixture;

namespace {

AgentContext context_for(const std::string& command, const EnvState& s,
                         std::optional<CommandUnderstanding> u = std::nullopt) {
    AgentContext c;
    c.command = command;
    c.current_page_text = serialize_page(current_page(s));
    c.understanding = std::move(u);
    return c;
}

CandidateInfo candidate(const EnvState& s, const std::string& label) {
    const auto op = find_operation(s, ActionKind::click, label);
    REQUIRE(op.has_value());
    const auto page = current_page(s);
    const auto* e = find_element(page, *op->target);
    CandidateInfo c;
    c.op = *op;
    c.description = describe(*op);
    c.element_text = e->text;
    c.element_desc = e->description;
    c.surrounding = surrounding_description(page, e->id);
    return c;
}

EnvState click(const EnvState& s, const std::string& label) {
    const auto op = find_operation(s, ActionKind::click, label);
    REQUIRE(op.has_value());
    return apply_operation(s, *op);
}

}  // namespace

TEST_CASE("heuristic command understanding") {
    const auto u = heuristic_understanding("import contacts from contacts.vcf", {});
    CHECK(u.intent == "import contacts from file");
    CHECK(u.parameter_map() == std::map<std::string, std::string>{{"file name", "contacts.vcf"}});

    const auto save = heuristic_understanding("save Alice, 2122000000 to contact", {});
    std::set<std::string> values;
    for (const auto& [k, v] : save.parameters) {
        values.insert(v);
    }
    CHECK(values.count("Alice") == 1);
    CHECK(values.count("2122000000") == 1);

    CHECK(heuristic_understanding("turn off wifi", {}).parameters.empty());

    // An example with the same shape fixes the intent and parameter names.
    TaskExample ex{"import contacts from file", {"file name"}, "import contacts from contacts.vcf",
                   {{"file name", "contacts.vcf"}}};
    const auto aligned = heuristic_understanding("import contacts from backup.vcf", {ex});
    CHECK(aligned.intent == "import contacts from file");
    CHECK(aligned.parameter_map() == std::map<std::string, std::string>{{"file name", "backup.vcf"}});
}

TEST_CASE("understanding rejects parameters not taken from the command") {
    struct Liar : Oracle {
        Embedding embed(std::string_view) override { return Embedding{{1.0}}; }
        std::string answer(const Query&) override {
            return R"({"intent": "import", "parameters": {"file name": "other.vcf"}})";
        }
    } liar;
    AgentContext ctx;
    ctx.command = "import contacts from contacts.vcf";
    CHECK_THROWS_AS(liar.understand_command(ctx, {}), OracleFormatError);
}

TEST_CASE("likert scores follow relevance and lessons") {
    HeuristicOracle o;
    const auto app = fixture("contacts.json");
    const auto fm = click(reset(app), "Fix & Manage");
    const std::string cmd = "import contacts from contacts.vcf";
    const auto u = heuristic_understanding(cmd, {});
    const auto ctx = context_for(cmd, fm, u);
    CHECK(o.likert_score(ctx, candidate(fm, "Import from file"), {}) == 7);

    const auto settings = reset(fixture("settings.json"));
    const auto sctx = context_for(cmd, settings, u);
    CHECK(o.likert_score(sctx, candidate(settings, "Display"), {}) <= 2);

    const auto home = reset(app);
    const auto hctx = context_for(cmd, home, u);
    const auto add = candidate(home, "Add");
    const std::vector<std::string> lessons{
        "Clicking 'Add' only leads to a page offering Name, Phone, Save; it does not help to import contacts from file"};
    CHECK(o.likert_score(hctx, add, lessons) <= 2);
    CHECK(lesson_rules_out(lessons[0], "Add"));
    CHECK_FALSE(lesson_rules_out(lessons[0], "Fix & Manage"));
}

TEST_CASE("targets lift a button but never above a direct match") {
    HeuristicOracle o;
    const auto app = fixture("contacts.json");
    const auto files = click(click(reset(app), "Fix & Manage"), "Import from file");
    const std::string cmd = "import contacts from backup.vcf";
    const auto ctx = context_for(cmd, files, heuristic_understanding(cmd, {}));
    auto contacts = candidate(files, "contacts.vcf");
    contacts.targets = {"Import from file Import contacts from a .vcf file"};
    const auto backup = candidate(files, "backup.vcf");
    CHECK(o.likert_score(ctx, contacts, {}) < o.likert_score(ctx, backup, {}));
}

TEST_CASE("text parameters come from the command") {
    HeuristicOracle o;
    const std::string cmd = "save Alice, 2122000000 to contact";
    AgentContext ctx;
    ctx.command = cmd;
    ctx.understanding = heuristic_understanding(cmd, {});
    CHECK(o.text_parameter(ctx, "Name") == "Alice");
    CHECK(o.text_parameter(ctx, "Phone") == "2122000000");
    AgentContext bare;
    bare.command = "turn off wifi";
    bare.understanding = heuristic_understanding(bare.command, {});
    CHECK(o.text_parameter(bare, "Search") == "");
}

TEST_CASE("completeness looks for the cue") {
    HeuristicOracle o;
    const auto app = fixture("contacts.json");
    const auto task = app->find_task("import_contacts");
    o.set_completion_cue(task->resolved_cue());
    auto s = reset(app, task->parameters);
    const auto start = serialize_page(current_page(s));
    CHECK_FALSE(o.completeness_verdict(context_for(task->command, s), start, {}));
    s = click(click(click(s, "Fix & Manage"), "Import from file"), "contacts.vcf");
    CHECK(o.completeness_verdict(context_for(task->command, s), start, {}));
    // Undoing past the completing click hides the cue again.
    const auto [back, undo] = undo_operation(s, s.journal.back().op);
    CHECK_FALSE(o.completeness_verdict(context_for(task->command, back), start, {}));
}

TEST_CASE("correctness blames dead ends and tolerates repeated penalties") {
    HeuristicOracle o;
    const auto app = fixture("contacts.json");
    const std::string cmd = "import contacts from contacts.vcf";
    const auto u = heuristic_understanding(cmd, {});
    const auto home = reset(app);
    const auto pre = serialize_page(current_page(home));
    const auto add = *find_operation(home, ActionKind::click, "Add");
    const auto on_add = apply_operation(home, add);
    const auto wrong = o.correctness_verdict(context_for(cmd, on_add, u), pre, add, 0.0, {});
    CHECK_FALSE(wrong.correct);
    // Fix & Manage scores no better than the Add page itself, so the step
    // gets the milder of the two nonzero penalties.
    CHECK(wrong.penalty == 4);

    const auto fm = *find_operation(home, ActionKind::click, "Fix & Manage");
    const auto right = o.correctness_verdict(context_for(cmd, apply_operation(home, fm), u), pre, fm, 0.0, {});
    CHECK(right.correct);

    CHECK(o.correctness_verdict(context_for(cmd, on_add, u), pre, add, 9.0, {}).correct);
}

TEST_CASE("lessons name the wrong step") {
    HeuristicOracle o;
    const auto app = fixture("contacts.json");
    const auto home = reset(app);
    const auto add = *find_operation(home, ActionKind::click, "Add");
    LessonRequest r;
    r.intent = "import contacts from file";
    r.erroneous_op = add;
    r.erroneous_step = describe(add);
    r.ground_truth_ops = {Operation{ActionKind::click, "fix_manage", std::nullopt, "Fix & Manage"}};
    r.erroneous_dest_page = serialize_page(current_page(apply_operation(home, add)));
    const auto env = o.summarize_lesson(r);
    CHECK(env.category == LessonCategory::environmental);
    CHECK(env.text.find("'Add'") != std::string::npos);
    CHECK(env.text.find("import") != std::string::npos);

    LessonRequest early;
    early.intent = "add contact";
    early.erroneous_op = Operation{ActionKind::click, "save", std::nullopt, "Save"};
    early.erroneous_step = describe(early.erroneous_op);
    early.ground_truth_ops = {Operation{ActionKind::text_input, "name", "Alice", "Name"}, early.erroneous_op};
    const auto exec = o.summarize_lesson(early);
    CHECK(exec.category == LessonCategory::execution);
    CHECK(exec.text.find("last") != std::string::npos);
}

TEST_CASE("strict parsers") {
    CHECK(parse_likert("{\"score\": 5}") == 5);
    CHECK(parse_likert("```json\n{\"score\": 12}\n```") == 7);
    CHECK(parse_likert("{\"score\": 0}") == 1);
    CHECK(parse_likert("{\"score\": 4.0}") == 4);
    CHECK_THROWS_AS(parse_likert("{\"score\": 4.5}"), OracleFormatError);
    CHECK_THROWS_AS(parse_likert("no json here"), OracleFormatError);
    CHECK_THROWS_AS(parse_likert("{\"rating\": 3}"), OracleFormatError);

    const auto u = parse_understanding(R"({"intent": "x", "parameters": {"b": "1", "a": "2"}})");
    CHECK(u.parameter_names() == std::vector<std::string>{"b", "a"});
    CHECK_THROWS_AS(parse_understanding(R"({"intent": "", "parameters": {}})"), OracleFormatError);
    CHECK_THROWS_AS(parse_understanding(R"({"intent": "x", "parameters": {"a": 1}})"), OracleFormatError);

    CHECK(parse_text_parameter(R"({"text": "Alice"})") == "Alice");
    CHECK_THROWS_AS(parse_text_parameter(R"({"text": 5})"), OracleFormatError);
    CHECK(parse_completeness(R"({"completed": true})"));
    CHECK_THROWS_AS(parse_completeness(R"({"completed": "yes"})"), OracleFormatError);

    CHECK(parse_correctness(R"({"correct": true})") == CorrectnessResult{true, 0});
    CHECK(parse_correctness(R"({"correct": false, "penalty": 6})") == CorrectnessResult{false, 6});
    CHECK(parse_correctness(R"({"correct": false, "penalty": 40})") == CorrectnessResult{false, 9});
    CHECK_THROWS_AS(parse_correctness(R"({"correct": false})"), OracleFormatError);

    CHECK(parse_lesson(R"({"category": "execution", "lesson": "x"})").category == LessonCategory::execution);
    CHECK_THROWS_AS(parse_lesson(R"({"category": "other", "lesson": "x"})"), OracleFormatError);
    CHECK_THROWS_AS(parse_lesson(R"({"category": "execution", "lesson": ""})"), OracleFormatError);
}

TEST_CASE("unusable answers fall back conservatively") {
    struct Garbage : Oracle {
        Embedding embed(std::string_view) override { return Embedding{{1.0}}; }
        std::string answer(const Query&) override { return "I am not sure"; }
    } g;
    AgentContext ctx;
    ctx.command = "x";
    CHECK(g.likert_score(ctx, CandidateInfo{}, {}) == 1);
    CHECK(g.text_parameter(ctx, "Name").empty());
    CHECK_FALSE(g.completeness_verdict(ctx, "", {}));
}

TEST_CASE("prompts carry the sections for their kind, in order") {
    AgentContext ctx;
    ctx.command = "import contacts from contacts.vcf";
    ctx.current_page_text = "<container id=\"r\"></container>\n";
    for (auto kind : {QueryKind::understand, QueryKind::likert, QueryKind::text_parameter, QueryKind::completeness,
                      QueryKind::correctness, QueryKind::lesson}) {
        const auto prompt = assemble_prompt(kind, {}, ctx, {});
        std::size_t at = 0;
        for (const auto& header : prompt_sections(kind)) {
            const auto found = prompt.find("### " + header + "\n", at);
            CHECK_MESSAGE(found != std::string::npos, header);
            at = found;
        }
        CHECK(assemble_prompt(kind, {}, ctx, {}) == prompt);
        CHECK(parse_query_kind(query_kind_name(kind)) == kind);
    }
    CHECK(prompt_sections(QueryKind::understand) ==
          std::vector<std::string>{"Purpose", "Task knowledge", "Context", "Output template"});
    const auto completeness = prompt_sections(QueryKind::completeness);
    CHECK(std::find(completeness.begin(), completeness.end(), "GUI before last operation") != completeness.end());
    CHECK(assemble_prompt(QueryKind::understand, {}, ctx, {}).find("### Task knowledge\nnone") != std::string::npos);
    CHECK(prompt_digest("a") != prompt_digest("b"));
    CHECK(prompt_digest("a") == prompt_digest("a"));
}

TEST_CASE("the heuristic oracle is deterministic") {
    const auto app = fixture("contacts.json");
    const std::string cmd = "import contacts from contacts.vcf";
    const auto s = reset(app);
    const auto ctx = context_for(cmd, s, heuristic_understanding(cmd, {}));
    HeuristicOracle a, b;
    for (const auto& label : {"Add", "Fix & Manage"}) {
        CHECK(a.likert_score(ctx, candidate(s, label), {}) == b.likert_score(ctx, candidate(s, label), {}));
    }
    CHECK(a.embed(cmd) == b.embed(cmd));
}
