#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "support.hpp"

using namespace explearn;
using testsupport::fixture;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int n = 0;
        path = std::filesystem::temp_directory_path() /
               ("explearn-kb-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

KnowledgeBase learned(const std::string& app_file, const std::string& task_id) {
    const auto app = fixture(app_file);
    KnowledgeBase kb;
    HeuristicOracle oracle;
    RunOptions options;
    options.policy = ConfirmationPolicy::confirm;
    options.task_id = task_id;
    run_task({app, app->find_task(task_id)}, kb, oracle, AgentConfig{}, options);
    return kb;
}

EnvLesson lesson(HashedEmbedder& h, const std::string& app, const std::string& text) {
    return EnvLesson{app, text, h.embed(text), {}};
}

}  // namespace

TEST_CASE("triplets are deduplicated") {
    KnowledgeBase kb;
    EnvTriplet t;
    t.app_id = "contacts";
    t.source_fp = PageFingerprint{4};
    t.dest_fp = PageFingerprint{3};
    t.op = Operation{ActionKind::click, "file_0", std::nullopt, "contacts.vcf"};
    CHECK(kb.record_triplet(t));
    CHECK(kb.triplets().size() == 1);
    CHECK_FALSE(kb.record_triplet(t));
    CHECK(kb.triplets().size() == 1);
    t.app_id = "other";
    CHECK(kb.record_triplet(t));
}

TEST_CASE("the import run records the file click as a triplet back to Fix & Manage") {
    const auto kb = learned("contacts.json", "import_contacts");
    bool found = false;
    for (const auto& t : kb.triplets()) {
        if (t.op.label == "contacts.vcf" && t.op.action == ActionKind::click && !t.op.parameter) {
            found = true;
            CHECK(t.source_page_text.find("Choose a file") != std::string::npos);
            CHECK(t.dest_page_text.find("Import from file") != std::string::npos);
        }
    }
    CHECK(found);
}

TEST_CASE("targets reveal what lies behind a button") {
    const auto kb = learned("settings.json", "sim_lock");
    const auto app = fixture("settings.json");
    HashedEmbedder h;
    const auto home = current_page(reset(app));
    const auto targets = kb.reachable_relevant_elements(home, h.embed("turn on app pinning"), 0.55, h);
    const GuiElement* security = nullptr;
    for_each_element(home, [&](const GuiElement& e, const GuiElement*) {
        if (e.text == "Security") {
            security = &e;
        }
    });
    REQUIRE(security != nullptr);
    REQUIRE(targets.count(security->id) == 1);
    bool pinning = false;
    for (const auto& t : targets.at(security->id)) {
        pinning = pinning || t.find("App pinning") != std::string::npos;
    }
    CHECK(pinning);

    CHECK(KnowledgeBase{}.reachable_relevant_elements(home, h.embed("turn on app pinning"), 0.55, h).empty());
    CHECK(kb.reachable_relevant_elements(home, h.embed("turn on app pinning"), 1.01, h).empty());

    HeuristicOracle oracle;
    const auto annotated = understand_gui(home, kb, "turn on app pinning", oracle, AgentConfig{});
    CHECK(fingerprint_page(annotated) == fingerprint_page(home));
    CHECK_FALSE(find_element(annotated, security->id)->targets.empty());
    auto off = AgentConfig{};
    off.enable_knowledge = false;
    CHECK(understand_gui(home, kb, "turn on app pinning", oracle, off) == home);
    CHECK(understand_gui(home, KnowledgeBase{}, "turn on app pinning", oracle, AgentConfig{}) == home);
}

TEST_CASE("lesson retrieval is thresholded, sorted and pure") {
    HashedEmbedder h;
    KnowledgeBase kb;
    CHECK(kb.relevant_lessons("contacts", h.embed("import contacts"), 0.5).empty());
    kb.add_env_lesson(lesson(h, "contacts",
                             "Clicking 'Add' only leads to a page offering Name, Phone, Save; it does not help to "
                             "import contacts from file"));
    kb.add_env_lesson(lesson(h, "contacts", "The Export button writes a file"));
    kb.add_env_lesson(lesson(h, "settings", "import contacts from file"));
    const auto ctx = h.embed("import contacts from contacts.vcf import contacts from file");
    const auto hits = kb.relevant_lessons("contacts", ctx, 0.3);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].find("'Add'") != std::string::npos);
    const auto all = kb.relevant_lessons("contacts", ctx, -1.0);
    CHECK(all.size() == 2);
    CHECK(similarity(h.embed(all[0]), ctx) >= similarity(h.embed(all[1]), ctx));
    CHECK(kb.relevant_lessons("contacts", ctx, -1.0) == all);
}

TEST_CASE("task examples by command similarity") {
    HashedEmbedder h;
    KnowledgeBase kb;
    const auto item = [&](const std::string& command) {
        TaskKnowledgeItem t;
        t.app_id = "contacts";
        t.intent_name = "import contacts from file";
        t.parameter_names = {"file name"};
        t.command = command;
        t.parameter_values = {{"file name", "contacts.vcf"}};
        t.embedding = h.embed(command);
        return t;
    };
    kb.add_task_item(item("import contacts from contacts.vcf"));
    kb.add_task_item(item("import my contacts"));
    const auto exact = kb.similar_task_examples("contacts", h.embed("import contacts from contacts.vcf"), 0.6);
    REQUIRE_FALSE(exact.empty());
    CHECK(exact[0].command == "import contacts from contacts.vcf");
    CHECK(similarity(exact[0].embedding, h.embed("import contacts from contacts.vcf")) == doctest::Approx(1.0));
    CHECK(kb.similar_task_examples("contacts", h.embed("turn on bluetooth"), 0.6).empty());
    const auto both = kb.similar_task_examples("contacts", h.embed("import contacts from contacts.vcf"), -1.0);
    REQUIRE(both.size() == 2);
    CHECK(both[0].command == "import contacts from contacts.vcf");
}

TEST_CASE("sequence templating and instantiation") {
    HashedEmbedder h;
    CommandUnderstanding u{"import contacts from file", {{"file name", "contacts.vcf"}}};
    const auto c = testsupport::import_walkthrough_graph();
    const auto path = shortest_correct_path(c.graph, c.required);
    const auto seq = templatize_sequence(path, u, "contacts", h);
    CHECK(seq.render() == "click 'Fix & Manage', click 'Import from file', click <file name>");
    const auto steps = instantiate_sequence(seq, {{"file name", "backup.vcf"}});
    REQUIRE(steps);
    CHECK(steps->back().element_text == "backup.vcf");
    CHECK_FALSE(instantiate_sequence(seq, {}).has_value());

    const auto plain = templatize_sequence(path, CommandUnderstanding{"x", {}}, "contacts", h);
    CHECK(plain.render() == "click 'Fix & Manage', click 'Import from file', click 'contacts.vcf'");

    // A value seen in two steps is templated in both.
    std::vector<ExperienceEdge> two{testsupport::edge(1, 2, "Tokyo"), testsupport::edge(2, 3, "Tokyo time")};
    ExperienceEdge typed = testsupport::edge(3, 4, "City name");
    typed.op.action = ActionKind::text_input;
    typed.op.parameter = "Tokyo";
    two.push_back(typed);
    const auto t2 = templatize_sequence(two, CommandUnderstanding{"add city", {{"name", "Tokyo"}}}, "clock", h);
    CHECK(t2.steps[0].element_text == "<name>");
    CHECK(t2.steps[1].element_text == "<name> time");
    CHECK(t2.steps[2].parameter == "<name>");
}

TEST_CASE("summaries for a clean run carry no lessons") {
    const auto kb = learned("settings.json", "bluetooth");
    CHECK(kb.exec_sequences().size() == 1);
    CHECK(kb.task_items().size() == 1);
    CHECK(kb.env_lessons().empty());
    CHECK(kb.exec_lessons().empty());
}

TEST_CASE("knowledge survives a save and load round trip") {
    auto kb = learned("contacts.json", "import_contacts");
    kb.merge(learned("settings.json", "sim_lock"));
    REQUIRE(kb.size() > 5);
    TempDir dir;
    kb.save(dir.path);
    CHECK(KnowledgeBase::load(dir.path) == kb);

    TempDir empty;
    KnowledgeBase{}.save(empty.path);
    CHECK(KnowledgeBase::load(empty.path).empty());

    // Drop the last record of the triplet store.
    const auto file = dir.path / "triplets.jsonl";
    std::ifstream in(file);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        lines.push_back(line);
    }
    in.close();
    std::ofstream out(file, std::ios::trunc);
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
        out << lines[i] << '\n';
    }
    out << lines.back().substr(0, lines.back().size() / 2) << '\n';
    out.close();
    try {
        KnowledgeBase::load(dir.path);
        FAIL("expected a load error");
    } catch (const KnowledgeLoadError& e) {
        CHECK(e.line() == lines.size());
        CHECK(e.file().find("triplets") != std::string::npos);
    }
}

TEST_CASE("merge appends without duplicates and advances the clock") {
    const auto a = learned("contacts.json", "import_contacts");
    KnowledgeBase kb;
    kb.merge(a);
    const auto size = kb.size();
    const auto clock = kb.clock();
    kb.merge(a);
    CHECK(kb.size() == size);
    CHECK(kb.clock() >= clock);
}
