#include "explearn/heuristic_oracle.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

#include <nlohmann/json.hpp>

#include "explearn/scoring.hpp"
#include "explearn/text.hpp"

namespace explearn {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 8> kNegations{
    "not", "only", "cannot", "never", "avoid", "don't", "doesn't", "no ",
};

struct Entity {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string kind;  // parameter name
    std::string word;  // what replaces it in the intent
};

bool is_file_like(std::string_view s) {
    static const std::regex re(R"(^[A-Za-z0-9_\-]+\.[A-Za-z0-9]{2,4}$)");
    return std::regex_match(s.begin(), s.end(), re);
}

std::size_t digit_count(std::string_view s) {
    std::size_t digits = 0;
    for (unsigned char c : s) {
        if (std::isdigit(c)) {
            ++digits;
        } else if (c != '+' && c != '-') {
            return 0;
        }
    }
    return digits;
}

std::vector<Entity> extract_entities(std::string_view command) {
    std::vector<Entity> entities;
    // Quoted text first; its span is off limits to the word rules.
    static const std::regex quoted(R"("([^"]+)\"|'([^']+)')");
    std::string cmd(command);
    for (auto it = std::sregex_iterator(cmd.begin(), cmd.end(), quoted); it != std::sregex_iterator(); ++it) {
        const int group = (*it)[1].matched ? 1 : 2;
        entities.push_back({static_cast<std::size_t>(it->position(group)),
                            static_cast<std::size_t>(it->position(group) + it->length(group)), "text", "text"});
    }
    const auto inside_quote = [&](std::size_t pos) {
        return std::any_of(entities.begin(), entities.end(),
                           [&](const Entity& e) { return pos + 1 >= e.begin && pos <= e.end; });
    };

    struct Word {
        std::size_t begin;
        std::size_t end;
        std::string core;
    };
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < cmd.size()) {
        while (i < cmd.size() && std::isspace(static_cast<unsigned char>(cmd[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < cmd.size() && !std::isspace(static_cast<unsigned char>(cmd[i]))) {
            ++i;
        }
        if (start == i) {
            continue;
        }
        const auto raw = std::string_view(cmd).substr(start, i - start);
        const auto core = text::trim_punctuation(raw);
        if (core.empty()) {
            continue;
        }
        const auto offset = raw.find(core);
        words.push_back({start + offset, start + offset + core.size(), core});
    }

    std::vector<Entity> found;
    for (std::size_t w = 0; w < words.size(); ++w) {
        const auto& word = words[w];
        if (inside_quote(word.begin)) {
            continue;
        }
        if (is_file_like(word.core)) {
            found.push_back({word.begin, word.end, "file name", "file"});
        } else if (const auto digits = digit_count(word.core); digits > 0) {
            if (digits >= 7) {
                found.push_back({word.begin, word.end, "phone number", "phone number"});
            } else {
                found.push_back({word.begin, word.end, "number", "number"});
            }
        } else if (w > 0 && std::isupper(static_cast<unsigned char>(word.core[0]))) {
            // Consecutive capitalized words form one name, unless punctuation
            // separates them ("Alice, Bob").
            if (!found.empty() && found.back().kind == "name" && w > 0 && found.back().end == words[w - 1].end &&
                words[w - 1].end + 1 == word.begin) {
                found.back().end = word.end;
            } else {
                found.push_back({word.begin, word.end, "name", "name"});
            }
        }
    }
    entities.insert(entities.end(), found.begin(), found.end());
    std::sort(entities.begin(), entities.end(), [](const Entity& a, const Entity& b) { return a.begin < b.begin; });
    return entities;
}

std::string normalize_intent(std::string_view s) {
    std::string out;
    bool space = false;
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            if (space && !out.empty()) {
                out += ' ';
            }
            space = false;
            out += static_cast<char>(std::tolower(c));
        } else if (std::isspace(c)) {
            space = true;
        } else if (c == '-' || c == '&') {
            if (space && !out.empty()) {
                out += ' ';
            }
            space = false;
            out += static_cast<char>(c);
        }
    }
    return out;
}

std::string regex_escape(std::string_view s) {
    static const std::string special = R"(\^$.|?*+()[]{}/)";
    std::string out;
    for (char c : s) {
        if (special.find(c) != std::string::npos) {
            out += '\\';
        }
        out += c;
    }
    return out;
}

std::optional<CommandUnderstanding> align_with(std::string_view command, const TaskExample& example) {
    struct Slot {
        std::size_t pos;
        std::size_t len;
        std::string name;
    };
    std::vector<Slot> slots;
    for (const auto& name : example.parameter_names) {
        const auto it = example.parameter_values.find(name);
        if (it == example.parameter_values.end() || it->second.empty()) {
            continue;
        }
        const auto pos = example.command.find(it->second);
        if (pos == std::string::npos) {
            continue;
        }
        slots.push_back({pos, it->second.size(), name});
    }
    std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.pos < b.pos; });
    std::string pattern;
    std::size_t cursor = 0;
    std::vector<std::string> names;
    for (const auto& s : slots) {
        if (s.pos < cursor) {
            continue;  // overlapping values
        }
        pattern += regex_escape(std::string_view(example.command).substr(cursor, s.pos - cursor));
        pattern += "(.+?)";
        names.push_back(s.name);
        cursor = s.pos + s.len;
    }
    pattern += regex_escape(std::string_view(example.command).substr(cursor));
    const std::regex re(pattern, std::regex::icase);
    std::smatch m;
    const std::string cmd(command);
    if (!std::regex_match(cmd, m, re)) {
        return std::nullopt;
    }
    CommandUnderstanding u;
    u.intent = example.intent;
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto value = text::trim_punctuation(m[static_cast<int>(i + 1)].str());
        if (value.empty()) {
            return std::nullopt;
        }
        u.parameters.emplace_back(names[i], value);
    }
    return u;
}

double best_similarity(Embedder& embedder, const std::vector<std::string>& lhs, const std::vector<std::string>& rhs) {
    double best = 0.0;
    for (const auto& a : lhs) {
        const auto ea = embedder.embed(a);
        for (const auto& b : rhs) {
            best = std::max(best, similarity(ea, embedder.embed(b)));
        }
    }
    return best;
}

std::vector<std::string> query_strings(const AgentContext& context) {
    std::vector<std::string> q{context.command};
    if (context.understanding) {
        q.push_back(context.understanding->intent);
        for (const auto& [name, value] : context.understanding->parameters) {
            q.push_back(value);
        }
    }
    return q;
}

std::vector<std::string> candidate_strings(const GuiElement& e) {
    std::vector<std::string> c{e.text + " " + e.description};
    c.insert(c.end(), e.targets.begin(), e.targets.end());
    return c;
}

struct PageScan {
    double best_relevance = 0.0;
    double best_basic = 0.0;
    bool any_targets = false;
};

/// Relevance of the page's interactive elements, skipping `skip_label`.
PageScan scan_page(Embedder& embedder, const GuiPage& page, const AgentContext& context,
                   const std::string* skip_label, std::optional<ActionKind> skip_action = std::nullopt) {
    PageScan scan;
    const auto queries = query_strings(context);
    std::string tb_query = context.command;
    if (context.understanding) {
        tb_query += " " + context.understanding->intent;
    }
    const auto tb_embedding = embedder.embed(tb_query);
    for_each_element(page, [&](const GuiElement& e, const GuiElement*) {
        if (!e.targets.empty()) {
            scan.any_targets = true;
        }
        if (!e.interactive()) {
            return;
        }
        if (skip_label != nullptr && e.label() == *skip_label) {
            if (!skip_action || (*skip_action == ActionKind::click && e.clickable) ||
                (*skip_action == ActionKind::text_input && e.editable) ||
                (*skip_action == ActionKind::scroll_forward && e.scrollable)) {
                return;
            }
        }
        const double rel = best_similarity(embedder, candidate_strings(e), queries);
        scan.best_relevance = std::max(scan.best_relevance, rel);
        const double tb =
            tiebreak_from_cosine(similarity(embedder.embed(surrounding_description(page, e.id)), tb_embedding));
        scan.best_basic = std::max(scan.best_basic, likert_from_similarity(rel) + tb);
    });
    return scan;
}

bool same_page_content(const std::string& a, const std::string& b) {
    try {
        return serialize_page(strip_annotations(parse_page_text(a))) ==
               serialize_page(strip_annotations(parse_page_text(b)));
    } catch (const PageParseError&) {
        return a == b;
    }
}

std::string verb_phrase(const Operation& op) {
    switch (op.action) {
    case ActionKind::text_input:
        return "Typing into '" + op.label + "'";
    case ActionKind::scroll_forward:
        return "Scrolling '" + op.label + "'";
    default:
        return "Clicking '" + op.label + "'";
    }
}

}  // namespace

Embedding HashedEmbedder::embed(std::string_view s) {
    Embedding e;
    e.values.assign(kDimension, 0.0);
    auto tokens = text::tokenize(s);
    if (tokens.empty()) {
        // Text made only of stop words or symbols still gets a vector.
        const auto trimmed = text::to_lower(text::trim_punctuation(s));
        if (trimmed.empty()) {
            return e;
        }
        tokens.push_back(trimmed);
    }
    for (const auto& t : tokens) {
        e.values[text::fnv1a64(t) % kDimension] += 1.0;
    }
    return e;
}

int likert_from_similarity(double s) {
    if (s >= 0.8) return 7;
    if (s >= 0.6) return 6;
    if (s >= 0.45) return 5;
    if (s >= 0.3) return 4;
    if (s >= 0.15) return 3;
    if (s > 0.0) return 2;
    return 1;
}

bool lesson_rules_out(std::string_view lesson, std::string_view label) {
    if (label.empty()) {
        return false;
    }
    const auto lower = text::to_lower(lesson);
    if (lower.find("'" + text::to_lower(label) + "'") == std::string::npos) {
        return false;
    }
    for (const auto marker : kNegations) {
        const auto pos = lower.find(marker);
        if (pos == std::string::npos) {
            continue;
        }
        // Whole-word match for the bare words.
        const bool left_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(lower[pos - 1]));
        const auto after = pos + marker.size();
        const bool right_ok = marker.back() == ' ' || after >= lower.size() ||
                              !std::isalpha(static_cast<unsigned char>(lower[after]));
        if (left_ok && right_ok) {
            return true;
        }
    }
    return false;
}

CommandUnderstanding heuristic_understanding(std::string_view command, const std::vector<TaskExample>& examples) {
    for (const auto& example : examples) {
        if (auto u = align_with(command, example)) {
            return *u;
        }
    }
    CommandUnderstanding u;
    const auto entities = extract_entities(command);
    std::string intent;
    std::size_t cursor = 0;
    std::map<std::string, int> seen;
    for (const auto& e : entities) {
        intent += command.substr(cursor, e.begin - cursor);
        intent += e.word;
        cursor = e.end;
        const int n = ++seen[e.kind];
        const auto name = n == 1 ? e.kind : e.kind + " " + std::to_string(n);
        u.parameters.emplace_back(name, std::string(command.substr(e.begin, e.end - e.begin)));
    }
    intent += command.substr(cursor);
    u.intent = normalize_intent(intent);
    if (u.intent.empty()) {
        u.intent = normalize_intent(command);
    }
    return u;
}

std::string HeuristicOracle::answer(const Query& q) {
    switch (q.kind) {
    case QueryKind::understand: {
        const auto u = heuristic_understanding(q.context->command, *q.examples);
        nlohmann::ordered_json j;
        j["intent"] = u.intent;
        j["parameters"] = nlohmann::ordered_json::object();
        for (const auto& [name, value] : u.parameters) {
            j["parameters"][name] = value;
        }
        return j.dump();
    }
    case QueryKind::likert:
        return answer_likert(q);
    case QueryKind::text_parameter:
        return answer_text_parameter(q);
    case QueryKind::completeness:
        return answer_completeness(q);
    case QueryKind::correctness:
        return answer_correctness(q);
    case QueryKind::lesson:
        return answer_lesson(q);
    }
    return "{}";
}

std::string HeuristicOracle::answer_likert(const Query& q) {
    const auto& c = *q.candidate;
    const auto queries = query_strings(*q.context);
    int score = likert_from_similarity(best_similarity(embedder_, {c.element_text + " " + c.element_desc}, queries));
    if (!c.targets.empty()) {
        // What lies behind an element is weaker evidence than the element itself.
        score = std::max(score, std::min(kLikertMax - 1,
                                         likert_from_similarity(best_similarity(embedder_, c.targets, queries))));
    }
    if (c.op.action == ActionKind::text_input && !c.element_text.empty() && q.context->understanding) {
        // A box already holding one of the command's values has nothing left to do.
        for (const auto& [name, value] : q.context->understanding->parameters) {
            if (value == c.element_text) {
                score = kLikertMin;
            }
        }
    }
    if (q.knowledge != nullptr) {
        for (const auto& lesson : *q.knowledge) {
            if (lesson_rules_out(lesson, c.op.label)) {
                score = std::min(score, 2);
            }
        }
    }
    return json{{"score", score}}.dump();
}

std::string HeuristicOracle::answer_text_parameter(const Query& q) {
    std::string best_value;
    double best = 0.0;
    if (q.context->understanding) {
        const auto box = embedder_.embed(q.textbox);
        for (const auto& [name, value] : q.context->understanding->parameters) {
            const double s = similarity(embedder_.embed(name), box);
            if (s > best) {
                best = s;
                best_value = value;
            }
        }
    }
    return json{{"text", best_value}}.dump();
}

std::string HeuristicOracle::answer_completeness(const Query& q) {
    bool done = false;
    if (!cue_.empty()) {
        try {
            const auto page = parse_page_text(q.context->current_page_text);
            for_each_element(page, [&](const GuiElement& e, const GuiElement*) {
                if (text::icontains(e.text + " " + e.description, cue_)) {
                    done = true;
                }
            });
        } catch (const PageParseError&) {
            done = text::icontains(q.context->current_page_text, cue_);
        }
    }
    return json{{"completed", done}}.dump();
}

std::string HeuristicOracle::answer_correctness(const Query& q) {
    const auto verdict = [](bool correct, int penalty) {
        return correct ? json{{"correct", true}, {"penalty", 0}}.dump()
                       : json{{"correct", false}, {"penalty", penalty}}.dump();
    };
    if (q.accumulated_penalty >= tolerance_floor_) {
        return verdict(true, 0);
    }
    const auto& context = *q.context;
    const auto& last = *q.last_op;
    if (same_page_content(context.current_page_text, q.pre_op_page)) {
        // Nothing visible changed.
    } else {
        const auto page = parse_page_text(context.current_page_text);
        const auto scan = scan_page(embedder_, page, context, &last.label, last.action);
        if (scan.any_targets || scan.best_relevance >= relevance_floor_) {
            return verdict(true, 0);
        }
    }
    // Incorrect; decide how much of the blame is this step's.
    const auto before = parse_page_text(q.pre_op_page);
    const auto pre_scan = scan_page(embedder_, before, context, nullptr);
    if (pre_scan.best_relevance < relevance_floor_ && context.executed.size() > 1) {
        return verdict(false, 0);
    }
    const auto after = parse_page_text(context.current_page_text);
    const auto after_scan = scan_page(embedder_, after, context, nullptr);
    const auto alt_scan = scan_page(embedder_, before, context, &last.label, last.action);
    return verdict(false, alt_scan.best_basic > after_scan.best_basic ? 9 : 4);
}

std::string HeuristicOracle::answer_lesson(const Query& q) {
    const auto& r = *q.lesson;
    const bool in_truth = std::any_of(r.ground_truth_ops.begin(), r.ground_truth_ops.end(), [&](const Operation& op) {
        return op.action == r.erroneous_op.action && op.label == r.erroneous_op.label;
    });
    if (in_truth) {
        return json{{"category", "execution"},
                    {"lesson", "Pay attention to the order of steps: actions that may finalize a task (e.g., "
                               "clicking '" +
                                   r.erroneous_op.label + "') should be performed last"}}
            .dump();
    }
    std::vector<std::string> offered;
    if (!r.erroneous_dest_page.empty()) {
        try {
            const auto page = parse_page_text(r.erroneous_dest_page);
            for_each_element(page, [&](const GuiElement& e, const GuiElement*) {
                if (e.interactive() && !e.label().empty() && offered.size() < 5) {
                    offered.push_back(e.label());
                }
            });
        } catch (const PageParseError&) {
        }
    }
    std::string lesson = verb_phrase(r.erroneous_op);
    if (!offered.empty()) {
        lesson += " only leads to a page offering " + text::join(offered, ", ") + ";";
    }
    lesson += " it does not help to " + r.intent;
    return json{{"category", "environmental"}, {"lesson", lesson}}.dump();
}

}  // namespace explearn
