#pragma once

// Helpers shared by the unit tests and the acceptance runner: fixture
// loading, brute-force reference answers and random generators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "explearn/agent.hpp"
#include "explearn/environment.hpp"
#include "explearn/experience.hpp"
#include "explearn/harness.hpp"
#include "explearn/heuristic_oracle.hpp"
#include "explearn/metrics.hpp"

namespace testsupport {

using namespace explearn;

inline std::shared_ptr<const AppDefinition> fixture(const std::string& name) {
    return std::make_shared<const AppDefinition>(load_app_file(resolve_fixture(name)));
}

inline const std::vector<std::string>& fixture_files() {
    static const std::vector<std::string> files{"contacts.json", "contacts_legacy.json", "settings.json", "clock.json",
                                                "maze.json"};
    return files;
}

/// Distance in ulps between two finite doubles of the same sign.
inline std::uint64_t ulp_distance(double a, double b) {
    if (a == b) {
        return 0;
    }
    std::uint64_t n = 0;
    double x = std::min(a, b);
    const double hi = std::max(a, b);
    while (x < hi && n < 1000) {
        x = std::nextafter(x, hi);
        ++n;
    }
    return n;
}

// ---- metrics reference -------------------------------------------------------

/// Tries every subset of executed positions.
inline std::size_t brute_correct_steps(const std::vector<StepKey>& golden, const std::vector<StepKey>& executed,
                                       bool completed) {
    if (completed) {
        return golden.size();
    }
    std::size_t best = 0;
    const std::size_t n = executed.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<StepKey> picked;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                picked.push_back(executed[i]);
            }
        }
        if (picked.size() > golden.size() || picked.size() <= best) {
            continue;
        }
        if (std::equal(picked.begin(), picked.end(), golden.begin())) {
            best = picked.size();
        }
    }
    return best;
}

inline StepKey random_step(std::mt19937_64& rng) {
    static const std::vector<std::string> texts{"Add", "Save", "Name", "Back"};
    static const std::vector<ActionKind> actions{ActionKind::click, ActionKind::text_input, ActionKind::scroll_forward};
    StepKey k;
    k.action = actions[rng() % actions.size()];
    k.text = texts[rng() % texts.size()];
    if (k.action == ActionKind::text_input) {
        k.parameter = (rng() % 2) ? "alice" : "bob";
    }
    return k;
}

// ---- experience graphs -------------------------------------------------------

struct GraphCase {
    ExperienceGraph graph;
    std::set<std::string> required;
};

inline ExperienceEdge edge(std::uint64_t from, std::uint64_t to, std::string label, std::set<std::string> params = {}) {
    ExperienceEdge e;
    e.source_fp = PageFingerprint{from};
    e.dest_fp = PageFingerprint{to};
    e.op = Operation{ActionKind::click, label, std::nullopt, label};
    e.kind = EdgeKind::forward;
    e.params_used = std::move(params);
    return e;
}

inline ExperienceEdge undo_edge(std::uint64_t from, std::uint64_t to, std::size_t reverts) {
    ExperienceEdge e;
    e.source_fp = PageFingerprint{from};
    e.dest_fp = PageFingerprint{to};
    e.op = Operation{ActionKind::navigate_up, std::nullopt, std::nullopt, ""};
    e.kind = EdgeKind::undo;
    e.reverts = reverts;
    return e;
}

/// The contacts import run: Add (wrong), back, Fix & Manage, Import from
/// file, contacts.vcf.
inline GraphCase import_walkthrough_graph() {
    GraphCase c;
    auto& g = c.graph;
    for (std::uint64_t n = 1; n <= 5; ++n) {
        g.add_node(PageFingerprint{n}, "page " + std::to_string(n));
    }
    g.set_start(PageFingerprint{1});
    g.add_edge(edge(1, 2, "Add"));
    g.add_edge(undo_edge(2, 1, 0));
    g.add_edge(edge(1, 3, "Fix & Manage"));
    g.add_edge(edge(3, 4, "Import from file"));
    g.add_edge(edge(4, 5, "contacts.vcf", {"file name"}));
    g.set_endpoint(PageFingerprint{5});
    c.required = {"file name"};
    return c;
}

/// An exploration-shaped random graph: forward moves to new or old pages,
/// some undone, plus the odd stray edge.
inline GraphCase random_graph(std::mt19937_64& rng) {
    static const std::vector<std::string> names{"a", "b", "c"};
    GraphCase c;
    auto& g = c.graph;
    const std::size_t nodes = 2 + rng() % 6;
    const std::size_t edges = 1 + rng() % 12;
    for (std::uint64_t n = 1; n <= nodes; ++n) {
        g.add_node(PageFingerprint{n}, "p" + std::to_string(n));
    }
    g.set_start(PageFingerprint{1});
    std::uint64_t at = 1;
    std::vector<std::pair<std::size_t, std::uint64_t>> undoable;  // edge index, source
    while (g.edges().size() < edges) {
        if (!undoable.empty() && rng() % 4 == 0) {
            const auto [index, source] = undoable.back();
            undoable.pop_back();
            g.add_edge(undo_edge(at, source, index));
            at = source;
            continue;
        }
        const std::uint64_t from = rng() % 5 == 0 ? 1 + rng() % nodes : at;
        const std::uint64_t to = 1 + rng() % nodes;
        std::set<std::string> params;
        for (const auto& p : names) {
            if (rng() % 4 == 0) {
                params.insert(p);
            }
        }
        const auto index = g.add_edge(edge(from, to, "op" + std::to_string(g.edges().size() + 1), params));
        if (from == at) {
            undoable.emplace_back(index, from);
        }
        at = to;
    }
    g.set_endpoint(PageFingerprint{1 + rng() % nodes});
    for (const auto& p : names) {
        if (rng() % 3 == 0) {
            c.required.insert(p);
        }
    }
    return c;
}

/// Every trail (no forward edge twice) from the start, compared by length
/// then by step indices.
inline std::optional<std::vector<std::size_t>> brute_shortest_path(const GraphCase& c) {
    std::vector<const ExperienceEdge*> fwd;
    for (const auto& e : c.graph.edges()) {
        if (e.kind == EdgeKind::forward) {
            fwd.push_back(&e);
        }
    }
    std::optional<std::vector<std::size_t>> best;
    std::vector<std::size_t> trail;
    std::vector<bool> used(fwd.size(), false);
    auto consider = [&] {
        if (trail.empty()) {
            return;
        }
        std::set<std::string> have;
        for (auto i : trail) {
            have.insert(fwd[i]->params_used.begin(), fwd[i]->params_used.end());
        }
        for (const auto& r : c.required) {
            if (!have.count(r)) {
                return;
            }
        }
        std::vector<std::size_t> steps;
        for (auto i : trail) {
            steps.push_back(fwd[i]->step_index);
        }
        if (!best || steps.size() < best->size() || (steps.size() == best->size() && steps < *best)) {
            best = steps;
        }
    };
    auto walk = [&](auto&& self, PageFingerprint at) -> void {
        if (at == *c.graph.endpoint_fp()) {
            consider();
        }
        for (std::size_t i = 0; i < fwd.size(); ++i) {
            if (!used[i] && fwd[i]->source_fp == at) {
                used[i] = true;
                trail.push_back(i);
                self(self, fwd[i]->dest_fp);
                trail.pop_back();
                used[i] = false;
            }
        }
    };
    walk(walk, c.graph.start_fp());
    return best;
}

// ---- environment states ------------------------------------------------------

/// Text typed into fields during enumeration: task values plus one stranger.
inline std::vector<std::string> typing_vocabulary(const AppDefinition& app) {
    std::set<std::string> values{"zq"};
    for (const auto& t : app.tasks) {
        for (const auto& [k, v] : t.parameters) {
            values.insert(v);
        }
    }
    return {values.begin(), values.end()};
}

inline std::vector<Operation> forward_moves(const EnvState& s, const std::vector<std::string>& vocabulary) {
    std::vector<Operation> out;
    for (auto op : enumerate_operations(s)) {
        if (op.action == ActionKind::text_input) {
            for (const auto& v : vocabulary) {
                op.parameter = v;
                out.push_back(op);
            }
        } else {
            out.push_back(op);
        }
    }
    return out;
}

/// States reachable from reset within `depth` forward operations, one per
/// distinct (stack, variables, fields, offsets).
inline std::vector<EnvState> reachable_states(const std::shared_ptr<const AppDefinition>& app,
                                              const std::map<std::string, std::string>& params, std::size_t depth) {
    using Key = std::tuple<std::vector<std::string>, std::map<std::string, std::string>,
                           std::map<FieldKey, std::string>, std::map<FieldKey, std::size_t>>;
    const auto vocabulary = typing_vocabulary(*app);
    std::set<Key> seen;
    std::vector<EnvState> out;
    std::deque<std::pair<EnvState, std::size_t>> queue;
    queue.emplace_back(reset(app, params), 0);
    while (!queue.empty()) {
        auto [s, d] = std::move(queue.front());
        queue.pop_front();
        if (!seen.insert(Key{s.back_stack, s.variables, s.field_text, s.scroll_offset}).second) {
            continue;
        }
        out.push_back(s);
        if (d == depth) {
            continue;
        }
        for (const auto& op : forward_moves(s, vocabulary)) {
            queue.emplace_back(apply_operation(s, op), d + 1);
        }
    }
    return out;
}

}  // namespace testsupport
